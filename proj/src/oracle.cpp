#include "bp/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bp {
namespace oracle {

namespace {

struct SearchState {
    const Instance* inst;
    const Realization* real;
    const std::vector<std::vector<std::vector<int>>>* paths; // routing only
    std::vector<int> remaining;
    std::vector<int> accepted;
    std::vector<int> chosen_path;
    std::int64_t current = 0;
    std::int64_t best = -1;
    std::vector<int> best_accepted;
    std::vector<int> best_paths;
    std::vector<std::int64_t> suffix_value; // value still reachable from buyer i on
};

bool fits(const std::vector<int>& remaining, const std::vector<int>& goods) {
    for (int g : goods)
        if (remaining[g] < 1) return false;
    return true;
}

void consume(std::vector<int>& remaining, const std::vector<int>& goods, int delta) {
    for (int g : goods) remaining[g] += delta;
}

void search(SearchState& st, int buyer) {
    const int n = st.inst->num_buyers();
    if (buyer == n) {
        if (st.current > st.best) {
            st.best = st.current;
            st.best_accepted = st.accepted;
            st.best_paths = st.chosen_path;
        }
        return;
    }
    if (st.current + st.suffix_value[buyer] <= st.best) return; // bound

    Value v = st.real->values[buyer];
    if (v > 0) {
        if (st.paths) {
            const auto& options = (*st.paths)[buyer];
            for (std::size_t p = 0; p < options.size(); ++p) {
                if (!fits(st.remaining, options[p])) continue;
                consume(st.remaining, options[p], -1);
                st.accepted.push_back(buyer);
                st.chosen_path.push_back(static_cast<int>(p));
                st.current += v;
                search(st, buyer + 1);
                st.current -= v;
                st.chosen_path.pop_back();
                st.accepted.pop_back();
                consume(st.remaining, options[p], +1);
            }
        } else {
            const auto& bundle = st.inst->buyers[buyer].bundle;
            if (fits(st.remaining, bundle)) {
                consume(st.remaining, bundle, -1);
                st.accepted.push_back(buyer);
                st.current += v;
                search(st, buyer + 1);
                st.current -= v;
                st.accepted.pop_back();
                consume(st.remaining, bundle, +1);
            }
        }
    }
    search(st, buyer + 1); // reject
}

} // namespace

ExactWelfare offline_opt(const Instance& inst, const Realization& real,
                         std::size_t max_paths) {
    if (inst.num_buyers() > kOfflineOptBuyerLimit)
        throw SizeLimitError("offline_opt: limited to " +
                             std::to_string(kOfflineOptBuyerLimit) + " buyers");

    std::vector<std::vector<std::vector<int>>> paths;
    SearchState st;
    if (inst.kind == InstanceKind::GraphRouting) {
        paths.resize(inst.num_buyers());
        for (const auto& b : inst.buyers)
            paths[b.id] =
                enumerate_simple_paths(*inst.graph, b.source, b.target, max_paths);
        st.paths = &paths;
    } else {
        st.paths = nullptr;
    }
    st.inst = &inst;
    st.real = &real;
    st.remaining = inst.capacities;
    st.suffix_value.assign(inst.num_buyers() + 1, 0);
    for (int b = inst.num_buyers() - 1; b >= 0; --b)
        st.suffix_value[b] = st.suffix_value[b + 1] + real.values[b];
    st.best = -1;
    search(st, 0);

    ExactWelfare out;
    out.value = static_cast<double>(st.best);
    out.accepted = st.best_accepted;
    out.chosen_path = st.best_paths;

    // Re-verify the witness independently of the search.
    std::vector<int> check = inst.capacities;
    std::int64_t welfare = 0;
    for (std::size_t i = 0; i < out.accepted.size(); ++i) {
        int b = out.accepted[i];
        const auto& goods = st.paths ? (*st.paths)[b][out.chosen_path[i]]
                                     : inst.buyers[b].bundle;
        for (int g : goods) {
            if (--check[g] < 0) throw Error("offline_opt: witness infeasible");
        }
        welfare += real.values[b];
    }
    if (static_cast<double>(welfare) != out.value)
        throw Error("offline_opt: witness value mismatch");
    return out;
}

ExactWelfare expected_opt(const Instance& inst, std::size_t max_paths) {
    std::uint64_t combos = 1;
    std::vector<std::vector<std::pair<Value, double>>> supports;
    for (const auto& b : inst.buyers) {
        std::vector<std::pair<Value, double>> s;
        for (const auto& [v, p] : b.dist.pmf)
            if (p > 0.0) s.emplace_back(v, p);
        supports.push_back(std::move(s));
        combos *= supports.back().size();
        if (combos > kExpectedOptRealizationLimit)
            throw SizeLimitError("expected_opt: realization space exceeds " +
                                 std::to_string(kExpectedOptRealizationLimit));
    }

    ExactWelfare out;
    Realization real;
    real.values.assign(inst.num_buyers(), 0);
    std::vector<std::size_t> idx(inst.num_buyers(), 0);
    for (;;) {
        double prob = 1.0;
        for (int b = 0; b < inst.num_buyers(); ++b) {
            real.values[b] = supports[b][idx[b]].first;
            prob *= supports[b][idx[b]].second;
        }
        out.value += prob * offline_opt(inst, real, max_paths).value;

        int pos = inst.num_buyers() - 1;
        while (pos >= 0 && ++idx[pos] == supports[pos].size()) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

UtilityResult brute_force_utility(const SimContext& ctx, int buyer, Value value,
                                  const Menu& menu,
                                  const std::vector<int>& item_remaining,
                                  RunMode mode) {
    if (menu.size() > kUtilityEntryLimit)
        throw SizeLimitError("brute_force_utility: menu has more than " +
                             std::to_string(kUtilityEntryLimit) + " entries");
    const Instance& inst = *ctx.inst;
    const Buyer& b = inst.buyers[buyer];
    const bool routing = inst.kind == InstanceKind::GraphRouting;

    UtilityResult best; // the empty purchase: utility 0
    const std::size_t n = menu.size();
    std::vector<int> consumption(inst.num_items());
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double price = 0.0;
        bool ok = true;
        std::fill(consumption.begin(), consumption.end(), 0);
        std::vector<char> covered(inst.num_items(), 0);
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            const MenuEntry& e = menu[i];
            if (e.remaining < 1) ok = false;
            price += e.price;
            for (int g : e.goods) {
                ++consumption[g];
                covered[g] = 1;
            }
        }
        if (!ok) continue;
        if (mode == RunMode::ALG) {
            for (int g = 0; g < inst.num_items() && ok; ++g)
                if (consumption[g] > item_remaining[g]) ok = false;
            if (!ok) continue;
        }
        bool satisfied;
        if (routing) {
            // The union of purchased edges must contain an s-t path.
            Graph sub = *inst.graph;
            std::vector<Edge> kept;
            for (std::size_t e = 0; e < sub.edges.size(); ++e)
                if (covered[e]) kept.push_back(sub.edges[e]);
            sub.edges = kept;
            satisfied =
                !enumerate_simple_paths(sub, b.source, b.target, 1).empty();
        } else {
            satisfied = true;
            for (int g : b.bundle)
                if (!covered[g]) satisfied = false;
        }
        double utility = (satisfied ? static_cast<double>(value) : 0.0) - price;
        if (utility > best.utility) {
            best.utility = utility;
            best.entries.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) best.entries.push_back(static_cast<int>(i));
        }
    }
    return best;
}

PbdVerdict pbd_tail_check(const std::vector<double>& probabilities) {
    if (probabilities.size() > kPbdLengthLimit)
        throw SizeLimitError("pbd_tail_check: at most " +
                             std::to_string(kPbdLengthLimit) + " probabilities");
    PbdVerdict v;
    for (double p : probabilities) v.mu += p;
    // pmf via exact convolution
    std::vector<double> pmf{1.0};
    for (double p : probabilities) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            next[k] += pmf[k] * (1.0 - p);
            next[k + 1] += pmf[k] * p;
        }
        pmf = std::move(next);
    }
    const int threshold = static_cast<int>(std::ceil(v.mu / 2.0 - 1e-12));
    for (std::size_t k = 0; k < pmf.size(); ++k)
        if (static_cast<int>(k) >= threshold) v.tail += pmf[k];
    v.bound = 0.5 * std::min(1.0, v.mu);
    v.holds = v.tail >= v.bound - 1e-12;
    return v;
}

double binomial_tail_geq(int n, double p, int k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    // sum_{j=k}^n C(n,j) p^j (1-p)^{n-j} computed with log-weights for
    // numerical range, then exponentiated; n stays desk-scale here.
    double tail = 0.0;
    for (int j = k; j <= n; ++j) {
        double logc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                      std::lgamma(n - j + 1.0);
        tail += std::exp(logc + j * std::log(p) + (n - j) * std::log1p(-p));
    }
    return std::min(1.0, tail);
}

} // namespace oracle
} // namespace bp
