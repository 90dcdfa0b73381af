#include "bp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace bp {

std::string to_string(AdversaryTag tag) {
    switch (tag) {
    case AdversaryTag::Random: return "random";
    case AdversaryTag::ExhaustiveWorst: return "exhaustive-worst";
    case AdversaryTag::GreedyHeuristic: return "greedy-heuristic";
    case AdversaryTag::Fixed: return "fixed";
    }
    return "?";
}

AdversaryTag adversary_from_string(const std::string& s) {
    if (s == "random") return AdversaryTag::Random;
    if (s == "exhaustive-worst") return AdversaryTag::ExhaustiveWorst;
    if (s == "greedy-heuristic") return AdversaryTag::GreedyHeuristic;
    if (s == "fixed") return AdversaryTag::Fixed;
    throw ParseError("unknown adversary '" + s + "'");
}

bool SimOutcome::has_accepted(int buyer) const {
    for (const auto& p : accepted)
        if (p.buyer == buyer) return true;
    return false;
}

SimContext make_sim_context(const Instance& inst) {
    SimContext ctx;
    ctx.inst = &inst;
    ctx.buyer_type.assign(inst.buyers.size(), -1);
    auto groups = demand_groups(inst);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int b : groups[g].buyers) ctx.buyer_type[b] = static_cast<int>(g);
    return ctx;
}

namespace {

bool goods_cover(const std::vector<int>& goods, const std::vector<int>& bundle) {
    // Both sorted ascending.
    return std::includes(goods.begin(), goods.end(), bundle.begin(), bundle.end());
}

bool entry_matches(const Buyer& buyer, int buyer_type,
                   const MenuEntry& e, bool routing) {
    if (routing) return e.type_index == buyer_type;
    // LP-menu entries carry their demand-group index; fall back to a goods
    // comparison for hand-built menus (whole-item-set entries use -1).
    if (e.type_index >= 0) return e.type_index == buyer_type;
    return e.goods == buyer.bundle;
}

bool capacity_ok(const MenuEntry& e, const std::vector<int>& item_remaining) {
    for (int g : e.goods)
        if (item_remaining[g] < 1) return false;
    return true;
}

} // namespace

int buyer_choice(const SimContext& ctx, int buyer, Value value, const Menu& menu,
                 const std::vector<int>& item_remaining, RunMode mode) {
    const Instance& inst = *ctx.inst;
    const Buyer& b = inst.buyers[buyer];
    const bool routing = inst.kind == InstanceKind::GraphRouting;
    const int type = ctx.buyer_type[buyer];

    // Restricted policy: entries selling exactly the buyer's demand. The
    // whole-item-set fallback menu carries no such entry, so cover entries
    // step in there.
    bool any_exact = false;
    for (const auto& e : menu)
        if (entry_matches(b, type, e, routing)) {
            any_exact = true;
            break;
        }

    int best = -1;
    for (std::size_t i = 0; i < menu.size(); ++i) {
        const MenuEntry& e = menu[i];
        if (any_exact) {
            if (!entry_matches(b, type, e, routing)) continue;
        } else {
            if (routing || !goods_cover(e.goods, b.bundle)) continue;
        }
        if (e.remaining < 1) continue;
        if (mode == RunMode::ALG && !capacity_ok(e, item_remaining)) continue;
        if (e.price > static_cast<double>(value)) continue;
        if (best < 0 || e.price < menu[best].price) best = static_cast<int>(i);
    }
    return best;
}

namespace {

SimOutcome run_mode(const SimContext& ctx, Menu menu, const Realization& real,
                    const ArrivalOrder& order, RunMode mode) {
    const Instance& inst = *ctx.inst;
    SimOutcome out;
    out.mode = mode;
    out.loads.assign(inst.num_items(), 0);
    std::vector<int> item_remaining = inst.capacities;
    for (int buyer : order.order) {
        Value v = real.values[buyer];
        int pick = buyer_choice(ctx, buyer, v, menu, item_remaining, mode);
        if (pick < 0) continue;
        MenuEntry& e = menu[pick];
        --e.remaining;
        for (int g : e.goods) {
            ++out.loads[g];
            if (mode == RunMode::ALG) {
                --item_remaining[g];
                if (item_remaining[g] < 0)
                    throw Error("run_alg: capacity violated on item " +
                                inst.item_ids[g]);
            }
        }
        out.accepted.push_back(Purchase{buyer, pick, e.price});
        out.welfare += v;
    }
    return out;
}

} // namespace

SimOutcome run_alg(const SimContext& ctx, Menu menu, const Realization& real,
                   const ArrivalOrder& order) {
    return run_mode(ctx, std::move(menu), real, order, RunMode::ALG);
}

SimOutcome run_ualg(const SimContext& ctx, const Menu& menu, const Realization& real,
                    const ArrivalOrder& order) {
    return run_pair(ctx, menu, real, order).ualg;
}

RunPair run_pair(const SimContext& ctx, const Menu& menu, const Realization& real,
                 const ArrivalOrder& order) {
    RunPair pair;
    pair.alg = run_mode(ctx, menu, real, order, RunMode::ALG);
    pair.ualg = run_mode(ctx, menu, real, order, RunMode::UALG);
    for (const auto& p : pair.ualg.accepted) {
        if (!pair.alg.has_accepted(p.buyer)) {
            pair.ualg.blocked.push_back(p.buyer);
            pair.ualg.blocked_value += real.values[p.buyer];
        }
    }
    // ALG is always a subset of UALG under the restricted policy; the
    // welfare identity then holds exactly per run.
    for (const auto& p : pair.alg.accepted)
        if (!pair.ualg.has_accepted(p.buyer))
            throw Error("run_pair: ALG accepted a buyer UALG rejected");
    if (pair.alg.welfare != pair.ualg.welfare - pair.ualg.blocked_value)
        throw Error("run_pair: welfare identity violated");
    return pair;
}

namespace {

std::int64_t factorial(int n) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

ArrivalOrder exhaustive_worst(const SimContext& ctx, const Menu& menu,
                              const Realization& real) {
    const int n = ctx.inst->num_buyers();
    if (n > kExhaustiveOrderLimit)
        throw SizeLimitError(
            "exhaustive-worst adversary supports n <= " +
            std::to_string(kExhaustiveOrderLimit) +
            " buyers (" + std::to_string(factorial(n)) +
            " permutations here); use greedy-heuristic or random instead");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    ArrivalOrder best{perm, AdversaryTag::ExhaustiveWorst};
    std::int64_t best_welfare = -1;
    do {
        ArrivalOrder cand{perm, AdversaryTag::ExhaustiveWorst};
        std::int64_t w = run_alg(ctx, menu, real, cand).welfare;
        if (best_welfare < 0 || w < best_welfare) {
            best_welfare = w;
            best.order = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

ArrivalOrder greedy_heuristic(const SimContext& ctx, const Menu& menu,
                              const Realization& real) {
    // Low-value buyers who can afford an entry go first, burning capacity
    // before the valuable buyers arrive.
    const int n = ctx.inst->num_buyers();
    std::vector<int> no_caps; // capacity ignored when probing affordability
    std::vector<std::pair<std::pair<int, Value>, int>> keys;
    keys.reserve(n);
    for (int b = 0; b < n; ++b) {
        Value v = real.values[b];
        bool affordable = buyer_choice(ctx, b, v, menu, no_caps, RunMode::UALG) >= 0;
        keys.push_back({{affordable ? 0 : 1, v}, b});
    }
    std::stable_sort(keys.begin(), keys.end());
    ArrivalOrder order;
    order.tag = AdversaryTag::GreedyHeuristic;
    for (const auto& k : keys) order.order.push_back(k.second);
    return order;
}

} // namespace

ArrivalOrder adversary_order(AdversaryTag tag, const SimContext& ctx, const Menu& menu,
                             const Realization& real, RngStream* rng) {
    const int n = ctx.inst->num_buyers();
    ArrivalOrder order;
    order.tag = tag;
    switch (tag) {
    case AdversaryTag::Fixed:
        order.order.resize(n);
        std::iota(order.order.begin(), order.order.end(), 0);
        return order;
    case AdversaryTag::Random:
        if (!rng) throw Error("random adversary needs an RNG stream");
        order.order.resize(n);
        std::iota(order.order.begin(), order.order.end(), 0);
        rng->shuffle(order.order);
        return order;
    case AdversaryTag::GreedyHeuristic:
        return greedy_heuristic(ctx, menu, real);
    case AdversaryTag::ExhaustiveWorst:
        return exhaustive_worst(ctx, menu, real);
    }
    throw Error("adversary_order: unreachable");
}

namespace {

struct Accumulator {
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    void add(std::int64_t x) {
        sum += x;
        sum_sq += x * x;
    }
    MeanStat stat(std::uint64_t n) const {
        MeanStat s;
        if (n == 0) return s;
        double mean = static_cast<double>(sum) / static_cast<double>(n);
        s.mean = mean;
        if (n > 1) {
            double var = (static_cast<double>(sum_sq) -
                          static_cast<double>(n) * mean * mean) /
                         static_cast<double>(n - 1);
            s.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
        }
        return s;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
};

struct ChunkTotals {
    Accumulator alg, ualg, blocked_count, blocked_value;
    std::vector<Accumulator> ualg_load, alg_load;
    std::uint64_t alg2_runs = 0;

    explicit ChunkTotals(int items) : ualg_load(items), alg_load(items) {}
    void merge(const ChunkTotals& o) {
        alg.merge(o.alg);
        ualg.merge(o.ualg);
        blocked_count.merge(o.blocked_count);
        blocked_value.merge(o.blocked_value);
        for (std::size_t i = 0; i < ualg_load.size(); ++i) {
            ualg_load[i].merge(o.ualg_load[i]);
            alg_load[i].merge(o.alg_load[i]);
        }
        alg2_runs += o.alg2_runs;
    }
};

} // namespace

Stats monte_carlo(const Instance& inst, const Mechanism& mech, std::uint64_t trials,
                  AdversaryTag adversary, std::uint64_t master_seed) {
    if (trials < 1) throw ValidationError("monte_carlo: trials must be >= 1");
    SimContext ctx = make_sim_context(inst);
    const int items = inst.num_items();

    auto run_trial = [&](std::uint64_t t, ChunkTotals& acc) {
        RngStream menu_stream = substream(master_seed, "menu", t);
        RngStream mix_stream = substream(master_seed, "mix", t);
        RngStream real_stream = substream(master_seed, "realization", t);
        RngStream adv_stream = substream(master_seed, "adversary", t);

        bool used_alg2 = false;
        Menu menu = draw_menu(inst, mech, menu_stream, mix_stream, &used_alg2);
        Realization real = sample_realization(inst, real_stream);
        real.stream_seed = substream_seed(master_seed, "realization", t);

        RunPair best;
        bool have = false;
        auto consider = [&](const ArrivalOrder& order) {
            RunPair pair = run_pair(ctx, menu, real, order);
            if (!have || pair.alg.welfare < best.alg.welfare) {
                best = std::move(pair);
                have = true;
            }
        };
        if (adversary == AdversaryTag::GreedyHeuristic) {
            // Heuristic almighty adversary: greedy order plus a few random
            // ones, keeping the worst outcome for ALG.
            consider(adversary_order(AdversaryTag::GreedyHeuristic, ctx, menu, real));
            for (int k = 0; k < kHeuristicRandomOrders; ++k)
                consider(adversary_order(AdversaryTag::Random, ctx, menu, real,
                                         &adv_stream));
        } else {
            consider(adversary_order(adversary, ctx, menu, real, &adv_stream));
        }

        acc.alg.add(best.alg.welfare);
        acc.ualg.add(best.ualg.welfare);
        acc.blocked_count.add(static_cast<std::int64_t>(best.ualg.blocked.size()));
        acc.blocked_value.add(best.ualg.blocked_value);
        for (int e = 0; e < items; ++e) {
            acc.ualg_load[e].add(best.ualg.loads[e]);
            acc.alg_load[e].add(best.alg.loads[e]);
        }
        if (used_alg2) ++acc.alg2_runs;
    };

    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t num_chunks = (trials + kChunk - 1) / kChunk;
    std::vector<ChunkTotals> chunks(num_chunks, ChunkTotals(items));

    unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                          static_cast<unsigned>(num_chunks));
    if (workers <= 1 || trials < 2 * kChunk) {
        for (std::uint64_t c = 0; c < num_chunks; ++c)
            for (std::uint64_t t = c * kChunk; t < std::min(trials, (c + 1) * kChunk);
                 ++t)
                run_trial(t, chunks[c]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t c = next.fetch_add(1);
                    if (c >= num_chunks) break;
                    for (std::uint64_t t = c * kChunk;
                         t < std::min(trials, (c + 1) * kChunk); ++t)
                        run_trial(t, chunks[c]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    ChunkTotals total(items);
    for (const auto& c : chunks) total.merge(c);

    Stats stats;
    stats.trials = trials;
    stats.alg = total.alg.stat(trials);
    stats.ualg = total.ualg.stat(trials);
    stats.blocked_count = total.blocked_count.stat(trials);
    stats.blocked_value = total.blocked_value.stat(trials);
    stats.ualg_load.reserve(items);
    stats.alg_load.reserve(items);
    for (int e = 0; e < items; ++e) {
        stats.ualg_load.push_back(total.ualg_load[e].stat(trials));
        stats.alg_load.push_back(total.alg_load[e].stat(trials));
    }
    stats.alg2_share = static_cast<double>(total.alg2_runs) /
                       static_cast<double>(trials);
    return stats;
}

} // namespace bp
