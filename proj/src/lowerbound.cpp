#include "bp/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "bp/mechanism.hpp"
#include "bp/oracle.hpp"
#include "bp/sim.hpp"

namespace bp {
namespace lowerbound {

using nlohmann::json;

namespace {

double binom(double n, int r) {
    double c = 1.0;
    for (int i = 0; i < r; ++i) c *= (n - i) / (i + 1);
    return c;
}

/// All r-subsets of [n], lexicographic.
bool next_combination(std::vector<int>& combo, int n) {
    int r = static_cast<int>(combo.size());
    for (int i = r - 1; i >= 0; --i) {
        if (combo[i] < n - r + i) {
            ++combo[i];
            for (int j = i + 1; j < r; ++j) combo[j] = combo[j - 1] + 1;
            return true;
        }
    }
    return false;
}

} // namespace

QIVerdict verify_qi(const QIFamily& family, int order) {
    QIVerdict verdict;
    const int n = static_cast<int>(family.partitions.size());
    const int t = family.classes;
    if (n < order) {
        verdict.qi = true; // no r-tuples exist
        return verdict;
    }
    double t_pow_r = std::pow(static_cast<double>(t), order);
    double budget = binom(static_cast<double>(n), order) * t_pow_r;
    if (budget > static_cast<double>(kQiVerifyBudget))
        throw SizeLimitError("verify_qi: C(N,r)*t^r = " + std::to_string(budget) +
                             " exceeds budget");

    const auto combos = static_cast<std::size_t>(t_pow_r);
    std::vector<char> seen(combos);
    std::vector<int> tuple(order);
    std::iota(tuple.begin(), tuple.end(), 0);
    do {
        std::fill(seen.begin(), seen.end(), 0);
        for (int x = 0; x < family.ground_size; ++x) {
            std::size_t code = 0;
            for (int k = 0; k < order; ++k)
                code = code * t + family.partitions[tuple[k]][x];
            seen[code] = 1;
        }
        for (std::size_t code = 0; code < combos; ++code) {
            if (seen[code]) continue;
            QICounterexample ce;
            ce.partition_indices = tuple;
            ce.class_choices.resize(order);
            std::size_t rem = code;
            for (int k = order - 1; k >= 0; --k) {
                ce.class_choices[k] = static_cast<int>(rem % t);
                rem /= t;
            }
            verdict.qi = false;
            verdict.counterexample = std::move(ce);
            return verdict;
        }
    } while (next_combination(tuple, n));
    verdict.qi = true;
    return verdict;
}

int choose_t(LowerBoundSetting setting, int m_or_d, int B) {
    if (B < 1) throw ValidationError("choose_t: B must be >= 1");
    const double logv = std::log(static_cast<double>(m_or_d));
    if (setting == LowerBoundSetting::General) {
        if (m_or_d < 16)
            throw ValidationError("choose_t: general setting requires m >= 16");
        if (static_cast<double>(B) >= logv)
            throw ValidationError("choose_t: requires B < ln m");
        double base = static_cast<double>(m_or_d) / (2.0 * B * logv);
        return static_cast<int>(std::floor(std::pow(base, 1.0 / (B + 2))));
    }
    if (static_cast<double>(B) >= logv)
        throw ValidationError("choose_t: requires B < ln d");
    double base = static_cast<double>(m_or_d) / (2.0 * B * logv);
    int t = static_cast<int>(std::floor(std::pow(base, 1.0 / (B + 1))));
    if (t < 1) throw ValidationError("choose_t: d too small, floor is zero");
    return t;
}

double qi_sampling_failure_bound(int m, int t, int r, int target_n) {
    double per = std::pow(1.0 - std::pow(static_cast<double>(t), -r),
                          static_cast<double>(m));
    return binom(static_cast<double>(target_n), r) *
           std::pow(static_cast<double>(t), r) * per;
}

QIFamily sample_qi_family(int m, int t, int r, int target_n, bool balanced,
                          RngStream& stream, int max_restarts) {
    if (t < 1 || m < t) throw ValidationError("sample_qi_family: need m >= t >= 1");
    if (balanced && m % t != 0)
        throw ValidationError("sample_qi_family: balanced labelings require t | m");

    QIFamily family;
    family.ground_size = m;
    family.classes = t;
    family.order = r;

    for (int attempt = 0; attempt < max_restarts; ++attempt) {
        family.partitions.clear();
        family.certified = false;
        for (int i = 0; i < target_n; ++i) {
            std::vector<int> labeling(m);
            if (balanced) {
                const int d = m / t;
                for (int x = 0; x < m; ++x) labeling[x] = x / d;
                stream.shuffle(labeling);
            } else {
                // Uniform labeling conditioned on using every label.
                for (;;) {
                    std::vector<char> used(t, 0);
                    for (int x = 0; x < m; ++x) {
                        labeling[x] = static_cast<int>(stream.below(t));
                        used[labeling[x]] = 1;
                    }
                    if (std::find(used.begin(), used.end(), 0) == used.end()) break;
                }
            }
            family.partitions.push_back(std::move(labeling));
        }
        if (verify_qi(family, r).qi) {
            family.certified = true;
            return family;
        }
    }
    throw Error("sample_qi_family: exhausted " + std::to_string(max_restarts) +
                " restarts (union-bound failure estimate " +
                std::to_string(qi_sampling_failure_bound(m, t, r, target_n)) +
                " per attempt)");
}

void check_covering(const CoveringFamily& cov) {
    if (cov.p < 2) throw ValidationError("covering family: p must be >= 2");
    if (cov.ell < 1) throw ValidationError("covering family: ell must be >= 1");
    for (const auto& v : cov.vectors)
        if (static_cast<int>(v.size()) != cov.ell)
            throw ValidationError("covering family: vector dimension mismatch");
    for (std::size_t a = 0; a < cov.vectors.size(); ++a) {
        for (std::size_t b = 0; b < cov.vectors.size(); ++b) {
            if (a == b) continue;
            std::vector<char> hit(cov.p, 0);
            for (int i = 0; i < cov.ell; ++i) {
                int diff = ((cov.vectors[a][i] - cov.vectors[b][i]) % cov.p +
                            cov.p) % cov.p;
                hit[diff] = 1;
            }
            for (int s = 0; s < cov.p; ++s)
                if (!hit[s])
                    throw ValidationError(
                        "covering family: vectors " + std::to_string(a) + " and " +
                        std::to_string(b) + " miss residue s = " + std::to_string(s));
        }
    }
}

QIFamily aam_to_qi(const CoveringFamily& cov) {
    check_covering(cov);
    QIFamily family;
    family.ground_size = cov.p * cov.ell;
    family.classes = cov.p;
    family.order = 2;
    for (const auto& u : cov.vectors) {
        // Element (i, j) has index i*p + j and lies in class a = j - u_i.
        std::vector<int> labeling(family.ground_size);
        for (int i = 0; i < cov.ell; ++i)
            for (int j = 0; j < cov.p; ++j)
                labeling[i * cov.p + j] = ((j - u[i]) % cov.p + cov.p) % cov.p;
        family.partitions.push_back(std::move(labeling));
    }
    auto verdict = verify_qi(family, 2);
    if (!verdict.qi)
        throw Error("aam_to_qi: mapped family failed pairwise QI verification");
    family.certified = true;
    return family;
}

Instance build_lb_instance(const QIFamily& family, int B) {
    if (!family.certified)
        throw ValidationError("build_lb_instance: family is not certified");
    if (family.order != B + 1)
        throw ValidationError("build_lb_instance: family order " +
                              std::to_string(family.order) + " does not match B+1 = " +
                              std::to_string(B + 1));
    Instance inst;
    inst.kind = InstanceKind::GeneralSingleMinded;
    for (int x = 0; x < family.ground_size; ++x) {
        inst.item_ids.push_back("u" + std::to_string(x));
        inst.capacities.push_back(B);
    }
    const int t = family.classes;
    const double q = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < family.partitions.size(); ++i) {
        for (int a = 0; a < t; ++a) {
            Buyer b;
            b.id = static_cast<int>(inst.buyers.size());
            b.name = "g" + std::to_string(i) + "_c" + std::to_string(a);
            for (int x = 0; x < family.ground_size; ++x)
                if (family.partitions[i][x] == a) b.bundle.push_back(x);
            if (b.bundle.empty())
                throw ValidationError("build_lb_instance: partition " +
                                      std::to_string(i) + " has empty class " +
                                      std::to_string(a));
            b.dist.pmf[0] = 1.0 - q;
            b.dist.pmf[1] = q;
            inst.buyers.push_back(std::move(b));
        }
    }
    inst.validate();
    return inst;
}

std::string to_string(OnlinePolicy p) {
    switch (p) {
    case OnlinePolicy::GreedyCommit: return "greedy-commit";
    case OnlinePolicy::MenuMechanism: return "menu-mechanism";
    case OnlinePolicy::RandomCommit: return "random-commit";
    }
    return "?";
}

namespace {

struct WelfareAcc {
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    void add(std::int64_t w) {
        sum += w;
        sum_sq += w * w;
    }
};

std::int64_t run_greedy_commit(const Instance& inst, const Realization& real,
                               const std::vector<int>& order) {
    std::vector<int> remaining = inst.capacities;
    std::int64_t welfare = 0;
    for (int b : order) {
        if (real.values[b] != 1) continue;
        bool fits = true;
        for (int g : inst.buyers[b].bundle)
            if (remaining[g] < 1) fits = false;
        if (!fits) continue;
        for (int g : inst.buyers[b].bundle) --remaining[g];
        welfare += real.values[b];
    }
    return welfare;
}

std::int64_t run_random_commit(const Instance& inst, const Realization& real,
                               const std::vector<int>& order, int t, int B,
                               RngStream& rng) {
    // Commit to B groups upfront, then serve their active buyers.
    const int groups = inst.num_buyers() / t;
    std::vector<int> pool(groups);
    std::iota(pool.begin(), pool.end(), 0);
    rng.shuffle(pool);
    std::vector<char> chosen(groups, 0);
    for (int i = 0; i < std::min(B, groups); ++i) chosen[pool[i]] = 1;
    std::vector<int> remaining = inst.capacities;
    std::int64_t welfare = 0;
    for (int b : order) {
        if (real.values[b] != 1) continue;
        if (!chosen[b / t]) continue;
        bool fits = true;
        for (int g : inst.buyers[b].bundle)
            if (remaining[g] < 1) fits = false;
        if (!fits) continue;
        for (int g : inst.buyers[b].bundle) --remaining[g];
        welfare += real.values[b];
    }
    return welfare;
}

} // namespace

GapReport evaluate_gap(const Instance& inst, const QIFamily& family, int B,
                       const std::vector<OnlinePolicy>& policies,
                       std::uint64_t trials, std::uint64_t seed) {
    GapReport report;
    report.t = family.classes;
    report.B = B;
    const int t = family.classes;
    const int N = static_cast<int>(family.partitions.size());
    const double p_active = std::pow(1.0 / static_cast<double>(t), t);
    report.prob_x_geq_b = oracle::binomial_tail_geq(N, p_active, B);

    // Exact E[OPT] for tiny instances, closed-form group lower bound else.
    double combos = std::pow(2.0, inst.num_buyers());
    if (inst.num_buyers() <= oracle::kOfflineOptBuyerLimit &&
        combos <= static_cast<double>(oracle::kExpectedOptRealizationLimit)) {
        report.e_opt = oracle::expected_opt(inst).value;
        report.e_opt_exact = true;
    } else {
        report.e_opt = static_cast<double>(B) * t * report.prob_x_geq_b;
        report.e_opt_exact = false;
    }

    SimContext ctx = make_sim_context(inst);
    std::optional<Mechanism> mech;
    for (OnlinePolicy policy : policies) {
        if (policy == OnlinePolicy::MenuMechanism && !mech)
            mech = make_mechanism(inst, MechanismKind::LpMenu, {});
        WelfareAcc acc;
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            RngStream real_stream = substream(seed, "realization", trial);
            RngStream adv_stream = substream(seed, "adversary", trial);
            RngStream menu_stream = substream(seed, "menu", trial);
            RngStream policy_stream = substream(seed, "policy", trial);
            Realization real = sample_realization(inst, real_stream);
            std::vector<int> order(inst.num_buyers());
            std::iota(order.begin(), order.end(), 0);
            adv_stream.shuffle(order);

            std::int64_t welfare = 0;
            switch (policy) {
            case OnlinePolicy::GreedyCommit:
                welfare = run_greedy_commit(inst, real, order);
                break;
            case OnlinePolicy::RandomCommit:
                welfare = run_random_commit(inst, real, order, t, B, policy_stream);
                break;
            case OnlinePolicy::MenuMechanism: {
                RngStream mix_stream = substream(seed, "mix", trial);
                Menu menu = draw_menu(inst, *mech, menu_stream, mix_stream);
                ArrivalOrder arrival{order, AdversaryTag::Random};
                welfare = run_alg(ctx, std::move(menu), real, arrival).welfare;
                break;
            }
            }
            acc.add(welfare);
        }
        PolicyStats ps;
        ps.policy = policy;
        ps.mean_welfare = static_cast<double>(acc.sum) / static_cast<double>(trials);
        if (trials > 1) {
            double var = (static_cast<double>(acc.sum_sq) -
                          trials * ps.mean_welfare * ps.mean_welfare) /
                         static_cast<double>(trials - 1);
            ps.se = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
        }
        ps.ratio = ps.mean_welfare > 0.0
                       ? report.e_opt / ps.mean_welfare
                       : std::numeric_limits<double>::infinity();
        report.policies.push_back(ps);
    }
    return report;
}

std::string serialize_qi_family(const QIFamily& f) {
    json j;
    j["m"] = f.ground_size;
    j["t"] = f.classes;
    j["r"] = f.order;
    json parts = json::array();
    for (const auto& labeling : f.partitions) {
        json one = json::array();
        for (int label : labeling) one.push_back(label + 1); // 1-based in files
        parts.push_back(one);
    }
    j["partitions"] = parts;
    j["certified"] = f.certified;
    return j.dump();
}

QIFamily parse_qi_family(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("QI family JSON: ") + e.what());
    }
    QIFamily f;
    f.ground_size = j.at("m").get<int>();
    f.classes = j.at("t").get<int>();
    f.order = j.at("r").get<int>();
    for (const auto& part : j.at("partitions")) {
        std::vector<int> labeling;
        for (const auto& label : part) {
            int v = label.get<int>() - 1;
            if (v < 0 || v >= f.classes)
                throw ValidationError("QI family: label out of range [1, t]");
            labeling.push_back(v);
        }
        if (static_cast<int>(labeling.size()) != f.ground_size)
            throw ValidationError("QI family: labeling length != m");
        f.partitions.push_back(std::move(labeling));
    }
    f.certified = false; // imported families must be re-certified
    return f;
}

std::string serialize_covering(const CoveringFamily& c) {
    json j;
    j["p"] = c.p;
    j["ell"] = c.ell;
    j["vectors"] = c.vectors;
    return j.dump();
}

CoveringFamily parse_covering(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("covering family JSON: ") + e.what());
    }
    CoveringFamily c;
    c.p = j.at("p").get<int>();
    c.ell = j.at("ell").get<int>();
    for (const auto& vec : j.at("vectors"))
        c.vectors.push_back(vec.get<std::vector<int>>());
    return c;
}

} // namespace lowerbound
} // namespace bp
