#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bp/mechanism.hpp"
#include "bp/model.hpp"

namespace bp {

enum class RunMode { ALG, UALG };

enum class AdversaryTag { Random, ExhaustiveWorst, GreedyHeuristic, Fixed };

std::string to_string(AdversaryTag tag);
AdversaryTag adversary_from_string(const std::string& s);

struct ArrivalOrder {
    std::vector<int> order;
    AdversaryTag tag = AdversaryTag::Fixed;
};

struct Purchase {
    int buyer = -1;
    int entry = -1;
    double price = 0.0;
};

struct SimOutcome {
    RunMode mode = RunMode::ALG;
    std::vector<Purchase> accepted;
    std::int64_t welfare = 0;
    std::vector<int> loads;      // copies consumed per item
    std::vector<int> blocked;    // UALG-accepted, ALG-rejected (UALG runs only)
    std::int64_t blocked_value = 0;

    bool has_accepted(int buyer) const;
};

/// Per-instance lookup tables shared by all trials.
struct SimContext {
    const Instance* inst = nullptr;
    std::vector<int> buyer_type; // demand-group index per buyer
};

SimContext make_sim_context(const Instance& inst);

/// The buyer's purchase decision on the current menu state: the cheapest
/// affordable entry among those selling exactly the buyer's demand (their
/// bundle, or their (s,t) type for routing). When the menu carries no
/// own-demand entry at all (the whole-item-set fallback menu), any entry
/// covering the bundle qualifies. Returns the entry index or -1.
/// `item_remaining` is consulted in ALG mode only.
int buyer_choice(const SimContext& ctx, int buyer, Value value, const Menu& menu,
                 const std::vector<int>& item_remaining, RunMode mode);

SimOutcome run_alg(const SimContext& ctx, Menu menu, const Realization& real,
                   const ArrivalOrder& order);

/// Menu multiplicities respected, item capacities ignored. The blocked set
/// is the difference against run_alg on the same inputs; the welfare
/// identity alg = ualg - blocked_value is asserted per run.
SimOutcome run_ualg(const SimContext& ctx, const Menu& menu, const Realization& real,
                    const ArrivalOrder& order);

struct RunPair {
    SimOutcome alg;
    SimOutcome ualg;
};

RunPair run_pair(const SimContext& ctx, const Menu& menu, const Realization& real,
                 const ArrivalOrder& order);

constexpr int kExhaustiveOrderLimit = 8;

/// Worst-case (for ALG welfare) arrival order. The exhaustive strategy
/// enumerates all n! permutations (n <= 8); the greedy heuristic fronts
/// low-value affordable buyers to burn capacity; random shuffles.
ArrivalOrder adversary_order(AdversaryTag tag, const SimContext& ctx, const Menu& menu,
                             const Realization& real, RngStream* rng = nullptr);

struct MeanStat {
    double mean = 0.0;
    double se = 0.0; // standard error of the mean
    double ci95() const { return 1.96 * se; }
};

struct Stats {
    std::uint64_t trials = 0;
    MeanStat alg, ualg, blocked_count, blocked_value;
    std::vector<MeanStat> ualg_load; // per item
    std::vector<MeanStat> alg_load;
    double alg2_share = 0.0; // fraction of trials that ran the fallback menu
};

/// Number of extra random orders the greedy-heuristic adversary tries per
/// trial, reporting the worst outcome observed.
constexpr int kHeuristicRandomOrders = 4;

/// Seeded Monte Carlo over (menu draw, realization, adversary order).
/// Deterministic for a fixed master_seed: every trial derives its own
/// sub-streams, trials are embarrassingly parallel, and all accumulations
/// are exact integer sums.
Stats monte_carlo(const Instance& inst, const Mechanism& mech, std::uint64_t trials,
                  AdversaryTag adversary, std::uint64_t master_seed);

} // namespace bp
