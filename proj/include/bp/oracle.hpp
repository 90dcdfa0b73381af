#pragma once

#include <cstdint>
#include <vector>

#include "bp/model.hpp"
#include "bp/menu.hpp"
#include "bp/sim.hpp"

namespace bp {
namespace oracle {

/// Witnessed exact welfare: the accepted buyers (with their chosen path in
/// routing instances) achieving the value.
struct ExactWelfare {
    double value = 0.0;
    std::vector<int> accepted;
    std::vector<int> chosen_path; // aligned with accepted (routing only)
};

constexpr int kOfflineOptBuyerLimit = 20;
constexpr std::uint64_t kExpectedOptRealizationLimit = 1000000;
constexpr std::size_t kUtilityEntryLimit = 15;
constexpr std::size_t kPbdLengthLimit = 25;

/// Offline optimum for one realization: best feasible accept/reject choice
/// (and routing choice) by depth-first branch and bound. Exact.
ExactWelfare offline_opt(const Instance& inst, const Realization& real,
                         std::size_t max_paths = kDefaultMaxPaths);

/// Exact expected offline optimum: full enumeration of the realization
/// product space, weighting each offline_opt by its probability.
ExactWelfare expected_opt(const Instance& inst,
                          std::size_t max_paths = kDefaultMaxPaths);

/// Exhaustive utility maximization over subsets of menu entries (<= 15
/// entries): utility = value * [union of goods covers the bundle] - prices.
/// ALG mode also requires the combined purchase to fit remaining capacities.
struct UtilityResult {
    double utility = 0.0;
    std::vector<int> entries;
};

UtilityResult brute_force_utility(const SimContext& ctx, int buyer, Value value,
                                  const Menu& menu,
                                  const std::vector<int>& item_remaining,
                                  RunMode mode);

/// Exact Poisson-binomial tail check: Pr[X >= mu/2] >= 0.5 * min{1, mu}
/// where X is the sum of independent Bernoulli(p_i). DP convolution.
struct PbdVerdict {
    bool holds = false;
    double mu = 0.0;
    double tail = 0.0;  // Pr[X >= mu/2]
    double bound = 0.0; // 0.5 * min{1, mu}
};

PbdVerdict pbd_tail_check(const std::vector<double>& probabilities);

/// Exact binomial tail Pr[X >= k] for X ~ Bin(n, p).
double binomial_tail_geq(int n, double p, int k);

} // namespace oracle
} // namespace bp
