#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bp/model.hpp"
#include "bp/rng.hpp"

namespace bp {
namespace lowerbound {

/// Family of t-class partitions of [m]. Labels are 0-based internally and
/// 1-based in JSON. `certified` is set only by verify_qi.
struct QIFamily {
    int ground_size = 0; // m
    int classes = 0;     // t
    int order = 0;       // r
    std::vector<std::vector<int>> partitions; // each: label per element
    bool certified = false;
};

struct QICounterexample {
    std::vector<int> partition_indices;
    std::vector<int> class_choices;
};

struct QIVerdict {
    bool qi = false;
    std::optional<QICounterexample> counterexample;
};

constexpr std::uint64_t kQiVerifyBudget = 100000000ULL;

/// Exhaustive r-way qualitative-independence check: every choice of r
/// distinct partitions and one class from each must intersect.
QIVerdict verify_qi(const QIFamily& family, int order);

/// Number of classes for the hard instances.
///   general: t = floor((m / (2 B ln m))^{1/(B+2)}), requires m >= 16
///   dcapped: t = floor((d / (2 B ln d))^{1/(B+1)})
/// Both require 1 <= B < ln(m or d).
enum class LowerBoundSetting { General, DCapped };
int choose_t(LowerBoundSetting setting, int m_or_d, int B);

/// Union-bound failure estimate for sampling N random (balanced) labelings:
/// C(N,r) * t^r * (1 - t^{-r})^m.
double qi_sampling_failure_bound(int m, int t, int r, int target_n);

/// Samples target_n independent uniform labelings (balanced: each label
/// exactly m/t times) and certifies; resamples up to max_restarts times.
QIFamily sample_qi_family(int m, int t, int r, int target_n, bool balanced,
                          RngStream& stream, int max_restarts = 100);

struct CoveringFamily {
    int p = 0;   // prime modulus
    int ell = 0; // dimension
    std::vector<std::vector<int>> vectors;
};

/// Validates the covering property: all distinct u,v and every residue s
/// have a coordinate with u_i - v_i = s (mod p). Throws ValidationError
/// naming the offending (u, v, s) otherwise.
void check_covering(const CoveringFamily& cov);

/// Ground set [ell] x Z_p; one p-partition per vector u with classes
/// B_u(a) = {(i, a + u_i)}. Output certifies pairwise (2-way) QI.
QIFamily aam_to_qi(const CoveringFamily& cov);

/// Hard instance: m items of capacity B; one Bernoulli(1/t) buyer per
/// (partition, class). Requires a family certified at order B + 1.
Instance build_lb_instance(const QIFamily& family, int B);

enum class OnlinePolicy { GreedyCommit, MenuMechanism, RandomCommit };

std::string to_string(OnlinePolicy p);

struct PolicyStats {
    OnlinePolicy policy;
    double mean_welfare = 0.0;
    double se = 0.0;
    double ratio = 0.0; // E[OPT] lower bound / mean welfare
};

struct GapReport {
    double e_opt = 0.0;       // lower bound on E[OPT] used for ratios
    bool e_opt_exact = false; // true when computed by exhaustive enumeration
    double prob_x_geq_b = 0.0;
    int t = 0;
    int B = 0;
    std::vector<PolicyStats> policies;
};

/// Measures the prophet-vs-online gap on a constructed instance. E[OPT] is
/// estimated exactly for tiny instances and otherwise lower-bounded by
/// B*t*Pr[X >= B] with the exact binomial tail (X = number of fully active
/// groups). Policies run under uniformly random arrival orders.
GapReport evaluate_gap(const Instance& inst, const QIFamily& family, int B,
                       const std::vector<OnlinePolicy>& policies,
                       std::uint64_t trials, std::uint64_t seed);

std::string serialize_qi_family(const QIFamily& f);
QIFamily parse_qi_family(const std::string& json_text);
std::string serialize_covering(const CoveringFamily& c);
CoveringFamily parse_covering(const std::string& json_text);

} // namespace lowerbound
} // namespace bp
