#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bp/model.hpp"
#include "bp/simplex.hpp"

namespace bp {

/// Capacity scaling factor per setting. d_or_m is the bundle-size cap d for
/// the d-single-minded setting and the item (edge) count m otherwise; the
/// tree setting uses a fixed factor.
double scaling_factor(InstanceKind kind, int d_or_m, int B);

/// Default scaling factor for an instance, derived from its own d/m/B.
double scaling_factor(const Instance& inst);

/// Buyers who demand the same goods, treated uniformly by the menu:
/// same bundle for single-minded/tree instances, same (s,t) pair for
/// routing instances.
struct DemandGroup {
    std::vector<int> buyers;
    std::vector<int> items;             // bundle (empty for routing groups)
    std::pair<int, int> type{-1, -1};   // normalized (s,t) (routing only)
    std::string label;
};

std::vector<DemandGroup> demand_groups(const Instance& inst);

/// One LP variable x_{b,v} (path >= 0 selects x_{b,v,p} in routing mode).
struct VarKey {
    int buyer = -1;
    Value value = 0;
    int path = -1;
};

/// Ex-ante LP with capacities scaled down by gamma. Variables exist only for
/// v >= 1 with q_{b,v} > 0; x_{b,0} is eliminated rather than constrained.
struct ExAnteLp {
    double gamma = 1.0;
    bool routing = false;
    std::vector<VarKey> vars;
    /// Routing only: simple paths per buyer, in deterministic DFS order.
    std::vector<std::vector<std::vector<int>>> buyer_paths;
};

ExAnteLp build_ex_ante_lp(const Instance& inst, double gamma);

constexpr std::size_t kDefaultMaxPaths = 10000;

ExAnteLp build_graph_lp(const Instance& inst, double gamma,
                        std::size_t max_paths = kDefaultMaxPaths);

enum class SolverMode { Float, Exact };

struct FractionalSolution {
    double gamma = 1.0;
    double objective = 0.0;
    bool routing = false;
    bool exact = false;
    bool normalized = false;
    std::vector<VarKey> vars;
    std::vector<double> x; // aligned with vars
    std::vector<std::vector<std::vector<int>>> buyer_paths;

    double mass_of(int buyer, Value value, int path = -1) const;
};

/// Solves the scaled LP to optimality. Float mode checks feasibility
/// residuals against kResidualTolerance; exact mode solves in rational
/// arithmetic and rounds the reported solution to doubles.
FractionalSolution solve_lp(const Instance& inst, const ExAnteLp& lp,
                            SolverMode mode = SolverMode::Float);

/// Secondary-objective normalization: among solutions attaining sol's
/// objective (pinned within kObjectivePinBand in float mode, exactly in
/// exact mode), minimizes total fractional weight plus total item load.
/// The returned prices are then subadditive after menu construction.
FractionalSolution normalize_solution(const Instance& inst,
                                      const FractionalSolution& sol,
                                      SolverMode mode = SolverMode::Float);

constexpr double kResidualTolerance = 1e-9;
constexpr double kObjectivePinBand = 1e-9;
constexpr double kTightnessTolerance = 1e-7;

enum class ValueClass { Zero, Crucial, Tight };

struct BundleStructure {
    DemandGroup group;
    /// False only for routing types with no s-t path; they never enter the
    /// LP and the menu must not post copies for them.
    bool servable = true;
    Value important_value = 0;
    bool has_crucial = false;
    double crucial_mass = 0.0;   // x_{S,w} when a crucial value exists
    double q_at_important = 0.0; // q_{S,w}
    double tail_value = 0.0;     // sum_{v>w} x_{S,v} * v
    double fopt_s = 0.0;
    std::vector<ValueClass> classes; // indexed by value 0..R
};

/// Aggregates the solution per demand group and classifies every support
/// value as zero/crucial/tight, verifying the three-consecutive-blocks law.
/// Compares stored doubles at `tightness_tol`; solve_and_classify below
/// classifies in the solver's own arithmetic instead.
std::vector<BundleStructure> aggregate_and_classify(
    const Instance& inst, const FractionalSolution& sol,
    double tightness_tol = kTightnessTolerance);

/// Per-buyer three-block verification; throws StructureError on violation.
void verify_buyer_structure(const Instance& inst, const FractionalSolution& sol,
                            double tightness_tol = kTightnessTolerance);

/// Solve + optional normalization + classification in one arithmetic domain.
/// In Exact mode the classification compares exact rationals, eliminating
/// tolerance ambiguity.
struct ClassifiedSolution {
    FractionalSolution solution;
    std::vector<BundleStructure> bundles;
};

ClassifiedSolution solve_and_classify(const Instance& inst, const ExAnteLp& lp,
                                      bool normalize,
                                      SolverMode mode = SolverMode::Float,
                                      double tightness_tol = kTightnessTolerance);

/// Extends every buyer's support to the common {0,...,v_max} by moving
/// epsilon mass from the buyer's top value onto each missing value. The
/// epsilon respects positivity, keeps the extended LP optimum at least half
/// the original, and keeps the total-variation welfare shift below
/// FOPT/(4*approx_c).
struct ExtendResult {
    Instance instance;
    bool extended = false;  // false when supports already agree
    bool skipped = false;   // FOPT == 0, extension impossible
    double epsilon = 0.0;
};

ExtendResult extend_supports(const Instance& inst, double approx_c);
ExtendResult extend_supports(const Instance& inst);

std::string serialize_solution(const Instance& inst, const FractionalSolution& sol,
                               const std::vector<BundleStructure>& bundles);

} // namespace bp
