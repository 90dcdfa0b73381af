#include "bp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace bp {

using Rational = boost::multiprecision::cpp_rational;
using nlohmann::json;

double scaling_factor(InstanceKind kind, int d_or_m, int B) {
    if (d_or_m < 1 || B < 1)
        throw ValidationError("scaling_factor: d_or_m and B must be >= 1");
    switch (kind) {
    case InstanceKind::DSingleMinded:
        return std::numbers::e * std::pow(10.0 * d_or_m, 1.0 / B);
    case InstanceKind::GeneralSingleMinded:
    case InstanceKind::GraphRouting:
        return std::numbers::e * std::pow(20.0 * d_or_m, 1.0 / (B + 1));
    case InstanceKind::Tree:
        return 10.0;
    }
    throw Error("scaling_factor: unreachable");
}

double scaling_factor(const Instance& inst) {
    int B = inst.min_capacity();
    switch (inst.kind) {
    case InstanceKind::DSingleMinded:
        return scaling_factor(inst.kind, inst.d, B);
    case InstanceKind::Tree:
        return scaling_factor(inst.kind, 1, 1);
    default:
        return scaling_factor(inst.kind, inst.num_items(), B);
    }
}

std::vector<DemandGroup> demand_groups(const Instance& inst) {
    std::vector<DemandGroup> groups;
    if (inst.kind == InstanceKind::GraphRouting) {
        std::map<std::pair<int, int>, int> index;
        for (const auto& b : inst.buyers) {
            auto type = std::minmax(b.source, b.target);
            std::pair<int, int> key{type.first, type.second};
            auto it = index.find(key);
            if (it == index.end()) {
                DemandGroup g;
                g.type = key;
                g.label = inst.graph->nodes[key.first] + "-" + inst.graph->nodes[key.second];
                index.emplace(key, static_cast<int>(groups.size()));
                groups.push_back(std::move(g));
                it = index.find(key);
            }
            groups[it->second].buyers.push_back(b.id);
        }
    } else {
        std::map<std::vector<int>, int> index;
        for (const auto& b : inst.buyers) {
            auto it = index.find(b.bundle);
            if (it == index.end()) {
                DemandGroup g;
                g.items = b.bundle;
                std::string label;
                for (int e : b.bundle) {
                    if (!label.empty()) label += "+";
                    label += inst.item_ids[e];
                }
                g.label = label;
                index.emplace(b.bundle, static_cast<int>(groups.size()));
                groups.push_back(std::move(g));
                it = index.find(b.bundle);
            }
            groups[it->second].buyers.push_back(b.id);
        }
    }
    // Deterministic order: by first interested buyer.
    std::sort(groups.begin(), groups.end(),
              [](const DemandGroup& a, const DemandGroup& b) {
                  return a.buyers.front() < b.buyers.front();
              });
    return groups;
}

ExAnteLp build_ex_ante_lp(const Instance& inst, double gamma) {
    if (gamma < 1.0) throw ValidationError("build_ex_ante_lp: gamma must be >= 1");
    if (inst.kind == InstanceKind::GraphRouting) return build_graph_lp(inst, gamma);
    ExAnteLp lp;
    lp.gamma = gamma;
    for (const auto& b : inst.buyers)
        for (const auto& [v, q] : b.dist.pmf)
            if (v >= 1 && q > 0.0) lp.vars.push_back(VarKey{b.id, v, -1});
    return lp;
}

ExAnteLp build_graph_lp(const Instance& inst, double gamma, std::size_t max_paths) {
    if (gamma < 1.0) throw ValidationError("build_graph_lp: gamma must be >= 1");
    if (inst.kind != InstanceKind::GraphRouting)
        throw ValidationError("build_graph_lp: not a routing instance");
    ExAnteLp lp;
    lp.gamma = gamma;
    lp.routing = true;
    lp.buyer_paths.resize(inst.buyers.size());
    // Enumerate once per (s,t) pair; buyers of the same type share the list.
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    for (const auto& b : inst.buyers) {
        auto mm = std::minmax(b.source, b.target);
        std::pair<int, int> key{mm.first, mm.second};
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<std::vector<int>> paths;
            try {
                paths = enumerate_simple_paths(*inst.graph, key.first, key.second,
                                               max_paths);
            } catch (const SizeLimitError&) {
                throw SizeLimitError(
                    "build_graph_lp: more than " + std::to_string(max_paths) +
                    " simple paths for pair " + inst.graph->nodes[key.first] + "-" +
                    inst.graph->nodes[key.second]);
            }
            it = cache.emplace(key, std::move(paths)).first;
        }
        lp.buyer_paths[b.id] = it->second;
        const int np = static_cast<int>(it->second.size());
        for (const auto& [v, q] : b.dist.pmf)
            if (v >= 1 && q > 0.0)
                for (int p = 0; p < np; ++p) lp.vars.push_back(VarKey{b.id, v, p});
    }
    return lp;
}

double FractionalSolution::mass_of(int buyer, Value value, int path) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].buyer == buyer && vars[i].value == value && vars[i].path == path)
            return x[i];
    return 0.0;
}

namespace {

template <class T>
T from_double(double v) {
    return T(v);
}

template <>
Rational from_double<Rational>(double v) {
    return Rational(v); // exact: every finite double is rational
}

/// Builds the dense LP over scalar T from the variable metadata.
template <class T>
DenseLp<T> make_dense(const Instance& inst, const ExAnteLp& spec) {
    DenseLp<T> lp;
    lp.num_vars = static_cast<int>(spec.vars.size());
    lp.objective.reserve(spec.vars.size());
    for (const auto& var : spec.vars)
        lp.objective.push_back(T(static_cast<long long>(var.value)));

    // Capacity rows: sum of x over variables whose goods contain the item.
    std::vector<std::vector<std::pair<int, T>>> cap_rows(inst.num_items());
    for (int j = 0; j < lp.num_vars; ++j) {
        const VarKey& var = spec.vars[j];
        if (spec.routing) {
            for (int e : spec.buyer_paths[var.buyer][var.path])
                cap_rows[e].emplace_back(j, T(1));
        } else {
            for (int e : inst.buyers[var.buyer].bundle)
                cap_rows[e].emplace_back(j, T(1));
        }
    }
    for (int e = 0; e < inst.num_items(); ++e) {
        T rhs = from_double<T>(static_cast<double>(inst.capacities[e]) / spec.gamma);
        lp.add_row(std::move(cap_rows[e]), RowSense::LE, rhs);
    }

    if (spec.routing) {
        // Per (buyer, value): sum over paths <= q_{b,v}.
        std::map<std::pair<int, Value>, std::vector<std::pair<int, T>>> rows;
        for (int j = 0; j < lp.num_vars; ++j) {
            const VarKey& var = spec.vars[j];
            rows[{var.buyer, var.value}].emplace_back(j, T(1));
        }
        for (auto& [key, coeffs] : rows) {
            T q = from_double<T>(inst.buyers[key.first].dist.prob(key.second));
            lp.add_row(std::move(coeffs), RowSense::LE, q);
        }
    } else {
        for (int j = 0; j < lp.num_vars; ++j) {
            const VarKey& var = spec.vars[j];
            T q = from_double<T>(inst.buyers[var.buyer].dist.prob(var.value));
            lp.add_row({{j, T(1)}}, RowSense::LE, q);
        }
    }
    return lp;
}

template <class T>
T solver_eps();
template <>
double solver_eps<double>() {
    return 1e-11;
}
template <>
Rational solver_eps<Rational>() {
    return Rational(0);
}

/// Residual check against the spec tolerance (float path only; the exact
/// path is feasible by construction).
void check_residuals(const Instance& inst, const ExAnteLp& spec,
                     const std::vector<double>& x) {
    std::vector<double> load(inst.num_items(), 0.0);
    for (std::size_t j = 0; j < spec.vars.size(); ++j) {
        const VarKey& var = spec.vars[j];
        if (x[j] < -kResidualTolerance)
            throw NumericalError("solve_lp: negative mass " + std::to_string(x[j]));
        const auto& items = spec.routing ? spec.buyer_paths[var.buyer][var.path]
                                         : inst.buyers[var.buyer].bundle;
        for (int e : items) load[e] += x[j];
    }
    for (int e = 0; e < inst.num_items(); ++e) {
        double cap = inst.capacities[e] / spec.gamma;
        if (load[e] > cap + kResidualTolerance)
            throw NumericalError("solve_lp: capacity residual " +
                                 std::to_string(load[e] - cap) + " on item '" +
                                 inst.item_ids[e] + "'");
    }
    if (spec.routing) {
        std::map<std::pair<int, Value>, double> sums;
        for (std::size_t j = 0; j < spec.vars.size(); ++j)
            sums[{spec.vars[j].buyer, spec.vars[j].value}] += x[j];
        for (const auto& [key, s] : sums) {
            double q = inst.buyers[key.first].dist.prob(key.second);
            if (s > q + kResidualTolerance)
                throw NumericalError("solve_lp: box residual on buyer " +
                                     std::to_string(key.first));
        }
    } else {
        for (std::size_t j = 0; j < spec.vars.size(); ++j) {
            double q = inst.buyers[spec.vars[j].buyer].dist.prob(spec.vars[j].value);
            if (x[j] > q + kResidualTolerance)
                throw NumericalError("solve_lp: box residual on buyer " +
                                     std::to_string(spec.vars[j].buyer));
        }
    }
}

template <class T>
struct RawSolve {
    std::vector<T> x;
    T objective{};
};

template <class T>
RawSolve<T> solve_typed(const Instance& inst, const ExAnteLp& spec, bool normalize) {
    DenseLp<T> lp = make_dense<T>(inst, spec);
    auto first = solve_dense_lp<T>(lp, solver_eps<T>());
    if (first.status != LpStatus::Optimal)
        throw NumericalError("solve_lp: stage-1 LP not optimal (status " +
                             std::to_string(static_cast<int>(first.status)) + ")");
    if (!normalize) return RawSolve<T>{std::move(first.x), first.objective};

    // Stage 2: pin the stage-1 objective, minimize FracWeight + sum_e w_e.
    // Both terms expand to sum_j x_j * (1 + |goods_j|).
    DenseLp<T> lp2 = make_dense<T>(inst, spec);
    for (int j = 0; j < lp2.num_vars; ++j) {
        const VarKey& var = spec.vars[j];
        std::size_t goods = spec.routing ? spec.buyer_paths[var.buyer][var.path].size()
                                         : inst.buyers[var.buyer].bundle.size();
        lp2.objective[j] = T(-1) - T(static_cast<long long>(goods));
    }
    std::vector<std::pair<int, T>> pin;
    pin.reserve(lp.num_vars);
    for (int j = 0; j < lp.num_vars; ++j) pin.emplace_back(j, lp.objective[j]);
    T pin_rhs = first.objective;
    if constexpr (std::is_same_v<T, double>)
        pin_rhs -= kObjectivePinBand * std::max(1.0, std::abs(first.objective));
    lp2.add_row(std::move(pin), RowSense::GE, pin_rhs);
    auto second = solve_dense_lp<T>(lp2, solver_eps<T>());
    if (second.status != LpStatus::Optimal)
        throw NumericalError("normalize_solution: stage-2 LP infeasible; "
                             "objective pin tolerance misconfigured");
    return RawSolve<T>{std::move(second.x), first.objective};
}

template <class T>
FractionalSolution to_public(const Instance& inst, const ExAnteLp& spec,
                             const RawSolve<T>& raw, bool normalized) {
    FractionalSolution sol;
    sol.gamma = spec.gamma;
    sol.routing = spec.routing;
    sol.exact = std::is_same_v<T, Rational>;
    sol.normalized = normalized;
    sol.vars = spec.vars;
    sol.buyer_paths = spec.buyer_paths;
    sol.x.reserve(raw.x.size());
    for (const auto& v : raw.x) sol.x.push_back(static_cast<double>(v));
    sol.objective = static_cast<double>(raw.objective);
    if (!sol.exact) {
        check_residuals(inst, spec, sol.x);
        // Snap solver noise so downstream aggregation sees clean zeros.
        for (std::size_t j = 0; j < sol.x.size(); ++j)
            if (sol.x[j] < 0.0) sol.x[j] = 0.0;
    }
    return sol;
}

// ---- classification -------------------------------------------------------

template <class T>
struct GroupVectors {
    std::vector<T> x; // aggregated mass per value 0..R
    std::vector<T> q;
};

template <class T>
GroupVectors<T> aggregate_group(const Instance& inst, const ExAnteLp& spec,
                                const std::vector<T>& x, const DemandGroup& g,
                                Value R) {
    GroupVectors<T> agg;
    agg.x.assign(static_cast<std::size_t>(R) + 1, T(0));
    agg.q.assign(static_cast<std::size_t>(R) + 1, T(0));
    for (int b : g.buyers)
        for (const auto& [v, q] : inst.buyers[b].dist.pmf)
            if (q > 0.0) agg.q[static_cast<std::size_t>(v)] += from_double<T>(q);
    for (std::size_t j = 0; j < spec.vars.size(); ++j) {
        const VarKey& var = spec.vars[j];
        if (std::find(g.buyers.begin(), g.buyers.end(), var.buyer) == g.buyers.end())
            continue;
        agg.x[static_cast<std::size_t>(var.value)] += x[j];
    }
    return agg;
}

template <class T>
ValueClass classify_value(const T& x, const T& q, const T& tol) {
    if (q <= tol) return ValueClass::Zero; // no mass available at this value
    if (x <= tol) return ValueClass::Zero;
    if (q - x <= tol) return ValueClass::Tight;
    return ValueClass::Crucial;
}

/// Checks the zero* [crucial] tight* pattern over values with positive q
/// (values the distribution cannot realize are structurally mute).
template <class T>
void check_blocks(const std::vector<ValueClass>& classes, const std::vector<T>& q,
                  const T& tol, const std::string& who) {
    int state = 0; // 0 = zeros, 1 = crucial seen, 2 = tights
    for (std::size_t v = 1; v < classes.size(); ++v) {
        if (q[v] <= tol) continue;
        switch (classes[v]) {
        case ValueClass::Zero:
            if (state != 0)
                throw StructureError(who + ": zero-class value " + std::to_string(v) +
                                     " after a crucial/tight value");
            break;
        case ValueClass::Crucial:
            if (state != 0)
                throw StructureError(who + ": second crucial value at " +
                                     std::to_string(v));
            state = 1;
            break;
        case ValueClass::Tight:
            state = 2;
            break;
        }
    }
}

template <class T>
BundleStructure classify_group(const Instance& inst, const ExAnteLp& spec,
                               const std::vector<T>& x, const DemandGroup& g,
                               Value R, const T& tol) {
    auto agg = aggregate_group<T>(inst, spec, x, g, R);
    BundleStructure s;
    s.group = g;
    if (spec.routing) s.servable = !spec.buyer_paths[g.buyers.front()].empty();
    s.classes.assign(static_cast<std::size_t>(R) + 1, ValueClass::Zero);
    for (Value v = 1; v <= R; ++v) {
        auto i = static_cast<std::size_t>(v);
        s.classes[i] = classify_value<T>(agg.x[i], agg.q[i], tol);
    }
    check_blocks<T>(s.classes, agg.q, tol, "bundle " + g.label);

    // Largest value with x strictly below q; v = 0 qualifies whenever the
    // group has mass at zero (x_{S,0} is pinned to 0), and is the fallback
    // when every positive-q value is saturated.
    s.important_value = 0;
    for (Value v = R; v >= 1; --v) {
        auto i = static_cast<std::size_t>(v);
        if (agg.q[i] > tol && agg.q[i] - agg.x[i] > tol) {
            s.important_value = v;
            break;
        }
    }
    auto wi = static_cast<std::size_t>(s.important_value);
    s.has_crucial =
        s.important_value >= 1 && s.classes[wi] == ValueClass::Crucial;
    s.crucial_mass = static_cast<double>(agg.x[wi]);
    s.q_at_important = static_cast<double>(agg.q[wi]);
    T tail(0), fopt_s(0);
    for (Value v = 1; v <= R; ++v) {
        auto i = static_cast<std::size_t>(v);
        T contrib = agg.x[i] * T(static_cast<long long>(v));
        fopt_s += contrib;
        if (v > s.important_value) tail += contrib;
    }
    s.tail_value = static_cast<double>(tail);
    s.fopt_s = static_cast<double>(fopt_s);
    return s;
}

template <class T>
std::vector<BundleStructure> classify_all(const Instance& inst, const ExAnteLp& spec,
                                          const std::vector<T>& x, const T& tol) {
    Value R = inst.max_value();
    std::vector<BundleStructure> out;
    for (const auto& g : demand_groups(inst))
        out.push_back(classify_group<T>(inst, spec, x, g, R, tol));
    return out;
}

template <class T>
void verify_buyers(const Instance& inst, const ExAnteLp& spec,
                   const std::vector<T>& x, const T& tol) {
    Value R = inst.max_value();
    for (const auto& b : inst.buyers) {
        DemandGroup g;
        g.buyers = {b.id};
        g.label = b.name;
        auto agg = aggregate_group<T>(inst, spec, x, g, R);
        std::vector<ValueClass> classes(static_cast<std::size_t>(R) + 1,
                                        ValueClass::Zero);
        for (Value v = 1; v <= R; ++v) {
            auto i = static_cast<std::size_t>(v);
            classes[i] = classify_value<T>(agg.x[i], agg.q[i], tol);
        }
        check_blocks<T>(classes, agg.q, tol, "buyer " + b.name);
    }
}

ExAnteLp spec_from_solution(const FractionalSolution& sol) {
    ExAnteLp spec;
    spec.gamma = sol.gamma;
    spec.routing = sol.routing;
    spec.vars = sol.vars;
    spec.buyer_paths = sol.buyer_paths;
    return spec;
}

} // namespace

FractionalSolution solve_lp(const Instance& inst, const ExAnteLp& lp,
                            SolverMode mode) {
    if (mode == SolverMode::Exact) {
        auto raw = solve_typed<Rational>(inst, lp, false);
        return to_public<Rational>(inst, lp, raw, false);
    }
    auto raw = solve_typed<double>(inst, lp, false);
    return to_public<double>(inst, lp, raw, false);
}

FractionalSolution normalize_solution(const Instance& inst,
                                      const FractionalSolution& sol,
                                      SolverMode mode) {
    ExAnteLp spec = spec_from_solution(sol);
    if (mode == SolverMode::Exact) {
        auto raw = solve_typed<Rational>(inst, spec, true);
        return to_public<Rational>(inst, spec, raw, true);
    }
    auto raw = solve_typed<double>(inst, spec, true);
    return to_public<double>(inst, spec, raw, true);
}

std::vector<BundleStructure> aggregate_and_classify(const Instance& inst,
                                                    const FractionalSolution& sol,
                                                    double tightness_tol) {
    ExAnteLp spec = spec_from_solution(sol);
    return classify_all<double>(inst, spec, sol.x, tightness_tol);
}

void verify_buyer_structure(const Instance& inst, const FractionalSolution& sol,
                            double tightness_tol) {
    ExAnteLp spec = spec_from_solution(sol);
    verify_buyers<double>(inst, spec, sol.x, tightness_tol);
}

ClassifiedSolution solve_and_classify(const Instance& inst, const ExAnteLp& lp,
                                      bool normalize, SolverMode mode,
                                      double tightness_tol) {
    ClassifiedSolution out;
    if (mode == SolverMode::Exact) {
        auto raw = solve_typed<Rational>(inst, lp, normalize);
        out.solution = to_public<Rational>(inst, lp, raw, normalize);
        out.bundles = classify_all<Rational>(inst, lp, raw.x, Rational(0));
        verify_buyers<Rational>(inst, lp, raw.x, Rational(0));
    } else {
        auto raw = solve_typed<double>(inst, lp, normalize);
        out.solution = to_public<double>(inst, lp, raw, normalize);
        out.bundles = classify_all<double>(inst, lp, out.solution.x, tightness_tol);
        verify_buyers<double>(inst, lp, out.solution.x, tightness_tol);
    }
    return out;
}

ExtendResult extend_supports(const Instance& inst, double approx_c) {
    ExtendResult res;
    res.instance = inst;
    const Value vmax = inst.max_value();

    struct Missing {
        int buyer;
        std::vector<Value> values;
        Value top;
    };
    std::vector<Missing> missing;
    for (const auto& b : inst.buyers) {
        Missing m{b.id, {}, b.dist.max_value()};
        for (Value v = 0; v <= vmax; ++v)
            if (b.dist.prob(v) <= 0.0) m.values.push_back(v);
        if (!m.values.empty()) missing.push_back(std::move(m));
    }
    if (missing.empty()) return res;

    double fopt = solve_lp(inst, build_ex_ante_lp(inst, 1.0)).objective;
    if (fopt <= 0.0) {
        res.skipped = true;
        return res;
    }

    double c1 = std::numeric_limits<double>::infinity();
    double denom_c2 = 0.0, sum_missing = 0.0, vtot = 0.0;
    for (const auto& b : inst.buyers) vtot += static_cast<double>(b.dist.max_value());
    for (const auto& m : missing) {
        const auto& b = inst.buyers[m.buyer];
        c1 = std::min(c1, b.dist.prob(m.top) / (2.0 * m.values.size()));
        denom_c2 += static_cast<double>(m.values.size()) * static_cast<double>(m.top);
        sum_missing += static_cast<double>(m.values.size());
    }
    double c2 = std::min(c1, denom_c2 > 0.0
                                 ? fopt / (2.0 * denom_c2)
                                 : std::numeric_limits<double>::infinity());
    double c3 = std::min(
        c2, (sum_missing > 0.0 && vtot > 0.0)
                ? fopt / (4.0 * approx_c * sum_missing * vtot)
                : std::numeric_limits<double>::infinity());
    double eps = c3 / 2.0;
    if (!(eps > 0.0)) {
        res.skipped = true;
        return res;
    }

    for (const auto& m : missing) {
        auto& dist = res.instance.buyers[m.buyer].dist;
        dist.pmf[m.top] -= eps * static_cast<double>(m.values.size());
        for (Value v : m.values) dist.pmf[v] = eps;
    }
    res.instance.validate();
    res.extended = true;
    res.epsilon = eps;
    return res;
}

ExtendResult extend_supports(const Instance& inst) {
    // Default approximation factor: the end-to-end constant of the setting.
    double gamma = scaling_factor(inst);
    double c;
    switch (inst.kind) {
    case InstanceKind::DSingleMinded: c = 40.0 * gamma; break;
    case InstanceKind::Tree: c = 800.0 / 7.0; break;
    default: c = 120.0 * gamma; break;
    }
    return extend_supports(inst, c);
}

std::string serialize_solution(const Instance& inst, const FractionalSolution& sol,
                               const std::vector<BundleStructure>& bundles) {
    json j;
    j["gamma"] = sol.gamma;
    j["objective"] = sol.objective;
    j["normalized"] = sol.normalized;
    j["exact"] = sol.exact;
    json mass = json::array();
    for (std::size_t i = 0; i < sol.vars.size(); ++i) {
        if (sol.x[i] == 0.0) continue;
        json e;
        e["buyer"] = inst.buyers[sol.vars[i].buyer].name;
        e["value"] = sol.vars[i].value;
        if (sol.vars[i].path >= 0) e["path"] = sol.vars[i].path;
        e["x"] = sol.x[i];
        mass.push_back(e);
    }
    j["mass"] = mass;
    json jb = json::array();
    for (const auto& s : bundles) {
        json e;
        e["bundle"] = s.group.label;
        e["w"] = s.important_value;
        std::string blocks;
        for (std::size_t v = 0; v < s.classes.size(); ++v) {
            if (v) blocks += ",";
            switch (s.classes[v]) {
            case ValueClass::Zero: blocks += "z"; break;
            case ValueClass::Crucial: blocks += "c"; break;
            case ValueClass::Tight: blocks += "t"; break;
            }
        }
        e["blocks"] = blocks;
        e["fopt_s"] = s.fopt_s;
        jb.push_back(e);
    }
    j["bundles"] = jb;
    return j.dump(2);
}

} // namespace bp
