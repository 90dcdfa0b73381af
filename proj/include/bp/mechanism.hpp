#pragma once

#include <optional>

#include "bp/lp.hpp"
#include "bp/menu.hpp"
#include "bp/model.hpp"

namespace bp {

enum class MechanismKind { LpMenu, Alg2, Combined };

std::string to_string(MechanismKind kind);
MechanismKind mechanism_kind_from_string(const std::string& s);

/// Everything fixed before any buyer arrives. Sampling a concrete menu per
/// trial needs only an RNG stream, so the posted menu never depends on
/// realizations or arrival order.
struct Mechanism {
    MechanismKind kind = MechanismKind::LpMenu;
    Instance lp_instance; // support-extended copy the LP was solved on
    RandomizedMenu rmenu;
    FractionalSolution solution;
    std::vector<BundleStructure> structures;
    Menu alg2;
    double fopt = 0.0;
    double fopt_gamma = 0.0;
    double gamma = 1.0;
    Value max_price_value = 0; // R used by the price perturbation
    /// Probability of running the LP menu in the combined mechanism.
    static constexpr double kLpMenuShare = 1.0 / 3.0;
};

struct PipelineOptions {
    std::optional<double> gamma_override;
    bool normalize = true;
    bool ceil_randomization = false;
    SolverMode solver = SolverMode::Float;
};

/// Full pre-arrival pipeline: support extension, scaled LP, normalization,
/// classification, menu construction.
Mechanism make_mechanism(const Instance& inst, MechanismKind kind,
                         const PipelineOptions& opts = {});

/// Draws the concrete menu for one trial. Combined mechanisms first flip the
/// 1/3-2/3 mechanism coin on `mix`; routing menus get their paths assigned.
/// Prices come out perturbed and ready to simulate.
Menu draw_menu(const Instance& inst, const Mechanism& mech, RngStream& menu_stream,
               RngStream& mix_stream, bool* used_alg2 = nullptr);

} // namespace bp
