#include "bp/mechanism.hpp"

namespace bp {

std::string to_string(MechanismKind kind) {
    switch (kind) {
    case MechanismKind::LpMenu: return "lp_menu";
    case MechanismKind::Alg2: return "alg2";
    case MechanismKind::Combined: return "combined";
    }
    return "?";
}

MechanismKind mechanism_kind_from_string(const std::string& s) {
    if (s == "lp_menu") return MechanismKind::LpMenu;
    if (s == "alg2") return MechanismKind::Alg2;
    if (s == "combined") return MechanismKind::Combined;
    throw ParseError("unknown mechanism '" + s + "'");
}

Mechanism make_mechanism(const Instance& inst, MechanismKind kind,
                         const PipelineOptions& opts) {
    if (kind == MechanismKind::Combined &&
        inst.kind != InstanceKind::GeneralSingleMinded)
        throw ValidationError(
            "combined mechanism is defined for general_single_minded instances");

    Mechanism mech;
    mech.kind = kind;
    mech.gamma = opts.gamma_override.value_or(scaling_factor(inst));
    mech.max_price_value = inst.max_value();

    auto ext = extend_supports(inst);
    mech.lp_instance = ext.instance;

    ExAnteLp unscaled = build_ex_ante_lp(mech.lp_instance, 1.0);
    mech.fopt = solve_lp(mech.lp_instance, unscaled, opts.solver).objective;

    ExAnteLp scaled = build_ex_ante_lp(mech.lp_instance, mech.gamma);
    auto classified =
        solve_and_classify(mech.lp_instance, scaled, opts.normalize, opts.solver);
    mech.solution = std::move(classified.solution);
    mech.structures = std::move(classified.bundles);
    mech.fopt_gamma = mech.solution.objective;

    if (kind != MechanismKind::Alg2) {
        MenuOptions mopts;
        mopts.ceil_randomization = opts.ceil_randomization;
        mech.rmenu = construct_menu(mech.lp_instance, mech.structures, mopts);
    }
    if (kind != MechanismKind::LpMenu)
        mech.alg2 = alg2_menu(mech.lp_instance, mech.fopt_gamma);
    return mech;
}

Menu draw_menu(const Instance& inst, const Mechanism& mech, RngStream& menu_stream,
               RngStream& mix_stream, bool* used_alg2) {
    bool alg2 = mech.kind == MechanismKind::Alg2;
    if (mech.kind == MechanismKind::Combined)
        alg2 = !mix_stream.bernoulli(Mechanism::kLpMenuShare);
    if (used_alg2) *used_alg2 = alg2;
    if (alg2) {
        // The high price 2*fopt_gamma is not an integer support value, so
        // the tie-break perturbation does not apply; buyers at exactly the
        // posted price keep nonnegative utility and buy.
        Menu menu = mech.alg2;
        for (auto& e : menu) e.remaining = e.copies;
        return menu;
    }
    Menu menu = mech.rmenu.routing
                    ? instantiate_graph_menu(inst, mech.rmenu, mech.solution,
                                             menu_stream)
                    : sample_menu(mech.rmenu, menu_stream);
    return perturb_prices(std::move(menu), mech.max_price_value);
}

} // namespace bp
