// bpx — bundle-pricing experiments: LP-guided menus, Monte Carlo runs,
// invariant batteries, and qualitatively-independent-partition tooling.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bp/experiment.hpp"
#include "bp/lowerbound.hpp"
#include "bp/oracle.hpp"

using namespace bp;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

int cmd_run(const std::string& config_path, const std::string& instance,
            std::uint64_t* seed, std::uint64_t* trials, std::string* adversary,
            std::string* out, std::string* mechanism, bool ceil_randomization,
            std::optional<double> gamma) {
    ExperimentConfig config;
    if (!config_path.empty()) config = parse_experiment_config(read_file(config_path));
    if (!instance.empty()) {
        config.instance_path = instance;
        config.generate.reset();
    }
    if (seed) config.seed = *seed;
    if (trials) config.trials = *trials;
    if (adversary) config.adversary = *adversary;
    if (out) config.out = *out;
    if (mechanism) config.mechanism = *mechanism;
    if (ceil_randomization) config.ceil_randomization = true;
    if (gamma) config.gamma = gamma;

    auto report = run_experiment(config);
    std::cout << experiment_csv_header() << '\n';
    for (const auto& row : report.rows) std::cout << experiment_csv_row(row) << '\n';
    std::cerr << "wrote " << report.csv_path << " and " << report.sidecar_path
              << '\n';
    return 0;
}

int cmd_verify(const std::string& scope, std::uint64_t seed) {
    auto report = verify_suite(scope, seed);
    for (const auto& check : report.checks)
        std::cout << (check.pass ? "[pass] " : "[FAIL] ") << check.name << ": "
                  << check.detail << '\n';
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bundle-pricing mechanisms: menus, simulation, lower bounds"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment pipeline");
    std::string run_config, run_instance;
    std::uint64_t run_seed = 0, run_trials = 0;
    std::string run_adversary, run_out, run_mechanism;
    bool run_ceil = false;
    double run_gamma = 0.0;
    run->add_option("--config", run_config, "experiment config JSON");
    run->add_option("--instance", run_instance, "instance file (overrides config)");
    auto* opt_seed = run->add_option("--seed", run_seed, "master seed");
    auto* opt_trials = run->add_option("--trials", run_trials, "Monte Carlo trials");
    auto* opt_adv = run->add_option("--adversary", run_adversary,
                                    "random|exhaustive-worst|greedy-heuristic|fixed");
    auto* opt_out = run->add_option("--out", run_out, "output CSV path");
    auto* opt_mech =
        run->add_option("--mechanism", run_mechanism, "lp_menu|alg2|combined");
    run->add_flag("--ceil-randomization", run_ceil,
                  "randomize between floor and ceiling copy counts");
    auto* opt_gamma = run->add_option("--gamma", run_gamma, "scaling factor override");

    // verify
    auto* verify = app.add_subcommand("verify", "run invariant batteries");
    std::string verify_scope = "all";
    std::uint64_t verify_seed = 1;
    verify->add_option("--scope", verify_scope,
                       "lp_structure|subadditivity|qi|pbd|all");
    verify->add_option("--seed", verify_seed, "battery seed");

    // gen-instance
    auto* geni = app.add_subcommand("gen-instance", "generate a random instance");
    std::string gi_kind = "general_single_minded", gi_out = "instance.json";
    int gi_m = 5, gi_n = 5, gi_d = 2, gi_B = 1;
    Value gi_R = 3;
    std::uint64_t gi_seed = 1;
    geni->add_option("--kind", gi_kind,
                     "d_single_minded|general_single_minded|graph_routing|tree");
    geni->add_option("--m", gi_m, "items (nodes for graph/tree)");
    geni->add_option("--n", gi_n, "buyers");
    geni->add_option("--d", gi_d, "bundle-size cap (d_single_minded)");
    geni->add_option("--B", gi_B, "minimum capacity");
    geni->add_option("--R", gi_R, "maximum value");
    geni->add_option("--seed", gi_seed, "generator seed");
    geni->add_option("--out", gi_out, "output path");

    // gen-qi
    auto* genq = app.add_subcommand("gen-qi", "sample a certified QI family");
    int gq_m = 12, gq_t = 2, gq_r = 2, gq_n = 4, gq_restarts = 100;
    bool gq_balanced = false;
    std::uint64_t gq_seed = 1;
    std::string gq_out = "qi.json";
    genq->add_option("--m", gq_m, "ground-set size");
    genq->add_option("--t", gq_t, "classes per partition");
    genq->add_option("--r", gq_r, "independence order");
    genq->add_option("--n", gq_n, "family size");
    genq->add_flag("--balanced", gq_balanced, "balanced labelings (t | m)");
    genq->add_option("--restarts", gq_restarts, "sampling restarts");
    genq->add_option("--seed", gq_seed, "sampler seed");
    genq->add_option("--out", gq_out, "output path");

    // verify-qi
    auto* verq = app.add_subcommand("verify-qi", "verify an imported QI family");
    std::string vq_family;
    int vq_r = 2;
    verq->add_option("--family", vq_family, "QI family JSON")->required();
    verq->add_option("--r", vq_r, "independence order");

    // gen-lb-instance
    auto* genlb =
        app.add_subcommand("gen-lb-instance", "build the hard Bernoulli instance");
    std::string lb_family, lb_out = "lb_instance.json";
    int lb_B = 1;
    genlb->add_option("--family", lb_family, "QI family JSON")->required();
    genlb->add_option("--B", lb_B, "item capacity (family order must be B+1)");
    genlb->add_option("--out", lb_out, "output path");

    // eval-gap
    auto* evalg = app.add_subcommand("eval-gap", "prophet-vs-online gap report");
    std::string eg_family, eg_out;
    int eg_B = 1;
    std::uint64_t eg_trials = 10000, eg_seed = 1;
    evalg->add_option("--family", eg_family, "QI family JSON")->required();
    evalg->add_option("--B", eg_B, "item capacity");
    evalg->add_option("--trials", eg_trials, "Monte Carlo trials per policy");
    evalg->add_option("--seed", eg_seed, "seed");
    evalg->add_option("--out", eg_out, "optional JSON report path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(run_config, run_instance,
                           opt_seed->count() ? &run_seed : nullptr,
                           opt_trials->count() ? &run_trials : nullptr,
                           opt_adv->count() ? &run_adversary : nullptr,
                           opt_out->count() ? &run_out : nullptr,
                           opt_mech->count() ? &run_mechanism : nullptr, run_ceil,
                           opt_gamma->count() ? std::optional<double>(run_gamma)
                                              : std::nullopt);
        }
        if (verify->parsed()) return cmd_verify(verify_scope, verify_seed);
        if (geni->parsed()) {
            RngStream rng(gi_seed);
            Instance inst;
            if (gi_kind == "graph_routing") {
                gen::GraphParams p;
                p.num_nodes = gi_m;
                p.num_buyers = gi_n;
                p.B = gi_B;
                p.max_value = gi_R;
                inst = gen::random_graph_routing(p, rng);
            } else if (gi_kind == "tree") {
                gen::TreeParams p;
                p.num_nodes = gi_m;
                p.num_buyers = gi_n;
                inst = gen::random_tree(p, rng);
            } else {
                gen::SingleMindedParams p;
                p.num_items = gi_m;
                p.num_buyers = gi_n;
                p.d = gi_kind == "d_single_minded" ? gi_d : 0;
                p.B = gi_B;
                p.max_value = gi_R;
                inst = gen::random_single_minded(p, rng);
            }
            write_file(gi_out, serialize_instance(inst) + "\n");
            std::cout << "wrote " << gi_out << '\n';
            return 0;
        }
        if (genq->parsed()) {
            RngStream rng(gq_seed);
            auto family = lowerbound::sample_qi_family(gq_m, gq_t, gq_r, gq_n,
                                                       gq_balanced, rng, gq_restarts);
            write_file(gq_out, lowerbound::serialize_qi_family(family) + "\n");
            std::cout << "wrote " << gq_out << " (certified " << gq_r << "-way)\n";
            return 0;
        }
        if (verq->parsed()) {
            auto family = lowerbound::parse_qi_family(read_file(vq_family));
            auto verdict = lowerbound::verify_qi(family, vq_r);
            if (verdict.qi) {
                std::cout << "certified: " << family.partitions.size()
                          << " partitions, " << vq_r << "-way QI\n";
                return 0;
            }
            std::cout << "NOT QI: partitions";
            for (int i : verdict.counterexample->partition_indices)
                std::cout << ' ' << i;
            std::cout << " with classes";
            for (int a : verdict.counterexample->class_choices)
                std::cout << ' ' << (a + 1);
            std::cout << " have empty intersection\n";
            return 1;
        }
        if (genlb->parsed()) {
            auto family = lowerbound::parse_qi_family(read_file(lb_family));
            auto verdict = lowerbound::verify_qi(family, lb_B + 1);
            if (!verdict.qi) {
                std::cerr << "family is not " << (lb_B + 1) << "-way QI\n";
                return 1;
            }
            family.certified = true;
            family.order = lb_B + 1;
            Instance inst = lowerbound::build_lb_instance(family, lb_B);
            write_file(lb_out, serialize_instance(inst) + "\n");
            std::cout << "wrote " << lb_out << " (" << inst.num_buyers()
                      << " buyers, " << inst.num_items() << " items)\n";
            return 0;
        }
        if (evalg->parsed()) {
            auto family = lowerbound::parse_qi_family(read_file(eg_family));
            auto verdict = lowerbound::verify_qi(family, eg_B + 1);
            if (!verdict.qi) {
                std::cerr << "family is not " << (eg_B + 1) << "-way QI\n";
                return 1;
            }
            family.certified = true;
            family.order = eg_B + 1;
            Instance inst = lowerbound::build_lb_instance(family, eg_B);
            std::vector<lowerbound::OnlinePolicy> policies{
                lowerbound::OnlinePolicy::GreedyCommit,
                lowerbound::OnlinePolicy::MenuMechanism,
                lowerbound::OnlinePolicy::RandomCommit};
            auto report =
                lowerbound::evaluate_gap(inst, family, eg_B, policies, eg_trials,
                                         eg_seed);
            std::cout << "E[OPT] " << (report.e_opt_exact ? "(exact) " : "(>=) ")
                      << report.e_opt << ", Pr[X>=B] = " << report.prob_x_geq_b
                      << ", 0.25t = " << 0.25 * report.t << '\n';
            json j;
            j["e_opt"] = report.e_opt;
            j["e_opt_exact"] = report.e_opt_exact;
            j["prob_x_geq_b"] = report.prob_x_geq_b;
            j["t"] = report.t;
            j["B"] = report.B;
            j["policies"] = json::array();
            for (const auto& p : report.policies) {
                std::cout << "  " << lowerbound::to_string(p.policy) << ": mean "
                          << p.mean_welfare << " (se " << p.se << "), ratio "
                          << p.ratio << '\n';
                j["policies"].push_back({{"policy", lowerbound::to_string(p.policy)},
                                         {"mean_welfare", p.mean_welfare},
                                         {"se", p.se},
                                         {"ratio", p.ratio}});
            }
            if (!eg_out.empty()) write_file(eg_out, j.dump(2) + "\n");
            return 0;
        }
    } catch (const Error& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 0;
}
