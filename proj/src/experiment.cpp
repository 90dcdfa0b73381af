#include "bp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bp/lowerbound.hpp"
#include "bp/oracle.hpp"

namespace bp {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (trials < 1) throw ValidationError("config: trials must be >= 1");
    if (instance_path.empty() == !generate.has_value())
        throw ValidationError("config: exactly one of 'instance' and 'generate'");
    (void)mechanism_kind_from_string(mechanism);
    (void)adversary_from_string(adversary);
    if (gamma && *gamma < 1.0) throw ValidationError("config: gamma must be >= 1");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.instance_path = j.value("instance", "");
    if (j.contains("generate")) {
        const auto& g = j.at("generate");
        GenerateSpec spec;
        spec.kind = g.value("kind", spec.kind);
        auto int_list = [&](const char* key, std::vector<int> dflt) {
            if (!g.contains(key)) return dflt;
            if (g.at(key).is_array()) return g.at(key).get<std::vector<int>>();
            return std::vector<int>{g.at(key).get<int>()};
        };
        spec.d = int_list("d", spec.d);
        spec.B = int_list("B", spec.B);
        spec.m = int_list("m", spec.m);
        spec.n = g.value("n", spec.n);
        spec.R = g.value("R", spec.R);
        spec.count = g.value("count", spec.count);
        c.generate = spec;
    }
    c.mechanism = j.value("mechanism", c.mechanism);
    c.trials = j.value("trials", c.trials);
    c.adversary = j.value("adversary", c.adversary);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    if (j.contains("gamma") && !j.at("gamma").is_null())
        c.gamma = j.at("gamma").get<double>();
    c.ceil_randomization = j.value("ceil_randomization", c.ceil_randomization);
    c.skip_normalization = j.value("skip_normalization", c.skip_normalization);
    c.validate();
    return c;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string instance_stem(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

struct NamedInstance {
    std::string id;
    Instance instance;
};

std::vector<NamedInstance> resolve_instances(const ExperimentConfig& config) {
    std::vector<NamedInstance> out;
    if (!config.instance_path.empty()) {
        out.push_back({instance_stem(config.instance_path),
                       load_instance(config.instance_path)});
        return out;
    }
    const GenerateSpec& g = *config.generate;
    std::uint64_t index = 0;
    for (int m : g.m) {
        for (int B : g.B) {
            for (int d : g.d) {
                for (int k = 0; k < g.count; ++k) {
                    RngStream rng = substream(config.seed, "instance", index++);
                    NamedInstance named;
                    std::ostringstream id;
                    if (g.kind == "d_single_minded" ||
                        g.kind == "general_single_minded") {
                        gen::SingleMindedParams p;
                        p.num_items = m;
                        p.num_buyers = g.n;
                        p.d = g.kind == "d_single_minded" ? d : 0;
                        p.B = B;
                        p.max_value = g.R;
                        named.instance = gen::random_single_minded(p, rng);
                        id << g.kind << "_m" << m << "_B" << B;
                        if (p.d > 0) id << "_d" << d;
                    } else if (g.kind == "graph_routing") {
                        gen::GraphParams p;
                        p.num_nodes = m;
                        p.num_buyers = g.n;
                        p.B = B;
                        p.max_value = g.R;
                        named.instance = gen::random_graph_routing(p, rng);
                        id << g.kind << "_v" << m << "_B" << B;
                    } else if (g.kind == "tree") {
                        gen::TreeParams p;
                        p.num_nodes = m;
                        p.num_buyers = g.n;
                        named.instance = gen::random_tree(p, rng);
                        id << g.kind << "_v" << m;
                    } else {
                        throw ValidationError("config: unknown generate kind '" +
                                              g.kind + "'");
                    }
                    id << "_i" << k;
                    named.id = id.str();
                    out.push_back(std::move(named));
                }
                if (g.kind != "d_single_minded") break; // d grid only applies there
            }
        }
    }
    return out;
}

json stats_to_json(const Instance& inst, const Stats& s) {
    json j;
    j["trials"] = s.trials;
    j["mean_alg"] = s.alg.mean;
    j["se_alg"] = s.alg.se;
    j["mean_ualg"] = s.ualg.mean;
    j["se_ualg"] = s.ualg.se;
    j["mean_blocked_count"] = s.blocked_count.mean;
    j["mean_blocked_value"] = s.blocked_value.mean;
    j["alg2_share"] = s.alg2_share;
    json loads = json::object();
    for (int e = 0; e < inst.num_items(); ++e)
        loads[inst.item_ids[e]] = {{"ualg_mean", s.ualg_load[e].mean},
                                   {"ualg_se", s.ualg_load[e].se},
                                   {"alg_mean", s.alg_load[e].mean}};
    j["item_loads"] = loads;
    return j;
}

} // namespace

std::string experiment_csv_header() {
    return "instance_id,mechanism,adversary,trials,mean_alg,ci_alg,mean_ualg,"
           "ci_ualg,mean_blocked_count,mean_blocked_value,fopt,fopt_gamma,gamma,"
           "ratio_fopt_over_alg";
}

std::string experiment_csv_row(const ExperimentRow& r) {
    std::ostringstream os;
    os << r.instance_id << ',' << r.mechanism << ',' << r.adversary << ','
       << r.trials << ',' << fmt(r.stats.alg.mean) << ','
       << fmt(r.stats.alg.ci95()) << ',' << fmt(r.stats.ualg.mean) << ','
       << fmt(r.stats.ualg.ci95()) << ',' << fmt(r.stats.blocked_count.mean) << ','
       << fmt(r.stats.blocked_value.mean) << ',' << fmt(r.fopt) << ','
       << fmt(r.fopt_gamma) << ',' << fmt(r.gamma) << ','
       << fmt(r.ratio_fopt_over_alg);
    return os.str();
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    auto instances = resolve_instances(config);

    ExperimentReport report;
    report.csv_path = config.out;
    report.sidecar_path = config.out + ".sidecar.json";

    json sidecar = json::array();
    std::ostringstream csv;
    csv << experiment_csv_header() << '\n';

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& named = instances[i];
        PipelineOptions opts;
        opts.gamma_override = config.gamma;
        opts.normalize = !config.skip_normalization;
        opts.ceil_randomization = config.ceil_randomization;
        Mechanism mech =
            make_mechanism(named.instance, mechanism_kind_from_string(config.mechanism),
                           opts);
        std::uint64_t row_seed = substream_seed(config.seed, "experiment", i);
        Stats stats = monte_carlo(named.instance, mech, config.trials,
                                  adversary_from_string(config.adversary), row_seed);

        ExperimentRow row;
        row.instance_id = named.id;
        row.mechanism = config.mechanism;
        row.adversary = config.adversary;
        row.trials = config.trials;
        row.stats = stats;
        row.fopt = mech.fopt;
        row.fopt_gamma = mech.fopt_gamma;
        row.gamma = mech.gamma;
        row.ratio_fopt_over_alg =
            stats.alg.mean > 0.0 ? mech.fopt / stats.alg.mean
                                 : std::numeric_limits<double>::infinity();
        csv << experiment_csv_row(row) << '\n';

        json side;
        side["instance_id"] = named.id;
        side["instance"] = json::parse(serialize_instance(named.instance));
        side["mechanism"] = config.mechanism;
        side["adversary"] = config.adversary;
        side["seed"] = config.seed;
        side["row_seed"] = row_seed;
        side["gamma"] = mech.gamma;
        side["fopt"] = mech.fopt;
        side["fopt_gamma"] = mech.fopt_gamma;
        side["solution"] = json::parse(
            serialize_solution(mech.lp_instance, mech.solution, mech.structures));
        json prov = json::array();
        for (auto b : mech.rmenu.provenance) prov.push_back(static_cast<int>(b));
        side["menu_provenance"] = prov;
        side["stats"] = stats_to_json(named.instance, stats);
        sidecar.push_back(std::move(side));

        report.rows.push_back(std::move(row));
    }

    std::ofstream csv_out(report.csv_path, std::ios::binary);
    if (!csv_out) throw Error("cannot write " + report.csv_path);
    csv_out << csv.str();
    std::ofstream side_out(report.sidecar_path, std::ios::binary);
    if (!side_out) throw Error("cannot write " + report.sidecar_path);
    side_out << sidecar.dump(1) << '\n';
    return report;
}

// ---- invariant batteries ----------------------------------------------

bool VerifyReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

VerifyCheck three_block_battery(int count, std::uint64_t seed, double tightness_tol) {
    VerifyCheck check;
    check.name = "lp_structure/three_block";
    int done = 0;
    try {
        for (int i = 0; i < count; ++i) {
            RngStream rng = substream(seed, "three_block", i);
            Instance inst;
            switch (i % 3) {
            case 0: {
                gen::SingleMindedParams p;
                p.d = 2;
                p.B = 1 + static_cast<int>(rng.below(2));
                inst = gen::random_single_minded(p, rng);
                break;
            }
            case 1: {
                gen::SingleMindedParams p;
                p.B = 1 + static_cast<int>(rng.below(2));
                inst = gen::random_single_minded(p, rng);
                break;
            }
            default: {
                gen::GraphParams p;
                inst = gen::random_graph_routing(p, rng);
                break;
            }
            }
            auto lp = build_ex_ante_lp(inst, scaling_factor(inst));
            // solve_and_classify throws StructureError on any violation.
            (void)solve_and_classify(inst, lp, true, SolverMode::Float,
                                     tightness_tol);
            ++done;
        }
        check.pass = true;
        check.detail = std::to_string(done) + " instances, zero violations";
    } catch (const Error& e) {
        check.pass = false;
        check.detail = "violation after " + std::to_string(done) +
                       " clean instances: " + e.what();
    }
    return check;
}

namespace {

/// Cheapest price the menu may ever post for each group: w when the
/// price-w branch fired, w + 1 otherwise.
std::vector<double> min_group_prices(const RandomizedMenu& rmenu,
                                     const std::vector<BundleStructure>& structures) {
    std::vector<double> prices(structures.size());
    for (std::size_t i = 0; i < structures.size(); ++i) {
        bool has_w_entry = rmenu.provenance[i] != MenuBranch::NoPriceW;
        prices[i] = static_cast<double>(structures[i].important_value) +
                    (has_w_entry ? 0.0 : 1.0);
    }
    return prices;
}

/// Every cover of group `s` by other demanded bundles must cost at least
/// the buyer's own dedicated price w_s + 1.
bool covers_subadditive(const Instance& inst,
                        const std::vector<BundleStructure>& structures,
                        const std::vector<double>& min_prices, std::size_t s,
                        std::string* fail) {
    const auto& target = structures[s].group.items;
    const std::size_t n = structures.size();
    double own = static_cast<double>(structures[s].important_value) + 1.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (mask & (1u << s)) continue;
        std::vector<char> covered(inst.num_items(), 0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) continue;
            for (int g : structures[i].group.items) covered[g] = 1;
            total += min_prices[i];
        }
        bool covers = true;
        for (int g : target)
            if (!covered[g]) covers = false;
        if (covers && total < own - 1e-9) {
            *fail = "bundle " + structures[s].group.label + " (price " +
                    std::to_string(own) + ") undercut by cover mask " +
                    std::to_string(mask) + " at " + std::to_string(total);
            return false;
        }
    }
    return true;
}

} // namespace

VerifyCheck subadditivity_battery(int instances, int trials_per_instance,
                                  std::uint64_t seed) {
    VerifyCheck check;
    check.name = "subadditivity/cover_prices+oracle_agreement";
    int states_checked = 0;
    try {
        for (int i = 0; i < instances; ++i) {
            RngStream rng = substream(seed, "subadd", i);
            gen::SingleMindedParams p;
            p.num_items = 3 + static_cast<int>(rng.below(3)); // <= 5 items
            p.num_buyers = 4 + static_cast<int>(rng.below(3));
            p.d = (i % 2 == 0) ? 2 : 0;
            p.max_value = 2 + static_cast<Value>(rng.below(2));
            Instance inst = gen::random_single_minded(p, rng);

            PipelineOptions opts;
            opts.solver = SolverMode::Exact;
            Mechanism mech = make_mechanism(inst, MechanismKind::LpMenu, opts);

            auto min_prices = min_group_prices(mech.rmenu, mech.structures);
            for (std::size_t s = 0; s < mech.structures.size(); ++s) {
                std::string fail;
                if (!covers_subadditive(mech.lp_instance, mech.structures, min_prices,
                                        s, &fail)) {
                    check.pass = false;
                    check.detail = fail;
                    return check;
                }
            }

            // Replay ALG states and compare the restricted policy against the
            // exhaustive utility maximizer.
            SimContext ctx = make_sim_context(inst);
            std::uint64_t run_seed = substream_seed(seed, "subadd_run", i);
            for (int t = 0; t < trials_per_instance; ++t) {
                RngStream menu_stream = substream(run_seed, "menu", t);
                RngStream mix_stream = substream(run_seed, "mix", t);
                RngStream real_stream = substream(run_seed, "realization", t);
                RngStream adv_stream = substream(run_seed, "adversary", t);
                Menu menu = draw_menu(inst, mech, menu_stream, mix_stream);
                if (menu.size() > oracle::kUtilityEntryLimit) continue;
                Realization real = sample_realization(inst, real_stream);
                auto order =
                    adversary_order(AdversaryTag::Random, ctx, menu, real, &adv_stream);

                std::vector<int> remaining = inst.capacities;
                for (int b : order.order) {
                    Value v = real.values[b];
                    int pick = buyer_choice(ctx, b, v, menu, remaining, RunMode::ALG);
                    double restricted =
                        pick >= 0 ? static_cast<double>(v) - menu[pick].price : 0.0;
                    auto best = oracle::brute_force_utility(ctx, b, v, menu, remaining,
                                                            RunMode::ALG);
                    if (std::abs(best.utility - restricted) > 1e-9) {
                        check.pass = false;
                        check.detail =
                            "buyer " + inst.buyers[b].name + " (value " +
                            std::to_string(v) + "): restricted utility " +
                            std::to_string(restricted) + " vs oracle " +
                            std::to_string(best.utility);
                        return check;
                    }
                    ++states_checked;
                    if (pick >= 0) {
                        --menu[pick].remaining;
                        for (int g : menu[pick].goods) --remaining[g];
                    }
                }
            }
        }
        check.pass = true;
        check.detail = std::to_string(instances) + " instances, " +
                       std::to_string(states_checked) + " menu states";
    } catch (const Error& e) {
        check.pass = false;
        check.detail = e.what();
    }
    return check;
}

VerifyCheck qi_battery(std::uint64_t seed) {
    VerifyCheck check;
    check.name = "qi/sampler+aam";
    using namespace lowerbound;
    try {
        RngStream rng = substream(seed, "qi_battery");

        QIFamily f2 = sample_qi_family(12, 2, 2, 4, false, rng);
        if (!f2.certified) throw Error("2-way family not certified");

        QIFamily f3 = sample_qi_family(48, 2, 3, 8, false, rng);
        if (!f3.certified) throw Error("3-way family not certified");

        QIFamily bal = sample_qi_family(12, 3, 2, 3, true, rng);
        for (const auto& part : bal.partitions) {
            std::vector<int> sizes(3, 0);
            for (int label : part) ++sizes[label];
            for (int s : sizes)
                if (s != 4) throw Error("balanced class size " + std::to_string(s));
        }

        // Identical partitions can never be qualitatively independent.
        QIFamily dup;
        dup.ground_size = 4;
        dup.classes = 2;
        dup.order = 2;
        dup.partitions = {{0, 0, 1, 1}, {0, 0, 1, 1}};
        auto verdict = verify_qi(dup, 2);
        if (verdict.qi || !verdict.counterexample)
            throw Error("duplicate family wrongly certified");

        CoveringFamily good;
        good.p = 2;
        good.ell = 2;
        good.vectors = {{0, 0}, {0, 1}};
        QIFamily mapped = aam_to_qi(good);
        if (!mapped.certified || mapped.ground_size != 4)
            throw Error("aam_to_qi on a valid family failed");

        CoveringFamily bad;
        bad.p = 2;
        bad.ell = 2;
        bad.vectors = {{0, 0}, {1, 1}};
        bool rejected = false;
        try {
            (void)aam_to_qi(bad);
        } catch (const ValidationError&) {
            rejected = true;
        }
        if (!rejected) throw Error("invalid covering family accepted");

        check.pass = true;
        check.detail = "sampler, balance, negative, and AAM checks passed";
    } catch (const Error& e) {
        check.pass = false;
        check.detail = e.what();
    }
    return check;
}

VerifyCheck pbd_battery(int count, std::uint64_t seed) {
    VerifyCheck check;
    check.name = "pbd/tail_bound";
    RngStream rng = substream(seed, "pbd");
    for (int i = 0; i < count; ++i) {
        std::size_t len = rng.below(oracle::kPbdLengthLimit + 1);
        std::vector<double> probs(len);
        for (auto& p : probs) p = rng.next_unit();
        auto verdict = oracle::pbd_tail_check(probs);
        if (!verdict.holds) {
            check.pass = false;
            check.detail = "violation at vector " + std::to_string(i) + ": tail " +
                           std::to_string(verdict.tail) + " < bound " +
                           std::to_string(verdict.bound);
            return check;
        }
    }
    check.pass = true;
    check.detail = std::to_string(count) + " random vectors";
    return check;
}

VerifyReport verify_suite(const std::string& scope, std::uint64_t seed) {
    VerifyReport report;
    bool all = scope == "all";
    if (all || scope == "lp_structure")
        report.checks.push_back(three_block_battery(100, seed));
    if (all || scope == "subadditivity")
        report.checks.push_back(subadditivity_battery(10, 5, seed));
    if (all || scope == "qi") report.checks.push_back(qi_battery(seed));
    if (all || scope == "pbd") report.checks.push_back(pbd_battery(10000, seed));
    if (report.checks.empty())
        throw ValidationError("verify: unknown scope '" + scope + "'");
    return report;
}

} // namespace bp
