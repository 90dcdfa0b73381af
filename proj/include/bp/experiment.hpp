#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bp/instancegen.hpp"
#include "bp/mechanism.hpp"
#include "bp/sim.hpp"

namespace bp {

/// Parameter grid for generated instances; vectors expand to the Cartesian
/// product, `count` instances per combination.
struct GenerateSpec {
    std::string kind = "general_single_minded";
    std::vector<int> d{2};
    std::vector<int> B{1};
    std::vector<int> m{5};
    int n = 5;
    Value R = 3;
    int count = 1;
};

struct ExperimentConfig {
    std::string instance_path;
    std::optional<GenerateSpec> generate;
    std::string mechanism = "lp_menu";
    std::uint64_t trials = 100000;
    std::string adversary = "random";
    std::uint64_t seed = 1;
    std::string out = "results.csv";
    std::optional<double> gamma;
    bool ceil_randomization = false;
    bool skip_normalization = false;

    void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);

struct ExperimentRow {
    std::string instance_id;
    std::string mechanism;
    std::string adversary;
    std::uint64_t trials = 0;
    Stats stats;
    double fopt = 0.0;
    double fopt_gamma = 0.0;
    double gamma = 1.0;
    double ratio_fopt_over_alg = 0.0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::string csv_path;
    std::string sidecar_path;
};

/// Full pipeline per instance: LP, menu, Monte Carlo; emits one CSV row per
/// instance plus a JSON sidecar carrying everything needed to recompute the
/// CSV numbers. Byte-identical output for identical config and seed.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string experiment_csv_header();
std::string experiment_csv_row(const ExperimentRow& row);

// ---- invariant batteries ----------------------------------------------

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const;
};

/// Scope: lp_structure | subadditivity | qi | pbd | all.
VerifyReport verify_suite(const std::string& scope, std::uint64_t seed = 1);

/// Three-block classification on `count` random instances rotating through
/// the three settings; any StructureError fails the battery.
VerifyCheck three_block_battery(int count, std::uint64_t seed,
                                double tightness_tol = kTightnessTolerance);

/// Exhaustive cover-price check plus restricted-policy-vs-oracle agreement
/// on small instances solved in exact arithmetic.
VerifyCheck subadditivity_battery(int instances, int trials_per_instance,
                                  std::uint64_t seed);

VerifyCheck qi_battery(std::uint64_t seed);

VerifyCheck pbd_battery(int count, std::uint64_t seed);

} // namespace bp
