#pragma once

#include "bp/model.hpp"
#include "bp/rng.hpp"

namespace bp {
namespace gen {

/// Random single-minded instance with full common support {0..R}: every
/// buyer has positive mass on every value, so no support extension is
/// needed and the minimum capacity is exactly B.
struct SingleMindedParams {
    int num_items = 5;
    int num_buyers = 5;
    int d = 0; // 0: general single-minded, else bundle-size cap
    int B = 1;
    int max_extra_capacity = 2; // capacities drawn from [B, B + extra]
    Value max_value = 3;
};

Instance random_single_minded(const SingleMindedParams& params, RngStream& rng);

struct GraphParams {
    int num_nodes = 5;
    int extra_edges = 2; // edges beyond the random spanning tree
    int num_buyers = 4;
    int B = 1;
    int max_extra_capacity = 1;
    Value max_value = 3;
};

Instance random_graph_routing(const GraphParams& params, RngStream& rng);

struct TreeParams {
    int num_nodes = 8;
    int num_buyers = 5;
};

/// Unit capacities, Bernoulli values (activation probability in [0.1, 0.9]).
Instance random_tree(const TreeParams& params, RngStream& rng);

} // namespace gen
} // namespace bp
