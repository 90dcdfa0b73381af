#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bp/errors.hpp"
#include "bp/rng.hpp"

namespace bp {

using Value = std::int64_t;

enum class InstanceKind { DSingleMinded, GeneralSingleMinded, GraphRouting, Tree };

std::string to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(const std::string& s);

/// Discrete distribution over nonnegative integer values.
/// Probabilities must sum to 1 within kPmfTolerance.
struct ValueDistribution {
    std::map<Value, double> pmf;

    static constexpr double kPmfTolerance = 1e-12;

    Value max_value() const;
    double prob(Value v) const;
    /// Values with strictly positive mass, ascending.
    std::vector<Value> support() const;
    void validate(const std::string& context) const;

    bool operator==(const ValueDistribution&) const = default;
};

struct Buyer {
    int id = -1;
    std::string name;
    /// Item indices, sorted and deduplicated. For graph instances this is
    /// empty; the demand is the (source, target) pair below.
    std::vector<int> bundle;
    int source = -1;
    int target = -1;
    ValueDistribution dist;

    bool operator==(const Buyer&) const = default;
};

struct Edge {
    std::string id;
    int u = -1;
    int v = -1;
    int capacity = 1;

    bool operator==(const Edge&) const = default;
};

/// Undirected multigraph; items of a routing instance are its edges.
struct Graph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    int node_index(const std::string& name) const;
    /// Edge indices incident to node, ascending.
    std::vector<std::vector<int>> adjacency() const;

    bool operator==(const Graph&) const = default;
};

/// All simple u-v paths as edge-index sequences. DFS explores neighbors in
/// ascending edge-index order, so the enumeration order is deterministic.
/// Throws SizeLimitError when more than max_paths paths exist.
std::vector<std::vector<int>> enumerate_simple_paths(const Graph& g, int source,
                                                     int target,
                                                     std::size_t max_paths);

struct Tree {
    std::vector<std::string> nodes;
    std::vector<int> parent; // parent[i] == -1 exactly at the root
    int root = -1;

    /// Edge ids are the child node names; edge index i corresponds to the
    /// i-th non-root node in `nodes` order.
    std::vector<int> edge_of_node; // node -> edge index (-1 for root)
    std::vector<std::string> edge_ids;

    /// Edge set of the unique u-v path.
    std::vector<int> path_edges(int u, int v) const;

    bool operator==(const Tree&) const = default;
};

struct Instance {
    InstanceKind kind = InstanceKind::GeneralSingleMinded;
    int d = 0; // bundle-size cap, DSingleMinded only
    std::vector<std::string> item_ids;
    std::vector<int> capacities;
    std::vector<Buyer> buyers;
    std::optional<Graph> graph;
    std::optional<Tree> tree;

    int num_items() const { return static_cast<int>(item_ids.size()); }
    int num_buyers() const { return static_cast<int>(buyers.size()); }
    /// Minimum item capacity B.
    int min_capacity() const;
    /// Max support value over all buyers (R).
    Value max_value() const;
    int item_index(const std::string& id) const;

    void validate() const;

    bool operator==(const Instance&) const = default;
};

struct Realization {
    std::vector<Value> values; // indexed by buyer id
    std::uint64_t stream_seed = 0;

    bool operator==(const Realization&) const = default;
};

Instance load_instance(const std::string& path);
Instance parse_instance(const std::string& json_text);
std::string serialize_instance(const Instance& inst);

/// Independent draws from each buyer's pmf; deterministic given the stream.
Realization sample_realization(const Instance& inst, RngStream& stream);

std::string serialize_realization(const Instance& inst, const Realization& r);

} // namespace bp
