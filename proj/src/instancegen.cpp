#include "bp/instancegen.hpp"

#include <algorithm>
#include <numeric>

namespace bp {
namespace gen {

namespace {

ValueDistribution random_full_pmf(Value max_value, RngStream& rng) {
    ValueDistribution dist;
    double total = 0.0;
    for (Value v = 0; v <= max_value; ++v) {
        double w = 0.05 + rng.next_unit();
        dist.pmf[v] = w;
        total += w;
    }
    for (auto& [v, p] : dist.pmf) p /= total;
    return dist;
}

ValueDistribution bernoulli_pmf(double q) {
    ValueDistribution dist;
    dist.pmf[0] = 1.0 - q;
    dist.pmf[1] = q;
    return dist;
}

std::vector<int> random_capacities(int m, int B, int extra, RngStream& rng) {
    std::vector<int> caps(m);
    for (int i = 0; i < m; ++i)
        caps[i] = B + static_cast<int>(rng.below(extra + 1));
    caps[rng.below(m)] = B; // pin the minimum
    return caps;
}

std::vector<int> random_bundle(int m, int max_size, RngStream& rng) {
    int size = 1 + static_cast<int>(rng.below(std::min(max_size, m)));
    std::vector<int> items(m);
    std::iota(items.begin(), items.end(), 0);
    rng.shuffle(items);
    items.resize(size);
    std::sort(items.begin(), items.end());
    return items;
}

} // namespace

Instance random_single_minded(const SingleMindedParams& params, RngStream& rng) {
    Instance inst;
    inst.kind = params.d > 0 ? InstanceKind::DSingleMinded
                             : InstanceKind::GeneralSingleMinded;
    inst.d = params.d;
    for (int i = 0; i < params.num_items; ++i)
        inst.item_ids.push_back("e" + std::to_string(i));
    inst.capacities =
        random_capacities(params.num_items, params.B, params.max_extra_capacity, rng);
    int max_size = params.d > 0 ? params.d : params.num_items;
    for (int b = 0; b < params.num_buyers; ++b) {
        Buyer buyer;
        buyer.id = b;
        buyer.name = "b" + std::to_string(b);
        buyer.bundle = random_bundle(params.num_items, max_size, rng);
        buyer.dist = random_full_pmf(params.max_value, rng);
        inst.buyers.push_back(std::move(buyer));
    }
    inst.validate();
    return inst;
}

Instance random_graph_routing(const GraphParams& params, RngStream& rng) {
    Instance inst;
    inst.kind = InstanceKind::GraphRouting;
    Graph g;
    for (int i = 0; i < params.num_nodes; ++i)
        g.nodes.push_back("v" + std::to_string(i));
    // Random spanning tree, then extra edges between distinct non-adjacent
    // pairs (duplicates allowed; it is a multigraph).
    for (int i = 1; i < params.num_nodes; ++i) {
        Edge e;
        e.id = "e" + std::to_string(g.edges.size());
        e.u = static_cast<int>(rng.below(i));
        e.v = i;
        g.edges.push_back(e);
    }
    for (int k = 0; k < params.extra_edges; ++k) {
        int u = static_cast<int>(rng.below(params.num_nodes));
        int v = static_cast<int>(rng.below(params.num_nodes));
        if (u == v) continue;
        Edge e;
        e.id = "e" + std::to_string(g.edges.size());
        e.u = std::min(u, v);
        e.v = std::max(u, v);
        g.edges.push_back(e);
    }
    auto caps = random_capacities(static_cast<int>(g.edges.size()), params.B,
                                  params.max_extra_capacity, rng);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        g.edges[i].capacity = caps[i];
        inst.item_ids.push_back(g.edges[i].id);
        inst.capacities.push_back(caps[i]);
    }
    inst.graph = std::move(g);
    for (int b = 0; b < params.num_buyers; ++b) {
        Buyer buyer;
        buyer.id = b;
        buyer.name = "b" + std::to_string(b);
        buyer.source = static_cast<int>(rng.below(params.num_nodes));
        do {
            buyer.target = static_cast<int>(rng.below(params.num_nodes));
        } while (buyer.target == buyer.source);
        buyer.dist = random_full_pmf(params.max_value, rng);
        inst.buyers.push_back(std::move(buyer));
    }
    inst.validate();
    return inst;
}

Instance random_tree(const TreeParams& params, RngStream& rng) {
    Instance inst;
    inst.kind = InstanceKind::Tree;
    Tree t;
    for (int i = 0; i < params.num_nodes; ++i)
        t.nodes.push_back("v" + std::to_string(i));
    t.root = 0;
    t.parent.assign(params.num_nodes, -1);
    t.edge_of_node.assign(params.num_nodes, -1);
    for (int i = 1; i < params.num_nodes; ++i) {
        t.parent[i] = static_cast<int>(rng.below(i));
        t.edge_of_node[i] = static_cast<int>(t.edge_ids.size());
        t.edge_ids.push_back(t.nodes[i]);
        inst.item_ids.push_back(t.nodes[i]);
        inst.capacities.push_back(1);
    }
    inst.tree = std::move(t);
    for (int b = 0; b < params.num_buyers; ++b) {
        Buyer buyer;
        buyer.id = b;
        buyer.name = "b" + std::to_string(b);
        buyer.source = static_cast<int>(rng.below(params.num_nodes));
        do {
            buyer.target = static_cast<int>(rng.below(params.num_nodes));
        } while (buyer.target == buyer.source);
        buyer.bundle = inst.tree->path_edges(buyer.source, buyer.target);
        buyer.dist = bernoulli_pmf(0.1 + 0.8 * rng.next_unit());
        inst.buyers.push_back(std::move(buyer));
    }
    inst.validate();
    return inst;
}

} // namespace gen
} // namespace bp
