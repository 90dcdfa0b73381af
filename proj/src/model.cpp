#include "bp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bp {

using nlohmann::json;

std::string to_string(InstanceKind kind) {
    switch (kind) {
    case InstanceKind::DSingleMinded: return "d_single_minded";
    case InstanceKind::GeneralSingleMinded: return "general_single_minded";
    case InstanceKind::GraphRouting: return "graph_routing";
    case InstanceKind::Tree: return "tree";
    }
    return "?";
}

InstanceKind instance_kind_from_string(const std::string& s) {
    if (s == "d_single_minded") return InstanceKind::DSingleMinded;
    if (s == "general_single_minded") return InstanceKind::GeneralSingleMinded;
    if (s == "graph_routing") return InstanceKind::GraphRouting;
    if (s == "tree") return InstanceKind::Tree;
    throw ParseError("unknown instance kind '" + s + "'");
}

Value ValueDistribution::max_value() const {
    Value r = 0;
    for (const auto& [v, p] : pmf)
        if (p > 0.0) r = std::max(r, v);
    return r;
}

double ValueDistribution::prob(Value v) const {
    auto it = pmf.find(v);
    return it == pmf.end() ? 0.0 : it->second;
}

std::vector<Value> ValueDistribution::support() const {
    std::vector<Value> s;
    for (const auto& [v, p] : pmf)
        if (p > 0.0) s.push_back(v);
    return s;
}

void ValueDistribution::validate(const std::string& context) const {
    if (pmf.empty())
        throw ValidationError(context + ": empty pmf");
    double total = 0.0;
    for (const auto& [v, p] : pmf) {
        if (v < 0)
            throw ValidationError(context + ": negative value " + std::to_string(v) +
                                  " in pmf (values must be nonnegative integers)");
        if (p < 0.0 || p > 1.0)
            throw ValidationError(context + ": probability of value " +
                                  std::to_string(v) + " outside [0,1]");
        total += p;
    }
    if (std::abs(total - 1.0) > kPmfTolerance)
        throw ValidationError(context + ": pmf sums to " + std::to_string(total) +
                              ", expected 1 within 1e-12");
}

int Graph::node_index(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::vector<int>> Graph::adjacency() const {
    std::vector<std::vector<int>> adj(nodes.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        adj[edges[e].u].push_back(static_cast<int>(e));
        adj[edges[e].v].push_back(static_cast<int>(e));
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

namespace {

void dfs_paths(const Graph& g, const std::vector<std::vector<int>>& adj, int node,
               int target, std::vector<char>& visited, std::vector<int>& stack,
               std::vector<std::vector<int>>& out, std::size_t max_paths) {
    if (node == target) {
        if (out.size() >= max_paths)
            throw SizeLimitError("path enumeration exceeded max_paths = " +
                                 std::to_string(max_paths));
        out.push_back(stack);
        return;
    }
    visited[node] = 1;
    for (int e : adj[node]) {
        const Edge& edge = g.edges[e];
        int next = edge.u == node ? edge.v : edge.u;
        if (visited[next]) continue;
        stack.push_back(e);
        dfs_paths(g, adj, next, target, visited, stack, out, max_paths);
        stack.pop_back();
    }
    visited[node] = 0;
}

} // namespace

std::vector<std::vector<int>> enumerate_simple_paths(const Graph& g, int source,
                                                     int target,
                                                     std::size_t max_paths) {
    std::vector<std::vector<int>> out;
    if (source == target) return out;
    auto adj = g.adjacency();
    std::vector<char> visited(g.nodes.size(), 0);
    std::vector<int> stack;
    dfs_paths(g, adj, source, target, visited, stack, out, max_paths);
    return out;
}

std::vector<int> Tree::path_edges(int u, int v) const {
    // Walk both endpoints to the root, then drop the common suffix.
    auto climb = [&](int x) {
        std::vector<int> chain{x};
        while (parent[x] != -1) {
            x = parent[x];
            chain.push_back(x);
        }
        return chain;
    };
    std::vector<int> cu = climb(u), cv = climb(v);
    while (cu.size() > 1 && cv.size() > 1 &&
           cu[cu.size() - 2] == cv[cv.size() - 2]) {
        cu.pop_back();
        cv.pop_back();
    }
    std::vector<int> edges;
    for (std::size_t i = 0; i + 1 < cu.size(); ++i) edges.push_back(edge_of_node[cu[i]]);
    for (std::size_t i = 0; i + 1 < cv.size(); ++i) edges.push_back(edge_of_node[cv[i]]);
    std::sort(edges.begin(), edges.end());
    return edges;
}

int Instance::min_capacity() const {
    int b = 0;
    for (std::size_t i = 0; i < capacities.size(); ++i)
        b = (i == 0) ? capacities[i] : std::min(b, capacities[i]);
    return b;
}

Value Instance::max_value() const {
    Value r = 0;
    for (const auto& b : buyers) r = std::max(r, b.dist.max_value());
    return r;
}

int Instance::item_index(const std::string& id) const {
    for (std::size_t i = 0; i < item_ids.size(); ++i)
        if (item_ids[i] == id) return static_cast<int>(i);
    return -1;
}

void Instance::validate() const {
    if (item_ids.empty()) throw ValidationError("instance has no items");
    if (capacities.size() != item_ids.size())
        throw ValidationError("capacities/items size mismatch");
    for (std::size_t i = 0; i < capacities.size(); ++i)
        if (capacities[i] < 1)
            throw ValidationError("item '" + item_ids[i] + "': capacity must be >= 1");
    if (buyers.empty()) throw ValidationError("instance has no buyers");

    const bool routing = kind == InstanceKind::GraphRouting;
    if (routing && !graph) throw ValidationError("graph_routing instance without graph");
    if (kind == InstanceKind::Tree && !tree)
        throw ValidationError("tree instance without tree");
    if (kind == InstanceKind::DSingleMinded && d < 1)
        throw ValidationError("d_single_minded instance requires d >= 1");

    for (const auto& b : buyers) {
        const std::string ctx = "buyer '" + b.name + "'";
        b.dist.validate(ctx);
        if (routing) {
            if (b.source < 0 || b.target < 0 ||
                b.source >= static_cast<int>(graph->nodes.size()) ||
                b.target >= static_cast<int>(graph->nodes.size()))
                throw ValidationError(ctx + ": endpoint not in graph");
            if (b.source == b.target)
                throw ValidationError(ctx + ": source equals target");
        } else {
            if (b.bundle.empty()) throw ValidationError(ctx + ": empty bundle");
            for (int e : b.bundle)
                if (e < 0 || e >= num_items())
                    throw ValidationError(ctx + ": demanded item index out of range");
            if (kind == InstanceKind::DSingleMinded &&
                static_cast<int>(b.bundle.size()) > d)
                throw ValidationError(ctx + ": bundle size " +
                                      std::to_string(b.bundle.size()) +
                                      " exceeds d = " + std::to_string(d));
        }
    }

    if (kind == InstanceKind::Tree) {
        for (int c : capacities)
            if (c != 1) throw ValidationError("tree instances require unit capacities");
        for (const auto& b : buyers) {
            for (const auto& [v, p] : b.dist.pmf)
                if (p > 0.0 && v != 0 && v != 1)
                    throw ValidationError("buyer '" + b.name +
                                          "': tree instances require {0,1} values");
        }
    }
}

namespace {

ValueDistribution parse_pmf(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": pmf must be an object");
    ValueDistribution dist;
    for (const auto& [key, val] : j.items()) {
        Value v;
        try {
            std::size_t pos = 0;
            v = std::stoll(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ParseError(ctx + ": pmf key '" + key + "' is not an integer");
        }
        if (!val.is_number()) throw ParseError(ctx + ": pmf value must be a number");
        dist.pmf[v] = val.get<double>();
    }
    return dist;
}

json pmf_to_json(const ValueDistribution& d) {
    json j = json::object();
    for (const auto& [v, p] : d.pmf) j[std::to_string(v)] = p;
    return j;
}

} // namespace

Instance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance JSON: ") + e.what());
    }

    Instance inst;
    if (!j.contains("kind")) throw ParseError("instance missing 'kind'");
    inst.kind = instance_kind_from_string(j.at("kind").get<std::string>());
    if (inst.kind == InstanceKind::DSingleMinded) {
        if (!j.contains("d")) throw ParseError("d_single_minded instance missing 'd'");
        inst.d = j.at("d").get<int>();
    }

    if (inst.kind == InstanceKind::GraphRouting) {
        if (!j.contains("graph")) throw ParseError("graph_routing instance missing 'graph'");
        Graph g;
        for (const auto& n : j.at("graph").at("nodes"))
            g.nodes.push_back(n.get<std::string>());
        for (const auto& je : j.at("graph").at("edges")) {
            Edge e;
            e.id = je.at("id").get<std::string>();
            e.u = g.node_index(je.at("u").get<std::string>());
            e.v = g.node_index(je.at("v").get<std::string>());
            e.capacity = je.value("capacity", 1);
            if (e.u < 0 || e.v < 0)
                throw ParseError("edge '" + e.id + "': unknown endpoint");
            g.edges.push_back(e);
            inst.item_ids.push_back(e.id);
            inst.capacities.push_back(e.capacity);
        }
        inst.graph = std::move(g);
    } else if (inst.kind == InstanceKind::Tree) {
        if (!j.contains("tree")) throw ParseError("tree instance missing 'tree'");
        Tree t;
        const auto& jt = j.at("tree");
        std::vector<std::pair<std::string, std::string>> links; // (node, parent)
        std::set<std::string> names;
        const std::string root_name = jt.at("root").get<std::string>();
        names.insert(root_name);
        for (const auto& jp : jt.at("parents")) {
            links.emplace_back(jp.at("node").get<std::string>(),
                               jp.at("parent").get<std::string>());
            names.insert(links.back().first);
            names.insert(links.back().second);
        }
        t.nodes.assign(names.begin(), names.end());
        auto idx = [&](const std::string& n) {
            return static_cast<int>(std::lower_bound(t.nodes.begin(), t.nodes.end(), n) -
                                    t.nodes.begin());
        };
        t.root = idx(root_name);
        t.parent.assign(t.nodes.size(), -1);
        for (const auto& [node, par] : links) {
            if (node == root_name)
                throw ParseError("tree root '" + root_name + "' listed with a parent");
            if (t.parent[idx(node)] != -1)
                throw ParseError("tree node '" + node + "' has two parents");
            t.parent[idx(node)] = idx(par);
        }
        t.edge_of_node.assign(t.nodes.size(), -1);
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            if (static_cast<int>(i) == t.root) continue;
            if (t.parent[i] == -1)
                throw ParseError("tree node '" + t.nodes[i] + "' is disconnected");
            t.edge_of_node[i] = static_cast<int>(t.edge_ids.size());
            t.edge_ids.push_back(t.nodes[i]);
            inst.item_ids.push_back(t.nodes[i]);
            inst.capacities.push_back(1);
        }
        // Reject cycles: climbing from any node must reach the root.
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            int x = static_cast<int>(i), steps = 0;
            while (t.parent[x] != -1) {
                x = t.parent[x];
                if (++steps > static_cast<int>(t.nodes.size()))
                    throw ParseError("tree parent links contain a cycle");
            }
            if (x != t.root) throw ParseError("tree parent links contain a cycle");
        }
        inst.tree = std::move(t);
    } else {
        if (!j.contains("items")) throw ParseError("instance missing 'items'");
        for (const auto& ji : j.at("items")) {
            inst.item_ids.push_back(ji.at("id").get<std::string>());
            inst.capacities.push_back(ji.value("capacity", 1));
        }
    }

    if (!j.contains("buyers")) throw ParseError("instance missing 'buyers'");
    for (const auto& jb : j.at("buyers")) {
        Buyer b;
        b.id = static_cast<int>(inst.buyers.size());
        b.name = jb.contains("id") ? jb.at("id").get<std::string>()
                                   : "b" + std::to_string(b.id);
        b.dist = parse_pmf(jb.at("pmf"), "buyer '" + b.name + "'");
        if (inst.kind == InstanceKind::GraphRouting) {
            const auto& pair = jb.at("pair");
            b.source = inst.graph->node_index(pair.at(0).get<std::string>());
            b.target = inst.graph->node_index(pair.at(1).get<std::string>());
        } else if (inst.kind == InstanceKind::Tree) {
            const auto& pair = jb.at("pair");
            auto node = [&](const json& x) {
                const std::string n = x.get<std::string>();
                auto it = std::lower_bound(inst.tree->nodes.begin(),
                                           inst.tree->nodes.end(), n);
                if (it == inst.tree->nodes.end() || *it != n)
                    throw ParseError("buyer '" + b.name + "': unknown tree node '" + n + "'");
                return static_cast<int>(it - inst.tree->nodes.begin());
            };
            int u = node(pair.at(0)), v = node(pair.at(1));
            if (u == v)
                throw ValidationError("buyer '" + b.name + "': pair endpoints coincide");
            b.bundle = inst.tree->path_edges(u, v);
            b.source = u;
            b.target = v;
        } else {
            if (!jb.contains("bundle"))
                throw ParseError("buyer '" + b.name + "' missing 'bundle'");
            for (const auto& ji : jb.at("bundle")) {
                int e = inst.item_index(ji.get<std::string>());
                if (e < 0)
                    throw ValidationError("buyer '" + b.name + "': demands unknown item '" +
                                          ji.get<std::string>() + "'");
                b.bundle.push_back(e);
            }
            std::sort(b.bundle.begin(), b.bundle.end());
            b.bundle.erase(std::unique(b.bundle.begin(), b.bundle.end()),
                           b.bundle.end());
        }
        inst.buyers.push_back(std::move(b));
    }

    inst.validate();
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string serialize_instance(const Instance& inst) {
    json j;
    j["kind"] = to_string(inst.kind);
    if (inst.kind == InstanceKind::DSingleMinded) j["d"] = inst.d;
    if (inst.kind == InstanceKind::GraphRouting) {
        json nodes = json::array(), edges = json::array();
        for (const auto& n : inst.graph->nodes) nodes.push_back(n);
        for (const auto& e : inst.graph->edges)
            edges.push_back({{"id", e.id},
                             {"u", inst.graph->nodes[e.u]},
                             {"v", inst.graph->nodes[e.v]},
                             {"capacity", e.capacity}});
        j["graph"] = {{"nodes", nodes}, {"edges", edges}};
    } else if (inst.kind == InstanceKind::Tree) {
        json parents = json::array();
        const Tree& t = *inst.tree;
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            if (static_cast<int>(i) == t.root) continue;
            parents.push_back({{"node", t.nodes[i]}, {"parent", t.nodes[t.parent[i]]}});
        }
        j["tree"] = {{"root", t.nodes[t.root]}, {"parents", parents}};
    } else {
        json items = json::array();
        for (int i = 0; i < inst.num_items(); ++i)
            items.push_back({{"id", inst.item_ids[i]}, {"capacity", inst.capacities[i]}});
        j["items"] = items;
    }
    json buyers = json::array();
    for (const auto& b : inst.buyers) {
        json jb;
        jb["id"] = b.name;
        if (inst.kind == InstanceKind::GraphRouting)
            jb["pair"] = {inst.graph->nodes[b.source], inst.graph->nodes[b.target]};
        else if (inst.kind == InstanceKind::Tree)
            jb["pair"] = {inst.tree->nodes[b.source], inst.tree->nodes[b.target]};
        else {
            json bundle = json::array();
            for (int e : b.bundle) bundle.push_back(inst.item_ids[e]);
            jb["bundle"] = bundle;
        }
        jb["pmf"] = pmf_to_json(b.dist);
        buyers.push_back(jb);
    }
    j["buyers"] = buyers;
    return j.dump(2);
}

Realization sample_realization(const Instance& inst, RngStream& stream) {
    Realization r;
    r.values.reserve(inst.buyers.size());
    for (const auto& b : inst.buyers) {
        double u = stream.next_unit();
        double acc = 0.0;
        Value chosen = b.dist.pmf.rbegin()->first;
        for (const auto& [v, p] : b.dist.pmf) {
            acc += p;
            if (u < acc) {
                chosen = v;
                break;
            }
        }
        r.values.push_back(chosen);
    }
    return r;
}

std::string serialize_realization(const Instance& inst, const Realization& r) {
    json j = json::object();
    for (std::size_t i = 0; i < r.values.size(); ++i)
        j[inst.buyers[i].name] = r.values[i];
    return j.dump();
}

} // namespace bp
