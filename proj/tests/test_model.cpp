#include <doctest.h>

#include <cmath>
#include <map>

#include "bp/instancegen.hpp"
#include "bp/model.hpp"

using namespace bp;

TEST_SUITE_BEGIN("model");

namespace {

const char* kMinimal = R"({
  "kind": "general_single_minded",
  "items": [{"id": "e0", "capacity": 1}],
  "buyers": [{"id": "b0", "bundle": ["e0"], "pmf": {"1": 1.0}}]
})";

const char* kPathGraph = R"({
  "kind": "graph_routing",
  "graph": {"nodes": ["s", "u", "t"],
            "edges": [{"id": "su", "u": "s", "v": "u", "capacity": 1},
                      {"id": "ut", "u": "u", "v": "t", "capacity": 1}]},
  "buyers": [{"id": "b0", "pair": ["s", "t"], "pmf": {"1": 1.0}}]
})";

} // namespace

TEST_CASE("minimal instance loads") {
    Instance inst = parse_instance(kMinimal);
    CHECK(inst.num_items() == 1);
    CHECK(inst.num_buyers() == 1);
    CHECK(inst.min_capacity() == 1);
    CHECK(inst.max_value() == 1);
}

TEST_CASE("pmf summing to 0.9 is rejected naming the buyer") {
    const char* bad = R"({
      "kind": "general_single_minded",
      "items": [{"id": "e0", "capacity": 1}],
      "buyers": [{"id": "b7", "bundle": ["e0"], "pmf": {"1": 0.9}}]
    })";
    try {
        parse_instance(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("b7") != std::string::npos);
    }
}

TEST_CASE("smallest routing instance") {
    Instance inst = parse_instance(kPathGraph);
    CHECK(inst.kind == InstanceKind::GraphRouting);
    CHECK(inst.num_items() == 2);
    CHECK(inst.buyers[0].source != inst.buyers[0].target);
}

TEST_CASE("d cap is enforced") {
    const char* bad = R"({
      "kind": "d_single_minded", "d": 1,
      "items": [{"id": "a", "capacity": 1}, {"id": "b", "capacity": 1}],
      "buyers": [{"id": "b0", "bundle": ["a", "b"], "pmf": {"1": 1.0}}]
    })";
    CHECK_THROWS_AS(parse_instance(bad), ValidationError);
}

TEST_CASE("deterministic pmf always realizes its point mass") {
    Instance inst = parse_instance(kMinimal);
    inst.buyers[0].dist.pmf = {{5, 1.0}};
    RngStream rng(42);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_realization(inst, rng).values[0] == 5);
}

TEST_CASE("empirical mean of a fair coin pmf") {
    Instance inst = parse_instance(kMinimal);
    inst.buyers[0].dist.pmf = {{0, 0.5}, {1, 0.5}};
    RngStream rng(123);
    double sum = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        sum += static_cast<double>(sample_realization(inst, rng).values[0]);
    CHECK(std::abs(sum / draws - 0.5) < 0.01);
}

TEST_CASE("same stream seed reproduces the realization") {
    Instance inst = parse_instance(kMinimal);
    inst.buyers[0].dist.pmf = {{0, 0.3}, {2, 0.7}};
    RngStream a(99), b(99);
    for (int i = 0; i < 50; ++i)
        CHECK(sample_realization(inst, a) == sample_realization(inst, b));
}

TEST_CASE("empirical marginals match each pmf within 3 sigma") {
    RngStream gen(7);
    gen::SingleMindedParams params;
    Instance inst = gen::random_single_minded(params, gen);
    const int draws = 10000;
    std::vector<std::map<Value, int>> counts(inst.num_buyers());
    RngStream rng(11);
    for (int i = 0; i < draws; ++i) {
        auto real = sample_realization(inst, rng);
        for (int b = 0; b < inst.num_buyers(); ++b) ++counts[b][real.values[b]];
    }
    for (int b = 0; b < inst.num_buyers(); ++b) {
        for (const auto& [v, q] : inst.buyers[b].dist.pmf) {
            double freq = static_cast<double>(counts[b][v]) / draws;
            double sigma = std::sqrt(q * (1 - q) / draws);
            CHECK(std::abs(freq - q) <= 3.5 * sigma + 1e-12);
        }
    }
}

TEST_CASE("serialize/parse round trip on every kind") {
    RngStream rng(5);
    gen::SingleMindedParams sm;
    sm.d = 2;
    Instance a = gen::random_single_minded(sm, rng);
    CHECK(parse_instance(serialize_instance(a)) == a);

    gen::GraphParams gp;
    Instance g = gen::random_graph_routing(gp, rng);
    CHECK(parse_instance(serialize_instance(g)) == g);

    gen::TreeParams tp;
    Instance t = gen::random_tree(tp, rng);
    CHECK(parse_instance(serialize_instance(t)) == t);
}

TEST_CASE("derived quantities equal their recomputation") {
    RngStream rng(21);
    gen::SingleMindedParams params;
    params.B = 2;
    params.max_extra_capacity = 3;
    Instance inst = gen::random_single_minded(params, rng);
    int b = inst.capacities[0];
    for (int c : inst.capacities) b = std::min(b, c);
    CHECK(inst.min_capacity() == b);
    CHECK(inst.min_capacity() == 2);
    CHECK(inst.num_items() == static_cast<int>(inst.item_ids.size()));
    CHECK(inst.num_buyers() == static_cast<int>(inst.buyers.size()));
}

TEST_CASE("tree pairs expand to the unique path") {
    const char* tree = R"({
      "kind": "tree",
      "tree": {"root": "r",
               "parents": [{"node": "a", "parent": "r"},
                           {"node": "b", "parent": "a"},
                           {"node": "c", "parent": "r"}]},
      "buyers": [{"id": "b0", "pair": ["b", "c"], "pmf": {"0": 0.5, "1": 0.5}}]
    })";
    Instance inst = parse_instance(tree);
    // Path b -> a -> r -> c crosses all three parent edges.
    CHECK(inst.buyers[0].bundle.size() == 3);
    CHECK(inst.min_capacity() == 1);
}

TEST_CASE("tree instances reject non-bernoulli values") {
    const char* bad = R"({
      "kind": "tree",
      "tree": {"root": "r", "parents": [{"node": "a", "parent": "r"}]},
      "buyers": [{"id": "b0", "pair": ["a", "r"], "pmf": {"2": 1.0}}]
    })";
    CHECK_THROWS_AS(parse_instance(bad), ValidationError);
}

TEST_CASE("simple path enumeration on the diamond") {
    Graph g;
    g.nodes = {"s", "u", "v", "t"};
    g.edges = {{"su", 0, 1, 1}, {"ut", 1, 3, 1}, {"sv", 0, 2, 1}, {"vt", 2, 3, 1}};
    auto paths = enumerate_simple_paths(g, 0, 3, 100);
    CHECK(paths.size() == 2);
    CHECK_THROWS_AS(enumerate_simple_paths(g, 0, 3, 1), SizeLimitError);
}

TEST_SUITE_END();
