#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bp/mechanism.hpp"
#include "bp/menu.hpp"

using namespace bp;

TEST_SUITE_BEGIN("menu");

namespace {

Instance two_buyer_instance() {
    Instance inst;
    inst.kind = InstanceKind::GeneralSingleMinded;
    inst.item_ids = {"a", "b"};
    inst.capacities = {2, 2};
    for (int i = 0; i < 2; ++i) {
        Buyer b;
        b.id = i;
        b.name = "b" + std::to_string(i);
        b.bundle = {0};
        b.dist.pmf = {{0, 0.2}, {3, 0.4}, {4, 0.4}};
        inst.buyers.push_back(b);
    }
    return inst;
}

BundleStructure structure_for(const Instance& inst, Value w, bool crucial,
                              double x_w, double q_w, double tail) {
    BundleStructure s;
    s.group = demand_groups(inst)[0];
    s.important_value = w;
    s.has_crucial = crucial;
    s.crucial_mass = x_w;
    s.q_at_important = q_w;
    s.tail_value = tail;
    s.classes.assign(static_cast<std::size_t>(inst.max_value()) + 1,
                     ValueClass::Zero);
    return s;
}

} // namespace

TEST_CASE("no crucial value: only the dedicated copies at w + 1") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 3, false, 0.0, 0.8, 2.0);
    auto menu = construct_menu(inst, {s});
    REQUIRE(menu.fixed.size() == 1);
    CHECK(menu.coins.empty());
    CHECK(menu.fixed[0].price == 4.0);
    CHECK(menu.fixed[0].copies == 2); // |A_S|
    CHECK(menu.provenance[0] == MenuBranch::NoPriceW);
}

TEST_CASE("dominant crucial mass above one yields floor copies") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 3, true, 1.7, 2.0, 4.0); // 1.7*3 = 5.1 > 4
    auto menu = construct_menu(inst, {s});
    REQUIRE(menu.fixed.size() == 2);
    CHECK(menu.fixed[0].price == 4.0);
    CHECK(menu.fixed[1].price == 3.0);
    CHECK(menu.fixed[1].copies == 1); // floor(1.7)
    CHECK(menu.provenance[0] == MenuBranch::FloorCopies);
}

TEST_CASE("small crucial mass becomes a coin entry at max{x, x/q}") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 2, true, 0.4, 0.8, 0.0);
    auto menu = construct_menu(inst, {s});
    REQUIRE(menu.coins.size() == 1);
    CHECK(menu.coins[0].probability == doctest::Approx(0.5)); // max{0.4, 0.5}
    CHECK(menu.coins[0].entry.price == 2.0);
    CHECK(menu.provenance[0] == MenuBranch::CoinMassOverQ);
}

TEST_CASE("dominance condition is strict") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 3, true, 1.0, 2.0, 3.0); // 1.0*3 == tail
    auto menu = construct_menu(inst, {s});
    CHECK(menu.fixed.size() == 1);
    CHECK(menu.coins.empty());
}

TEST_CASE("ceil randomization adds a fractional coin copy") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 3, true, 1.7, 2.0, 4.0);
    MenuOptions opts;
    opts.ceil_randomization = true;
    auto menu = construct_menu(inst, {s}, opts);
    REQUIRE(menu.coins.size() == 1);
    CHECK(menu.coins[0].probability == doctest::Approx(0.7));
    CHECK(menu.provenance[0] == MenuBranch::FloorPlusCeilCoin);
}

TEST_CASE("sampling without coins returns the fixed entries") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 3, false, 0.0, 0.8, 2.0);
    auto rmenu = construct_menu(inst, {s});
    RngStream rng(1);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_menu(rmenu, rng).size() == rmenu.fixed.size());
}

TEST_CASE("coin inclusion frequency matches its probability") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 2, true, 0.4, 0.8, 0.0);
    auto rmenu = construct_menu(inst, {s});
    RngStream rng(77);
    int included = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        if (sample_menu(rmenu, rng).size() == 2) ++included;
    CHECK(std::abs(included / static_cast<double>(draws) - 0.5) < 0.01);
}

TEST_CASE("sampling is deterministic per stream") {
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 2, true, 0.4, 0.8, 0.0);
    auto rmenu = construct_menu(inst, {s});
    RngStream a(5), b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_menu(rmenu, a).size() == sample_menu(rmenu, b).size());
}

TEST_CASE("price perturbation scales by 1 - 1/(4R)") {
    Menu menu;
    MenuEntry e;
    e.price = 3.0;
    menu.push_back(e);
    e.price = 0.0;
    menu.push_back(e);
    auto out = perturb_prices(menu, 10);
    CHECK(out[0].price == doctest::Approx(2.925));
    CHECK(out[1].price == 0.0);
    // R == 0: nothing to perturb.
    auto same = perturb_prices(menu, 0);
    CHECK(same[0].price == 3.0);
}

TEST_CASE("perturbation preserves price order and cover sums") {
    Menu menu;
    for (double p : {5.0, 2.0, 3.0}) {
        MenuEntry e;
        e.price = p;
        menu.push_back(e);
    }
    auto out = perturb_prices(menu, 5);
    CHECK(out[1].price < out[2].price);
    CHECK(out[2].price < out[0].price);
    // (2 + 3 >= 5) is invariant under the common factor.
    CHECK(out[1].price + out[2].price >= out[0].price - 1e-12);
}

TEST_CASE("whole-item-set fallback menu") {
    Instance inst = two_buyer_instance();
    inst.item_ids = {"a", "b", "c"};
    inst.capacities = {1, 1, 1};
    auto menu = alg2_menu(inst, 7.0);
    REQUIRE(menu.size() == 1);
    CHECK(menu[0].price == 14.0);
    CHECK(menu[0].copies == 1);
    CHECK(menu[0].goods == std::vector<int>{0, 1, 2});
    auto degenerate = alg2_menu(inst, 0.0);
    CHECK(degenerate[0].price == 0.0);
}

namespace {

/// A diamond-graph solution with chosen path masses at the crucial level.
struct DiamondFixture {
    Instance inst;
    FractionalSolution sol;
    RandomizedMenu rmenu;
};

DiamondFixture make_diamond(double mass_path0, double mass_path1) {
    DiamondFixture f;
    f.inst = parse_instance(R"({
      "kind": "graph_routing",
      "graph": {"nodes": ["s", "u", "v", "t"],
                "edges": [{"id": "su", "u": "s", "v": "u", "capacity": 1},
                          {"id": "ut", "u": "u", "v": "t", "capacity": 1},
                          {"id": "sv", "u": "s", "v": "v", "capacity": 1},
                          {"id": "vt", "u": "v", "v": "t", "capacity": 1}]},
      "buyers": [{"id": "b0", "pair": ["s", "t"], "pmf": {"0": 0.5, "1": 0.5}}]
    })");
    auto paths = enumerate_simple_paths(*f.inst.graph, 0, 3, 10);
    REQUIRE(paths.size() == 2);
    f.sol.routing = true;
    f.sol.gamma = 1.0;
    f.sol.buyer_paths = {paths};
    f.sol.vars = {VarKey{0, 1, 0}, VarKey{0, 1, 1}};
    f.sol.x = {mass_path0, mass_path1};
    f.sol.objective = mass_path0 + mass_path1;

    f.rmenu.routing = true;
    MenuEntry coin;
    coin.type_index = 0;
    coin.price = 1.0;
    coin.price_level = 0;
    coin.copies = coin.remaining = 1;
    f.rmenu.coins.push_back(CoinEntry{coin, 1.0}); // always included
    f.rmenu.provenance.push_back(MenuBranch::CoinMass);
    return f;
}

} // namespace

TEST_CASE("unique path instantiation is forced") {
    DiamondFixture f = make_diamond(0.4, 0.0);
    RngStream rng(3);
    for (int i = 0; i < 50; ++i) {
        Menu menu = instantiate_graph_menu(f.inst, f.rmenu, f.sol, rng);
        REQUIRE(menu.size() == 1);
        CHECK(menu[0].goods == f.sol.buyer_paths[0][0]);
    }
}

TEST_CASE("roulette frequencies follow the LP mass ratio") {
    SUBCASE("equal masses split evenly") {
        DiamondFixture f = make_diamond(0.2, 0.2);
        RngStream rng(9);
        int first = 0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            Menu menu = instantiate_graph_menu(f.inst, f.rmenu, f.sol, rng);
            if (menu[0].goods == f.sol.buyer_paths[0][0]) ++first;
        }
        CHECK(std::abs(first / static_cast<double>(draws) - 0.5) < 0.01);
    }
    SUBCASE("0.3/0.1 masses give 3:1 odds") {
        DiamondFixture f = make_diamond(0.3, 0.1);
        RngStream rng(10);
        int first = 0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            Menu menu = instantiate_graph_menu(f.inst, f.rmenu, f.sol, rng);
            if (menu[0].goods == f.sol.buyer_paths[0][0]) ++first;
        }
        CHECK(std::abs(first / static_cast<double>(draws) - 0.75) < 0.01);
    }
}

TEST_CASE("instantiated copies always carry a real path of their type") {
    DiamondFixture f = make_diamond(0.25, 0.15);
    RngStream rng(12);
    for (int i = 0; i < 200; ++i) {
        Menu menu = instantiate_graph_menu(f.inst, f.rmenu, f.sol, rng);
        for (const auto& e : menu) {
            bool known = e.goods == f.sol.buyer_paths[0][0] ||
                         e.goods == f.sol.buyer_paths[0][1];
            CHECK(known);
            CHECK(e.copies == 1);
        }
    }
}

TEST_CASE("full pipeline menu per bundle: dedicated copies always present") {
    Instance inst = two_buyer_instance();
    Mechanism mech = make_mechanism(inst, MechanismKind::LpMenu, {});
    auto groups = demand_groups(inst);
    RngStream rng(4);
    for (int i = 0; i < 200; ++i) {
        Menu menu = sample_menu(mech.rmenu, rng);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            int dedicated = 0;
            for (const auto& e : menu)
                if (e.type_index == static_cast<int>(g) &&
                    e.price ==
                        static_cast<double>(mech.structures[g].important_value) + 1.0)
                    dedicated += e.copies;
            CHECK(dedicated == static_cast<int>(groups[g].buyers.size()));
        }
    }
}

TEST_CASE("expected number of price-w copies matches the LP mass") {
    // Coin branch with q <= 1: expected copies offered equal max{x, x/q}.
    Instance inst = two_buyer_instance();
    auto s = structure_for(inst, 2, true, 0.3, 0.9, 0.0);
    auto rmenu = construct_menu(inst, {s});
    REQUIRE(rmenu.coins.size() == 1);
    RngStream rng(31);
    const int draws = 200000;
    std::int64_t copies = 0;
    for (int i = 0; i < draws; ++i) {
        Menu m = sample_menu(rmenu, rng);
        for (const auto& e : m)
            if (e.price == 2.0) copies += e.copies;
    }
    double expected = std::max(0.3, 0.3 / 0.9);
    CHECK(std::abs(copies / static_cast<double>(draws) - expected) < 0.005);
}

TEST_SUITE_END();
