#pragma once

#include <string>
#include <vector>

#include "bp/lp.hpp"
#include "bp/model.hpp"
#include "bp/rng.hpp"

namespace bp {

/// One posted entry: `copies` copies of a fixed set of goods at `price`.
/// For routing instances the goods are the edges of a pre-sampled simple
/// path and `type_index` names the (s,t) demand group the entry serves;
/// goods stay empty until instantiate_graph_menu assigns paths.
struct MenuEntry {
    std::vector<int> goods;
    int type_index = -1;
    double price = 0.0;
    int copies = 1;
    int remaining = 1;
    /// 0: posted at the group's important value w; 1: posted at w + 1.
    int price_level = 1;
};

using Menu = std::vector<MenuEntry>;

enum class MenuBranch { NoPriceW, FloorCopies, CoinMassOverQ, CoinMass, FloorPlusCeilCoin };

struct CoinEntry {
    MenuEntry entry;
    double probability = 0.0;
};

/// Distribution over menus: deterministic entries plus independent coin
/// entries. Fixed before any arrival; sampling needs only an RNG stream.
struct RandomizedMenu {
    std::vector<MenuEntry> fixed;
    std::vector<CoinEntry> coins;
    std::vector<MenuBranch> provenance; // aligned with the structure list
    bool routing = false;
};

struct MenuOptions {
    /// When x_{S,w} > 1, round the copy count up with probability
    /// frac(x_{S,w}) instead of always taking the floor.
    bool ceil_randomization = false;
};

/// Menu construction from the classified solution: |A_S| copies of each
/// demanded bundle at price w_S + 1, plus price-w_S copies when the crucial
/// mass dominates the tail. Prices are unperturbed integers.
RandomizedMenu construct_menu(const Instance& inst,
                              const std::vector<BundleStructure>& structures,
                              const MenuOptions& opts = {});

/// Draws a concrete menu: deterministic entries always, each coin entry
/// independently with its probability.
Menu sample_menu(const RandomizedMenu& rmenu, RngStream& stream);

/// Multiplicative price perturbation (1 - delta) with delta = 1/(4R):
/// value-v buyers strictly prefer buying at perturbed price v while prices
/// above v stay unaffordable. No-op when R == 0.
Menu perturb_prices(Menu menu, Value R);

constexpr double price_delta(Value R) {
    return R > 0 ? 1.0 / (4.0 * static_cast<double>(R)) : 0.0;
}

/// Samples the coin entries and assigns every copy of a routing entry an
/// independently drawn path, proportional to the LP mass at the entry's
/// price level. Splits multi-copy entries into per-copy entries with
/// concrete edge sets.
Menu instantiate_graph_menu(const Instance& inst, const RandomizedMenu& rmenu,
                            const FractionalSolution& sol, RngStream& stream);

/// The high-price fallback menu: one copy of the whole item set at
/// price 2 * fopt_gamma.
Menu alg2_menu(const Instance& inst, double fopt_gamma);

} // namespace bp
