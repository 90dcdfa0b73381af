#include "bp/menu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bp {

RandomizedMenu construct_menu(const Instance& inst,
                              const std::vector<BundleStructure>& structures,
                              const MenuOptions& opts) {
    RandomizedMenu menu;
    menu.routing = inst.kind == InstanceKind::GraphRouting;
    int type_index = -1;
    for (const auto& s : structures) {
        ++type_index;
        if (!s.servable) {
            menu.provenance.push_back(MenuBranch::NoPriceW);
            continue;
        }
        const Value w = s.important_value;

        MenuEntry base;
        base.type_index = type_index;
        if (!menu.routing) base.goods = s.group.items;

        // The dedicated copies: one per interested buyer at price w + 1.
        MenuEntry high = base;
        high.price = static_cast<double>(w) + 1.0;
        high.copies = high.remaining = static_cast<int>(s.group.buyers.size());
        high.price_level = 1;
        menu.fixed.push_back(high);

        MenuBranch branch = MenuBranch::NoPriceW;
        if (s.has_crucial &&
            s.crucial_mass * static_cast<double>(w) > s.tail_value) {
            MenuEntry at_w = base;
            at_w.price = static_cast<double>(w);
            at_w.price_level = 0;
            const double x = s.crucial_mass;
            if (x > 1.0) {
                at_w.copies = at_w.remaining = static_cast<int>(std::floor(x));
                menu.fixed.push_back(at_w);
                branch = MenuBranch::FloorCopies;
                double frac = x - std::floor(x);
                if (opts.ceil_randomization && frac > 0.0) {
                    MenuEntry extra = at_w;
                    extra.copies = extra.remaining = 1;
                    menu.coins.push_back(CoinEntry{extra, frac});
                    branch = MenuBranch::FloorPlusCeilCoin;
                }
            } else {
                // q_{S,w} > 0 holds whenever a crucial value exists.
                double p = std::max(x, x / s.q_at_important);
                at_w.copies = at_w.remaining = 1;
                menu.coins.push_back(CoinEntry{at_w, std::min(p, 1.0)});
                branch = s.q_at_important >= 1.0 ? MenuBranch::CoinMass
                                                 : MenuBranch::CoinMassOverQ;
            }
        }
        menu.provenance.push_back(branch);
    }
    return menu;
}

Menu sample_menu(const RandomizedMenu& rmenu, RngStream& stream) {
    Menu menu = rmenu.fixed;
    for (const auto& coin : rmenu.coins) {
        // Draw for every coin so the stream position does not depend on
        // earlier outcomes.
        bool include = stream.bernoulli(coin.probability);
        if (include) menu.push_back(coin.entry);
    }
    for (auto& e : menu) e.remaining = e.copies;
    return menu;
}

Menu perturb_prices(Menu menu, Value R) {
    if (R == 0) return menu;
    const double factor = 1.0 - price_delta(R);
    for (auto& e : menu) e.price *= factor;
    return menu;
}

Menu instantiate_graph_menu(const Instance& inst, const RandomizedMenu& rmenu,
                            const FractionalSolution& sol, RngStream& stream) {
    if (!rmenu.routing)
        throw ValidationError("instantiate_graph_menu: menu is not a routing menu");
    Menu sampled = sample_menu(rmenu, stream);

    // Group buyers and path lists per (s,t) type, in demand-group order.
    auto groups = demand_groups(inst);

    // Aggregated path mass per (type, value): weights[type][value][path].
    std::vector<std::map<Value, std::vector<double>>> weights(groups.size());
    std::vector<const std::vector<std::vector<int>>*> type_paths(groups.size(),
                                                                 nullptr);
    std::map<int, int> buyer_type;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (int b : groups[g].buyers) buyer_type[b] = static_cast<int>(g);
        if (!groups[g].buyers.empty())
            type_paths[g] = &sol.buyer_paths[groups[g].buyers.front()];
    }
    for (std::size_t j = 0; j < sol.vars.size(); ++j) {
        const VarKey& var = sol.vars[j];
        if (var.path < 0) continue;
        int g = buyer_type.at(var.buyer);
        auto& per_value = weights[g][var.value];
        if (per_value.empty()) per_value.assign(type_paths[g]->size(), 0.0);
        per_value[var.path] += sol.x[j];
    }

    Menu out;
    for (const auto& e : sampled) {
        const int g = e.type_index;
        if (!type_paths[g] || type_paths[g]->empty()) {
            // Disconnected pair: the group never entered the LP, so posting
            // copies for it would be a construction bug.
            throw ValidationError("instantiate_graph_menu: no path for type " +
                                  groups[g].label);
        }
        const Value price = static_cast<Value>(std::llround(e.price));
        std::vector<double> w(type_paths[g]->size(), 0.0);
        if (e.price_level == 0) {
            auto it = weights[g].find(price);
            if (it != weights[g].end()) w = it->second;
        } else {
            for (const auto& [v, per_path] : weights[g])
                if (v >= price)
                    for (std::size_t p = 0; p < per_path.size(); ++p)
                        w[p] += per_path[p];
        }
        double total = 0.0;
        for (double x : w) total += x;
        if (!(total > 0.0)) {
            // Entries at price R + 1 are unaffordable by construction (no
            // value exceeds R), so their path draw can never matter.
            if (e.price_level == 1 && price > inst.max_value()) {
                for (int c = 0; c < e.copies; ++c) {
                    MenuEntry copy = e;
                    copy.copies = copy.remaining = 1;
                    copy.goods = type_paths[g]->front();
                    out.push_back(std::move(copy));
                }
                continue;
            }
            throw ValidationError(
                "instantiate_graph_menu: type " + groups[g].label +
                " offered at price " + std::to_string(price) +
                " with no LP mass at that level (construction bug)");
        }
        for (int c = 0; c < e.copies; ++c) {
            MenuEntry copy = e;
            copy.copies = copy.remaining = 1;
            copy.goods = (*type_paths[g])[sample_discrete(stream, w)];
            out.push_back(std::move(copy));
        }
    }
    return out;
}

Menu alg2_menu(const Instance& inst, double fopt_gamma) {
    if (fopt_gamma < 0.0)
        throw ValidationError("alg2_menu: fopt_gamma must be nonnegative");
    MenuEntry e;
    e.goods.resize(inst.item_ids.size());
    for (int i = 0; i < inst.num_items(); ++i) e.goods[i] = i;
    e.price = 2.0 * fopt_gamma;
    e.copies = e.remaining = 1;
    return Menu{e};
}

} // namespace bp
