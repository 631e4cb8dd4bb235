#pragma once

#include <set>
#include <sstream>

#include <mgsse/mgsse.hpp>

// Four physical buses: a generator at 1, inverters at 2 and 3, a load at 4.
inline constexpr const char* toy_grid_text = R"(
[buses]
1 sg   D=2   Pd=0.1  M=10 unit_D=2 R=9.5 tau=5
2 inv  D=0.7 Pd=0.2  unit_D=0.7
3 inv  D=0.7 Pd=0.15 unit_D=0.7
4 load D=0.1 Pd=0.3
[lines]
1 2 0 0.5
2 3 0 0.5
2 4 0 0.5
[options]
fict_x = 0.1
)";

inline mgsse::AugmentedGrid toy_grid() {
    std::istringstream in(toy_grid_text);
    return mgsse::parse_grid(in, "toy");
}

// Random connected grid: a random tree plus a few chords, at least one
// generator, the rest split between inverters and loads. Parameters are drawn
// from ranges around the feeder defaults.
inline mgsse::AugmentedGrid random_grid(mgsse::Rng& rng, int n_phys) {
    using namespace mgsse;
    std::vector<BaseBus> buses;
    std::vector<int> sg, inv;
    for (int id = 1; id <= n_phys; ++id) {
        BaseBus b;
        b.id = id;
        b.bus.P_load = rng.uniform(0.0, 0.5);
        const double u = rng.uniform();
        const bool is_sg = id == 1 || u < 0.2;
        if (is_sg) {
            sg.push_back(id);
            b.bus.D = rng.uniform(1.0, 3.0);
            b.unit.M = rng.uniform(5.0, 15.0);
            b.unit.D = rng.uniform(1.0, 3.0);
            b.unit.R = rng.uniform(5.0, 12.0);
            b.unit.tau = rng.uniform(2.0, 8.0);
        } else if (u < 0.7) {
            inv.push_back(id);
            b.bus.D = rng.uniform(0.3, 1.0);
            b.unit.D = rng.uniform(0.3, 1.0);
        } else {
            b.bus.D = rng.uniform(0.05, 0.2);
        }
        b.capacity = rng.uniform(0.5, 2.0);
        buses.push_back(b);
    }
    std::vector<int> units = sg;
    units.insert(units.end(), inv.begin(), inv.end());
    balance_setpoints(buses, units);

    std::vector<Line> lines;
    std::set<std::pair<int, int>> used;
    for (int id = 2; id <= n_phys; ++id) {
        const int parent = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(id - 1)));
        lines.push_back({parent, id, rng.uniform(0.0, 0.1), rng.uniform(0.2, 0.8)});
        used.insert({parent, id});
    }
    for (int c = 0; c < n_phys / 3; ++c) {
        int a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_phys)));
        int b = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_phys)));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!used.insert({a, b}).second) continue;
        lines.push_back({a, b, rng.uniform(0.0, 0.1), rng.uniform(0.2, 0.8)});
    }
    return build_augmented(buses, lines, sg, inv, rng.uniform(0.05, 0.2));
}

// Simulates T steps from equilibrium with the given attack per step and
// returns measurements, attacks and true states.
struct SimLog {
    std::vector<mgsse::VectorXd> x, y, e;
};

inline SimLog simulate(const mgsse::AugmentedGrid& g, const mgsse::SimParams& sim, const std::vector<mgsse::VectorXd>& attacks) {
    using namespace mgsse;
    SimLog log;
    PlantState s = init_equilibrium(g, sim.omega0);
    for (const auto& e : attacks) {
        log.x.push_back(to_state_vector(g, s));
        log.e.push_back(e);
        log.y.push_back(measure(g, s, e).y);
        s = step_plant(s, g, sim, e);
    }
    return log;
}
