#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"

namespace mgsse {

struct SimParams {
    double delta = 1.0 / 60.0;
    double omega0 = 2.0 * std::numbers::pi * 60.0;
};

struct PlantState {
    VectorXd theta;   // every bus
    VectorXd omega;   // fictitious generator buses, in fict_sg order
    VectorXd p_mech;  // same order as omega
    double t = 0.0;
};

struct MeasurementFrame {
    VectorXd y;
    VectorXd e_true;
    long k = 0;
};

enum class AttackType { None, TypeA, TypeB };

inline const char* to_string(AttackType a) {
    switch (a) {
        case AttackType::None: return "none";
        case AttackType::TypeA: return "A";
        case AttackType::TypeB: return "B";
    }
    return "?";
}

struct AttackSpec {
    AttackType type = AttackType::None;
    double start_time = 1.1;
    int q = 5;
    double angle_mag = 0.5;                      // angle rows ~ U[-angle_mag, angle_mag] rad
    double speed_mag = 2.0 * std::numbers::pi;  // speed rows ~ U[-speed_mag, speed_mag] rad/s
    std::uint64_t seed = 1;
};

inline PlantState init_equilibrium(const AugmentedGrid& g, double omega0) {
    PlantState s;
    s.theta = VectorXd::Zero(static_cast<Eigen::Index>(g.n_bus()));
    s.omega = VectorXd::Constant(static_cast<Eigen::Index>(g.n_sg()), omega0);
    s.p_mech.resize(static_cast<Eigen::Index>(g.n_sg()));
    for (std::size_t a = 0; a < g.n_sg(); ++a) s.p_mech[static_cast<Eigen::Index>(a)] = g.bus(g.fict_sg[a]).p.P_set;
    return s;
}

// Index of each bus in fict_sg order, -1 for the rest.
inline std::vector<int> gen_slots(const AugmentedGrid& g) {
    std::vector<int> slot(g.n_bus(), -1);
    for (std::size_t a = 0; a < g.fict_sg.size(); ++a) slot[static_cast<std::size_t>(g.fict_sg[a] - 1)] = static_cast<int>(a);
    return slot;
}

inline VectorXd to_state_vector(const AugmentedGrid& g, const PlantState& s) {
    VectorXd x(static_cast<Eigen::Index>(g.n_state()));
    auto slot = gen_slots(g);
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const auto r = g.state_row[i];
        x[r] = s.theta[static_cast<Eigen::Index>(i)];
        if (slot[i] >= 0) {
            x[r + 1] = s.omega[slot[i]];
            x[r + 2] = s.p_mech[slot[i]];
        }
    }
    return x;
}

inline PlantState from_state_vector(const AugmentedGrid& g, const VectorXd& x, double t = 0.0) {
    require(x.size() == static_cast<Eigen::Index>(g.n_state()), "from_state_vector: dimension mismatch");
    PlantState s;
    s.theta.resize(static_cast<Eigen::Index>(g.n_bus()));
    s.omega.resize(static_cast<Eigen::Index>(g.n_sg()));
    s.p_mech.resize(static_cast<Eigen::Index>(g.n_sg()));
    s.t = t;
    auto slot = gen_slots(g);
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const auto r = g.state_row[i];
        s.theta[static_cast<Eigen::Index>(i)] = x[r];
        if (slot[i] >= 0) {
            s.omega[slot[i]] = x[r + 1];
            s.p_mech[slot[i]] = x[r + 2];
        }
    }
    return s;
}

// Power leaving bus i over its edges: sum_j V_i V_j |y_ij| sin(theta_i - theta_j + phi_ij).
inline double outflow(const AugmentedGrid& g, std::size_t i, const VectorXd& theta) {
    double f = 0.0;
    for (auto [j, e] : g.adj[i]) {
        const auto& ed = g.edges[static_cast<std::size_t>(e)];
        f += g.buses[i].p.V * g.buses[static_cast<std::size_t>(j)].p.V * ed.y_mag *
             std::sin(theta[static_cast<Eigen::Index>(i)] - theta[j] + ed.phi);
    }
    return f;
}

// One forward-Euler step. Governors read the measured speed, so the speed
// rows of e_k reach the plant; every other row of e_k is ignored here.
inline PlantState step_plant(const PlantState& s, const AugmentedGrid& g, const SimParams& sim, const VectorXd& e_k) {
    const auto N = static_cast<Eigen::Index>(g.n_bus());
    if (s.theta.size() != N || s.omega.size() != static_cast<Eigen::Index>(g.n_sg()) || s.p_mech.size() != s.omega.size())
        throw ModelError("step_plant: state dimension mismatch");
    if (e_k.size() != static_cast<Eigen::Index>(g.n_meas())) throw ModelError("step_plant: attack vector has wrong dimension");
    if (!(sim.delta > 0.0)) throw ModelError("step_plant: delta must be positive");
    if (!s.theta.allFinite() || !s.omega.allFinite() || !s.p_mech.allFinite()) throw ModelError("step_plant: nonfinite state");

    const double d = sim.delta;
    PlantState n = s;
    n.t = s.t + d;
    auto slot = gen_slots(g);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const Bus& b = g.buses[iu];
        const double flow = outflow(g, iu, s.theta);
        switch (b.kind) {
            case BusKind::FictitiousSG: {
                const int a = slot[iu];
                const double w = s.omega[a], pm = s.p_mech[a];
                const double w_meas = w + e_k[g.meas_row[iu] + 1];
                n.theta[i] = s.theta[i] + d * (w - sim.omega0);
                n.omega[a] = w + d / b.p.M * (pm - b.p.D * (w - sim.omega0) - flow);
                n.p_mech[a] = pm + d / b.p.tau * (b.p.P_set - pm - b.p.R * (w_meas - sim.omega0));
                break;
            }
            case BusKind::FictitiousInv:
                n.theta[i] = s.theta[i] + d / b.p.D * (b.p.P_set - flow);
                break;
            default:
                n.theta[i] = s.theta[i] + d / b.p.D * (-b.p.P_load - flow);
                break;
        }
    }
    if (!n.theta.allFinite() || !n.omega.allFinite() || !n.p_mech.allFinite()) throw ModelError("step_plant: state became nonfinite");
    return n;
}

inline MeasurementFrame measure(const AugmentedGrid& g, const PlantState& s, const VectorXd& e_k, long k = 0) {
    if (e_k.size() != static_cast<Eigen::Index>(g.n_meas())) throw ModelError("measure: attack vector has wrong dimension");
    if (s.theta.size() != static_cast<Eigen::Index>(g.n_bus())) throw ModelError("measure: state dimension mismatch");
    MeasurementFrame f;
    f.k = k;
    f.e_true = e_k;
    f.y.resize(e_k.size());
    auto slot = gen_slots(g);
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const auto r = g.meas_row[i];
        f.y[r] = s.theta[static_cast<Eigen::Index>(i)];
        if (slot[i] >= 0) f.y[r + 1] = s.omega[slot[i]];
    }
    f.y += e_k;
    return f;
}

struct AttackRow {
    int row;
    bool speed;
};

// Type A reaches every measurement of the generator buses (physical and
// internal), Type B every measurement of the inverter buses.
inline std::vector<AttackRow> targetable_rows(const AugmentedGrid& g, AttackType type) {
    std::vector<AttackRow> rows;
    if (type == AttackType::None) return rows;
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const auto kind = g.buses[i].kind;
        const bool hit = type == AttackType::TypeA ? (kind == BusKind::SyncGen || kind == BusKind::FictitiousSG)
                                                   : (kind == BusKind::Inverter || kind == BusKind::FictitiousInv);
        if (!hit) continue;
        rows.push_back({g.meas_row[i], false});
        if (kind == BusKind::FictitiousSG) rows.push_back({g.meas_row[i] + 1, true});
    }
    return rows;
}

inline bool attack_active(const AttackSpec& spec, long k, double delta) {
    return spec.type != AttackType::None && static_cast<double>(k) * delta >= spec.start_time - 1e-9;
}

inline VectorXd gen_attack(const AugmentedGrid& g, const AttackSpec& spec, long k, double delta, Rng& rng) {
    VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(g.n_meas()));
    if (spec.type == AttackType::None) return e;
    auto rows = targetable_rows(g, spec.type);
    if (spec.q < 0 || static_cast<std::size_t>(spec.q) > rows.size())
        throw ModelError("gen_attack: q=" + std::to_string(spec.q) + " exceeds the " + std::to_string(rows.size()) + " targetable rows");
    if (!attack_active(spec, k, delta)) return e;
    for (const auto& r : rng.sample(rows, static_cast<std::size_t>(spec.q))) {
        const double mag = r.speed ? spec.speed_mag : spec.angle_mag;
        e[r.row] = rng.uniform(-mag, mag);
    }
    return e;
}

}  // namespace mgsse
