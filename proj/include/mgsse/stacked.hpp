#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "plant.hpp"

namespace mgsse {

// Discrete generator block over x = [theta, omega, p_mech].
struct SGBlock {
    Eigen::Matrix3d A;
    Eigen::Matrix<double, 3, 2> B;
    Eigen::Matrix<double, 2, 3> C;
    double alpha = 0, beta = 0, eta = 0, nu = 0, kappa = 0, zeta = 0;
};

inline SGBlock discretize_sg(const BusParams& p, double delta, double omega0, double p_set) {
    if (!(p.M > 0.0)) throw ModelError("discretize_sg: M must be positive");
    if (!(p.tau > 0.0)) throw ModelError("discretize_sg: tau must be positive");
    if (!(delta > 0.0)) throw ModelError("discretize_sg: delta must be positive");
    SGBlock s;
    s.alpha = (p.M - delta * p.D) / p.M;
    s.beta = delta * p.D * omega0 / p.M;
    s.eta = delta / p.M;
    s.nu = p.R * delta / p.tau;
    s.kappa = 1.0 - delta / p.tau;
    s.zeta = delta * (p_set + p.R * omega0) / p.tau;
    s.A << 1.0, delta, 0.0, 0.0, s.alpha, s.eta, 0.0, -s.nu, s.kappa;
    s.B.setZero();
    s.B(2, 1) = s.nu;
    s.C << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
    return s;
}

struct TrigTerms {
    double gamma_s;
    double gamma_c;
};

// scale is delta/M for generator rows, delta/D otherwise.
inline TrigTerms trig_terms(double y_i, double y_j, const Edge& e, double scale, double V_i = 1.0, double V_j = 1.0) {
    const double gamma = -scale * V_i * V_j * e.y_mag;
    const double a = y_i - y_j + e.phi;
    return {gamma * std::sin(a), gamma * std::cos(a)};
}

// (1 - cos(e_i - e_j), sin(e_i - e_j))
inline std::pair<double, double> trig_error(double e_i, double e_j) {
    const double d = e_i - e_j;
    return {1.0 - std::cos(d), std::sin(d)};
}

// Coupling term on true angles minus its expansion around the measured ones.
inline double trig_error_expansion_check(double theta_i, double theta_j, double e_i, double e_j, const Edge& e, double scale = 1.0) {
    const double gamma = -scale * e.y_mag;
    const double truth = gamma * std::sin(theta_i - theta_j + e.phi);
    const auto t = trig_terms(theta_i + e_i, theta_j + e_j, e, scale);
    const auto [ec, es] = trig_error(e_i, e_j);
    return truth - (t.gamma_s - t.gamma_s * ec - t.gamma_c * es);
}

// x[k+1] = A x[k] + U[k] - B E[k] - H[k] eps[k],  y[k] = C x[k] + E[k]
struct EnlargedSystem {
    MatrixXd A, B, C;
    std::vector<SGBlock> blocks;  // fict_sg order
    SimParams sim;
};

inline EnlargedSystem assemble_enlarged(const AugmentedGrid& g, const SimParams& sim) {
    const auto nx = static_cast<Eigen::Index>(g.n_state()), ny = static_cast<Eigen::Index>(g.n_meas());
    EnlargedSystem s;
    s.sim = sim;
    s.A = MatrixXd::Identity(nx, nx);
    s.B = MatrixXd::Zero(nx, ny);
    s.C = MatrixXd::Zero(ny, nx);
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const auto r = g.state_row[i], m = g.meas_row[i];
        if (g.is_gen(i)) {
            const auto& b = g.buses[i];
            s.blocks.push_back(discretize_sg(b.p, sim.delta, sim.omega0, b.p.P_set));
            const auto& blk = s.blocks.back();
            s.A.block<3, 3>(r, r) = blk.A;
            s.B.block<3, 2>(r, m) = blk.B;
            s.C.block<2, 3>(m, r) = blk.C;
        } else {
            s.C(m, r) = 1.0;
        }
    }
    return s;
}

namespace detail {

inline double coupling_scale(const Bus& b, double delta) { return b.kind == BusKind::FictitiousSG ? delta / b.p.M : delta / b.p.D; }

// Row of bus i that carries the network coupling.
inline Eigen::Index dyn_row(const AugmentedGrid& g, std::size_t i) { return g.state_row[i] + (g.is_gen(i) ? 1 : 0); }

inline double angle_of(const AugmentedGrid& g, const VectorXd& y, std::size_t i) { return y[g.meas_row[i]]; }

}  // namespace detail

// correction: optional measurement-sized vector the operator subtracts from
// the speed readings before they reach the governors.
inline VectorXd build_u(const AugmentedGrid& g, const EnlargedSystem& sys, const VectorXd& y, const VectorXd& correction = {}) {
    if (y.size() != static_cast<Eigen::Index>(g.n_meas())) throw ModelError("build_u: measurement dimension mismatch");
    if (correction.size() != 0 && correction.size() != y.size()) throw ModelError("build_u: correction dimension mismatch");
    const double d = sys.sim.delta;
    VectorXd u = VectorXd::Zero(static_cast<Eigen::Index>(g.n_state()));
    std::size_t a = 0;
    for (std::size_t i = 0; i < g.n_bus(); ++i) {
        const Bus& b = g.buses[i];
        const double scale = detail::coupling_scale(b, d);
        double sum_s = 0.0;
        for (auto [j, e] : g.adj[i]) {
            const Bus& bj = g.buses[static_cast<std::size_t>(j)];
            sum_s += trig_terms(detail::angle_of(g, y, i), y[g.meas_row[static_cast<std::size_t>(j)]], g.edges[static_cast<std::size_t>(e)], scale,
                                b.p.V, bj.p.V)
                         .gamma_s;
        }
        const auto r = g.state_row[i];
        if (b.kind == BusKind::FictitiousSG) {
            const auto& blk = sys.blocks.at(a++);
            u[r] = -d * sys.sim.omega0;
            u[r + 1] = blk.beta + sum_s;
            u[r + 2] = blk.zeta + (correction.size() ? blk.nu * correction[g.meas_row[i] + 1] : 0.0);
        } else if (b.kind == BusKind::FictitiousInv) {
            u[r] = d * b.p.P_set / b.p.D + sum_s;
        } else {
            u[r] = -d * b.p.P_load / b.p.D + sum_s;
        }
    }
    return u;
}

// Columns 2e and 2e+1 hold edge e's (1 - cos, sin) terms of the angle-error
// difference taken as (lower id) - (higher id).
inline MatrixXd build_h_reduced(const AugmentedGrid& g, const EnlargedSystem& sys, const VectorXd& y) {
    if (y.size() != static_cast<Eigen::Index>(g.n_meas())) throw ModelError("build_h_reduced: measurement dimension mismatch");
    const double d = sys.sim.delta;
    MatrixXd H = MatrixXd::Zero(static_cast<Eigen::Index>(g.n_state()), 2 * static_cast<Eigen::Index>(g.n_edge()));
    for (std::size_t e = 0; e < g.n_edge(); ++e) {
        const Edge& ed = g.edges[e];
        const auto i = static_cast<std::size_t>(ed.i - 1), j = static_cast<std::size_t>(ed.j - 1);
        const Bus &bi = g.buses[i], &bj = g.buses[j];
        const double yi = detail::angle_of(g, y, i), yj = detail::angle_of(g, y, j);
        const auto tij = trig_terms(yi, yj, ed, detail::coupling_scale(bi, d), bi.p.V, bj.p.V);
        const auto tji = trig_terms(yj, yi, ed, detail::coupling_scale(bj, d), bj.p.V, bi.p.V);
        const auto c = 2 * static_cast<Eigen::Index>(e);
        H(detail::dyn_row(g, i), c) += tij.gamma_s;
        H(detail::dyn_row(g, i), c + 1) += tij.gamma_c;
        H(detail::dyn_row(g, j), c) += tji.gamma_s;
        H(detail::dyn_row(g, j), c + 1) -= tji.gamma_c;
    }
    return H;
}

// Edge trig errors implied by an attack vector.
inline VectorXd eps_from_attack(const AugmentedGrid& g, const VectorXd& e) {
    VectorXd eps(2 * static_cast<Eigen::Index>(g.n_edge()));
    for (std::size_t k = 0; k < g.n_edge(); ++k) {
        const auto [ec, es] = trig_error(e[g.meas_row[static_cast<std::size_t>(g.edges[k].i - 1)]], e[g.meas_row[static_cast<std::size_t>(g.edges[k].j - 1)]]);
        eps[2 * static_cast<Eigen::Index>(k)] = ec;
        eps[2 * static_cast<Eigen::Index>(k) + 1] = es;
    }
    return eps;
}

// Per-step operator data for one window.
struct WindowData {
    std::vector<VectorXd> y;  // measurements
    std::vector<VectorXd> U;  // inputs (last one unused)
    std::vector<MatrixXd> H;  // coupling error maps (last one unused)
};

struct StackedOperators {
    MatrixXd Phi, Psi1, Psi2;
    VectorXd Ybar;
    int K = 0;
    Eigen::Index ny = 0, nx = 0, neps = 0;
};

inline StackedOperators build_stack(const EnlargedSystem& sys, const WindowData& w, int K) {
    if (K < 1) throw ModelError("build_stack: window too short (K=" + std::to_string(K) + ")");
    const auto Ku = static_cast<std::size_t>(K);
    if (w.y.size() < Ku || w.U.size() + 1 < Ku || w.H.size() + 1 < Ku) throw ModelError("build_stack: window has fewer than K frames");
    const Eigen::Index ny = sys.C.rows(), nx = sys.A.rows();
    const Eigen::Index ne = K > 1 ? w.H[0].cols() : (w.H.empty() ? 0 : w.H[0].cols());
    for (std::size_t k = 0; k + 1 < Ku; ++k)
        if (w.U[k].size() != nx || w.H[k].rows() != nx || w.H[k].cols() != ne) throw ModelError("build_stack: inconsistent input dimensions");

    StackedOperators s;
    s.K = K;
    s.ny = ny;
    s.nx = nx;
    s.neps = ne;
    s.Phi.resize(K * ny, nx);
    s.Psi1 = MatrixXd::Zero(K * ny, K * ny);
    s.Psi2 = MatrixXd::Zero(K * ny, K * ne);
    s.Ybar.resize(K * ny);

    std::vector<MatrixXd> CA(Ku);  // C A^j
    CA[0] = sys.C;
    for (std::size_t j = 1; j < Ku; ++j) CA[j] = CA[j - 1] * sys.A;

    for (int r = 0; r < K; ++r) {
        if (w.y[static_cast<std::size_t>(r)].size() != ny) throw ModelError("build_stack: measurement dimension mismatch");
        s.Phi.middleRows(r * ny, ny) = CA[static_cast<std::size_t>(r)];
        s.Psi1.block(r * ny, r * ny, ny, ny).setIdentity();
        VectorXd yb = w.y[static_cast<std::size_t>(r)];
        for (int c = 0; c < r; ++c) {
            const MatrixXd& P = CA[static_cast<std::size_t>(r - 1 - c)];
            s.Psi1.block(r * ny, c * ny, ny, ny) = -P * sys.B;
            s.Psi2.block(r * ny, c * ne, ny, ne) = -P * w.H[static_cast<std::size_t>(c)];
            yb -= P * w.U[static_cast<std::size_t>(c)];
        }
        s.Ybar.segment(r * ny, ny) = yb;
    }
    return s;
}

}  // namespace mgsse
