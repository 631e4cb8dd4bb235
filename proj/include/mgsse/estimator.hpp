#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "grid.hpp"
#include "sparse.hpp"
#include "stacked.hpp"

namespace mgsse {

class UnobservableError : public ModelError {
public:
    UnobservableError(const std::string& what, std::vector<std::vector<int>> dirs) : ModelError(what), directions(std::move(dirs)) {}
    std::vector<std::vector<int>> directions;  // state indices dominating each null direction
};

struct Annihilator {
    MatrixXd Q1;   // range of Phi
    MatrixXd Q2T;  // rows span the left null space of Phi
    MatrixXd R1;
};

inline Annihilator annihilate(const MatrixXd& Phi) {
    const auto rows = Phi.rows(), n = Phi.cols();
    if (rows <= n) throw ModelError("annihilate: window too short, " + std::to_string(rows) + " stacked rows for " + std::to_string(n) + " states");

    Eigen::JacobiSVD<MatrixXd> svd(Phi, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thr = 1e-10 * std::max(1.0, sv[0]);
    std::vector<std::vector<int>> dirs;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (sv[k] > thr) continue;
        std::vector<int> idx;
        const VectorXd v = svd.matrixV().col(k);
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(v[i]) > 0.1) idx.push_back(static_cast<int>(i));
        dirs.push_back(idx);
    }
    if (!dirs.empty()) {
        std::string msg = "annihilate: stacked output map is rank deficient; unobservable directions over states";
        for (const auto& d : dirs) {
            msg += " {";
            for (std::size_t i = 0; i < d.size(); ++i) msg += (i ? "," : "") + std::to_string(d[i]);
            msg += "}";
        }
        throw UnobservableError(msg, dirs);
    }

    Eigen::HouseholderQR<MatrixXd> qr(Phi);
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(rows, rows);
    Annihilator a;
    a.Q1 = Q.leftCols(n);
    a.Q2T = Q.rightCols(rows - n).transpose();
    a.R1 = qr.matrixQR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
    return a;
}

enum class DecoderMode { Free, Linked };

inline const char* to_string(DecoderMode m) { return m == DecoderMode::Free ? "free" : "linked"; }

struct DecodeOptions {
    DecoderMode mode = DecoderMode::Free;
    double tol = 1e-8;
    int max_iter = 200;
    double residual_tol = 1e-6;
    int max_outer = 15;  // linked mode only
};

struct DecodeResult {
    MatrixXd E_hat;    // K x measurements
    MatrixXd eps_hat;  // K x 2|E|
    VectorXd X0_hat;
    double residual_norm = std::numeric_limits<double>::infinity();
    SolveStatus solver_status = SolveStatus::NumericalError;
    bool recovered = false;
    int iterations = 0;
    int outer_iterations = 0;
};

namespace detail {

inline DecodeResult finish_decode(const StackedOperators& s, const Annihilator& an, const MatrixXd& Psi, const VectorXd& Et, double residual,
                                  double residual_tol, SolveStatus st) {
    DecodeResult r;
    r.solver_status = st;
    r.residual_norm = residual;
    r.recovered = st == SolveStatus::Optimal && residual <= residual_tol;
    r.E_hat.resize(s.K, s.ny);
    r.eps_hat.resize(s.K, s.neps);
    for (int k = 0; k < s.K; ++k) {
        r.E_hat.row(k) = Et.segment(k * s.ny, s.ny).transpose();
        if (s.neps) r.eps_hat.row(k) = Et.segment(s.K * s.ny + k * s.neps, s.neps).transpose();
    }
    r.X0_hat = an.R1.triangularView<Eigen::Upper>().solve(an.Q1.transpose() * (s.Ybar - Psi * Et));
    return r;
}

}  // namespace detail

// Free mode: min ||E~||_1 over sensor and edge errors as independent unknowns.
inline DecodeResult decode(const StackedOperators& s, const Annihilator& an, const DecodeOptions& opt = {}) {
    if (an.Q2T.cols() != s.Phi.rows()) throw ModelError("decode: annihilator and stack come from different windows");
    MatrixXd Psi(s.Psi1.rows(), s.Psi1.cols() + s.Psi2.cols());
    Psi << s.Psi1, s.Psi2;
    BPProblem p;
    p.A = an.Q2T * Psi;
    p.b = an.Q2T * s.Ybar;
    p.tol_primal = p.tol_dual = opt.tol;
    p.max_iter = opt.max_iter;
    auto bp = basis_pursuit(p);
    if (bp.status == SolveStatus::Infeasible) throw SolverError("decode: annihilated system is inconsistent");
    auto r = detail::finish_decode(s, an, Psi, bp.x, bp.residual, opt.residual_tol, bp.status);
    r.iterations = bp.iterations;
    return r;
}

// Linked mode: edge errors are tied to the sensor errors of their end buses.
// Sequential linearization of eps(E) around the current iterate, each step an
// l1 problem over the sensor errors alone, started from E = 0. Falls back to
// the free decode when the iteration does not reach a consistent point.
// edge_rows[e] holds the angle measurement rows of edge e's end buses.
inline DecodeResult decode_linked(const StackedOperators& s, const Annihilator& an, const std::vector<std::pair<int, int>>& edge_rows,
                                  const DecodeOptions& opt = {}) {
    if (static_cast<Eigen::Index>(2 * edge_rows.size()) != s.neps) throw ModelError("decode_linked: edge map does not match the stack");
    const Eigen::Index nE = s.K * s.ny;
    const MatrixXd A1 = an.Q2T * s.Psi1, A2 = an.Q2T * s.Psi2;
    const VectorXd b = an.Q2T * s.Ybar;

    auto eps_of = [&](const VectorXd& E) {
        VectorXd eps(s.K * s.neps);
        for (int k = 0; k < s.K; ++k)
            for (std::size_t e = 0; e < edge_rows.size(); ++e) {
                const auto [ec, es] = trig_error(E[k * s.ny + edge_rows[e].first], E[k * s.ny + edge_rows[e].second]);
                eps[k * s.neps + 2 * static_cast<Eigen::Index>(e)] = ec;
                eps[k * s.neps + 2 * static_cast<Eigen::Index>(e) + 1] = es;
            }
        return eps;
    };

    VectorXd E = VectorXd::Zero(nE);

    SolveStatus st = SolveStatus::Optimal;
    int outer = 0, iters = 0;
    for (; outer < opt.max_outer; ++outer) {
        const VectorXd eps = eps_of(E);
        MatrixXd Alin = A1;
        VectorXd JE = VectorXd::Zero(s.K * s.neps);
        for (int k = 0; k < s.K; ++k)
            for (std::size_t e = 0; e < edge_rows.size(); ++e) {
                const Eigen::Index ri = k * s.ny + edge_rows[e].first, rj = k * s.ny + edge_rows[e].second;
                const Eigen::Index cc = k * s.neps + 2 * static_cast<Eigen::Index>(e);
                const double d = E[ri] - E[rj], sd = std::sin(d), cd = std::cos(d);
                const VectorXd g = A2.col(cc) * sd + A2.col(cc + 1) * cd;
                Alin.col(ri) += g;
                Alin.col(rj) -= g;
                JE[cc] = sd * d;
                JE[cc + 1] = cd * d;
            }
        BPProblem p;
        p.A = Alin;
        p.b = b - A2 * (eps - JE);
        p.tol_primal = p.tol_dual = opt.tol;
        p.max_iter = opt.max_iter;
        auto bp = basis_pursuit(p);
        iters += bp.iterations;
        st = bp.status;
        // Late linearizations can be nearly degenerate; an uncertified step
        // is still usable when it fits, the final consistency check decides.
        if (bp.status != SolveStatus::Optimal && !(bp.status == SolveStatus::MaxIter && bp.residual <= opt.residual_tol)) break;
        const double change = (bp.x - E).cwiseAbs().maxCoeff();
        E = bp.x;
        if (change < 1e-10) {
            ++outer;
            break;
        }
    }

    VectorXd Et(nE + s.K * s.neps);
    Et << E, eps_of(E);
    MatrixXd Psi(s.Psi1.rows(), s.Psi1.cols() + s.Psi2.cols());
    Psi << s.Psi1, s.Psi2;
    const double res = (an.Q2T * (Psi * Et) - b).cwiseAbs().maxCoeff();
    if ((st != SolveStatus::Optimal && st != SolveStatus::MaxIter) || res > opt.residual_tol) {
        DecodeResult free = decode(s, an, opt);
        free.iterations += iters;
        free.outer_iterations = outer;
        return free;
    }
    auto r = detail::finish_decode(s, an, Psi, Et, res, opt.residual_tol, st);
    r.recovered = res <= opt.residual_tol;  // consistency is the acceptance test here
    r.iterations = iters;
    r.outer_iterations = outer;
    return r;
}

inline std::vector<std::pair<int, int>> edge_angle_rows(const AugmentedGrid& g) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : g.edges) out.push_back({g.meas_row[static_cast<std::size_t>(e.i - 1)], g.meas_row[static_cast<std::size_t>(e.j - 1)]});
    return out;
}

inline DecodeResult decode_window(const AugmentedGrid& g, const StackedOperators& s, const Annihilator& an, const DecodeOptions& opt) {
    return opt.mode == DecoderMode::Free ? decode(s, an, opt) : decode_linked(s, an, edge_angle_rows(g), opt);
}

// Per-step inputs and coupling maps computed from a measurement log.
struct InputLog {
    std::vector<VectorXd> U;
    std::vector<MatrixXd> H;
};

inline InputLog compute_inputs(const AugmentedGrid& g, const EnlargedSystem& sys, const std::vector<VectorXd>& ys,
                               const std::vector<VectorXd>& corrections = {}) {
    InputLog in;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        in.U.push_back(build_u(g, sys, ys[k], corrections.empty() ? VectorXd() : corrections[k]));
        in.H.push_back(build_h_reduced(g, sys, ys[k]));
    }
    return in;
}

inline WindowData window_at(const std::vector<VectorXd>& ys, const InputLog& in, std::size_t start, int K) {
    WindowData w;
    for (std::size_t k = start; k < start + static_cast<std::size_t>(K); ++k) {
        w.y.push_back(ys[k]);
        w.U.push_back(in.U[k]);
        w.H.push_back(in.H[k]);
    }
    return w;
}

// Forward states of a decoded window through the model.
inline std::vector<VectorXd> propagate_window(const EnlargedSystem& sys, const WindowData& w, const DecodeResult& r) {
    std::vector<VectorXd> xs{r.X0_hat};
    for (std::size_t j = 0; j + 1 < w.y.size(); ++j) {
        VectorXd x = sys.A * xs.back() + w.U[j] - sys.B * r.E_hat.row(static_cast<Eigen::Index>(j)).transpose();
        if (r.eps_hat.cols()) x -= w.H[j] * r.eps_hat.row(static_cast<Eigen::Index>(j)).transpose();
        xs.push_back(x);
    }
    return xs;
}

struct WindowReport {
    long start = 0;
    bool recovered = false;
    double residual = 0.0;
    SolveStatus solver_status = SolveStatus::NumericalError;
    int iterations = 0;
};

struct WindowedEstimate {
    MatrixXd E_hat;  // steps x measurements, NaN where no successful window covers the step
    MatrixXd X_hat;  // steps x states
    std::vector<long> source;  // window start that produced each row, -1 if none
    std::vector<char> failed;  // the latest window covering the step failed
    std::vector<WindowReport> windows;
};

// Slides a K-step window with the given stride. Each step takes its values
// from the most recent window that covers it; if that window failed the step
// is flagged and left empty.
inline WindowedEstimate run_windowed(const AugmentedGrid& g, const EnlargedSystem& sys, const std::vector<VectorXd>& ys, const InputLog& in, int K,
                                     int stride, const DecodeOptions& opt = {}) {
    if (stride < 1) throw ModelError("run_windowed: stride must be at least 1");
    if (K < 1 || ys.size() < static_cast<std::size_t>(K)) throw ModelError("run_windowed: not enough measurements for one window");
    if (in.U.size() != ys.size() || in.H.size() != ys.size()) throw ModelError("run_windowed: input log length differs from measurement log");
    const auto T = static_cast<Eigen::Index>(ys.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    WindowedEstimate out;
    out.E_hat = MatrixXd::Constant(T, sys.C.rows(), nan);
    out.X_hat = MatrixXd::Constant(T, sys.A.rows(), nan);
    out.source.assign(static_cast<std::size_t>(T), -1);
    out.failed.assign(static_cast<std::size_t>(T), 0);

    std::vector<long> starts;
    const long last = static_cast<long>(T) - K;
    for (long s = 0; s <= last; s += stride) starts.push_back(s);
    if (starts.back() != last) starts.push_back(last);  // cover the tail

    std::optional<Annihilator> an;
    for (long s : starts) {
        const auto w = window_at(ys, in, static_cast<std::size_t>(s), K);
        const auto st = build_stack(sys, w, K);
        if (!an) an = annihilate(st.Phi);  // Phi depends only on A, C and K
        const auto r = decode_window(g, st, *an, opt);
        out.windows.push_back({s, r.recovered, r.residual_norm, r.solver_status, r.iterations});
        const auto xs = r.recovered ? propagate_window(sys, w, r) : std::vector<VectorXd>{};
        for (int j = 0; j < K; ++j) {
            const auto k = static_cast<Eigen::Index>(s + j);
            out.source[static_cast<std::size_t>(k)] = s;
            out.failed[static_cast<std::size_t>(k)] = r.recovered ? 0 : 1;
            if (r.recovered) {
                out.E_hat.row(k) = r.E_hat.row(j);
                out.X_hat.row(k) = xs[static_cast<std::size_t>(j)].transpose();
            } else {
                out.E_hat.row(k).setConstant(nan);
                out.X_hat.row(k).setConstant(nan);
            }
        }
    }
    return out;
}

}  // namespace mgsse
