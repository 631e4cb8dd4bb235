#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"

namespace mgsse {

enum class SolveStatus { Optimal, Infeasible, MaxIter, NumericalError };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::NumericalError: return "numerical_error";
    }
    return "?";
}

struct BPProblem {
    MatrixXd A;
    VectorXd b;
    VectorXd weights;  // empty means all ones
    double tol_primal = 1e-8;
    double tol_dual = 1e-8;
    int max_iter = 200;
};

struct BPResult {
    VectorXd x;
    SolveStatus status = SolveStatus::NumericalError;
    double residual = 0.0;  // max |A x - b|
    int iterations = 0;
    int dropped_rows = 0;
    bool polished = false;
    std::vector<std::string> warnings;
};

namespace detail {

inline double max_step(const VectorXd& v, const VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

template <class Index>
MatrixXd columns(const MatrixXd& A, const std::vector<Index>& idx) {
    MatrixXd S(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) S.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    return S;
}

// Re-solve on the support of x by least squares, which zeroes the entries the
// interior-point iterate only drives close to zero. Kept only when it stays
// feasible and does not raise the weighted l1 norm.
inline bool polish(const MatrixXd& A, const VectorXd& b, const VectorXd& w, VectorXd& x, double feas_tol) {
    const double big = std::max(1.0, x.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> S;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) > 1e-7 * big) S.push_back(i);
    if (S.empty()) {
        if (b.cwiseAbs().maxCoeff() <= feas_tol) {
            x.setZero();
            return true;
        }
        return false;
    }
    if (static_cast<Eigen::Index>(S.size()) > A.rows()) return false;
    MatrixXd AS = columns(A, S);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(AS);
    if (qr.rank() < AS.cols()) return false;
    VectorXd xs = qr.solve(b);
    VectorXd cand = VectorXd::Zero(x.size());
    for (std::size_t k = 0; k < S.size(); ++k) cand[S[k]] = xs[static_cast<Eigen::Index>(k)];
    const double res = (A * cand - b).cwiseAbs().maxCoeff();
    const double old_res = (A * x - b).cwiseAbs().maxCoeff();
    const double l1_new = w.dot(cand.cwiseAbs()), l1_old = w.dot(x.cwiseAbs());
    if (res > std::max(old_res, feas_tol)) return false;
    if (l1_new > l1_old + 1e-9 * (1.0 + l1_old)) return false;
    x = cand;
    return true;
}

// Turns a near-optimal interior iterate into a vertex and certifies it.
// Entries below rel_thr are dropped, the rest refit by least squares, then
// null directions of the support are followed (never raising the weighted l1
// norm) until the support columns are independent. The dual point y is moved
// the least amount that satisfies the support equations exactly; if it then
// stays within rel_gap of the weight bounds the primal-dual gap is at most
// rel_gap and x is returned as optimal.
inline bool certify_vertex(const MatrixXd& A, const VectorXd& b, const VectorXd& w, const VectorXd& x_in, const VectorXd& y, double rel_thr, double feas_tol,
                           double rel_gap, VectorXd& x_out) {
    const double big = std::max(1.0, x_in.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> S;
    for (Eigen::Index i = 0; i < x_in.size(); ++i)
        if (std::abs(x_in[i]) > rel_thr * big) S.push_back(i);
    if (S.empty()) {
        if (b.cwiseAbs().maxCoeff() > feas_tol) return false;
        if ((A.transpose() * y).cwiseQuotient(w).cwiseAbs().maxCoeff() > 1.0 + rel_gap && b.cwiseAbs().maxCoeff() > 0.0) return false;
        x_out = VectorXd::Zero(x_in.size());
        return true;
    }
    MatrixXd AS = columns(A, S);
    VectorXd xs = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(AS).solve(b);
    if (!((AS * xs - b).cwiseAbs().maxCoeff() <= feas_tol)) return false;

    for (;;) {
        Eigen::FullPivLU<MatrixXd> lu(AS);
        lu.setThreshold(1e-10);
        if (lu.rank() == AS.cols()) break;
        VectorXd v = lu.kernel().col(0);
        double g = 0.0;
        for (Eigen::Index k = 0; k < xs.size(); ++k) g += w[S[static_cast<std::size_t>(k)]] * (xs[k] > 0 ? v[k] : -v[k]);
        if (g > 0.0) v = -v;
        Eigen::Index hit = -1;
        double t = std::numeric_limits<double>::infinity();
        for (int flip = 0; flip < 2 && hit < 0; ++flip) {
            for (Eigen::Index k = 0; k < xs.size(); ++k)
                if (xs[k] * v[k] < 0.0 && -xs[k] / v[k] < t) {
                    t = -xs[k] / v[k];
                    hit = k;
                }
            // a null direction that leaves the norm flat may point either way
            if (hit < 0 && std::abs(g) <= 1e-12 * w.maxCoeff()) v = -v;
            else break;
        }
        if (hit < 0) return false;
        xs += t * v;
        S.erase(S.begin() + hit);
        VectorXd shrunk(xs.size() - 1);
        shrunk << xs.head(hit), xs.tail(xs.size() - hit - 1);
        xs = shrunk;
        AS = columns(A, S);
        if (S.empty()) break;
    }
    if (!S.empty()) {
        xs = Eigen::ColPivHouseholderQR<MatrixXd>(AS).solve(b);
        if (!((AS * xs - b).cwiseAbs().maxCoeff() <= feas_tol)) return false;
    }

    VectorXd y2 = y;
    if (!S.empty()) {
        VectorXd sw(static_cast<Eigen::Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            if (xs[kk] == 0.0) return false;
            sw[kk] = xs[kk] > 0 ? w[S[k]] : -w[S[k]];
        }
        y2 += Eigen::CompleteOrthogonalDecomposition<MatrixXd>(AS.transpose()).solve(sw - AS.transpose() * y);
    }
    const double viol = (A.transpose() * y2).cwiseQuotient(w).cwiseAbs().maxCoeff() - 1.0;
    if (!(viol <= rel_gap)) return false;
    x_out = VectorXd::Zero(x_in.size());
    for (std::size_t k = 0; k < S.size(); ++k) x_out[S[k]] = xs[static_cast<Eigen::Index>(k)];
    return true;
}

}  // namespace detail

// min sum w_i |x_i|  s.t.  A x = b, solved as the LP over x = xp - xn >= 0 by
// a primal-dual interior-point method with Mehrotra predictor-corrector steps.
inline BPResult basis_pursuit(const BPProblem& prob) {
    BPResult out;
    const Eigen::Index n = prob.A.cols();
    if (prob.b.size() != prob.A.rows()) throw SolverError("basis_pursuit: A and b disagree in row count");
    if (prob.weights.size() != 0 && prob.weights.size() != n) throw SolverError("basis_pursuit: weight vector has wrong length");
    const VectorXd w = prob.weights.size() ? prob.weights : VectorXd::Ones(n);
    if ((w.array() <= 0.0).any()) throw SolverError("basis_pursuit: weights must be positive");
    out.x = VectorXd::Zero(n);
    if (n == 0) {
        out.residual = prob.b.size() ? prob.b.cwiseAbs().maxCoeff() : 0.0;
        out.status = out.residual <= prob.tol_primal ? SolveStatus::Optimal : SolveStatus::Infeasible;
        return out;
    }

    // Drop numerically empty rows; a nonzero right-hand side there is infeasible.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < prob.A.rows(); ++r) {
        if (prob.A.row(r).norm() >= 1e-12) keep.push_back(r);
        else if (std::abs(prob.b[r]) > prob.tol_primal) {
            out.status = SolveStatus::Infeasible;
            out.residual = std::abs(prob.b[r]);
            return out;
        }
    }
    out.dropped_rows = static_cast<int>(prob.A.rows()) - static_cast<int>(keep.size());
    if (out.dropped_rows) out.warnings.push_back("dropped " + std::to_string(out.dropped_rows) + " degenerate rows");
    MatrixXd A0(static_cast<Eigen::Index>(keep.size()), n);
    VectorXd b0(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        A0.row(static_cast<Eigen::Index>(k)) = prob.A.row(keep[k]);
        b0[static_cast<Eigen::Index>(k)] = prob.b[keep[k]];
    }
    if (A0.rows() == 0) {
        out.status = SolveStatus::Optimal;
        return out;
    }

    // Minimum-norm solution: a feasibility test and the starting point.
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A0);
    const VectorXd xmn = cod.solve(b0);
    const double bscale = 1.0 + b0.cwiseAbs().maxCoeff();
    const double mn_res = (A0 * xmn - b0).cwiseAbs().maxCoeff();
    if (mn_res > 1e-7 * bscale) {
        out.status = SolveStatus::Infeasible;
        out.residual = mn_res;
        out.x = xmn;
        return out;
    }

    // Keep a maximal independent row subset so the normal matrix is definite.
    MatrixXd A;
    VectorXd b;
    if (cod.rank() < A0.rows()) {
        Eigen::ColPivHouseholderQR<MatrixXd> rq(A0.transpose());
        const auto r = rq.rank();
        A.resize(r, n);
        b.resize(r);
        for (Eigen::Index k = 0; k < r; ++k) {
            const auto row = rq.colsPermutation().indices()[k];
            A.row(k) = A0.row(row);
            b[k] = b0[row];
        }
        out.warnings.push_back("removed " + std::to_string(A0.rows() - r) + " dependent rows");
    } else {
        A = A0;
        b = b0;
    }
    const Eigen::Index m = A.rows(), N = 2 * n;

    VectorXd c(N);
    c << w, w;
    VectorXd x(N), z(N), y = VectorXd::Zero(m);
    x << 0.5 * xmn, -0.5 * xmn;
    z = c;
    {
        const double dx = std::max(-1.5 * x.minCoeff(), 0.0);
        const double dz = std::max(-1.5 * z.minCoeff(), 0.0);
        x.array() += dx;
        z.array() += dz;
        const double xz = x.dot(z);
        if (xz > 0.0) {
            x.array() += 0.5 * xz / z.sum();
            z.array() += 0.5 * xz / x.sum();
        }
        const double floor = 1e-2 * (1.0 + xmn.cwiseAbs().maxCoeff());
        x = x.cwiseMax(floor);
    }

    auto apply = [&](const VectorXd& v) { return VectorXd(A * (v.head(n) - v.tail(n))); };  // [A, -A] v
    auto apply_t = [&](const VectorXd& v) {
        VectorXd t = A.transpose() * v;
        VectorXd r(N);
        r << t, -t;
        return r;
    };

    const double cscale = 1.0 + c.cwiseAbs().maxCoeff();
    VectorXd best_x = xmn;
    double best_merit = std::numeric_limits<double>::infinity();
    Eigen::LLT<MatrixXd> llt;
    out.status = SolveStatus::MaxIter;

    for (int it = 0; it < prob.max_iter; ++it) {
        out.iterations = it + 1;
        const VectorXd rp = b - apply(x);
        const VectorXd rd = c - apply_t(y) - z;
        const double mu = x.dot(z) / static_cast<double>(N);
        const double pobj = c.dot(x), dobj = b.dot(y);
        const double ep = rp.cwiseAbs().maxCoeff() / bscale;
        const double ed = rd.cwiseAbs().maxCoeff() / cscale;
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        const double merit = std::max({ep, ed, gap});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x.head(n) - x.tail(n);
        }
        if (ep <= prob.tol_primal && ed <= prob.tol_dual && gap <= prob.tol_primal) {
            out.status = SolveStatus::Optimal;
            break;
        }
        // Near the end the normal equations lose accuracy and the primal
        // residual can stall just above tolerance, so try to certify a vertex.
        if (merit <= 1e3 * std::max(prob.tol_primal, prob.tol_dual)) {
            VectorXd xv;
            const VectorXd xc = x.head(n) - x.tail(n);
            bool ok = false;
            for (double thr : {1e-9, 1e-7, 1e-5})
                if ((ok = detail::certify_vertex(A, b, w, xc, y, thr, prob.tol_primal * bscale, prob.tol_dual, xv))) break;
            if (ok) {
                x.head(n) = xv.cwiseMax(0.0);
                x.tail(n) = (-xv).cwiseMax(0.0);
                out.status = SolveStatus::Optimal;
                break;
            }
        }

        const VectorXd d = x.cwiseQuotient(z);
        const VectorXd dsum = d.head(n) + d.tail(n);
        MatrixXd Mn = A * dsum.asDiagonal() * A.transpose();
        llt.compute(Mn);
        if (llt.info() != Eigen::Success) {
            Mn.diagonal().array() += 1e-14 * (1.0 + Mn.diagonal().maxCoeff());
            llt.compute(Mn);
            if (llt.info() != Eigen::Success) {
                out.status = SolveStatus::NumericalError;
                break;
            }
        }

        // The normal matrix grows ill-conditioned near the optimum; a few
        // refinement passes against the unformed operator keep A dx = rp.
        auto solve_dir = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& dz) {
            const VectorXd rc_z = rc.cwiseQuotient(z);
            const VectorXd rhs = rp + apply(d.cwiseProduct(rd) - rc_z);
            dy = llt.solve(rhs);
            dx = d.cwiseProduct(apply_t(dy) - rd) + rc_z;
            for (int pass = 0; pass < 3; ++pass) {
                const VectorXd res = rp - apply(dx);
                if (res.cwiseAbs().maxCoeff() <= 1e-15 * bscale) break;
                dy += llt.solve(res);
                dx = d.cwiseProduct(apply_t(dy) - rd) + rc_z;
            }
            dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
        };

        VectorXd dxa, dya, dza;
        const VectorXd rc_aff = -x.cwiseProduct(z);
        solve_dir(rc_aff, dxa, dya, dza);
        const double ap_aff = detail::max_step(x, dxa), ad_aff = detail::max_step(z, dza);
        const double mu_aff = (x + ap_aff * dxa).dot(z + ad_aff * dza) / static_cast<double>(N);
        const double sigma = std::pow(mu_aff / mu, 3);

        VectorXd dx, dy, dz;
        const VectorXd rc = (sigma * mu - x.array() * z.array() - dxa.array() * dza.array()).matrix();
        solve_dir(rc, dx, dy, dz);
        const double ap = std::min(1.0, 0.99 * detail::max_step(x, dx));
        const double ad = std::min(1.0, 0.99 * detail::max_step(z, dz));
        x += ap * dx;
        y += ad * dy;
        z += ad * dz;
        if (!x.allFinite() || !y.allFinite() || !z.allFinite()) {
            out.status = SolveStatus::NumericalError;
            break;
        }
    }

    out.x = out.status == SolveStatus::Optimal ? VectorXd(x.head(n) - x.tail(n)) : best_x;
    if (out.status == SolveStatus::Optimal)
        out.polished = detail::polish(prob.A, prob.b, w, out.x, std::max(prob.tol_primal, 1e-12) * bscale);
    out.residual = (prob.A * out.x - prob.b).cwiseAbs().maxCoeff();
    if (out.status == SolveStatus::MaxIter) out.warnings.push_back("iteration cap reached");
    return out;
}

struct L0Result {
    VectorXd x;
    std::vector<int> support;
    bool unique = true;
    long long supports_tried = 0;
};

namespace detail {

inline double binom(long long n, long long k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (long long i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// Advance a sorted combination of size k over [0, n); false once exhausted.
inline bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[static_cast<std::size_t>(i)] < n - k + i) {
            ++c[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Sparsest solution of A x = b by enumeration of supports up to q_max. Among
// several solutions of the minimal size the lexicographically smallest support
// is returned and `unique` is false.
inline L0Result l0_oracle(const MatrixXd& A, const VectorXd& b, int q_max, double tol = 1e-9, double budget = 1e6) {
    const int n = static_cast<int>(A.cols());
    if (b.size() != A.rows()) throw SolverError("l0_oracle: A and b disagree in row count");
    q_max = std::min(q_max, n);
    double total = 0.0;
    for (int s = 0; s <= q_max; ++s) total += detail::binom(n, s);
    if (total > budget) throw SolverError("l0_oracle: enumeration budget exceeded (" + std::to_string(total) + " supports)");

    const double thr = tol * std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
    L0Result out;
    out.x = VectorXd::Zero(n);
    if (b.size() == 0 || b.norm() < thr) return out;

    for (int s = 1; s <= q_max; ++s) {
        std::vector<int> c(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) c[static_cast<std::size_t>(i)] = i;
        int found = 0;
        do {
            ++out.supports_tried;
            const MatrixXd AS = detail::columns(A, c);
            Eigen::ColPivHouseholderQR<MatrixXd> qr(AS);
            const VectorXd xs = qr.solve(b);
            if ((AS * xs - b).norm() < thr) {
                if (found++ == 0) {
                    out.support = c;
                    out.x.setZero();
                    for (int i = 0; i < s; ++i) out.x[c[static_cast<std::size_t>(i)]] = xs[i];
                } else {
                    out.unique = false;
                    break;
                }
            }
        } while (detail::next_combination(c, n));
        if (found) return out;
    }
    throw SolverError("l0_oracle: no sparse solution with at most " + std::to_string(q_max) + " nonzeros");
}

// True iff every 2s-column submatrix has smallest singular value above tol.
inline bool rank_condition_check(const MatrixXd& A, int s, double tol = 1e-9, double budget = 1e6) {
    const int n = static_cast<int>(A.cols()), k = 2 * s;
    if (s <= 0) return true;
    if (k > n) throw SolverError("rank_condition_check: 2s exceeds the column count");
    if (detail::binom(n, k) > budget) throw SolverError("rank_condition_check: enumeration budget exceeded");
    if (k > A.rows()) return false;
    std::vector<int> c(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
    do {
        Eigen::JacobiSVD<MatrixXd> svd(detail::columns(A, c));
        if (svd.singularValues()[k - 1] <= tol) return false;
    } while (detail::next_combination(c, n));
    return true;
}

}  // namespace mgsse
