#pragma once

#include <string>

#include "common.hpp"
#include "stacked.hpp"

namespace mgsse {

struct KFConfig {
    double q = 1e-6;   // process noise, times identity
    double r = 1e-4;   // measurement noise, times identity
    double p0 = 1e-2;  // initial covariance, times identity
};

inline void validate(const KFConfig& c) {
    if (!(c.q > 0.0)) throw ConfigError("kf.q must be positive");
    if (!(c.r > 0.0)) throw ConfigError("kf.r must be positive");
    if (!(c.p0 > 0.0)) throw ConfigError("kf.p0 must be positive");
}

struct KFState {
    VectorXd x;
    MatrixXd P;
};

struct KFStep {
    KFState prior;
    KFState post;
    VectorXd correction;  // gain times innovation
};

// Known forcing of one model step: U - B E_hat - H eps_hat.
inline VectorXd model_drive(const EnlargedSystem& sys, const VectorXd& U, const MatrixXd& H, const VectorXd& E_hat, const VectorXd& eps_hat) {
    VectorXd d = U - sys.B * E_hat;
    if (H.cols()) d -= H * eps_hat;
    return d;
}

inline KFState kf_predict(const KFState& s, const EnlargedSystem& sys, const VectorXd& drive, const KFConfig& c) {
    KFState p;
    p.x = sys.A * s.x + drive;
    p.P = sys.A * s.P * sys.A.transpose();
    p.P.diagonal().array() += c.q;
    p.P = 0.5 * (p.P + p.P.transpose()).eval();
    return p;
}

// Joseph-form update with y_corrected = y - E_hat.
inline KFStep kf_update(const KFState& prior, const EnlargedSystem& sys, const VectorXd& y_corrected, const KFConfig& c) {
    const MatrixXd& C = sys.C;
    MatrixXd S = C * prior.P * C.transpose();
    S.diagonal().array() += c.r;
    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw SolverError("kf_update: innovation covariance is not positive definite (r=" + std::to_string(c.r) + ")");
    const MatrixXd K = llt.solve(C * prior.P).transpose();
    KFStep out;
    out.prior = prior;
    out.correction = K * (y_corrected - C * prior.x);
    out.post.x = prior.x + out.correction;
    const MatrixXd IKC = MatrixXd::Identity(prior.P.rows(), prior.P.cols()) - K * C;
    out.post.P = IKC * prior.P * IKC.transpose() + c.r * K * K.transpose();
    out.post.P = 0.5 * (out.post.P + out.post.P.transpose()).eval();
    return out;
}

inline KFStep kf_step(const KFState& s, const EnlargedSystem& sys, const VectorXd& drive, const VectorXd& y_corrected, const KFConfig& c) {
    return kf_update(kf_predict(s, sys, drive, c), sys, y_corrected, c);
}

}  // namespace mgsse
