// Randomized invariants over many seeds.
#include <catch_amalgamated.hpp>

#include <numeric>

#include "toy_grid.hpp"

using namespace mgsse;

TEST_CASE("trig expansion holds on random angles") {
    Rng rng(101);
    for (int n = 0; n < 2000; ++n) {
        const Edge e = edge_from_line({1, 2, rng.uniform(0.0, 0.3), rng.uniform(0.1, 1.0)});
        const double r = trig_error_expansion_check(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 3), rng.uniform(-3, 3), e,
                                                    rng.uniform(0.01, 1.0));
        REQUIRE(std::abs(r) < 1e-12);
    }
}

TEST_CASE("lossless networks conserve power") {
    Rng rng(102);
    for (int n = 0; n < 20; ++n) {
        const auto g = ieee33();
        VectorXd th(static_cast<Eigen::Index>(g.n_bus()));
        for (auto& v : th) v = rng.uniform(-0.5, 0.5);
        double total = 0.0;
        for (std::size_t i = 0; i < g.n_bus(); ++i) total += outflow(g, i, th);
        REQUIRE(std::abs(total) < 1e-12);
    }
}

TEST_CASE("random grids: model step matches the plant under random attacks") {
    Rng rng(103);
    for (int n = 0; n < 30; ++n) {
        const auto g = random_grid(rng, 4 + static_cast<int>(rng.below(8)));
        const SimParams sim;
        const auto sys = assemble_enlarged(g, sim);
        VectorXd x = to_state_vector(g, init_equilibrium(g, sim.omega0));
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += rng.uniform(-0.05, 0.05);
        VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(g.n_meas()));
        for (int j = 0; j < 2; ++j) e[static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(e.size())))] = rng.uniform(-0.5, 0.5);
        const VectorXd y = sys.C * x + e;
        const VectorXd plant = to_state_vector(g, step_plant(from_state_vector(g, x), g, sim, e));
        const VectorXd model = sys.A * x + build_u(g, sys, y) - sys.B * e - build_h_reduced(g, sys, y) * eps_from_attack(g, e);
        REQUIRE((plant - model).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("basis pursuit output is feasible and no worse than known feasible points") {
    Rng rng(104);
    for (int n = 0; n < 40; ++n) {
        const Eigen::Index m = 5 + static_cast<Eigen::Index>(rng.below(10)), cols = m + 1 + static_cast<Eigen::Index>(rng.below(20));
        MatrixXd A(m, cols);
        for (auto& v : A.reshaped()) v = rng.uniform(-1, 1);
        VectorXd x0(cols);
        for (auto& v : x0) v = rng.uniform() < 0.3 ? rng.uniform(-2, 2) : 0.0;
        BPProblem p;
        p.A = A;
        p.b = A * x0;
        const auto r = basis_pursuit(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        REQUIRE(r.residual < 1e-7);
        const VectorXd mn = A.completeOrthogonalDecomposition().solve(p.b);
        REQUIRE(r.x.lpNorm<1>() <= x0.lpNorm<1>() + 1e-7);
        REQUIRE(r.x.lpNorm<1>() <= mn.lpNorm<1>() + 1e-7);
    }
}

TEST_CASE("filter covariance stays symmetric and definite on random grids") {
    Rng rng(105);
    for (int n = 0; n < 10; ++n) {
        const auto g = random_grid(rng, 5);
        const auto sys = assemble_enlarged(g, SimParams{});
        const KFConfig c;
        const auto nx = sys.A.rows(), ny = sys.C.rows();
        KFState s{VectorXd::Zero(nx), MatrixXd::Identity(nx, nx) * c.p0};
        for (int k = 0; k < 30; ++k) {
            VectorXd y(ny);
            for (auto& v : y) v = rng.uniform(-0.1, 0.1);
            s = kf_step(s, sys, VectorXd::Zero(nx), y, c).post;
        }
        REQUIRE((s.P - s.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(Eigen::LLT<MatrixXd>(s.P).info() == Eigen::Success);
    }
}

TEST_CASE("window stack reproduces simulated measurements on random grids") {
    Rng rng(106);
    for (int n = 0; n < 20; ++n) {
        const auto g = random_grid(rng, 4 + static_cast<int>(rng.below(6)));
        const SimParams sim;
        const auto sys = assemble_enlarged(g, sim);
        const int K = 2 + static_cast<int>(rng.below(3));
        const auto ny = static_cast<Eigen::Index>(g.n_meas());
        std::vector<VectorXd> att(static_cast<std::size_t>(K + 3), VectorXd::Zero(ny));
        for (auto& e : att) e[static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(ny)))] = rng.uniform(-0.4, 0.4);
        const auto log = simulate(g, sim, att);
        const auto in = compute_inputs(g, sys, log.y);
        const auto w = window_at(log.y, in, 3, K);
        const auto s = build_stack(sys, w, K);
        VectorXd E(K * ny), eps(K * s.neps);
        for (int k = 0; k < K; ++k) {
            E.segment(k * ny, ny) = log.e[static_cast<std::size_t>(3 + k)];
            eps.segment(k * s.neps, s.neps) = eps_from_attack(g, log.e[static_cast<std::size_t>(3 + k)]);
        }
        REQUIRE((s.Phi * log.x[3] + s.Psi1 * E + s.Psi2 * eps - s.Ybar).cwiseAbs().maxCoeff() < 1e-9);
    }
}
