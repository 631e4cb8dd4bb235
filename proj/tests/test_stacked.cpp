#include <catch_amalgamated.hpp>

#include "derived.hpp"
#include "toy_grid.hpp"

using namespace mgsse;
using Catch::Approx;

namespace {

VectorXd toy_x0() {
    VectorXd x(9);
    for (int i = 0; i < 9; ++i) x[i] = derived::toy_x0[static_cast<std::size_t>(i)];
    return x;
}

}  // namespace

TEST_CASE("generator block coefficients") {
    BusParams p;
    p.M = 10;
    p.D = 2;
    p.R = 9.5;
    p.tau = 5;
    const SimParams sim;
    const auto b = discretize_sg(p, sim.delta, sim.omega0, 0.25);
    const auto& c = derived::sg_coefficients;
    CHECK(b.alpha == Approx(c[0]).epsilon(1e-15));
    CHECK(b.beta == Approx(c[1]).epsilon(1e-15));
    CHECK(b.eta == Approx(c[2]).epsilon(1e-15));
    CHECK(b.nu == Approx(c[3]).epsilon(1e-15));
    CHECK(b.kappa == Approx(c[4]).epsilon(1e-15));
    CHECK(b.zeta == Approx(c[5]).epsilon(1e-15));
    CHECK(b.A(0, 1) == sim.delta);
    CHECK(b.A(2, 1) == -b.nu);
    CHECK(b.B(2, 1) == b.nu);
    p.M = 0;
    CHECK_THROWS_AS(discretize_sg(p, sim.delta, sim.omega0, 0.25), ModelError);
}

TEST_CASE("enlarged model shapes") {
    const auto g = ieee33();
    const auto sys = assemble_enlarged(g, SimParams{});
    CHECK(sys.A.rows() == 67);
    CHECK(sys.B.cols() == 64);
    CHECK(sys.C.rows() == 64);
    CHECK(sys.blocks.size() == 3);
    // C picks exactly one state per measurement
    CHECK((sys.C.rowwise().sum().array() == 1.0).all());
}

TEST_CASE("known input and coupling map match the reference") {
    const auto g = toy_grid();
    const auto sys = assemble_enlarged(g, SimParams{});
    const VectorXd x0 = toy_x0();
    const VectorXd y0 = sys.C * x0;
    const VectorXd u = build_u(g, sys, y0);
    for (int i = 0; i < 9; ++i) CHECK(u[i] == Approx(derived::toy_u[static_cast<std::size_t>(i)]).epsilon(1e-13).margin(1e-15));

    VectorXd e = VectorXd::Zero(8);
    e[1] = 0.3;
    const MatrixXd H = build_h_reduced(g, sys, y0 + e);
    for (int r = 0; r < 9; ++r) CHECK(H.row(r).norm() == Approx(derived::toy_h_row_norms[static_cast<std::size_t>(r)]).margin(1e-14));
    const VectorXd eps = eps_from_attack(g, e);
    for (int k = 0; k < 12; ++k) CHECK(eps[k] == Approx(derived::toy_eps[static_cast<std::size_t>(k)]).margin(1e-15));
}

TEST_CASE("linear model closes the plant step under an angle attack") {
    const auto g = toy_grid();
    const SimParams sim;
    const auto sys = assemble_enlarged(g, sim);
    const VectorXd x0 = toy_x0();
    VectorXd e = VectorXd::Zero(8);
    e[1] = 0.3;
    e[5] = -0.4;
    const VectorXd y = sys.C * x0 + e;
    const VectorXd x1 = to_state_vector(g, step_plant(from_state_vector(g, x0), g, sim, e));
    const VectorXd model = sys.A * x0 + build_u(g, sys, y) - sys.B * e - build_h_reduced(g, sys, y) * eps_from_attack(g, e);
    CHECK((model - x1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("speed correction enters through the governor row") {
    const auto g = toy_grid();
    const auto sys = assemble_enlarged(g, SimParams{});
    const VectorXd y = sys.C * toy_x0();
    VectorXd corr = VectorXd::Zero(8);
    corr[5] = 0.7;
    VectorXd d = build_u(g, sys, y, corr) - build_u(g, sys, y);
    CHECK(d[6] == Approx(sys.blocks[0].nu * 0.7));
    d[6] = 0.0;
    CHECK(d.isZero());
    CHECK_THROWS_AS(build_u(g, sys, y, VectorXd::Zero(3)), ModelError);
}

TEST_CASE("two-step window offsets match the reference") {
    const auto g = toy_grid();
    const SimParams sim;
    const auto sys = assemble_enlarged(g, sim);
    const VectorXd x0 = toy_x0();
    VectorXd ea = VectorXd::Zero(8), eb = VectorXd::Zero(8);
    ea[1] = 0.3;
    eb[6] = -0.2;
    const VectorXd x1 = to_state_vector(g, step_plant(from_state_vector(g, x0), g, sim, VectorXd::Zero(8)));
    WindowData w;
    w.y = {sys.C * x0 + ea, sys.C * x1 + eb};
    w.U = {build_u(g, sys, w.y[0])};
    w.H = {build_h_reduced(g, sys, w.y[0])};
    const auto s = build_stack(sys, w, 2);
    CHECK(s.Phi.rows() == 16);
    CHECK(s.Psi2.cols() == 24);
    for (int i = 0; i < 16; ++i) CHECK(s.Ybar[i] == Approx(derived::toy_ybar[static_cast<std::size_t>(i)]).epsilon(1e-12).margin(1e-14));

    // Ybar = Phi x0 + Psi [E; eps]
    VectorXd E(16), eps(24);
    E << ea, eb;
    eps << eps_from_attack(g, ea), eps_from_attack(g, eb);
    const VectorXd rebuilt = s.Phi * x0 + s.Psi1 * E + s.Psi2 * eps;
    CHECK((rebuilt - s.Ybar).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stack rejects short or inconsistent windows") {
    const auto g = toy_grid();
    const auto sys = assemble_enlarged(g, SimParams{});
    WindowData w;
    w.y = {VectorXd::Zero(8)};
    CHECK_THROWS_AS(build_stack(sys, w, 0), ModelError);
    CHECK_THROWS_AS(build_stack(sys, w, 2), ModelError);
    w.y.push_back(VectorXd::Zero(8));
    w.U = {VectorXd::Zero(4)};
    w.H = {MatrixXd::Zero(9, 12)};
    CHECK_THROWS_AS(build_stack(sys, w, 2), ModelError);
}

TEST_CASE("trig expansion is exact") {
    const Edge e = edge_from_line({1, 2, 0.0, 0.5});
    CHECK(std::abs(trig_error_expansion_check(0.1, -0.2, 0.3, 0.05, e, 0.4)) < 1e-15);
    const auto [c, s] = trig_error(0.2, 0.2);
    CHECK(c == 0.0);
    CHECK(s == 0.0);
}
