#include <catch_amalgamated.hpp>

#include <set>

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

TEST_CASE("one Euler step matches the reference") {
    const auto g = toy_grid();
    const SimParams sim;
    VectorXd e = VectorXd::Zero(8);
    e[5] = 0.2;  // speed reading of the internal generator bus
    const auto next = step_plant(from_state_vector(g, toy_x0()), g, sim, e);
    const VectorXd x1 = to_state_vector(g, next);
    for (int i = 0; i < 9; ++i) CHECK(x1[i] == Approx(derived::toy_step[static_cast<std::size_t>(i)]).epsilon(1e-13));
    CHECK(next.t == Approx(sim.delta));
}

TEST_CASE("equilibrium of a balanced grid at zero angles is not stationary for loads") {
    // zero angles carry no flow, so load buses drift until flows build up
    const auto g = toy_grid();
    const SimParams sim;
    const auto s0 = init_equilibrium(g, sim.omega0);
    const auto s1 = step_plant(s0, g, sim, VectorXd::Zero(8));
    CHECK(s1.omega[0] == Approx(sim.omega0));
    CHECK(s1.theta[3] == Approx(-sim.delta * 0.3 / 0.1));
}

TEST_CASE("state vector round trip") {
    const auto g = ieee33();
    Rng rng(3);
    VectorXd x(static_cast<Eigen::Index>(g.n_state()));
    for (auto& v : x) v = rng.uniform(-1, 1);
    CHECK((to_state_vector(g, from_state_vector(g, x)) - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(from_state_vector(g, VectorXd::Zero(3)), ModelError);
}

TEST_CASE("measurement adds the attack to the clean reading") {
    const auto g = toy_grid();
    const auto s = from_state_vector(g, toy_x0());
    VectorXd e = VectorXd::Zero(8);
    e[1] = 0.3;
    const auto f0 = measure(g, s, VectorXd::Zero(8));
    const auto f1 = measure(g, s, e, 4);
    CHECK(f1.k == 4);
    CHECK((f1.y - f0.y - e).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f0.y[5] == Approx(derived::toy_x0[5]));
    CHECK_THROWS_AS(measure(g, s, VectorXd::Zero(2)), ModelError);
}

TEST_CASE("attack generator respects start time, count and channel set") {
    const auto g = ieee33();
    const SimParams sim;
    AttackSpec spec;
    spec.type = AttackType::TypeA;
    Rng rng(1);
    CHECK(targetable_rows(g, AttackType::TypeA).size() == 9);
    CHECK(targetable_rows(g, AttackType::TypeB).size() == 50);
    CHECK(targetable_rows(g, AttackType::None).empty());

    const long first = 66;  // 1.1 s at 60 Hz
    CHECK_FALSE(attack_active(spec, first - 1, sim.delta));
    CHECK(attack_active(spec, first, sim.delta));
    CHECK(gen_attack(g, spec, first - 1, sim.delta, rng).isZero());

    std::set<int> allowed;
    for (auto r : targetable_rows(g, AttackType::TypeA)) allowed.insert(r.row);
    for (long k = first; k < first + 50; ++k) {
        const VectorXd e = gen_attack(g, spec, k, sim.delta, rng);
        int nz = 0;
        for (Eigen::Index r = 0; r < e.size(); ++r)
            if (e[r] != 0.0) {
                ++nz;
                CHECK(allowed.count(static_cast<int>(r)));
            }
        CHECK(nz == 5);
    }
    spec.q = 10;
    CHECK_THROWS_AS(gen_attack(g, spec, first, sim.delta, rng), ModelError);
}

TEST_CASE("attack draws are reproducible per seed") {
    const auto g = ieee33();
    AttackSpec spec;
    spec.type = AttackType::TypeB;
    Rng a(9), b(9), c(10);
    const VectorXd ea = gen_attack(g, spec, 100, 1.0 / 60.0, a);
    CHECK((ea - gen_attack(g, spec, 100, 1.0 / 60.0, b)).isZero());
    CHECK_FALSE((ea - gen_attack(g, spec, 100, 1.0 / 60.0, c)).isZero());
}

TEST_CASE("plant guards its inputs") {
    const auto g = toy_grid();
    SimParams sim;
    auto s = init_equilibrium(g, sim.omega0);
    CHECK_THROWS_AS(step_plant(s, g, sim, VectorXd::Zero(3)), ModelError);
    sim.delta = 0.0;
    CHECK_THROWS_AS(step_plant(s, g, sim, VectorXd::Zero(8)), ModelError);
    sim.delta = 1.0 / 60.0;
    s.theta[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step_plant(s, g, sim, VectorXd::Zero(8)), ModelError);
}

TEST_CASE("rng mapping is portable") {
    std::mt19937_64 eng(5489);
    eng.discard(9999);
    CHECK(eng() == 9981545732273789042ULL);
    Rng u(7);
    CHECK(u.uniform(0.0, 0.5) == Approx(derived::feeder_load_first[0]).epsilon(1e-15));
    Rng r(5489);
    for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
    const auto pick = r.sample(std::vector<int>{1, 2, 3, 4, 5}, 3);
    CHECK(std::set<int>(pick.begin(), pick.end()).size() == 3);
}
