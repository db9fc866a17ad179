#include "pdmdp/mdp_core.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace pdmdp;

namespace {

MdpInstance single_state(double p_self, double cost, double gamma) {
    MdpInstance inst;
    inst.n = 1;
    inst.m = 1;
    inst.gamma = gamma;
    inst.cost = {Vec::Constant(1, cost)};
    inst.trans = {Mat::Constant(1, 1, p_self)};
    inst.validate();
    return inst;
}

} // namespace

TEST_CASE("validate rejects malformed instances") {
    MdpInstance inst = oracle::example_mdp(0.9);
    CHECK_NOTHROW(inst.validate());

    MdpInstance bad = inst;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = inst;
    bad.trans[0](0, 0) = 0.1; // row sums to 1.1
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = inst;
    bad.trans[1](1, 1) = -0.2;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = inst;
    bad.cost[0][0] = std::nan("");
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("bellman_backup on the example MDP at v = 0") {
    const MdpInstance inst = oracle::example_mdp(0.9);
    const Vec tv = bellman_backup(Vec::Zero(2), inst);
    CHECK(tv[0] == 1.0);
    CHECK(tv[1] == 2.0);
}

TEST_CASE("bellman_backup at gamma = 0 returns the cheapest cost per state") {
    const MdpInstance inst = oracle::random_instance(5, 3, 0.0, 7);
    Vec v(5);
    v << 3, -1, 4, 1, 5;
    const Vec tv = bellman_backup(v, inst);
    for (int i = 0; i < 5; ++i) {
        double lo = inst.cost[0][i];
        for (int u = 1; u < inst.m; ++u) lo = std::min(lo, inst.cost[u][i]);
        CHECK(tv[i] == lo);
    }
}

TEST_CASE("bellman_backup fixed point of the single-state chain") {
    const MdpInstance inst = single_state(1.0, 1.0, 0.5);
    const Vec v = Vec::Constant(1, 2.0); // c/(1-gamma)
    CHECK(bellman_backup(v, inst)[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("greedy_policy on the example MDP") {
    const MdpInstance inst = oracle::example_mdp(0.9);
    const Vec vstar = oracle::enumerate_vstar(inst);

    // at the optimum and at zero the swap action (index 0) wins in both
    // states; the enumeration oracle confirms the optimum itself
    CHECK(greedy_policy(vstar, inst).action == std::vector<int>{0, 0});
    CHECK(greedy_policy(Vec::Zero(2), inst).action == std::vector<int>{0, 0});
    CHECK((oracle::example_vstar(0.9) - vstar).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("greedy_policy with a single action is the unique policy") {
    const MdpInstance inst = oracle::random_instance(4, 1, 0.7, 3);
    Vec v(4);
    v << 1, 2, 3, 4;
    CHECK(greedy_policy(v, inst).action == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("evaluate_policy solves the example MDP's two pure policies") {
    const MdpInstance inst = oracle::example_mdp(0.9);
    const double gamma = 0.9;

    Policy swap;
    swap.action = {0, 0};
    const Vec v_swap = evaluate_policy(swap, inst);
    // hand solution of v1 = 1 + g v2, v2 = 2 + g v1
    CHECK(v_swap[0] == doctest::Approx((1 + 2 * gamma) / (1 - gamma * gamma))
                           .epsilon(1e-12));
    CHECK(v_swap[1] ==
          doctest::Approx((2 + gamma) / (1 - gamma * gamma)).epsilon(1e-12));

    Policy stay;
    stay.action = {1, 1};
    const Vec v_stay = evaluate_policy(stay, inst);
    CHECK(v_stay[0] == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(v_stay[1] == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy at gamma = 0 returns the policy costs") {
    const MdpInstance inst = oracle::random_instance(4, 2, 0.0, 13);
    Policy mu;
    mu.action = {1, 0, 1, 0};
    const Vec v = evaluate_policy(mu, inst);
    for (int i = 0; i < 4; ++i) CHECK(v[i] == inst.cost[mu.action[i]][i]);
}

TEST_CASE("evaluate_policy satisfies its residual contract on random draws") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const MdpInstance inst = oracle::random_instance(
            6, 3, 0.95, 1000 + trial, 0.6);
        Policy mu;
        for (int i = 0; i < 6; ++i)
            mu.action.push_back(static_cast<int>(rng.next_u64() % 3));
        const Vec v = evaluate_policy(mu, inst);
        Vec resid(6);
        for (int i = 0; i < 6; ++i)
            resid[i] = v[i] - inst.cost[mu.action[i]][i] -
                       inst.gamma * inst.trans[mu.action[i]].row(i).dot(v);
        CHECK(resid.cwiseAbs().maxCoeff() <=
              1e-10 * (1.0 + v.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("is_dual_feasible basics") {
    const MdpInstance inst = oracle::example_mdp(0.9);
    CHECK(is_dual_feasible(Vec::Zero(2), inst, 0.0));

    Vec above = oracle::enumerate_vstar(inst);
    above[0] += 0.1;
    CHECK_FALSE(is_dual_feasible(above, inst, 1e-9));
}

TEST_CASE("the shifted constant point is feasible, negative costs included") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MdpInstance inst =
            oracle::random_instance(5, 2, 0.8, seed, 1.0, -2.0, 1.0);
        CHECK(is_dual_feasible(initial_feasible_point(inst), inst, 1e-12));
    }
}

TEST_CASE("bellman_residual values") {
    const MdpInstance inst = oracle::example_mdp(0.9);
    CHECK(bellman_residual(oracle::enumerate_vstar(inst), inst) <= 1e-9);
    CHECK(bellman_residual(Vec::Zero(2), inst) == 2.0);

    const MdpInstance zero_gamma = oracle::random_instance(4, 3, 0.0, 5);
    CHECK(bellman_residual(bellman_backup(Vec::Zero(4), zero_gamma),
                           zero_gamma) == 0.0);
}

TEST_CASE("property: T is a gamma-contraction and monotone") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const double gamma = 0.1 + 0.8 * rng.next_double();
        const MdpInstance inst = oracle::random_instance(
            5, 3, gamma, 500 + trial, 0.7);
        Vec v(5), w(5);
        for (int i = 0; i < 5; ++i) {
            v[i] = 10.0 * rng.next_double() - 5.0;
            w[i] = 10.0 * rng.next_double() - 5.0;
        }
        const Vec tv = bellman_backup(v, inst);
        const Vec tw = bellman_backup(w, inst);
        CHECK((tv - tw).cwiseAbs().maxCoeff() <=
              gamma * (v - w).cwiseAbs().maxCoeff() + 1e-12);

        const Vec lo = v.cwiseMin(w);
        const Vec t_lo = bellman_backup(lo, inst);
        CHECK((t_lo - tv).maxCoeff() <= 1e-12);
        CHECK((t_lo - tw).maxCoeff() <= 1e-12);
    }
}

TEST_CASE("property: evaluate_policy is a fixed point of its restriction") {
    SplitMix64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const MdpInstance inst =
            oracle::random_instance(5, 2, 0.9, 900 + trial);
        Policy mu;
        for (int i = 0; i < 5; ++i)
            mu.action.push_back(static_cast<int>(rng.next_u64() % 2));
        const Vec v = evaluate_policy(mu, inst);
        for (int i = 0; i < 5; ++i) {
            const double q = q_value(inst, v, i, mu.action[i]);
            CHECK(std::abs(q - v[i]) <= 1e-10 * (1.0 + std::abs(v[i])));
        }
    }
}

TEST_CASE("property: feasible with zero residual iff optimal") {
    for (std::uint64_t seed = 40; seed < 55; ++seed) {
        const MdpInstance inst = oracle::random_instance(4, 3, 0.85, seed);
        const Vec vstar = oracle::enumerate_vstar(inst);
        CHECK(is_dual_feasible(vstar, inst, 1e-8));
        CHECK(bellman_residual(vstar, inst) <= 1e-8);

        // a constant shift below the optimum stays feasible but picks up a
        // residual of (1-gamma) times the shift
        const Vec v = vstar.array() - 0.5;
        CHECK(is_dual_feasible(v, inst, 1e-8));
        CHECK(bellman_residual(v, inst) > 1e-8);
    }
}
