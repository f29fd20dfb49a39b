#include <doctest.h>

#include <algorithm>

#include "core/graphnet.hpp"
#include "core/pathing.hpp"
#include "core/world.hpp"
#include "oracles.hpp"

using namespace swarm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<VectorXd> random_obs(int n, int m, Rng& rng) {
    std::vector<VectorXd> xs;
    for (int i = 0; i < n; ++i) {
        VectorXd x(1 + 2 * m);
        for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-1.0, 1.0);
        xs.push_back(x);
    }
    return xs;
}

}  // namespace

TEST_CASE("build_observation: status, costs, indicators") {
    ScenarioConfig s;
    s.dims = {6, 6, 1};
    s.agents = {{AgentKind::Ground, 2}};
    s.task_slots = 3;
    s.obstacle_density = 0.0;
    auto w = world::init_world(s, 21);
    w.tasks[1].location = w.agents[0].pos;  // standing on task 1
    const auto costs = pathing::build_cost_matrix(w);

    const VectorXd x = graphnet::build_observation(w, 0, costs);
    REQUIRE(x.size() == 1 + 2 * 3);
    CHECK(x(0) == -1.0);                       // idle
    CHECK(x(1 + 1) == -1.0);                   // zero cost to the task underfoot
    for (int j = 0; j < 3; ++j) CHECK(x(1 + 3 + j) == 1.0);  // all waiting

    // Mark agent assigned and one slot inactive.
    w.agents[0].status = world::AgentStatus::Assign;
    w.agents[0].assigned_task_id = 0;
    w.tasks[2].status = world::TaskStatus::Assigned;
    const VectorXd y = graphnet::build_observation(w, 0, costs);
    CHECK(y(0) == 1.0);
    CHECK(y(1 + 3 + 2) == -1.0);
    for (Eigen::Index k = 1; k <= 3; ++k) {
        CHECK(y(k) >= -1.0);
        CHECK(y(k) <= 1.0);
    }
}

TEST_CASE("sage_forward: zero weights give zero embedding") {
    Rng rng(3);
    const auto xs = random_obs(3, 2, rng);
    graphnet::SageParams p;
    p.W = MatrixXd::Zero(6, 5);
    p.W_prime = MatrixXd::Zero(6, 5);
    const VectorXd z = graphnet::sage_forward(xs, 1, p);
    CHECK(z.isZero(0.0));
}

TEST_CASE("sage_forward: single agent drops the neighbor term") {
    Rng rng(4);
    const auto xs = random_obs(1, 3, rng);
    auto p = graphnet::init_sage(6, 7, rng);
    p.W_prime.setConstant(123.0);  // must not matter
    const VectorXd z = graphnet::sage_forward(xs, 0, p);
    const VectorXd expected = (p.W * xs[0]).array().tanh();
    CHECK((z - expected).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("sage_forward: matches the naive loop oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(2, 5);
        const int m = rng.uniform_int(1, 4);
        const auto xs = random_obs(n, m, rng);
        const auto p = graphnet::init_sage(6, 1 + 2 * m, rng);
        std::vector<oracles::Vec> xs_ref;
        for (const auto& x : xs) xs_ref.push_back(oracles::from_eigen(x));
        for (int i = 0; i < n; ++i) {
            const VectorXd z = graphnet::sage_forward(xs, i, p);
            const auto ref = oracles::sage_reference(xs_ref, i, oracles::from_eigen(p.W),
                                                     oracles::from_eigen(p.W_prime));
            for (Eigen::Index k = 0; k < z.size(); ++k)
                CHECK(z(k) == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sage_forward: permutation equivariance over neighbor order") {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(3, 6);
        auto xs = random_obs(n, 3, rng);
        const auto p = graphnet::init_sage(6, 7, rng);
        const VectorXd z0 = graphnet::sage_forward(xs, 0, p);
        // shuffle everyone except agent 0
        for (int k = static_cast<int>(xs.size()) - 1; k > 1; --k)
            std::swap(xs[static_cast<std::size_t>(k)], xs[static_cast<std::size_t>(rng.uniform_int(1, k))]);
        const VectorXd z1 = graphnet::sage_forward(xs, 0, p);
        CHECK((z0 - z1).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("sage_forward: outputs stay strictly inside (-1, 1)") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const auto xs = random_obs(n, 4, rng);
        const auto p = graphnet::init_sage(6, 9, rng);
        for (int i = 0; i < n; ++i) {
            const VectorXd z = graphnet::sage_forward(xs, i, p);
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                CHECK(z(k) > -1.0);
                CHECK(z(k) < 1.0);
            }
        }
    }
}

TEST_CASE("sage_backward: zero upstream gives zero gradients") {
    Rng rng(8);
    const auto xs = random_obs(3, 2, rng);
    const auto p = graphnet::init_sage(6, 5, rng);
    std::vector<VectorXd> upstream(3, VectorXd::Zero(6));
    const auto g = graphnet::sage_backward(xs, upstream, p);
    CHECK(g.dW.isZero(0.0));
    CHECK(g.dW_prime.isZero(0.0));
    for (const auto& dx : g.dX) CHECK(dx.isZero(0.0));
}

TEST_CASE("sage_backward: identical neighbor inputs get identical input gradients") {
    Rng rng(9);
    const int n = 4, m = 2;
    auto xs = random_obs(n, m, rng);
    for (int j = 2; j < n; ++j) xs[static_cast<std::size_t>(j)] = xs[1];  // agents 1..3 identical
    const auto p = graphnet::init_sage(6, 5, rng);
    // probe only agent 0's embedding so neighbors play symmetric roles
    std::vector<VectorXd> upstream(static_cast<std::size_t>(n), VectorXd::Zero(6));
    upstream[0] = VectorXd::Ones(6);
    const auto g = graphnet::sage_backward(xs, upstream, p);
    CHECK((g.dX[1] - g.dX[2]).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((g.dX[1] - g.dX[3]).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("sage_backward: finite-difference agreement on 50 random instances") {
    Rng rng(10);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 5);
        const int m = rng.uniform_int(1, 4);
        const int obs_dim = 1 + 2 * m;
        auto xs = random_obs(n, m, rng);
        auto p = graphnet::init_sage(6, obs_dim, rng);

        // random linear probe loss L = sum_i c_i . z_i
        std::vector<VectorXd> probes;
        for (int i = 0; i < n; ++i) {
            VectorXd c(6);
            for (int k = 0; k < 6; ++k) c(k) = rng.uniform(-1.0, 1.0);
            probes.push_back(c);
        }
        auto loss = [&]() {
            double L = 0.0;
            for (int i = 0; i < n; ++i) L += probes[static_cast<std::size_t>(i)].dot(graphnet::sage_forward(xs, i, p));
            return L;
        };
        const auto g = graphnet::sage_backward(xs, probes, p);

        auto spot = [&](double* param, double analytic) {
            const double est = oracles::fd(loss, param);
            CHECK(oracles::close_rel(analytic, est, 1e-4));
            ++checked;
        };
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < obs_dim; ++c) {
                spot(&p.W(r, c), g.dW(r, c));
                spot(&p.W_prime(r, c), g.dW_prime(r, c));
            }
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < obs_dim; ++c)
                spot(&xs[static_cast<std::size_t>(i)](c), g.dX[static_cast<std::size_t>(i)](c));
    }
    CHECK(checked > 1000);
}

TEST_CASE("batched sage matches the per-sample path") {
    Rng rng(11);
    const int m = 3, B = 17;
    const int obs_dim = 1 + 2 * m;
    const auto p = graphnet::init_sage(6, obs_dim, rng);
    MatrixXd X(B, obs_dim), S(B, obs_dim);
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < obs_dim; ++k) {
            X(b, k) = rng.uniform(-1.0, 1.0);
            S(b, k) = rng.uniform(-2.0, 2.0);
        }
    const MatrixXd Z = graphnet::sage_forward_batch(X, S, p, true);
    for (int b = 0; b < B; ++b) {
        const VectorXd pre = p.W * X.row(b).transpose() + p.W_prime * S.row(b).transpose();
        const VectorXd z = pre.array().tanh();
        CHECK((Z.row(b).transpose() - z).lpNorm<Eigen::Infinity>() < 1e-14);
    }
    // ablation path ignores S entirely
    const MatrixXd Zl = graphnet::sage_forward_batch(X, S, p, false);
    for (int b = 0; b < B; ++b) {
        const VectorXd z = (p.W * X.row(b).transpose()).array().tanh();
        CHECK((Zl.row(b).transpose() - z).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}
