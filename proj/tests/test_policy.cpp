#include <doctest.h>

#include <cmath>

#include "core/policy.hpp"
#include "oracles.hpp"

using namespace swarm;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

VectorXd random_vec(int n, Rng& rng, double scale = 1.0) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
    return v;
}

policy::MlpParams zero_params(int in, int hidden, int actions) {
    Rng rng(0);
    auto p = policy::init_params(in, hidden, actions, rng);
    p.policy.W1.setZero();
    p.policy.W2.setZero();
    p.policy.W3.setZero();
    p.value.W1.setZero();
    p.value.W2.setZero();
    p.value.W3.setZero();
    return p;
}

oracles::MlpRef to_ref(const policy::Mlp& net) {
    return {oracles::from_eigen(net.W1), oracles::from_eigen(net.W2), oracles::from_eigen(net.W3),
            oracles::from_eigen(net.b1), oracles::from_eigen(net.b2), oracles::from_eigen(net.b3)};
}

}  // namespace

TEST_CASE("policy_forward: zero network gives the uniform distribution") {
    const auto p = zero_params(6, 16, 4);
    const auto dist = policy::policy_forward(VectorXd::Ones(6), p);
    for (int k = 0; k < 4; ++k) CHECK(dist.probs(k) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("policy_forward: softmax shift invariance") {
    Rng rng(1);
    auto p = policy::init_params(6, 16, 5, rng);
    const VectorXd z = random_vec(6, rng);
    const auto base = policy::policy_forward(z, p);
    p.policy.b3.array() += 17.5;  // constant logit shift
    const auto shifted = policy::policy_forward(z, p);
    CHECK((base.probs - shifted.probs).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(policy::argmax_action(base) == policy::argmax_action(shifted));
}

TEST_CASE("policy_forward and value_forward: match the naive loop oracle") {
    Rng rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const auto p = policy::init_params(6, 32, 4, rng);
        const VectorXd z = random_vec(6, rng);
        const auto dist = policy::policy_forward(z, p);
        const auto logits_ref = oracles::mlp_reference(to_ref(p.policy), oracles::from_eigen(z));
        const auto probs_ref = oracles::softmax_vec(logits_ref);
        for (int k = 0; k < 4; ++k) {
            CHECK(dist.logits(k) == doctest::Approx(logits_ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
            CHECK(dist.probs(k) == doctest::Approx(probs_ref[static_cast<std::size_t>(k)]).epsilon(1e-12));
        }
        const double v = policy::value_forward(z, p);
        const auto v_ref = oracles::mlp_reference(to_ref(p.value), oracles::from_eigen(z));
        CHECK(v == doctest::Approx(v_ref[0]).epsilon(1e-12));
    }
}

TEST_CASE("value_forward: zero network outputs zero; final bias passes through") {
    auto p = zero_params(6, 16, 4);
    CHECK(policy::value_forward(VectorXd::Ones(6), p) == 0.0);
    p.value.b3(0) = -3.25;
    CHECK(policy::value_forward(VectorXd::Ones(6), p) == -3.25);
}

TEST_CASE("softmax normalization holds for large logits") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        MatrixXd logits(1, 6);
        for (int k = 0; k < 6; ++k) logits(0, k) = rng.uniform(-50.0, 50.0);
        const MatrixXd probs = policy::softmax_rows(logits);
        CHECK(std::abs(probs.row(0).sum() - 1.0) < 1e-9);
        for (int k = 0; k < 6; ++k) {
            CHECK(probs(0, k) > 0.0);
            CHECK(probs(0, k) <= 1.0);
        }
    }
}

TEST_CASE("sample_action: degenerate distribution is deterministic with log_prob 0") {
    policy::ActionDistribution dist;
    dist.logits = VectorXd::Zero(3);
    dist.logits(2) = 1000.0;
    dist.probs = VectorXd::Zero(3);
    dist.probs(2) = 1.0;
    Rng rng(4);
    for (int k = 0; k < 20; ++k) {
        const auto [a, logp] = policy::sample_action(dist, rng);
        CHECK(a == 2);
        CHECK(logp == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("sample_action: empirical frequencies within 3 sigma of uniform") {
    const auto p = zero_params(6, 16, 4);
    const auto dist = policy::policy_forward(VectorXd::Zero(6), p);
    Rng rng(5);
    std::array<int, 4> counts{};
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) counts[static_cast<std::size_t>(policy::sample_action(dist, rng).first)]++;
    const double sigma = std::sqrt(0.25 * 0.75 / draws);
    for (const int c : counts) {
        const double freq = static_cast<double>(c) / draws;
        CHECK(std::abs(freq - 0.25) <= 3.0 * sigma);
    }
}

TEST_CASE("sample_action: identical seed reproduces the sequence") {
    Rng rng(9);
    const auto p = policy::init_params(6, 16, 5, rng);
    const auto dist = policy::policy_forward(random_vec(6, rng), p);
    Rng a(123), b(123);
    for (int k = 0; k < 50; ++k)
        CHECK(policy::sample_action(dist, a).first == policy::sample_action(dist, b).first);
}

TEST_CASE("dist_entropy: closed forms") {
    policy::ActionDistribution dist;
    dist.probs = VectorXd::Constant(4, 0.25);
    dist.logits = VectorXd::Zero(4);
    CHECK(policy::dist_entropy(dist) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    dist.probs = VectorXd::Zero(4);
    dist.probs(1) = 1.0;
    CHECK(policy::dist_entropy(dist) == 0.0);

    dist.probs = VectorXd::Zero(4);
    dist.probs(0) = 0.5;
    dist.probs(1) = 0.5;
    CHECK(policy::dist_entropy(dist) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log-prob gradient wrt logits equals onehot minus probs") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd logits(1, 5);
        for (int k = 0; k < 5; ++k) logits(0, k) = rng.uniform(-3.0, 3.0);
        const int action = rng.uniform_int(0, 4);
        VectorXi av(1);
        av(0) = action;
        const MatrixXd probs = policy::softmax_rows(logits);
        for (int k = 0; k < 5; ++k) {
            const double analytic = (k == action ? 1.0 : 0.0) - probs(0, k);
            const double est = oracles::fd(
                [&]() { return policy::log_prob_rows(logits, av)(0); }, &logits(0, k));
            CHECK(oracles::close_rel(analytic, est, 1e-6));
        }
    }
}

TEST_CASE("mlp_backward: finite-difference agreement on 50 random instances") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int in = 4, hidden = 6, actions = 4, B = 3;
        auto net = policy::init_mlp(in, hidden, actions, rng);
        net.b1 = random_vec(hidden, rng, 0.1);
        net.b2 = random_vec(hidden, rng, 0.1);
        net.b3 = random_vec(actions, rng, 0.1);
        MatrixXd Z(B, in);
        for (int b = 0; b < B; ++b) Z.row(b) = random_vec(in, rng).transpose();
        VectorXi acts(B);
        VectorXd alpha(B), beta(B);
        for (int b = 0; b < B; ++b) {
            acts(b) = rng.uniform_int(0, actions - 1);
            alpha(b) = rng.uniform(-1.0, 1.0);
            beta(b) = rng.uniform(-1.0, 1.0);
        }

        // probe loss: sum_b alpha_b log p_b(a_b) + beta_b H_b
        auto loss = [&]() {
            const MatrixXd logits = policy::mlp_forward(Z, net);
            const MatrixXd probs = policy::softmax_rows(logits);
            const VectorXd logp = policy::log_prob_rows(logits, acts);
            const VectorXd ent = policy::entropy_rows(probs);
            return (alpha.array() * logp.array() + beta.array() * ent.array()).sum();
        };

        policy::MlpCache cache;
        const MatrixXd logits = policy::mlp_forward(Z, net, &cache);
        const MatrixXd probs = policy::softmax_rows(logits);
        const VectorXd ent = policy::entropy_rows(probs);
        MatrixXd dlogits(B, actions);
        for (int b = 0; b < B; ++b)
            for (int k = 0; k < actions; ++k) {
                const double onehot = k == acts(b) ? 1.0 : 0.0;
                const double p = probs(b, k);
                const double dH = -p * (std::log(p) + ent(b));
                dlogits(b, k) = alpha(b) * (onehot - p) + beta(b) * dH;
            }
        auto grads = policy::zero_grads_like(net);
        const MatrixXd dZ = policy::mlp_backward(dlogits, Z, net, cache, grads);

        auto spot = [&](double* param, double analytic) {
            CHECK(oracles::close_rel(analytic, oracles::fd(loss, param), 1e-4));
        };
        for (int r = 0; r < hidden; ++r)
            for (int c = 0; c < in; ++c) spot(&net.W1(r, c), grads.dW1(r, c));
        for (int r = 0; r < hidden; ++r) spot(&net.b1(r), grads.db1(r));
        for (int r = 0; r < actions; ++r)
            for (int c = 0; c < hidden; ++c) spot(&net.W3(r, c), grads.dW3(r, c));
        for (int r = 0; r < actions; ++r) spot(&net.b3(r), grads.db3(r));
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < in; ++c) spot(&Z(b, c), dZ(b, c));
    }
}

TEST_CASE("value head backward: zero upstream means zero gradients") {
    Rng rng(8);
    auto net = policy::init_mlp(6, 8, 1, rng);
    MatrixXd Z(4, 6);
    for (int b = 0; b < 4; ++b) Z.row(b) = random_vec(6, rng).transpose();
    policy::MlpCache cache;
    policy::mlp_forward(Z, net, &cache);
    auto grads = policy::zero_grads_like(net);
    const MatrixXd dZ = policy::mlp_backward(MatrixXd::Zero(4, 1), Z, net, cache, grads);
    CHECK(grads.dW1.isZero(0.0));
    CHECK(grads.dW3.isZero(0.0));
    CHECK(dZ.isZero(0.0));
}
