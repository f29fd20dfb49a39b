#include "policy.hpp"

#include <cmath>

namespace swarm::policy {

namespace {

void fill_uniform(MatrixXd& m, double a, Rng& rng) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-a, a);
}

}  // namespace

Mlp init_mlp(int in, int hidden, int out, Rng& rng, double final_scale) {
    Mlp net;
    net.W1.resize(hidden, in);
    net.W2.resize(hidden, hidden);
    net.W3.resize(out, hidden);
    fill_uniform(net.W1, std::sqrt(6.0 / (in + hidden)), rng);
    fill_uniform(net.W2, std::sqrt(6.0 / (hidden + hidden)), rng);
    fill_uniform(net.W3, std::sqrt(6.0 / (hidden + out)) * final_scale, rng);
    net.b1 = VectorXd::Zero(hidden);
    net.b2 = VectorXd::Zero(hidden);
    net.b3 = VectorXd::Zero(out);
    return net;
}

MlpParams init_params(int in, int hidden, int n_actions, Rng& rng) {
    MlpParams p;
    p.policy = init_mlp(in, hidden, n_actions, rng, 0.01);
    p.value = init_mlp(in, hidden, 1, rng);
    return p;
}

MatrixXd mlp_forward(const MatrixXd& Z, const Mlp& net, MlpCache* cache) {
    MatrixXd h1 = (Z * net.W1.transpose()).rowwise() + net.b1.transpose();
    h1 = h1.cwiseMax(0.0);
    MatrixXd h2 = (h1 * net.W2.transpose()).rowwise() + net.b2.transpose();
    h2 = h2.cwiseMax(0.0);
    MatrixXd out = (h2 * net.W3.transpose()).rowwise() + net.b3.transpose();
    if (cache) {
        cache->h1 = std::move(h1);
        cache->h2 = std::move(h2);
    }
    return out;
}

MlpGrads zero_grads_like(const Mlp& net) {
    MlpGrads g;
    g.dW1 = MatrixXd::Zero(net.W1.rows(), net.W1.cols());
    g.dW2 = MatrixXd::Zero(net.W2.rows(), net.W2.cols());
    g.dW3 = MatrixXd::Zero(net.W3.rows(), net.W3.cols());
    g.db1 = VectorXd::Zero(net.b1.size());
    g.db2 = VectorXd::Zero(net.b2.size());
    g.db3 = VectorXd::Zero(net.b3.size());
    return g;
}

MatrixXd mlp_backward(const MatrixXd& dOut, const MatrixXd& Z, const Mlp& net, const MlpCache& cache,
                      MlpGrads& grads) {
    grads.dW3.noalias() += dOut.transpose() * cache.h2;
    grads.db3 += dOut.colwise().sum().transpose();

    MatrixXd dh2 = dOut * net.W3;
    dh2 = (cache.h2.array() > 0.0).select(dh2, 0.0);
    grads.dW2.noalias() += dh2.transpose() * cache.h1;
    grads.db2 += dh2.colwise().sum().transpose();

    MatrixXd dh1 = dh2 * net.W2;
    dh1 = (cache.h1.array() > 0.0).select(dh1, 0.0);
    grads.dW1.noalias() += dh1.transpose() * Z;
    grads.db1 += dh1.colwise().sum().transpose();

    return dh1 * net.W1;
}

MatrixXd softmax_rows(const MatrixXd& logits) {
    MatrixXd shifted = logits.colwise() - logits.rowwise().maxCoeff();
    MatrixXd e = shifted.array().exp();
    return e.array().colwise() / e.rowwise().sum().array();
}

VectorXd entropy_rows(const MatrixXd& probs) {
    VectorXd h = VectorXd::Zero(probs.rows());
    for (Eigen::Index r = 0; r < probs.rows(); ++r)
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            const double p = probs(r, c);
            if (p > 0.0) h(r) -= p * std::log(p);
        }
    return h;
}

VectorXd log_prob_rows(const MatrixXd& logits, const Eigen::VectorXi& actions) {
    VectorXd out(logits.rows());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double mx = logits.row(r).maxCoeff();
        const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
        out(r) = logits(r, actions(r)) - lse;
    }
    return out;
}

ActionDistribution policy_forward(const VectorXd& z, const MlpParams& params) {
    ActionDistribution dist;
    const MatrixXd logits = mlp_forward(z.transpose(), params.policy);
    dist.logits = logits.row(0).transpose();
    dist.probs = softmax_rows(logits).row(0).transpose();
    return dist;
}

double value_forward(const VectorXd& z, const MlpParams& params) {
    return mlp_forward(z.transpose(), params.value)(0, 0);
}

std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng) {
    const int a = rng.categorical({dist.probs.data(), static_cast<std::size_t>(dist.probs.size())});
    Eigen::VectorXi av(1);
    av(0) = a;
    const double logp = log_prob_rows(dist.logits.transpose(), av)(0);
    return {a, logp};
}

int argmax_action(const ActionDistribution& dist) {
    Eigen::Index best = 0;
    dist.logits.maxCoeff(&best);
    return static_cast<int>(best);
}

double dist_entropy(const ActionDistribution& dist) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
        const double p = dist.probs(i);
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace swarm::policy
