#include "graphnet.hpp"

namespace swarm::graphnet {

SageParams init_sage(int embed_dim, int obs_dim, Rng& rng) {
    const double a = std::sqrt(6.0 / (embed_dim + obs_dim));
    SageParams p;
    p.W.resize(embed_dim, obs_dim);
    p.W_prime.resize(embed_dim, obs_dim);
    for (int r = 0; r < embed_dim; ++r)
        for (int c = 0; c < obs_dim; ++c) p.W(r, c) = rng.uniform(-a, a);
    for (int r = 0; r < embed_dim; ++r)
        for (int c = 0; c < obs_dim; ++c) p.W_prime(r, c) = rng.uniform(-a, a);
    return p;
}

VectorXd build_observation(const world::GridWorld& w, int agent_idx, const pathing::CostMatrix& costs) {
    const int m = static_cast<int>(w.tasks.size());
    VectorXd x(1 + 2 * m);
    x(0) = w.agents[static_cast<std::size_t>(agent_idx)].is_assigned() ? 1.0 : -1.0;
    for (int j = 0; j < m; ++j) x(1 + j) = costs.normalized(agent_idx, j);
    for (int j = 0; j < m; ++j)
        x(1 + m + j) = w.tasks[static_cast<std::size_t>(j)].status == world::TaskStatus::Waiting ? 1.0 : -1.0;
    return x;
}

VectorXd sage_forward(std::span<const VectorXd> all_obs, int i, const SageParams& params,
                      bool use_neighbors) {
    VectorXd pre = params.W * all_obs[static_cast<std::size_t>(i)];
    if (use_neighbors && all_obs.size() > 1) {
        VectorXd nbr = VectorXd::Zero(all_obs[0].size());
        for (std::size_t j = 0; j < all_obs.size(); ++j)
            if (static_cast<int>(j) != i) nbr += all_obs[j];
        pre += params.W_prime * nbr;
    }
    return pre.array().tanh();
}

SageGradients sage_backward(std::span<const VectorXd> all_obs, std::span<const VectorXd> upstream,
                            const SageParams& params, bool use_neighbors) {
    const int n = static_cast<int>(all_obs.size());
    const auto obs_dim = all_obs[0].size();

    SageGradients g;
    g.dW = MatrixXd::Zero(params.W.rows(), params.W.cols());
    g.dW_prime = MatrixXd::Zero(params.W_prime.rows(), params.W_prime.cols());
    g.dX.assign(static_cast<std::size_t>(n), VectorXd::Zero(obs_dim));

    VectorXd total = VectorXd::Zero(obs_dim);
    for (const auto& x : all_obs) total += x;

    // dpre_i = dz_i * (1 - z_i^2); accumulate per-agent, then distribute the
    // neighbor-path input gradients in one pass.
    VectorXd dpre_sum = VectorXd::Zero(params.W.rows());
    std::vector<VectorXd> dpre(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const VectorXd z = sage_forward(all_obs, i, params, use_neighbors);
        dpre[static_cast<std::size_t>(i)] =
            upstream[static_cast<std::size_t>(i)].array() * (1.0 - z.array().square());
        const VectorXd& dp = dpre[static_cast<std::size_t>(i)];
        g.dW += dp * all_obs[static_cast<std::size_t>(i)].transpose();
        if (use_neighbors && n > 1) {
            const VectorXd nbr = total - all_obs[static_cast<std::size_t>(i)];
            g.dW_prime += dp * nbr.transpose();
        }
        dpre_sum += dp;
    }
    for (int j = 0; j < n; ++j) {
        const VectorXd& dp = dpre[static_cast<std::size_t>(j)];
        g.dX[static_cast<std::size_t>(j)] = params.W.transpose() * dp;
        if (use_neighbors && n > 1)
            g.dX[static_cast<std::size_t>(j)] += params.W_prime.transpose() * (dpre_sum - dp);
    }
    return g;
}

MatrixXd sage_forward_batch(const MatrixXd& X, const MatrixXd& S, const SageParams& params,
                            bool use_neighbors) {
    MatrixXd pre = X * params.W.transpose();
    if (use_neighbors) pre.noalias() += S * params.W_prime.transpose();
    return pre.array().tanh();
}

void sage_backward_batch(const MatrixXd& dZ, const MatrixXd& Z, const MatrixXd& X, const MatrixXd& S,
                         bool use_neighbors, SageGrads& grads) {
    const MatrixXd dpre = dZ.array() * (1.0 - Z.array().square());
    grads.dW.noalias() += dpre.transpose() * X;
    if (use_neighbors) grads.dW_prime.noalias() += dpre.transpose() * S;
}

}  // namespace swarm::graphnet
