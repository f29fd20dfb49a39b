#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pathing.hpp"
#include "rng.hpp"
#include "world.hpp"

namespace swarm::graphnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Learnable weights of the single aggregation layer: a self transform and a
// neighbor transform, both embed_dim x (1 + 2M). No bias terms.
struct SageParams {
    MatrixXd W;
    MatrixXd W_prime;
};

// Bounded-uniform init, a = sqrt(6 / (fan_in + fan_out)).
SageParams init_sage(int embed_dim, int obs_dim, Rng& rng);

// Raw observation x_i of length 1 + 2M: own status (+1 assigned / -1
// otherwise), the agent's row of normalized travel costs, and per-slot
// waiting indicators (+1 waiting / -1 inactive).
VectorXd build_observation(const world::GridWorld& w, int agent_idx, const pathing::CostMatrix& costs);

// z_i = tanh(W x_i + sum_{j != i} W' x_j). With use_neighbors = false the
// aggregation term is dropped (local-projection ablation). N = 1 leaves the
// sum empty.
VectorXd sage_forward(std::span<const VectorXd> all_obs, int i, const SageParams& params,
                      bool use_neighbors = true);

struct SageGradients {
    MatrixXd dW;
    MatrixXd dW_prime;
    std::vector<VectorXd> dX;  // per-agent input gradients
};

// Exact reverse-mode gradients of sage_forward accumulated over all agents
// sharing `params`. `upstream[i]` is dL/dz_i.
SageGradients sage_backward(std::span<const VectorXd> all_obs, std::span<const VectorXd> upstream,
                            const SageParams& params, bool use_neighbors = true);

// Batched training path: rows of X are one agent's own observations over a
// batch, rows of S the matching neighbor sums. Returns Z (B x embed).
MatrixXd sage_forward_batch(const MatrixXd& X, const MatrixXd& S, const SageParams& params,
                            bool use_neighbors);

struct SageGrads {
    MatrixXd dW;
    MatrixXd dW_prime;
};

// Accumulates parameter gradients for the batched forward; Z is the cached
// post-activation output.
void sage_backward_batch(const MatrixXd& dZ, const MatrixXd& Z, const MatrixXd& X, const MatrixXd& S,
                         bool use_neighbors, SageGrads& grads);

}  // namespace swarm::graphnet
