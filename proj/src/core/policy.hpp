#pragma once

#include <utility>

#include <Eigen/Dense>

#include "rng.hpp"

namespace swarm::policy {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Two hidden layers with ReLU; weights are out x in.
struct Mlp {
    MatrixXd W1, W2, W3;
    VectorXd b1, b2, b3;
};

// Per-agent policy head (softmax over M+1 actions) and value head (scalar).
struct MlpParams {
    Mlp policy;
    Mlp value;
};

Mlp init_mlp(int in, int hidden, int out, Rng& rng, double final_scale = 1.0);

// Policy final layer scaled down so the initial distribution is near-uniform.
MlpParams init_params(int in, int hidden, int n_actions, Rng& rng);

struct ActionDistribution {
    VectorXd logits;
    VectorXd probs;
};

// Softmax of the policy MLP output, stabilized by max subtraction.
ActionDistribution policy_forward(const VectorXd& z, const MlpParams& params);

double value_forward(const VectorXd& z, const MlpParams& params);

// Draws an action from the distribution; returns (action, ln p[action]).
std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng);

int argmax_action(const ActionDistribution& dist);

// -sum p ln p with 0 ln 0 := 0.
double dist_entropy(const ActionDistribution& dist);

// --- batched machinery (rows = samples) ---

struct MlpCache {
    MatrixXd h1, h2;  // post-ReLU activations
};

MatrixXd mlp_forward(const MatrixXd& Z, const Mlp& net, MlpCache* cache = nullptr);

struct MlpGrads {
    MatrixXd dW1, dW2, dW3;
    VectorXd db1, db2, db3;
};

MlpGrads zero_grads_like(const Mlp& net);

// Accumulates parameter gradients and returns dZ.
MatrixXd mlp_backward(const MatrixXd& dOut, const MatrixXd& Z, const Mlp& net, const MlpCache& cache,
                      MlpGrads& grads);

MatrixXd softmax_rows(const MatrixXd& logits);
VectorXd entropy_rows(const MatrixXd& probs);
VectorXd log_prob_rows(const MatrixXd& logits, const Eigen::VectorXi& actions);

}  // namespace swarm::policy
