#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "config.hpp"
#include "graphnet.hpp"
#include "metrics.hpp"
#include "policy.hpp"
#include "world.hpp"

namespace swarm::ippo {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// One agent's networks: a private embedding layer feeding private policy and
// value heads. Agents never share parameters.
struct AgentNets {
    graphnet::SageParams sage;
    policy::MlpParams mlp;
};

struct Model {
    int version = 1;
    int n_agents = 0;
    int m_tasks = 0;
    int embed_dim = 6;
    int hidden_dim = 128;
    bool use_graphsage = true;
    bool concat_obs = false;
    std::vector<AgentNets> agents;

    int obs_dim() const { return 1 + 2 * m_tasks; }
    int policy_input_dim() const { return concat_obs ? obs_dim() + embed_dim : embed_dim; }
};

Model init_model(const Config& cfg, std::uint64_t seed);

// Checkpoint JSON: { version, n_agents, m_tasks, embed_dim, hidden_dim,
// embedding_mode, policy_input, agents: [ { sage: {W, W_prime},
// policy: {W1,b1,W2,b2,W3,b3}, value: {...} } ] }, numbers as decimal floats.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

// Per-agent trajectory storage; parallel arrays share one length.
struct RolloutBuffer {
    MatrixXd obs;   // B x (1 + 2M), the agent's own raw observations
    MatrixXd nbr;   // B x (1 + 2M), matching neighbor-feature sums
    VectorXi actions;
    VectorXd log_probs;
    VectorXd rewards;
    VectorXd values;
    std::vector<std::uint8_t> dones;
    VectorXd advantages;
    VectorXd returns;
    int size = 0;

    void reset(int capacity, int obs_dim);
    void push(const VectorXd& x, const VectorXd& s, int action, double log_prob, double reward,
              double value, bool done);
};

// Reward rule: a winner earns minus its normalized cost (plus the bonus for a
// sufficiently cheap assignment); conflict losers, invalid requests, and
// already-assigned agents requesting anew pay lambda; an idle action while
// Waiting tasks exist pays mu. Everything else is 0.
VectorXd compute_rewards(const world::StepResult& sr, const pathing::CostMatrix& costs,
                         const TrainConfig& t);

// Backward GAE recursion. `dones[t]` marks an episode end at step t (the
// value after it bootstraps to 0); `bootstrap_value` closes the fragment.
// Returns (advantages, return targets = advantages + values).
std::pair<VectorXd, VectorXd> compute_gae(const VectorXd& rewards, const VectorXd& values,
                                          std::span<const std::uint8_t> dones, double bootstrap_value,
                                          double gamma, double lambda);

struct AgentBatch {
    MatrixXd obs, nbr;
    VectorXi actions;
    VectorXd old_log_probs;
    VectorXd advantages;
    VectorXd returns;
};

struct AgentGrads {
    graphnet::SageGrads sage;
    policy::MlpGrads policy;
    policy::MlpGrads value;
};

AgentGrads zero_grads_like(const AgentNets& nets);

struct LossParts {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
};

// Clipped-surrogate PPO loss over one agent's own experience:
//   -mean(min(r A, clip(r, 1-eps, 1+eps) A)) + c_v mean((V - target)^2)
//   - c_e mean(entropy)
// With `grads` non-null, exact reverse-mode parameter gradients are
// accumulated alongside.
LossParts ppo_loss(const AgentBatch& batch, const Model& model, const AgentNets& nets,
                   const TrainConfig& t, AgentGrads* grads);

struct AdamState {
    MatrixXd mW, vW;
};

// Standard Adam with bias correction; step must start at 1.
void adam_step(MatrixXd& param, const MatrixXd& grad, AdamState& st, long step, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// One decentralized decision round: every agent embeds the shared
// observation set with its own weights and evaluates its own policy head.
struct DecisionStep {
    std::vector<VectorXd> obs;  // per-agent x_i
    std::vector<VectorXd> nbr;  // per-agent neighbor sums
    std::vector<int> actions;
    std::vector<double> log_probs;
    std::vector<double> values;
    std::vector<double> entropies;
};

// samplers == nullptr selects argmax actions (decentralized execution);
// with_values skips the value heads when false.
DecisionStep policy_decide(const Model& model, const world::GridWorld& w,
                           const pathing::CostMatrix& costs, std::vector<Rng>* samplers,
                           bool with_values);

struct CurveRow {
    long iteration = 0;
    long env_steps = 0;
    double mean_reward = 0.0;
    double mean_entropy = 0.0;
    double mean_policy_loss = 0.0;
    double mean_value_loss = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<CurveRow> curve;
};

// Independent PPO: rollout fragments accumulate into one batch per agent,
// then every agent runs its own SGD iterations on its own data. Aborts with
// RuntimeFailure if the loss turns non-finite.
TrainResult train(const Config& cfg, long total_steps, std::uint64_t seed);

// Greedy (argmax) decentralized execution; no updates. Defined in bench.cpp
// on top of the shared scenario runner.
bench::MetricsRecord evaluate(const Model& model, const Config& cfg, int episodes,
                              std::uint64_t seed);

void write_curve_csv(const std::vector<CurveRow>& curve, const std::string& path);

}  // namespace swarm::ippo
