#pragma once

#include <array>
#include <string>
#include <vector>

#include "grid.hpp"

namespace swarm {

enum class TaskMode { Fixed, Continuous };

struct AgentGroup {
    AgentKind kind = AgentKind::Ground;
    int count = 0;
};

inline double kind_velocity(AgentKind kind) {
    return kind == AgentKind::Ground ? 3.0 : 5.0;  // m/s
}

struct ScenarioConfig {
    std::array<int, 3> dims{20, 20, 10};
    std::vector<AgentGroup> agents{{AgentKind::Ground, 2}, {AgentKind::Aerial, 2}};
    int task_slots = 4;
    double obstacle_density = 0.05;
    TaskMode mode = TaskMode::Continuous;
    int episode_len = 500;

    int n_agents() const {
        int n = 0;
        for (const auto& g : agents) n += g.count;
        return n;
    }
    double min_velocity() const {
        double v = 1e18;
        for (const auto& g : agents)
            if (g.count > 0) v = std::min(v, kind_velocity(g.kind));
        return v;
    }
    // Cost clipping ceiling: worst free-space traversal time for the slowest
    // kind in the team, held constant over a scenario.
    double cost_ceiling() const {
        return static_cast<double>(dims[0] + dims[1] + dims[2]) / min_velocity();
    }
};

struct TrainConfig {
    double lr = 1e-5;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double entropy_coef = 0.05;
    int sgd_iters = 10;
    int batch_size = 1000;        // per agent
    int rollout_fragment = 100;
    double clip_epsilon = 0.2;
    double value_coef = 0.5;
    double lambda_conflict = 1.0;
    double mu_idle = 0.5;
    double eta_bonus = 0.5;
    double bonus_threshold = -0.5;  // normalized-cost cutoff for the bonus
    bool normalize_advantages = true;
    int embed_dim = 6;
    int hidden_dim = 128;
    bool use_graphsage = true;  // false: embed own observation only (ablation)
    bool concat_obs = false;    // policy input [x, z] instead of z alone
    int blockage_threshold = 3;
};

struct Config {
    ScenarioConfig scenario;
    TrainConfig train;
};

// Parses the scenario/training JSON document. Unknown keys are rejected.
Config parse_config_json(const std::string& text);
Config load_config_file(const std::string& path);

// Applies a `key=value` override using top-level key names; throws
// ConfigError for unknown keys or values that fail validation.
void apply_override(Config& cfg, const std::string& key, const std::string& value);

// Serializes the fully resolved configuration (all defaults filled in).
std::string config_to_json(const Config& cfg);

void validate(const Config& cfg);

std::string to_string(AgentKind kind);
std::string to_string(TaskMode mode);

}  // namespace swarm
