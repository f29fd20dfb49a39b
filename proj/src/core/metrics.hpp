#pragma once

#include <vector>

#include "world.hpp"

namespace swarm::bench {

struct MetricsRecord {
    double total_travel_cost = 0.0;  // seconds, summed over completed assignments
    double success_rate = 1.0;       // conflict-free fraction of decision rounds
    double alloc_time_total_s = 0.0;
    double alloc_time_mean_s = 0.0;
    double mean_global_reward = 0.0;  // mean over steps of R(t) = sum_i r_i
    long episodes = 0;
    long tasks_completed = 0;
    long decision_rounds = 0;
};

// Raw per-run log used by the internal consistency audit.
struct RunAudit {
    std::vector<world::AssignmentRecord> assignments;
    std::vector<world::CompletionRecord> completions;
    std::vector<std::uint64_t> episode_seeds;
};

}  // namespace swarm::bench
