#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace swarm::alloc {

// (agent index, task/slot index) pairs.
using Assignment = std::vector<std::pair<int, int>>;

struct Conflict {
    int slot = -1;
    int winner = -1;
    std::vector<int> losers;
};

// Result of resolving one round of simultaneous task requests.
struct AllocationOutcome {
    std::vector<int> requests;                            // per agent, 0..M
    Assignment assignments;                               // (agent, slot) winners
    std::vector<Conflict> conflicts;                      // contested waiting slots
    std::vector<std::pair<int, int>> invalid_requests;    // (agent, slot): target not Waiting
    std::vector<std::pair<int, int>> ineligible_requests; // (agent, slot): requester already assigned
    std::vector<int> idle_agents;                         // agents that requested nothing
    bool waiting_available = false;                       // any Waiting slot at decision time

    // True when no task was requested by more than one agent (raw pattern,
    // before resolution).
    bool conflict_free() const;
    // Number of agents that requested some task (action != 0).
    int request_count() const;
};

// Resolves simultaneous requests: each contested Waiting slot goes to the
// eligible requester with the smallest normalized cost (ties to the lowest
// agent id). Requests from ineligible agents and requests for non-Waiting
// slots never win and are recorded for penalty accounting.
AllocationOutcome resolve_conflicts(std::span<const int> requests,
                                    const Eigen::MatrixXd& norm_costs,
                                    std::span<const std::uint8_t> eligible,
                                    std::span<const std::uint8_t> waiting);

// Exact minimum-total-cost assignment (augmenting-path algorithm with
// potentials on a padded square matrix). Handles rectangular inputs; padded
// pairs are dropped from the result.
Assignment hungarian(const Eigen::MatrixXd& cost);

// Repeatedly picks the globally smallest remaining (agent, task) entry.
// Ties break on (value, agent, task) lexicographic order.
Assignment greedy_assign(const Eigen::MatrixXd& cost);

// Uniform random matching covering min(n_agents, m_tasks) pairs.
Assignment random_assign(int n_agents, int m_tasks, Rng& rng);

}  // namespace swarm::alloc
