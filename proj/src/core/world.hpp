#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alloc.hpp"
#include "config.hpp"
#include "grid.hpp"
#include "pathing.hpp"
#include "rng.hpp"

namespace swarm::world {

enum class AgentStatus { Idle, Accept, Assign, Complete };

struct Agent {
    int id = 0;
    AgentKind kind = AgentKind::Ground;
    Cell pos{};
    double velocity = 3.0;
    AgentStatus status = AgentStatus::Idle;
    std::optional<int> assigned_slot;  // slot it was won from (informational)
    long assigned_task_id = -1;
    Cell assigned_goal{};
    Cell assigned_from{};
    double assigned_cost_s = 0.0;  // planned travel cost at assignment time
    long assigned_at_step = -1;
    std::vector<Cell> path;  // queued future cells, front is next
    int blockage_count = 0;

    bool is_assigned() const { return status == AgentStatus::Accept || status == AgentStatus::Assign; }
};

enum class TaskStatus { Waiting, Assigned };

struct Task {
    long id = 0;
    Cell location{};
    TaskStatus status = TaskStatus::Waiting;
    long spawn_step = 0;
};

struct GridWorld {
    ScenarioConfig config;
    std::array<int, 3> dims{};
    std::vector<std::uint8_t> obstacle;  // flat x-major bitmap
    std::vector<Agent> agents;
    std::vector<Task> tasks;  // fixed capacity of M slots
    long clock = 0;
    std::uint64_t seed = 0;
    long next_task_id = 0;
    Rng replace_rng{0};
    pathing::ReservationTable reservations;

    GridView view(std::span<const Cell> extra = {}) const {
        return GridView{dims, obstacle.data(), extra};
    }
    bool is_obstacle(const Cell& c) const { return obstacle[view().index(c)] != 0; }
    std::optional<int> agent_at(const Cell& c) const {
        for (const auto& a : agents)
            if (a.pos == c) return a.id;
        return std::nullopt;
    }
};

struct AssignmentRecord {
    long step = 0;
    int agent = -1;
    long task_id = -1;
    int slot = -1;
    Cell from{};
    Cell goal{};
    double velocity = 0.0;
    double cost_s = 0.0;
    bool reachable = true;
};

struct CompletionRecord {
    long step = 0;
    int agent = -1;
    long task_id = -1;
    double cost_s = 0.0;
};

struct StepResult {
    alloc::AllocationOutcome outcome;
    std::vector<AssignmentRecord> assignments;
    std::vector<CompletionRecord> completions;
    std::vector<AgentStatus> statuses_at_decision;
};

// Places obstacles, agents, and tasks uniformly at random on free cells
// without overlap (tasks may share a cell with an agent). Deterministic for a
// fixed seed. Throws ConfigError when placement keeps colliding.
GridWorld init_world(const ScenarioConfig& config, std::uint64_t seed);

// Refills an Assigned slot with a fresh Waiting task at a random free cell;
// ids increase monotonically. Disabled in fixed mode (the slot stays
// inactive).
Task replace_task(GridWorld& w, int slot);

// One simulation step: resolves the agents' simultaneous requests, dispatches
// winners (path planning + immediate slot refill in continuous mode), moves
// every en-route agent one cell under the reservation rules, records arrivals,
// and advances the clock. Invalid requests are penalized downstream, never
// rejected here.
StepResult step(GridWorld& w, std::span<const int> decisions, const pathing::CostMatrix& costs,
                int blockage_threshold = 3);

}  // namespace swarm::world
