#include "world.hpp"

#include <algorithm>
#include <stdexcept>

#include "errors.hpp"

namespace swarm::world {

namespace {

Cell cell_from_index(const std::array<int, 3>& dims, int idx) {
    const int z = idx % dims[2];
    const int y = (idx / dims[2]) % dims[1];
    const int x = idx / (dims[1] * dims[2]);
    return Cell{x, y, z};
}

constexpr int kPlacementRetries = 10000;

}  // namespace

GridWorld init_world(const ScenarioConfig& config, std::uint64_t seed) {
    GridWorld w;
    w.config = config;
    w.dims = config.dims;
    w.seed = seed;
    w.replace_rng = Rng::derive(seed, "replacement");

    const int cells = config.dims[0] * config.dims[1] * config.dims[2];
    w.obstacle.assign(static_cast<std::size_t>(cells), 0);

    Rng place = Rng::derive(seed, "placement");
    auto sample_cell = [&]() { return cell_from_index(w.dims, place.uniform_int(0, cells - 1)); };

    const int n_obstacles = static_cast<int>(config.obstacle_density * cells);
    int placed = 0;
    for (int attempt = 0; placed < n_obstacles; ++attempt) {
        if (attempt > kPlacementRetries + n_obstacles * 10)
            throw ConfigError("obstacle placement failed: world too dense");
        const Cell c = sample_cell();
        auto& flag = w.obstacle[static_cast<std::size_t>(w.view().index(c))];
        if (flag) continue;
        flag = 1;
        ++placed;
    }

    int id = 0;
    for (const auto& group : config.agents) {
        for (int k = 0; k < group.count; ++k) {
            Agent a;
            a.id = id++;
            a.kind = group.kind;
            a.velocity = kind_velocity(group.kind);
            bool ok = false;
            for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
                Cell c = sample_cell();
                if (group.kind == AgentKind::Ground) c.z = 0;
                if (w.is_obstacle(c) || w.agent_at(c)) continue;
                a.pos = c;
                ok = true;
                break;
            }
            if (!ok) throw ConfigError("agent placement failed: world too dense");
            w.agents.push_back(a);
        }
    }

    for (int slot = 0; slot < config.task_slots; ++slot) {
        Task t;
        t.id = w.next_task_id++;
        t.status = TaskStatus::Waiting;
        t.spawn_step = 0;
        bool ok = false;
        for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
            const Cell c = sample_cell();
            if (w.is_obstacle(c)) continue;
            const bool taken = std::any_of(w.tasks.begin(), w.tasks.end(),
                                           [&](const Task& other) { return other.location == c; });
            if (taken) continue;
            t.location = c;
            ok = true;
            break;
        }
        if (!ok) throw ConfigError("task placement failed: world too dense");
        w.tasks.push_back(t);
    }
    return w;
}

Task replace_task(GridWorld& w, int slot) {
    Task& t = w.tasks.at(static_cast<std::size_t>(slot));
    if (t.status != TaskStatus::Assigned)
        throw std::logic_error("replace_task: slot does not hold an Assigned task");
    if (w.config.mode == TaskMode::Fixed) return t;  // slot stays inactive

    const int cells = w.dims[0] * w.dims[1] * w.dims[2];
    for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
        const Cell c = cell_from_index(w.dims, w.replace_rng.uniform_int(0, cells - 1));
        if (w.is_obstacle(c)) continue;
        const bool taken = std::any_of(w.tasks.begin(), w.tasks.end(), [&](const Task& other) {
            return other.id != t.id && other.location == c;
        });
        if (taken) continue;
        t.id = w.next_task_id++;
        t.location = c;
        t.status = TaskStatus::Waiting;
        t.spawn_step = w.clock;
        return t;
    }
    // Unreachable for obstacle densities within the configured bound.
    throw RuntimeFailure("task replacement failed to find a free cell");
}

StepResult step(GridWorld& w, std::span<const int> decisions, const pathing::CostMatrix& costs,
                int blockage_threshold) {
    const int n = static_cast<int>(w.agents.size());
    const int m = static_cast<int>(w.tasks.size());
    if (static_cast<int>(decisions.size()) != n)
        throw std::logic_error("step: one decision per agent required");
    for (const int d : decisions)
        if (d < 0 || d > m) throw std::logic_error("step: action out of range");

    StepResult result;
    result.statuses_at_decision.reserve(static_cast<std::size_t>(n));
    for (const auto& a : w.agents) result.statuses_at_decision.push_back(a.status);

    // Status refresh: a completion or a win from the previous step matures.
    for (auto& a : w.agents) {
        if (a.status == AgentStatus::Complete) a.status = AgentStatus::Idle;
        else if (a.status == AgentStatus::Accept) a.status = AgentStatus::Assign;
    }

    std::vector<std::uint8_t> eligible(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eligible[static_cast<std::size_t>(i)] = !w.agents[i].is_assigned();
    std::vector<std::uint8_t> waiting(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        waiting[static_cast<std::size_t>(j)] = w.tasks[j].status == TaskStatus::Waiting;

    result.outcome = alloc::resolve_conflicts(decisions, costs.normalized, eligible, waiting);

    // Dispatch winners. The slot is refilled immediately in continuous mode,
    // so the agent carries its own copy of the task.
    for (const auto& [agent_idx, slot] : result.outcome.assignments) {
        Agent& a = w.agents[static_cast<std::size_t>(agent_idx)];
        Task& t = w.tasks[static_cast<std::size_t>(slot)];
        a.status = AgentStatus::Accept;
        a.assigned_slot = slot;
        a.assigned_task_id = t.id;
        a.assigned_goal = t.location;
        a.assigned_from = a.pos;
        a.assigned_cost_s = costs.raw(agent_idx, slot);
        a.assigned_at_step = w.clock;
        a.blockage_count = 0;
        a.path.clear();

        AssignmentRecord rec;
        rec.step = w.clock;
        rec.agent = agent_idx;
        rec.task_id = t.id;
        rec.slot = slot;
        rec.from = a.pos;
        rec.goal = t.location;
        rec.velocity = a.velocity;
        rec.cost_s = costs.raw(agent_idx, slot);
        rec.reachable = costs.is_reachable(agent_idx, slot);
        result.assignments.push_back(rec);

        if (rec.reachable) {
            const auto plan = pathing::astar(w.view(), a.kind, a.pos, a.assigned_goal);
            if (plan && plan->cells.size() > 1) {
                a.path.assign(plan->cells.begin() + 1, plan->cells.end());
                w.reservations.claim_path(a.id, w.clock, a.path);
            }
        }

        t.status = TaskStatus::Assigned;
        if (w.config.mode == TaskMode::Continuous) replace_task(w, slot);
    }

    // Movement phase, ascending agent id; other agents' current cells act as
    // hard blocks.
    std::vector<Cell> others;
    others.reserve(static_cast<std::size_t>(n) - 1);
    for (auto& a : w.agents) {
        if (a.path.empty()) continue;
        others.clear();
        for (const auto& b : w.agents)
            if (b.id != a.id) others.push_back(b.pos);
        const GridView view = w.view(others);
        pathing::advance(a, w.reservations, view, w.clock, blockage_threshold);
    }

    // Arrivals.
    for (auto& a : w.agents) {
        if (!a.is_assigned() || a.pos != a.assigned_goal) continue;
        a.status = AgentStatus::Complete;
        result.completions.push_back({w.clock, a.id, a.assigned_task_id, a.assigned_cost_s});
        a.assigned_slot.reset();
        a.assigned_task_id = -1;
        a.assigned_cost_s = 0.0;
        a.assigned_at_step = -1;
        a.path.clear();
        a.blockage_count = 0;
        w.reservations.release(a.id);
    }

    w.clock += 1;
    w.reservations.purge_before(w.clock);
    return result;
}

}  // namespace swarm::world
