#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "grid.hpp"

namespace swarm::world {
struct GridWorld;
struct Agent;
}  // namespace swarm::world

namespace swarm::pathing {

struct Path {
    std::vector<Cell> cells;  // start to goal inclusive
    double length_m() const { return static_cast<double>(cells.size()) - 1.0; }
};

// Minimal-length grid path under the kind's connectivity, or nullopt when the
// goal is unreachable. Heuristic is Manhattan distance (exact lower bound for
// 4-/6-connected moves); equal-f ties expand in (x, y, z) lexicographic order
// so results are deterministic.
std::optional<Path> astar(const GridView& view, AgentKind kind, Cell start, Cell goal);

// BFS shortest-move counts from `goal` to every cell (-1 = unreachable).
// Moves are symmetric, so field[p] equals the p -> goal distance.
std::vector<int> distance_field(const GridView& view, AgentKind kind, Cell goal);

inline double travel_cost(double distance_m, double velocity) {
    return distance_m / velocity;
}

// Clip to [0, c_max] and map linearly onto [-1, 1].
inline double normalize_cost(double raw_s, double c_max_s) {
    const double clipped = std::min(std::max(raw_s, 0.0), c_max_s);
    return 2.0 * clipped / c_max_s - 1.0;
}

struct CostMatrix {
    Eigen::MatrixXd raw;         // seconds, c_max exactly for unreachable pairs
    Eigen::MatrixXd normalized;  // in [-1, 1]
    std::vector<std::uint8_t> reachable;  // row-major n_agents x m_tasks
    double c_max = 0.0;

    bool is_reachable(int agent, int task) const {
        return reachable[static_cast<std::size_t>(agent) * static_cast<std::size_t>(normalized.cols()) + task] != 0;
    }
};

CostMatrix build_cost_matrix(const world::GridWorld& w);

// Time-indexed cell claims. At most one agent may hold a given (cell, step);
// claims at steps below the purge point are dropped.
class ReservationTable {
public:
    bool try_claim(int agent, Cell c, long step);
    // Replaces the agent's claims with arrival times for `path`: path[k] is
    // claimed at now + 1 + k. Cells already held by another agent are skipped.
    void claim_path(int agent, long now, std::span<const Cell> path);
    void release(int agent);
    void purge_before(long step);
    std::optional<int> holder(Cell c, long step) const;
    bool reserved_by_other(Cell c, long step, int agent) const;
    std::size_t size() const { return map_.size(); }

private:
    static std::uint64_t key(Cell c, long step) {
        return (static_cast<std::uint64_t>(step) << 30) |
               (static_cast<std::uint64_t>(c.x) << 20) |
               (static_cast<std::uint64_t>(c.y) << 10) | static_cast<std::uint64_t>(c.z);
    }
    std::unordered_map<std::uint64_t, int> map_;
    std::unordered_map<int, std::vector<std::uint64_t>> mine_;
};

enum class MoveResult { Moved, Blocked, Replanned };

// Advances an agent one cell along its queued path. A blocked next cell
// (obstacle, another agent, or a foreign reservation at clock+1) increments
// blockage_count; reaching the threshold triggers an A* replan that treats
// `view.extra_blocked` (other agents' current cells) as obstacles. A failed
// replan leaves the agent in place to retry next step.
MoveResult advance(world::Agent& agent, ReservationTable& res, const GridView& view, long clock,
                   int blockage_threshold);

}  // namespace swarm::pathing
