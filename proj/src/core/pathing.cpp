#include "pathing.hpp"

#include <algorithm>
#include <deque>
#include <queue>

#include "world.hpp"

namespace swarm::pathing {

namespace {

struct OpenNode {
    int f = 0;
    Cell cell;
    bool operator>(const OpenNode& o) const {
        if (f != o.f) return f > o.f;
        return cell > o.cell;  // expand smaller (x, y, z) first on ties
    }
};

}  // namespace

std::optional<Path> astar(const GridView& view, AgentKind kind, Cell start, Cell goal) {
    if (!view.is_free(start) || !view.is_free(goal)) return std::nullopt;
    if (kind == AgentKind::Ground && (start.z != 0 || goal.z != 0)) return std::nullopt;
    if (start == goal) return Path{{start}};

    const int cells = view.cell_count();
    std::vector<int> g(cells, -1);
    std::vector<int> parent(cells, -1);
    std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<OpenNode>> open;

    g[view.index(start)] = 0;
    open.push({manhattan(start, goal), start});

    const int moves = neighbor_count(kind);
    while (!open.empty()) {
        const OpenNode node = open.top();
        open.pop();
        const int ci = view.index(node.cell);
        if (node.f > g[ci] + manhattan(node.cell, goal)) continue;  // stale entry
        if (node.cell == goal) break;
        for (int k = 0; k < moves; ++k) {
            const Cell nb = neighbor(node.cell, kind, k);
            if (!view.is_free(nb)) continue;
            const int ni = view.index(nb);
            const int ng = g[ci] + 1;
            if (g[ni] < 0 || ng < g[ni]) {
                g[ni] = ng;
                parent[ni] = ci;
                open.push({ng + manhattan(nb, goal), nb});
            }
        }
    }

    const int gi = view.index(goal);
    if (g[gi] < 0) return std::nullopt;

    Path path;
    path.cells.resize(static_cast<std::size_t>(g[gi]) + 1);
    int cur = gi;
    for (int d = g[gi]; d >= 0; --d) {
        const int z = cur % view.dims[2];
        const int y = (cur / view.dims[2]) % view.dims[1];
        const int x = cur / (view.dims[1] * view.dims[2]);
        path.cells[static_cast<std::size_t>(d)] = Cell{x, y, z};
        cur = parent[cur];
    }
    return path;
}

std::vector<int> distance_field(const GridView& view, AgentKind kind, Cell goal) {
    std::vector<int> dist(static_cast<std::size_t>(view.cell_count()), -1);
    if (!view.is_free(goal)) return dist;
    if (kind == AgentKind::Ground && goal.z != 0) return dist;

    std::deque<Cell> queue;
    dist[view.index(goal)] = 0;
    queue.push_back(goal);
    const int moves = neighbor_count(kind);
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        const int d = dist[view.index(c)];
        for (int k = 0; k < moves; ++k) {
            const Cell nb = neighbor(c, kind, k);
            if (!view.is_free(nb)) continue;
            int& dn = dist[view.index(nb)];
            if (dn < 0) {
                dn = d + 1;
                queue.push_back(nb);
            }
        }
    }
    return dist;
}

CostMatrix build_cost_matrix(const world::GridWorld& w) {
    const int n = static_cast<int>(w.agents.size());
    const int m = static_cast<int>(w.tasks.size());
    CostMatrix cm;
    cm.c_max = w.config.cost_ceiling();
    cm.raw.resize(n, m);
    cm.normalized.resize(n, m);
    cm.reachable.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(m), 0);

    const GridView view = w.view();
    const bool has_ground = std::any_of(w.agents.begin(), w.agents.end(),
                                        [](const auto& a) { return a.kind == AgentKind::Ground; });
    const bool has_aerial = std::any_of(w.agents.begin(), w.agents.end(),
                                        [](const auto& a) { return a.kind == AgentKind::Aerial; });

    for (int j = 0; j < m; ++j) {
        // One BFS per (task, kind) covers every agent of that kind.
        std::vector<int> ground_field, aerial_field;
        if (has_ground) ground_field = distance_field(view, AgentKind::Ground, w.tasks[j].location);
        if (has_aerial) aerial_field = distance_field(view, AgentKind::Aerial, w.tasks[j].location);
        for (int i = 0; i < n; ++i) {
            const auto& agent = w.agents[i];
            const auto& field = agent.kind == AgentKind::Ground ? ground_field : aerial_field;
            const int d = field[view.index(agent.pos)];
            if (d < 0) {
                cm.raw(i, j) = cm.c_max;
            } else {
                cm.raw(i, j) = travel_cost(static_cast<double>(d), agent.velocity);
                cm.reachable[static_cast<std::size_t>(i) * m + j] = 1;
            }
            cm.normalized(i, j) = normalize_cost(cm.raw(i, j), cm.c_max);
        }
    }
    return cm;
}

bool ReservationTable::try_claim(int agent, Cell c, long step) {
    const auto k = key(c, step);
    auto [it, inserted] = map_.try_emplace(k, agent);
    if (!inserted && it->second != agent) return false;
    if (inserted) mine_[agent].push_back(k);
    return true;
}

void ReservationTable::claim_path(int agent, long now, std::span<const Cell> path) {
    release(agent);
    for (std::size_t k = 0; k < path.size(); ++k)
        try_claim(agent, path[k], now + 1 + static_cast<long>(k));
}

void ReservationTable::release(int agent) {
    auto it = mine_.find(agent);
    if (it == mine_.end()) return;
    for (const auto k : it->second) {
        auto e = map_.find(k);
        if (e != map_.end() && e->second == agent) map_.erase(e);
    }
    mine_.erase(it);
}

void ReservationTable::purge_before(long step) {
    const auto cutoff = static_cast<std::uint64_t>(step) << 30;
    std::erase_if(map_, [cutoff](const auto& kv) { return kv.first < cutoff; });
    for (auto& [agent, keys] : mine_)
        std::erase_if(keys, [cutoff](std::uint64_t k) { return k < cutoff; });
}

std::optional<int> ReservationTable::holder(Cell c, long step) const {
    const auto it = map_.find(key(c, step));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

bool ReservationTable::reserved_by_other(Cell c, long step, int agent) const {
    const auto h = holder(c, step);
    return h.has_value() && *h != agent;
}

MoveResult advance(world::Agent& agent, ReservationTable& res, const GridView& view, long clock,
                   int blockage_threshold) {
    const Cell next = agent.path.front();
    const bool blocked = !view.is_free(next) || res.reserved_by_other(next, clock + 1, agent.id);
    if (!blocked) {
        agent.pos = next;
        agent.path.erase(agent.path.begin());
        agent.blockage_count = 0;
        res.try_claim(agent.id, next, clock + 1);
        return MoveResult::Moved;
    }

    agent.blockage_count += 1;
    if (agent.blockage_count >= blockage_threshold) {
        const auto replanned = astar(view, agent.kind, agent.pos, agent.assigned_goal);
        if (replanned) {
            agent.path.assign(replanned->cells.begin() + 1, replanned->cells.end());
            agent.blockage_count = 0;
            res.claim_path(agent.id, clock, agent.path);
            return MoveResult::Replanned;
        }
        // Goal unreachable while boxed in; hold position and retry next step.
    }
    return MoveResult::Blocked;
}

}  // namespace swarm::pathing
