#include "alloc.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace swarm::alloc {

bool AllocationOutcome::conflict_free() const {
    std::map<int, int> hits;
    for (int r : requests)
        if (r > 0 && ++hits[r] > 1) return false;
    return true;
}

int AllocationOutcome::request_count() const {
    int n = 0;
    for (int r : requests) n += r > 0;
    return n;
}

AllocationOutcome resolve_conflicts(std::span<const int> requests,
                                    const Eigen::MatrixXd& norm_costs,
                                    std::span<const std::uint8_t> eligible,
                                    std::span<const std::uint8_t> waiting) {
    const int n = static_cast<int>(requests.size());
    const int m = static_cast<int>(waiting.size());

    AllocationOutcome out;
    out.requests.assign(requests.begin(), requests.end());
    out.waiting_available = std::any_of(waiting.begin(), waiting.end(), [](std::uint8_t w) { return w != 0; });

    // Group eligible requests per slot; side-channel the rest.
    std::vector<std::vector<int>> contenders(m);
    for (int a = 0; a < n; ++a) {
        const int action = requests[a];
        if (action == 0) {
            out.idle_agents.push_back(a);
            continue;
        }
        const int slot = action - 1;
        if (slot < 0 || slot >= m) continue;  // caller validates; be tolerant
        if (!eligible[a]) {
            out.ineligible_requests.emplace_back(a, slot);
            continue;
        }
        if (!waiting[slot]) {
            out.invalid_requests.emplace_back(a, slot);
            continue;
        }
        contenders[slot].push_back(a);
    }

    for (int slot = 0; slot < m; ++slot) {
        auto& agents = contenders[slot];
        if (agents.empty()) continue;
        int winner = agents[0];
        for (int a : agents)
            if (norm_costs(a, slot) < norm_costs(winner, slot) ||
                (norm_costs(a, slot) == norm_costs(winner, slot) && a < winner))
                winner = a;
        out.assignments.emplace_back(winner, slot);
        if (agents.size() > 1) {
            Conflict c;
            c.slot = slot;
            c.winner = winner;
            for (int a : agents)
                if (a != winner) c.losers.push_back(a);
            out.conflicts.push_back(std::move(c));
        }
    }
    return out;
}

namespace {

// Augmenting-path assignment with row/column potentials on a square matrix
// (1-indexed internally). Returns row -> column.
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n == 0 || m == 0) return {};
    const int k = std::max(n, m);

    // Pad to square with a constant larger than any real entry so padding
    // never displaces a real pair.
    const double pad = 10.0 * std::max(0.0, cost.maxCoeff()) + 1.0;
    Eigen::MatrixXd sq = Eigen::MatrixXd::Constant(k, k, pad);
    sq.topLeftCorner(n, m) = cost;

    const std::vector<int> row_to_col = solve_square(sq);
    Assignment result;
    for (int i = 0; i < n; ++i)
        if (row_to_col[i] >= 0 && row_to_col[i] < m) result.emplace_back(i, row_to_col[i]);
    return result;
}

Assignment greedy_assign(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    std::vector<char> agent_done(n, 0), task_done(m, 0);
    Assignment result;
    const int pairs = std::min(n, m);
    for (int it = 0; it < pairs; ++it) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (agent_done[i]) continue;
            for (int j = 0; j < m; ++j) {
                if (task_done[j]) continue;
                if (cost(i, j) < best) {
                    best = cost(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        agent_done[bi] = 1;
        task_done[bj] = 1;
        result.emplace_back(bi, bj);
    }
    return result;
}

Assignment random_assign(int n_agents, int m_tasks, Rng& rng) {
    const int pairs = std::min(n_agents, m_tasks);
    Assignment result;
    if (pairs <= 0) return result;
    // Partial Fisher-Yates over the larger side.
    if (n_agents <= m_tasks) {
        std::vector<int> tasks(m_tasks);
        std::iota(tasks.begin(), tasks.end(), 0);
        for (int i = 0; i < pairs; ++i) {
            const int j = rng.uniform_int(i, m_tasks - 1);
            std::swap(tasks[i], tasks[j]);
            result.emplace_back(i, tasks[i]);
        }
    } else {
        std::vector<int> agents(n_agents);
        std::iota(agents.begin(), agents.end(), 0);
        for (int j = 0; j < pairs; ++j) {
            const int i = rng.uniform_int(j, n_agents - 1);
            std::swap(agents[j], agents[i]);
            result.emplace_back(agents[j], j);
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

}  // namespace swarm::alloc
