#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <span>

namespace swarm {

// A grid cell at 1 m resolution. Ground agents live in the z = 0 plane.
struct Cell {
    int x = 0;
    int y = 0;
    int z = 0;

    auto operator<=>(const Cell&) const = default;
};

inline int manhattan(const Cell& a, const Cell& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

enum class AgentKind { Ground, Aerial };

// Ground: 4-connected moves in the z = 0 plane. Aerial: 6-connected in 3D.
inline int neighbor_count(AgentKind kind) {
    return kind == AgentKind::Ground ? 4 : 6;
}

inline Cell neighbor(const Cell& c, AgentKind kind, int k) {
    static constexpr int dx[6] = {+1, -1, 0, 0, 0, 0};
    static constexpr int dy[6] = {0, 0, +1, -1, 0, 0};
    static constexpr int dz[6] = {0, 0, 0, 0, +1, -1};
    (void)kind;
    return Cell{c.x + dx[k], c.y + dy[k], c.z + dz[k]};
}

// Read-only occupancy snapshot used by the planner. `blocked` is a flat
// x-major bitmap of static obstacles; `extra_blocked` carries transient
// obstacles (other agents' cells during replanning).
struct GridView {
    std::array<int, 3> dims{};
    const std::uint8_t* blocked = nullptr;
    std::span<const Cell> extra_blocked{};

    bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < dims[0] && c.y >= 0 && c.y < dims[1] && c.z >= 0 && c.z < dims[2];
    }
    int index(const Cell& c) const { return (c.x * dims[1] + c.y) * dims[2] + c.z; }
    int cell_count() const { return dims[0] * dims[1] * dims[2]; }

    bool is_free(const Cell& c) const {
        if (!in_bounds(c) || blocked[index(c)]) return false;
        for (const Cell& e : extra_blocked)
            if (e == c) return false;
        return true;
    }
};

}  // namespace swarm
