#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "ippo.hpp"
#include "metrics.hpp"

namespace swarm::bench {

enum class AllocatorKind { Policy, Hungarian, Greedy, Random };

AllocatorKind allocator_from_string(const std::string& name);
std::string to_string(AllocatorKind kind);

// Runs full episodes under one allocator and accumulates the three paper
// metrics. Centralized allocators are invoked whenever idle agents and
// Waiting tasks coexist; the policy allocator issues per-step decentralized
// requests resolved by minimum cost. Allocation time covers the decision
// computation only (forward passes + conflict resolution, or the centralized
// solve), never path planning.
MetricsRecord run_scenario(const Config& cfg, AllocatorKind kind, const ippo::Model* model,
                           int episodes, std::uint64_t seed, RunAudit* audit = nullptr);

// Rescales the team to `n` agents, preserving the kind mix.
ScenarioConfig scale_agents(const ScenarioConfig& base, int n);

// Writes runs.csv (one row per allocator x agent-count x seed) plus
// mean +/- std tables for cost, success rate, and allocation time. Columns
// follow `agent_counts` order; rows follow `allocators` order.
void compare_table(const Config& base, std::span<const int> agent_counts,
                   std::span<const AllocatorKind> allocators, std::span<const std::uint64_t> seeds,
                   int episodes,
                   const std::function<const ippo::Model*(int n_agents)>& model_for,
                   const std::string& out_dir);

struct AblationPair {
    MetricsRecord full;
    MetricsRecord ablated;
};

// Paired evaluation of a GraphSAGE model against its local-projection
// counterpart under identical seeds.
AblationPair ablation_no_graphsage(const Config& cfg, const ippo::Model& full,
                                   const ippo::Model& ablated, int episodes, std::uint64_t seed);

std::string format_double(double v);  // shortest exact decimal

}  // namespace swarm::bench
