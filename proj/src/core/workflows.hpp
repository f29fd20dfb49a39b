#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "ippo.hpp"

namespace swarm::workflows {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Each workflow creates out_dir, runs end to end, and drops a manifest.json
// recording command, config, seed(s), and artifact version so the run is
// reconstructible from the manifest alone.

// checkpoint.json + curve.csv + manifest.json
void run_train(const Config& cfg, long total_steps, std::uint64_t seed, const std::string& out_dir);

// metrics.csv + manifest.json
void run_eval(const Config& cfg, const std::string& checkpoint_path, int episodes,
              std::uint64_t seed, const std::string& out_dir);

// runs.csv + table_{cost,success,alloc_time}.csv + manifest.json
void run_bench(const Config& cfg, const std::vector<std::string>& allocators,
               const std::vector<int>& agent_counts, const std::vector<std::uint64_t>& seeds,
               int episodes, const std::string& checkpoint_path, const std::string& out_dir);

// checkpoint_full.json + checkpoint_no_graphsage.json + ablation.csv + manifest.json
void run_ablate(const Config& cfg, long total_steps, int episodes, std::uint64_t seed,
                const std::string& out_dir);

}  // namespace swarm::workflows
