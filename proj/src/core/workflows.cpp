#include "workflows.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bench.hpp"
#include "errors.hpp"

namespace swarm::workflows {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out << text;
}

void write_manifest(const std::string& out_dir, ordered_json manifest, const Config& cfg) {
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config"] = ordered_json::parse(config_to_json(cfg));
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

void write_metrics_csv(const fs::path& path, const std::string& allocator, const Config& cfg,
                       std::uint64_t seed, const bench::MetricsRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out << "allocator,n_agents,m_tasks,mode,seed,total_travel_cost,success_rate,"
           "alloc_time_mean_s,tasks_completed,mean_global_reward\n";
    out << allocator << ',' << cfg.scenario.n_agents() << ',' << cfg.scenario.task_slots << ','
        << to_string(cfg.scenario.mode) << ',' << seed << ','
        << bench::format_double(rec.total_travel_cost) << ',' << bench::format_double(rec.success_rate)
        << ',' << bench::format_double(rec.alloc_time_mean_s) << ',' << rec.tasks_completed << ','
        << bench::format_double(rec.mean_global_reward) << '\n';
}

}  // namespace

void run_train(const Config& cfg, long total_steps, std::uint64_t seed, const std::string& out_dir) {
    validate(cfg);
    if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
    fs::create_directories(out_dir);

    const ippo::TrainResult result = ippo::train(cfg, total_steps, seed);
    ippo::save_checkpoint(result.model, (fs::path(out_dir) / "checkpoint.json").string());
    ippo::write_curve_csv(result.curve, (fs::path(out_dir) / "curve.csv").string());

    ordered_json manifest;
    manifest["command"] = "train";
    manifest["seed"] = seed;
    manifest["total_steps"] = total_steps;
    write_manifest(out_dir, std::move(manifest), cfg);
}

void run_eval(const Config& cfg, const std::string& checkpoint_path, int episodes,
              std::uint64_t seed, const std::string& out_dir) {
    validate(cfg);
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    const ippo::Model model = ippo::load_checkpoint(checkpoint_path);
    fs::create_directories(out_dir);

    const bench::MetricsRecord rec = ippo::evaluate(model, cfg, episodes, seed);
    write_metrics_csv(fs::path(out_dir) / "metrics.csv", "policy", cfg, seed, rec);

    ordered_json manifest;
    manifest["command"] = "eval";
    manifest["seed"] = seed;
    manifest["episodes"] = episodes;
    manifest["checkpoint"] = checkpoint_path;
    write_manifest(out_dir, std::move(manifest), cfg);
}

void run_bench(const Config& cfg, const std::vector<std::string>& allocator_names,
               const std::vector<int>& agent_counts, const std::vector<std::uint64_t>& seeds,
               int episodes, const std::string& checkpoint_path, const std::string& out_dir) {
    validate(cfg);
    if (allocator_names.empty()) throw ConfigError("bench needs at least one allocator");
    if (seeds.empty()) throw ConfigError("bench needs at least one seed");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");

    std::vector<bench::AllocatorKind> allocators;
    for (const auto& name : allocator_names) allocators.push_back(bench::allocator_from_string(name));

    std::vector<int> counts = agent_counts;
    if (counts.empty()) counts.push_back(cfg.scenario.n_agents());

    ippo::Model model;
    bool have_model = false;
    const bool wants_policy = std::any_of(allocators.begin(), allocators.end(), [](auto k) {
        return k == bench::AllocatorKind::Policy;
    });
    if (wants_policy) {
        if (checkpoint_path.empty())
            throw ConfigError("the policy allocator requires --checkpoint");
        model = ippo::load_checkpoint(checkpoint_path);
        have_model = true;
    }

    fs::create_directories(out_dir);
    bench::compare_table(
        cfg, counts, allocators, seeds, episodes,
        [&](int n) -> const ippo::Model* {
            if (!have_model) throw ConfigError("no checkpoint loaded for policy allocator");
            if (model.n_agents != n)
                throw ConfigError("checkpoint agent count does not match bench column " + std::to_string(n));
            return &model;
        },
        out_dir);

    ordered_json manifest;
    manifest["command"] = "bench";
    manifest["seeds"] = seeds;
    manifest["episodes"] = episodes;
    manifest["allocators"] = allocator_names;
    manifest["agent_counts"] = counts;
    if (!checkpoint_path.empty()) manifest["checkpoint"] = checkpoint_path;
    write_manifest(out_dir, std::move(manifest), cfg);
}

void run_ablate(const Config& cfg, long total_steps, int episodes, std::uint64_t seed,
                const std::string& out_dir) {
    validate(cfg);
    if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    fs::create_directories(out_dir);

    Config full_cfg = cfg;
    full_cfg.train.use_graphsage = true;
    Config local_cfg = cfg;
    local_cfg.train.use_graphsage = false;

    const ippo::TrainResult full = ippo::train(full_cfg, total_steps, seed);
    const ippo::TrainResult ablated = ippo::train(local_cfg, total_steps, seed);
    ippo::save_checkpoint(full.model, (fs::path(out_dir) / "checkpoint_full.json").string());
    ippo::save_checkpoint(ablated.model, (fs::path(out_dir) / "checkpoint_no_graphsage.json").string());

    const bench::AblationPair pair =
        bench::ablation_no_graphsage(full_cfg, full.model, ablated.model, episodes, seed);

    std::ofstream out(fs::path(out_dir) / "ablation.csv", std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write ablation.csv");
    out << "variant,total_travel_cost,success_rate,tasks_completed,mean_global_reward\n";
    auto row = [&](const std::string& name, const bench::MetricsRecord& r) {
        out << name << ',' << bench::format_double(r.total_travel_cost) << ','
            << bench::format_double(r.success_rate) << ',' << r.tasks_completed << ','
            << bench::format_double(r.mean_global_reward) << '\n';
    };
    row("full", pair.full);
    row("no_graphsage", pair.ablated);
    out << "delta," << bench::format_double(pair.full.total_travel_cost - pair.ablated.total_travel_cost)
        << ',' << bench::format_double(pair.full.success_rate - pair.ablated.success_rate) << ','
        << (pair.full.tasks_completed - pair.ablated.tasks_completed) << ','
        << bench::format_double(pair.full.mean_global_reward - pair.ablated.mean_global_reward) << '\n';
    out.close();

    ordered_json manifest;
    manifest["command"] = "ablate";
    manifest["seed"] = seed;
    manifest["total_steps"] = total_steps;
    manifest["episodes"] = episodes;
    write_manifest(out_dir, std::move(manifest), cfg);
}

}  // namespace swarm::workflows
