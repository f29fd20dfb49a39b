// Command-line front end for the swarm_alloc shared library. Exit codes:
// 0 success, 1 configuration error, 2 runtime failure.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarm_alloc.h"

namespace {

struct ConfigDeleter {
    void operator()(swarm_config* c) const { swarm_config_free(c); }
};
using ConfigPtr = std::unique_ptr<swarm_config, ConfigDeleter>;

int fail(swarm_status st) {
    std::fprintf(stderr, "error: %s\n", swarm_last_error());
    return st == SWARM_ERR_CONFIG ? 1 : 2;
}

// Loads the config file and applies --set key=value overrides in order.
swarm_status load_config(const std::string& path, const std::vector<std::string>& overrides,
                         ConfigPtr& out) {
    swarm_config* raw = nullptr;
    if (const auto st = swarm_config_load(path.c_str(), &raw); st != SWARM_OK) return st;
    out.reset(raw);
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "error: override '%s' is not key=value\n", item.c_str());
            return SWARM_ERR_CONFIG;
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (const auto st = swarm_config_set(out.get(), key.c_str(), value.c_str()); st != SWARM_OK)
            return st;
    }
    return SWARM_OK;
}

// "1..10" (inclusive range) or "1,5,9".
bool parse_seeds(const std::string& text, std::vector<std::uint64_t>& out) {
    const auto dots = text.find("..");
    try {
        if (dots != std::string::npos) {
            const std::uint64_t lo = std::stoull(text.substr(0, dots));
            const std::uint64_t hi = std::stoull(text.substr(dots + 2));
            if (hi < lo) return false;
            for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
            return !out.empty();
        }
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto comma = text.find(',', pos);
            if (comma == std::string::npos) comma = text.size();
            out.push_back(std::stoull(text.substr(pos, comma - pos)));
            pos = comma + 1;
        }
        return !out.empty();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multi-agent task allocation: training, evaluation, benchmarks"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint, allocators = "hungarian,greedy,random";
    std::string seeds_text = "0";
    std::vector<std::string> overrides;
    std::vector<int> agent_counts;
    std::uint64_t seed = 0;
    std::int64_t steps = 100000;
    int episodes = 10;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--config", config_path, "Scenario/training config JSON")->required();
        cmd->add_option("--set", overrides, "Override config values (key=value, repeatable)");
        auto* o = cmd->add_option("--out", out_dir, "Output directory");
        if (needs_out) o->required();
    };

    auto* train = app.add_subcommand("train", "Train independent PPO policies");
    add_common(train, true);
    train->add_option("--seed", seed, "Master seed");
    train->add_option("--steps", steps, "Total environment steps");

    auto* eval = app.add_subcommand("eval", "Evaluate a trained checkpoint");
    add_common(eval, true);
    eval->add_option("--seed", seed, "Master seed");
    eval->add_option("--checkpoint", checkpoint, "Trained model checkpoint")->required();
    eval->add_option("--episodes", episodes, "Evaluation episodes");

    auto* bench = app.add_subcommand("bench", "Compare allocators across seeds");
    add_common(bench, true);
    bench->add_option("--allocators", allocators, "Comma list: policy,hungarian,greedy,random");
    bench->add_option("--seeds", seeds_text, "Seed list: '1..10' or '1,5,9'");
    bench->add_option("--agent-counts", agent_counts, "Table columns (agent counts)");
    bench->add_option("--episodes", episodes, "Episodes per run");
    bench->add_option("--checkpoint", checkpoint, "Checkpoint for the policy allocator");

    auto* ablate = app.add_subcommand("ablate", "Paired GraphSAGE vs local-only training run");
    add_common(ablate, true);
    ablate->add_option("--seed", seed, "Master seed");
    ablate->add_option("--steps", steps, "Training steps per variant");
    ablate->add_option("--episodes", episodes, "Evaluation episodes");

    CLI11_PARSE(app, argc, argv);

    ConfigPtr cfg;
    if (const auto st = load_config(config_path, overrides, cfg); st != SWARM_OK) return fail(st);

    swarm_status st = SWARM_OK;
    if (app.got_subcommand(train)) {
        st = swarm_train(cfg.get(), steps, seed, out_dir.c_str());
    } else if (app.got_subcommand(eval)) {
        st = swarm_eval(cfg.get(), checkpoint.c_str(), episodes, seed, out_dir.c_str());
    } else if (app.got_subcommand(bench)) {
        std::vector<std::uint64_t> seed_list;
        if (!parse_seeds(seeds_text, seed_list)) {
            std::fprintf(stderr, "error: cannot parse --seeds '%s'\n", seeds_text.c_str());
            return 1;
        }
        st = swarm_bench(cfg.get(), allocators.c_str(),
                         agent_counts.empty() ? nullptr : agent_counts.data(), agent_counts.size(),
                         seed_list.data(), seed_list.size(), episodes,
                         checkpoint.empty() ? nullptr : checkpoint.c_str(), out_dir.c_str());
    } else if (app.got_subcommand(ablate)) {
        st = swarm_ablate(cfg.get(), steps, episodes, seed, out_dir.c_str());
    }

    if (st != SWARM_OK) return fail(st);
    std::printf("ok: outputs in %s\n", out_dir.c_str());
    return 0;
}
