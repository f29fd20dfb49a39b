#include "swarm_alloc.h"

#include <cstring>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/ippo.hpp"
#include "core/workflows.hpp"

struct swarm_config {
    swarm::Config cfg;
};

struct swarm_model {
    swarm::ippo::Model model;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Translates C++ exceptions at the ABI boundary into status codes.
template <typename F>
swarm_status guarded(F&& f) {
    try {
        f();
        return SWARM_OK;
    } catch (const swarm::ConfigError& e) {
        set_error(e.what());
        return SWARM_ERR_CONFIG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SWARM_ERR_RUNTIME;
    } catch (...) {
        set_error("unknown failure");
        return SWARM_ERR_RUNTIME;
    }
}

swarm_status require(bool ok, const char* msg) {
    if (ok) return SWARM_OK;
    set_error(msg);
    return SWARM_ERR_CONFIG;
}

std::vector<std::string> split_csv(const char* text) {
    std::vector<std::string> out;
    if (!text) return out;
    std::string cur;
    for (const char* p = text;; ++p) {
        if (*p == ',' || *p == '\0') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
            if (*p == '\0') break;
        } else {
            cur.push_back(*p);
        }
    }
    return out;
}

}  // namespace

extern "C" {

const char* swarm_version(void) { return swarm::workflows::kArtifactVersion; }

const char* swarm_last_error(void) { return g_last_error.c_str(); }

swarm_status swarm_config_parse(const char* json_text, swarm_config** out) {
    if (auto st = require(json_text && out, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { *out = new swarm_config{swarm::parse_config_json(json_text)}; });
}

swarm_status swarm_config_load(const char* path, swarm_config** out) {
    if (auto st = require(path && out, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { *out = new swarm_config{swarm::load_config_file(path)}; });
}

swarm_status swarm_config_set(swarm_config* cfg, const char* key, const char* value) {
    if (auto st = require(cfg && key && value, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { swarm::apply_override(cfg->cfg, key, value); });
}

char* swarm_config_dump(const swarm_config* cfg) {
    if (!cfg) return nullptr;
    const std::string text = swarm::config_to_json(cfg->cfg);
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void swarm_config_free(swarm_config* cfg) { delete cfg; }

void swarm_string_free(char* s) { delete[] s; }

swarm_status swarm_model_load(const char* checkpoint_path, swarm_model** out) {
    if (auto st = require(checkpoint_path && out, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { *out = new swarm_model{swarm::ippo::load_checkpoint(checkpoint_path)}; });
}

swarm_status swarm_model_save(const swarm_model* model, const char* checkpoint_path) {
    if (auto st = require(model && checkpoint_path, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { swarm::ippo::save_checkpoint(model->model, checkpoint_path); });
}

void swarm_model_free(swarm_model* model) { delete model; }

swarm_status swarm_train(const swarm_config* cfg, int64_t total_steps, uint64_t seed,
                         const char* out_dir) {
    if (auto st = require(cfg && out_dir, "null argument"); st != SWARM_OK) return st;
    return guarded([&]() { swarm::workflows::run_train(cfg->cfg, total_steps, seed, out_dir); });
}

swarm_status swarm_eval(const swarm_config* cfg, const char* checkpoint_path, int episodes,
                        uint64_t seed, const char* out_dir) {
    if (auto st = require(cfg && checkpoint_path && out_dir, "null argument"); st != SWARM_OK)
        return st;
    return guarded(
        [&]() { swarm::workflows::run_eval(cfg->cfg, checkpoint_path, episodes, seed, out_dir); });
}

swarm_status swarm_bench(const swarm_config* cfg, const char* allocators_csv,
                         const int* agent_counts, size_t n_agent_counts, const uint64_t* seeds,
                         size_t n_seeds, int episodes, const char* checkpoint_path,
                         const char* out_dir) {
    if (auto st = require(cfg && allocators_csv && out_dir, "null argument"); st != SWARM_OK)
        return st;
    if (auto st = require(seeds != nullptr && n_seeds > 0, "bench needs at least one seed");
        st != SWARM_OK)
        return st;
    return guarded([&]() {
        std::vector<int> counts;
        if (agent_counts) counts.assign(agent_counts, agent_counts + n_agent_counts);
        std::vector<std::uint64_t> seed_list(seeds, seeds + n_seeds);
        swarm::workflows::run_bench(cfg->cfg, split_csv(allocators_csv), counts, seed_list, episodes,
                                    checkpoint_path ? checkpoint_path : "", out_dir);
    });
}

swarm_status swarm_ablate(const swarm_config* cfg, int64_t total_steps, int episodes, uint64_t seed,
                          const char* out_dir) {
    if (auto st = require(cfg && out_dir, "null argument"); st != SWARM_OK) return st;
    return guarded(
        [&]() { swarm::workflows::run_ablate(cfg->cfg, total_steps, episodes, seed, out_dir); });
}

}  // extern "C"
