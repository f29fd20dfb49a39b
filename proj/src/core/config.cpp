#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace swarm {

using nlohmann::ordered_json;

std::string to_string(AgentKind kind) {
    return kind == AgentKind::Ground ? "ground" : "aerial";
}

std::string to_string(TaskMode mode) {
    return mode == TaskMode::Fixed ? "fixed" : "continuous";
}

namespace {

AgentKind parse_kind(const std::string& s) {
    if (s == "ground") return AgentKind::Ground;
    if (s == "aerial") return AgentKind::Aerial;
    throw ConfigError("unknown agent kind '" + s + "' (expected \"ground\" or \"aerial\")");
}

TaskMode parse_mode(const std::string& s) {
    if (s == "fixed") return TaskMode::Fixed;
    if (s == "continuous") return TaskMode::Continuous;
    throw ConfigError("unknown mode '" + s + "' (expected \"fixed\" or \"continuous\")");
}

// Scalar training/world keys addressable both from JSON and from --set
// overrides. Scenario structure keys (dims, agents, ...) are handled apart.
template <typename F>
void for_each_scalar_key(Config& cfg, F&& f) {
    f("task_slots", cfg.scenario.task_slots);
    f("episode_len", cfg.scenario.episode_len);
    f("obstacle_density", cfg.scenario.obstacle_density);
    f("lr", cfg.train.lr);
    f("gamma", cfg.train.gamma);
    f("gae_lambda", cfg.train.gae_lambda);
    f("entropy_coef", cfg.train.entropy_coef);
    f("sgd_iters", cfg.train.sgd_iters);
    f("batch_size", cfg.train.batch_size);
    f("rollout_fragment", cfg.train.rollout_fragment);
    f("clip_epsilon", cfg.train.clip_epsilon);
    f("value_coef", cfg.train.value_coef);
    f("lambda_conflict", cfg.train.lambda_conflict);
    f("mu_idle", cfg.train.mu_idle);
    f("eta_bonus", cfg.train.eta_bonus);
    f("bonus_threshold", cfg.train.bonus_threshold);
    f("normalize_advantages", cfg.train.normalize_advantages);
    f("embed_dim", cfg.train.embed_dim);
    f("hidden_dim", cfg.train.hidden_dim);
    f("use_graphsage", cfg.train.use_graphsage);
    f("concat_obs", cfg.train.concat_obs);
    f("blockage_threshold", cfg.train.blockage_threshold);
}

void assign_number(const std::string& key, const ordered_json& v, double& dst) {
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    dst = v.get<double>();
}
void assign_number(const std::string& key, const ordered_json& v, int& dst) {
    if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    dst = v.get<int>();
}
void assign_number(const std::string& key, const ordered_json& v, bool& dst) {
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
    dst = v.get<bool>();
}

}  // namespace

void validate(const Config& cfg) {
    const auto& s = cfg.scenario;
    if (s.dims[0] <= 0 || s.dims[1] <= 0 || s.dims[2] <= 0)
        throw ConfigError("dims must be positive");
    if (s.agents.empty() || s.n_agents() < 1) throw ConfigError("need at least one agent");
    for (const auto& g : s.agents)
        if (g.count < 0) throw ConfigError("agent group count must be >= 0");
    if (s.task_slots < 1) throw ConfigError("task_slots must be >= 1");
    if (s.obstacle_density < 0.0 || s.obstacle_density > 0.3)
        throw ConfigError("obstacle_density must lie in [0, 0.3]");
    if (s.episode_len < 1) throw ConfigError("episode_len must be >= 1");

    const auto& t = cfg.train;
    if (!(t.lr > 0)) throw ConfigError("lr must be > 0");
    if (!(t.gamma > 0 && t.gamma <= 1)) throw ConfigError("gamma must lie in (0, 1]");
    if (t.gae_lambda < 0 || t.gae_lambda > 1) throw ConfigError("gae_lambda must lie in [0, 1]");
    if (t.entropy_coef < 0) throw ConfigError("entropy_coef must be >= 0");
    if (t.sgd_iters < 1) throw ConfigError("sgd_iters must be >= 1");
    if (t.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (t.rollout_fragment < 1) throw ConfigError("rollout_fragment must be >= 1");
    if (!(t.clip_epsilon > 0 && t.clip_epsilon < 1)) throw ConfigError("clip_epsilon must lie in (0, 1)");
    if (t.value_coef < 0) throw ConfigError("value_coef must be >= 0");
    if (t.embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (t.hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (t.blockage_threshold < 1) throw ConfigError("blockage_threshold must be >= 1");
}

Config parse_config_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    Config cfg;
    std::set<std::string> known;

    if (doc.contains("dims")) {
        const auto& d = doc["dims"];
        if (!d.is_array() || d.size() != 3) throw ConfigError("dims must be an array [nx, ny, nz]");
        for (int i = 0; i < 3; ++i) {
            if (!d[i].is_number_integer()) throw ConfigError("dims entries must be integers");
            cfg.scenario.dims[i] = d[i].get<int>();
        }
    }
    known.insert("dims");

    if (doc.contains("agents")) {
        const auto& a = doc["agents"];
        if (!a.is_array() || a.empty()) throw ConfigError("agents must be a non-empty array");
        cfg.scenario.agents.clear();
        for (const auto& g : a) {
            if (!g.is_object() || !g.contains("kind") || !g.contains("count"))
                throw ConfigError("each agents entry needs {\"kind\", \"count\"}");
            for (const auto& [k, _] : g.items())
                if (k != "kind" && k != "count")
                    throw ConfigError("unknown key '" + k + "' in agents entry");
            AgentGroup grp;
            grp.kind = parse_kind(g["kind"].get<std::string>());
            if (!g["count"].is_number_integer()) throw ConfigError("agent count must be an integer");
            grp.count = g["count"].get<int>();
            cfg.scenario.agents.push_back(grp);
        }
    }
    known.insert("agents");

    if (doc.contains("mode")) cfg.scenario.mode = parse_mode(doc["mode"].get<std::string>());
    known.insert("mode");

    for_each_scalar_key(cfg, [&](const char* key, auto& dst) {
        known.insert(key);
        if (doc.contains(key)) assign_number(key, doc[key], dst);
    });

    for (const auto& [k, _] : doc.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

    validate(cfg);
    return cfg;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

void apply_override(Config& cfg, const std::string& key, const std::string& value) {
    auto parse_double = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("override '" + key + "': '" + v + "' is not a number");
        }
    };
    auto parse_int = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            int i = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return i;
        } catch (const std::exception&) {
            throw ConfigError("override '" + key + "': '" + v + "' is not an integer");
        }
    };
    auto parse_bool = [&](const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("override '" + key + "': '" + v + "' is not a boolean");
    };

    if (key == "mode") {
        cfg.scenario.mode = parse_mode(value);
        validate(cfg);
        return;
    }

    bool found = false;
    for_each_scalar_key(cfg, [&](const char* k, auto& dst) {
        if (found || key != k) return;
        found = true;
        using T = std::decay_t<decltype(dst)>;
        if constexpr (std::is_same_v<T, double>)
            dst = parse_double(value);
        else if constexpr (std::is_same_v<T, int>)
            dst = parse_int(value);
        else
            dst = parse_bool(value);
    });
    if (!found) throw ConfigError("unknown override key '" + key + "'");
    validate(cfg);
}

std::string config_to_json(const Config& cfg) {
    ordered_json doc;
    doc["dims"] = cfg.scenario.dims;
    doc["agents"] = ordered_json::array();
    for (const auto& g : cfg.scenario.agents)
        doc["agents"].push_back({{"kind", to_string(g.kind)}, {"count", g.count}});
    doc["task_slots"] = cfg.scenario.task_slots;
    doc["obstacle_density"] = cfg.scenario.obstacle_density;
    doc["mode"] = to_string(cfg.scenario.mode);
    doc["episode_len"] = cfg.scenario.episode_len;
    Config tmp = cfg;
    for_each_scalar_key(tmp, [&](const char* key, auto& dst) {
        if (!doc.contains(key)) doc[key] = dst;
    });
    return doc.dump(2);
}

}  // namespace swarm
