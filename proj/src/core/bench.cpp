#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "alloc.hpp"
#include "errors.hpp"

namespace swarm::bench {

AllocatorKind allocator_from_string(const std::string& name) {
    if (name == "policy") return AllocatorKind::Policy;
    if (name == "hungarian") return AllocatorKind::Hungarian;
    if (name == "greedy") return AllocatorKind::Greedy;
    if (name == "random") return AllocatorKind::Random;
    throw ConfigError("unknown allocator '" + name + "'");
}

std::string to_string(AllocatorKind kind) {
    switch (kind) {
        case AllocatorKind::Policy: return "policy";
        case AllocatorKind::Hungarian: return "hungarian";
        case AllocatorKind::Greedy: return "greedy";
        case AllocatorKind::Random: return "random";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Builds one round of requests for a centralized allocator: assignable agents
// (idle or just completed) are matched to Waiting slots on the raw cost
// matrix; unreachable pairs are never dispatched. Returns the solve time.
double centralized_requests(const Config& cfg, AllocatorKind kind, const world::GridWorld& w,
                            const pathing::CostMatrix& costs, Rng& alloc_rng,
                            std::vector<int>& requests) {
    const int n = static_cast<int>(w.agents.size());
    const int m = static_cast<int>(w.tasks.size());
    std::vector<int> free_agents, waiting_slots;
    for (int i = 0; i < n; ++i) {
        const auto s = w.agents[static_cast<std::size_t>(i)].status;
        if (s == world::AgentStatus::Idle || s == world::AgentStatus::Complete)
            free_agents.push_back(i);
    }
    for (int j = 0; j < m; ++j)
        if (w.tasks[static_cast<std::size_t>(j)].status == world::TaskStatus::Waiting)
            waiting_slots.push_back(j);
    if (free_agents.empty() || waiting_slots.empty()) return 0.0;

    // Drop agents with no reachable waiting task; penalize (but keep finite)
    // the remaining unreachable pairs so the solvers avoid them.
    std::vector<int> rows;
    for (const int i : free_agents) {
        const bool any = std::any_of(waiting_slots.begin(), waiting_slots.end(),
                                     [&](int j) { return costs.is_reachable(i, j); });
        if (any) rows.push_back(i);
    }
    if (rows.empty()) return 0.0;

    const double unreachable_penalty =
        10.0 * costs.c_max * static_cast<double>(std::max(n, m)) + 1.0;
    Eigen::MatrixXd sub(rows.size(), waiting_slots.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < waiting_slots.size(); ++b)
            sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                costs.is_reachable(rows[a], waiting_slots[b]) ? costs.raw(rows[a], waiting_slots[b])
                                                              : unreachable_penalty;

    const auto t0 = Clock::now();
    alloc::Assignment pairs;
    switch (kind) {
        case AllocatorKind::Hungarian: pairs = alloc::hungarian(sub); break;
        case AllocatorKind::Greedy: pairs = alloc::greedy_assign(sub); break;
        case AllocatorKind::Random:
            pairs = alloc::random_assign(static_cast<int>(rows.size()),
                                         static_cast<int>(waiting_slots.size()), alloc_rng);
            break;
        case AllocatorKind::Policy: break;
    }
    const double dt = seconds_since(t0);

    for (const auto& [a, b] : pairs) {
        const int agent = rows[static_cast<std::size_t>(a)];
        const int slot = waiting_slots[static_cast<std::size_t>(b)];
        if (!costs.is_reachable(agent, slot)) continue;
        requests[static_cast<std::size_t>(agent)] = slot + 1;
    }
    return dt;
}

}  // namespace

MetricsRecord run_scenario(const Config& cfg, AllocatorKind kind, const ippo::Model* model,
                           int episodes, std::uint64_t seed, RunAudit* audit) {
    validate(cfg);
    if (kind == AllocatorKind::Policy) {
        if (!model) throw ConfigError("policy allocator requires a model");
        if (model->n_agents != cfg.scenario.n_agents() || model->m_tasks != cfg.scenario.task_slots)
            throw ConfigError("model shape does not match scenario (agents/tasks)");
    }

    MetricsRecord rec;
    rec.episodes = episodes;
    long conflict_free_rounds = 0;
    long timed_rounds = 0;
    long total_steps = 0;
    double global_reward_sum = 0.0;

    const int n = cfg.scenario.n_agents();
    const int m = cfg.scenario.task_slots;

    for (int ep = 0; ep < episodes; ++ep) {
        const std::uint64_t ep_seed = Rng::derive_seed(seed, "bench-episode", static_cast<std::uint64_t>(ep));
        if (audit) audit->episode_seeds.push_back(ep_seed);
        world::GridWorld w = world::init_world(cfg.scenario, ep_seed);
        Rng alloc_rng = Rng::derive(seed, "allocator", static_cast<std::uint64_t>(ep));

        long steps = 0;
        long completed = 0;
        while (true) {
            const pathing::CostMatrix costs = pathing::build_cost_matrix(w);
            std::vector<int> requests(static_cast<std::size_t>(n), 0);

            if (kind == AllocatorKind::Policy) {
                const auto t0 = Clock::now();
                const ippo::DecisionStep d = ippo::policy_decide(*model, w, costs, nullptr, false);
                requests = d.actions;
                // The resolution pass below is the timed decision component;
                // world::step re-runs it for effect.
                std::vector<std::uint8_t> eligible(static_cast<std::size_t>(n)), waiting(static_cast<std::size_t>(m));
                for (int i = 0; i < n; ++i)
                    eligible[static_cast<std::size_t>(i)] = !w.agents[static_cast<std::size_t>(i)].is_assigned();
                for (int j = 0; j < m; ++j)
                    waiting[static_cast<std::size_t>(j)] =
                        w.tasks[static_cast<std::size_t>(j)].status == world::TaskStatus::Waiting;
                (void)alloc::resolve_conflicts(requests, costs.normalized, eligible, waiting);
                rec.alloc_time_total_s += seconds_since(t0);
                ++timed_rounds;
            } else {
                const double dt = centralized_requests(cfg, kind, w, costs, alloc_rng, requests);
                const bool invoked = std::any_of(requests.begin(), requests.end(), [](int r) { return r > 0; });
                if (invoked) {
                    rec.alloc_time_total_s += dt;
                    ++timed_rounds;
                }
            }

            const world::StepResult sr = world::step(w, requests, costs, cfg.train.blockage_threshold);
            const Eigen::VectorXd rewards = ippo::compute_rewards(sr, costs, cfg.train);
            global_reward_sum += rewards.sum();

            if (sr.outcome.request_count() > 0) {
                ++rec.decision_rounds;
                if (sr.outcome.conflict_free()) ++conflict_free_rounds;
            }
            for (const auto& c : sr.completions) {
                rec.total_travel_cost += c.cost_s;
                ++rec.tasks_completed;
                ++completed;
            }
            if (audit) {
                audit->assignments.insert(audit->assignments.end(), sr.assignments.begin(),
                                          sr.assignments.end());
                audit->completions.insert(audit->completions.end(), sr.completions.begin(),
                                          sr.completions.end());
            }

            ++steps;
            ++total_steps;
            if (steps >= cfg.scenario.episode_len) break;
            if (cfg.scenario.mode == TaskMode::Fixed && completed >= m) break;
        }
    }

    rec.success_rate = rec.decision_rounds > 0
                           ? static_cast<double>(conflict_free_rounds) / static_cast<double>(rec.decision_rounds)
                           : 1.0;
    rec.alloc_time_mean_s = timed_rounds > 0 ? rec.alloc_time_total_s / static_cast<double>(timed_rounds) : 0.0;
    rec.mean_global_reward = total_steps > 0 ? global_reward_sum / static_cast<double>(total_steps) : 0.0;
    return rec;
}

ScenarioConfig scale_agents(const ScenarioConfig& base, int n) {
    ScenarioConfig out = base;
    const int total = base.n_agents();
    if (n == total) return out;
    int assigned = 0;
    for (std::size_t g = 0; g < out.agents.size(); ++g) {
        const double share = static_cast<double>(base.agents[g].count) / static_cast<double>(total);
        out.agents[g].count = static_cast<int>(std::floor(share * n + 0.5));
        assigned += out.agents[g].count;
    }
    out.agents[0].count += n - assigned;  // absorb rounding drift
    if (out.agents[0].count < 0) throw ConfigError("cannot scale agent mix to requested count");
    return out;
}

AblationPair ablation_no_graphsage(const Config& cfg, const ippo::Model& full,
                                   const ippo::Model& ablated, int episodes, std::uint64_t seed) {
    AblationPair pair;
    pair.full = run_scenario(cfg, AllocatorKind::Policy, &full, episodes, seed);
    pair.ablated = run_scenario(cfg, AllocatorKind::Policy, &ablated, episodes, seed);
    return pair;
}

namespace {

struct CellStats {
    double mean = 0.0;
    double sd = 0.0;
};

CellStats stats(const std::vector<double>& xs) {
    CellStats cs;
    if (xs.empty()) return cs;
    for (const double x : xs) cs.mean += x;
    cs.mean /= static_cast<double>(xs.size());
    for (const double x : xs) cs.sd += (x - cs.mean) * (x - cs.mean);
    cs.sd = std::sqrt(cs.sd / static_cast<double>(xs.size()));
    return cs;
}

std::string cell(const CellStats& cs) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", cs.mean, cs.sd);
    return buf;
}

}  // namespace

void compare_table(const Config& base, std::span<const int> agent_counts,
                   std::span<const AllocatorKind> allocators, std::span<const std::uint64_t> seeds,
                   int episodes,
                   const std::function<const ippo::Model*(int n_agents)>& model_for,
                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream runs(fs::path(out_dir) / "runs.csv", std::ios::binary);
    if (!runs) throw RuntimeFailure("cannot write runs.csv");
    runs << "allocator,n_agents,m_tasks,mode,seed,total_travel_cost,success_rate,"
            "alloc_time_mean_s,tasks_completed,mean_global_reward\n";

    // metric -> allocator row -> column cells
    const int A = static_cast<int>(allocators.size());
    const int C = static_cast<int>(agent_counts.size());
    std::vector<std::vector<std::vector<double>>> cost(A, std::vector<std::vector<double>>(C)),
        success(A, std::vector<std::vector<double>>(C)), atime(A, std::vector<std::vector<double>>(C));

    for (int c = 0; c < C; ++c) {
        Config cfg = base;
        cfg.scenario = scale_agents(base.scenario, agent_counts[static_cast<std::size_t>(c)]);
        for (int a = 0; a < A; ++a) {
            const AllocatorKind kind = allocators[static_cast<std::size_t>(a)];
            const ippo::Model* model =
                kind == AllocatorKind::Policy ? model_for(cfg.scenario.n_agents()) : nullptr;
            for (const std::uint64_t seed : seeds) {
                const MetricsRecord rec = run_scenario(cfg, kind, model, episodes, seed);
                cost[a][c].push_back(rec.total_travel_cost);
                success[a][c].push_back(rec.success_rate);
                atime[a][c].push_back(rec.alloc_time_mean_s);
                runs << to_string(kind) << ',' << cfg.scenario.n_agents() << ','
                     << cfg.scenario.task_slots << ',' << to_string(cfg.scenario.mode) << ',' << seed
                     << ',' << format_double(rec.total_travel_cost) << ','
                     << format_double(rec.success_rate) << ',' << format_double(rec.alloc_time_mean_s)
                     << ',' << rec.tasks_completed << ',' << format_double(rec.mean_global_reward)
                     << '\n';
            }
        }
    }

    auto write_table = [&](const std::string& name,
                           const std::vector<std::vector<std::vector<double>>>& data) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw RuntimeFailure("cannot write " + name);
        out << "allocator";
        for (const int n : agent_counts) out << ',' << n;
        out << '\n';
        for (int a = 0; a < A; ++a) {
            out << to_string(allocators[static_cast<std::size_t>(a)]);
            for (int c = 0; c < C; ++c) out << ',' << cell(stats(data[a][c]));
            out << '\n';
        }
    };
    write_table("table_cost.csv", cost);
    write_table("table_success.csv", success);
    write_table("table_alloc_time.csv", atime);
}

}  // namespace swarm::bench

namespace swarm::ippo {

bench::MetricsRecord evaluate(const Model& model, const Config& cfg, int episodes, std::uint64_t seed) {
    return bench::run_scenario(cfg, bench::AllocatorKind::Policy, &model, episodes, seed);
}

}  // namespace swarm::ippo
