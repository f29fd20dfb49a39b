#include "ippo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

namespace swarm::ippo {

using nlohmann::ordered_json;

Model init_model(const Config& cfg, std::uint64_t seed) {
    Model model;
    model.n_agents = cfg.scenario.n_agents();
    model.m_tasks = cfg.scenario.task_slots;
    model.embed_dim = cfg.train.embed_dim;
    model.hidden_dim = cfg.train.hidden_dim;
    model.use_graphsage = cfg.train.use_graphsage;
    model.concat_obs = cfg.train.concat_obs;
    for (int i = 0; i < model.n_agents; ++i) {
        Rng rng = Rng::derive(seed, "init", static_cast<std::uint64_t>(i));
        AgentNets nets;
        nets.sage = graphnet::init_sage(model.embed_dim, model.obs_dim(), rng);
        nets.mlp = policy::init_params(model.policy_input_dim(), model.hidden_dim, model.m_tasks + 1, rng);
        model.agents.push_back(std::move(nets));
    }
    return model;
}

void RolloutBuffer::reset(int capacity, int obs_dim) {
    obs.resize(capacity, obs_dim);
    nbr.resize(capacity, obs_dim);
    actions.resize(capacity);
    log_probs.resize(capacity);
    rewards.resize(capacity);
    values.resize(capacity);
    dones.assign(static_cast<std::size_t>(capacity), 0);
    advantages.resize(capacity);
    returns.resize(capacity);
    size = 0;
}

void RolloutBuffer::push(const VectorXd& x, const VectorXd& s, int action, double log_prob,
                         double reward, double value, bool done) {
    obs.row(size) = x.transpose();
    nbr.row(size) = s.transpose();
    actions(size) = action;
    log_probs(size) = log_prob;
    rewards(size) = reward;
    values(size) = value;
    dones[static_cast<std::size_t>(size)] = done ? 1 : 0;
    ++size;
}

VectorXd compute_rewards(const world::StepResult& sr, const pathing::CostMatrix& costs,
                         const TrainConfig& t) {
    const int n = static_cast<int>(sr.statuses_at_decision.size());
    VectorXd r = VectorXd::Zero(n);
    const auto& out = sr.outcome;

    for (const auto& [agent, slot] : out.assignments) {
        const double c = costs.normalized(agent, slot);
        r(agent) = -c;
        if (c < t.bonus_threshold) r(agent) += t.eta_bonus;
    }
    for (const auto& conflict : out.conflicts)
        for (const int loser : conflict.losers) r(loser) -= t.lambda_conflict;
    for (const auto& [agent, slot] : out.invalid_requests) r(agent) -= t.lambda_conflict;
    for (const auto& [agent, slot] : out.ineligible_requests) r(agent) -= t.lambda_conflict;
    if (out.waiting_available)
        for (const int agent : out.idle_agents)
            if (sr.statuses_at_decision[static_cast<std::size_t>(agent)] == world::AgentStatus::Idle)
                r(agent) -= t.mu_idle;
    return r;
}

std::pair<VectorXd, VectorXd> compute_gae(const VectorXd& rewards, const VectorXd& values,
                                          std::span<const std::uint8_t> dones, double bootstrap_value,
                                          double gamma, double lambda) {
    const auto len = rewards.size();
    VectorXd advantages(len);
    double last_gae = 0.0;
    for (Eigen::Index i = len - 1; i >= 0; --i) {
        const double nonterminal = dones[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
        const double next_value = (i == len - 1) ? bootstrap_value : values(i + 1);
        const double delta = rewards(i) + gamma * next_value * nonterminal - values(i);
        last_gae = delta + gamma * lambda * nonterminal * last_gae;
        advantages(i) = last_gae;
    }
    return {advantages, advantages + values};
}

AgentGrads zero_grads_like(const AgentNets& nets) {
    AgentGrads g;
    g.sage.dW = MatrixXd::Zero(nets.sage.W.rows(), nets.sage.W.cols());
    g.sage.dW_prime = MatrixXd::Zero(nets.sage.W_prime.rows(), nets.sage.W_prime.cols());
    g.policy = policy::zero_grads_like(nets.mlp.policy);
    g.value = policy::zero_grads_like(nets.mlp.value);
    return g;
}

LossParts ppo_loss(const AgentBatch& batch, const Model& model, const AgentNets& nets,
                   const TrainConfig& t, AgentGrads* grads) {
    const auto B = batch.obs.rows();
    const double invB = 1.0 / static_cast<double>(B);

    const MatrixXd Z = graphnet::sage_forward_batch(batch.obs, batch.nbr, nets.sage, model.use_graphsage);
    MatrixXd input;
    if (model.concat_obs) {
        input.resize(B, batch.obs.cols() + Z.cols());
        input << batch.obs, Z;
    } else {
        input = Z;
    }

    policy::MlpCache pcache, vcache;
    const MatrixXd logits = policy::mlp_forward(input, nets.mlp.policy, &pcache);
    const MatrixXd probs = policy::softmax_rows(logits);
    const VectorXd logp_new = policy::log_prob_rows(logits, batch.actions);
    const VectorXd entropy = policy::entropy_rows(probs);
    const MatrixXd vout = policy::mlp_forward(input, nets.mlp.value, &vcache);

    const VectorXd ratio = (logp_new - batch.old_log_probs).array().exp();
    const VectorXd clipped =
        ratio.array().min(1.0 + t.clip_epsilon).max(1.0 - t.clip_epsilon);
    const VectorXd surr1 = ratio.array() * batch.advantages.array();
    const VectorXd surr2 = clipped.array() * batch.advantages.array();

    LossParts parts;
    parts.policy = -surr1.cwiseMin(surr2).mean();
    const VectorXd vdiff = vout.col(0) - batch.returns;
    parts.value = vdiff.array().square().mean();
    parts.entropy = entropy.mean();
    parts.total = parts.policy + t.value_coef * parts.value - t.entropy_coef * parts.entropy;

    if (!grads) return parts;

    // d(total)/dlogits: surrogate term flows through the unclipped branch
    // only when it attains the min; a saturated clip has zero gradient.
    MatrixXd dlogits = MatrixXd::Zero(B, logits.cols());
    for (Eigen::Index b = 0; b < B; ++b) {
        if (surr1(b) <= surr2(b)) {
            const double coeff = -invB * batch.advantages(b) * ratio(b);
            for (Eigen::Index k = 0; k < logits.cols(); ++k) {
                const double onehot = (k == batch.actions(b)) ? 1.0 : 0.0;
                dlogits(b, k) += coeff * (onehot - probs(b, k));
            }
        }
        // entropy bonus: dH/dl_k = -p_k (ln p_k + H)
        for (Eigen::Index k = 0; k < logits.cols(); ++k) {
            const double p = probs(b, k);
            const double lp = p > 0.0 ? std::log(p) : 0.0;
            dlogits(b, k) += t.entropy_coef * invB * p * (lp + entropy(b));
        }
    }
    const MatrixXd dvout = (2.0 * t.value_coef * invB) * vdiff;

    MatrixXd dinput = policy::mlp_backward(dlogits, input, nets.mlp.policy, pcache, grads->policy);
    dinput += policy::mlp_backward(dvout, input, nets.mlp.value, vcache, grads->value);

    const MatrixXd dZ = model.concat_obs ? dinput.rightCols(Z.cols()).eval() : std::move(dinput);
    graphnet::sage_backward_batch(dZ, Z, batch.obs, batch.nbr, model.use_graphsage, grads->sage);
    return parts;
}

namespace {

template <typename Mat>
void adam_apply(Mat& param, const Mat& grad, AdamState& st, long step, double lr, double beta1,
                double beta2, double eps) {
    if (st.mW.size() == 0) {
        st.mW = MatrixXd::Zero(param.rows(), param.cols());
        st.vW = MatrixXd::Zero(param.rows(), param.cols());
    }
    st.mW = beta1 * st.mW + (1.0 - beta1) * grad;
    st.vW = beta2 * st.vW + (1.0 - beta2) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    param.array() -= lr * (st.mW.array() / bc1) / ((st.vW.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(MatrixXd& param, const MatrixXd& grad, AdamState& st, long step, double lr,
               double beta1, double beta2, double eps) {
    adam_apply(param, grad, st, step, lr, beta1, beta2, eps);
}

namespace {

// Visits every learnable tensor of one agent in a fixed order, paired with
// its gradient. Biases are visited as vectors.
template <typename F>
void for_each_tensor(AgentNets& nets, AgentGrads& grads, F&& f) {
    f(nets.sage.W, grads.sage.dW);
    f(nets.sage.W_prime, grads.sage.dW_prime);
    auto mlp = [&](policy::Mlp& net, policy::MlpGrads& g) {
        f(net.W1, g.dW1);
        f(net.b1, g.db1);
        f(net.W2, g.dW2);
        f(net.b2, g.db2);
        f(net.W3, g.dW3);
        f(net.b3, g.db3);
    };
    mlp(nets.mlp.policy, grads.policy);
    mlp(nets.mlp.value, grads.value);
}

constexpr int kTensorsPerAgent = 14;

int worker_threads() {
    if (const char* env = std::getenv("SWARM_ALLOC_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

}  // namespace

DecisionStep policy_decide(const Model& model, const world::GridWorld& w,
                           const pathing::CostMatrix& costs, std::vector<Rng>* samplers,
                           bool with_values) {
    const int n = model.n_agents;
    DecisionStep d;
    d.obs.reserve(static_cast<std::size_t>(n));

    VectorXd total = VectorXd::Zero(model.obs_dim());
    for (int i = 0; i < n; ++i) {
        d.obs.push_back(graphnet::build_observation(w, i, costs));
        total += d.obs.back();
    }
    d.nbr.resize(static_cast<std::size_t>(n));
    d.actions.resize(static_cast<std::size_t>(n));
    d.log_probs.resize(static_cast<std::size_t>(n));
    d.values.assign(static_cast<std::size_t>(n), 0.0);
    d.entropies.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        d.nbr[ui] = total - d.obs[ui];
        const auto& nets = model.agents[ui];
        VectorXd pre = nets.sage.W * d.obs[ui];
        if (model.use_graphsage) pre += nets.sage.W_prime * d.nbr[ui];
        const VectorXd z = pre.array().tanh();
        VectorXd input;
        if (model.concat_obs) {
            input.resize(d.obs[ui].size() + z.size());
            input << d.obs[ui], z;
        } else {
            input = z;
        }
        const policy::ActionDistribution dist = policy::policy_forward(input, nets.mlp);
        if (samplers) {
            const auto [a, logp] = policy::sample_action(dist, (*samplers)[ui]);
            d.actions[ui] = a;
            d.log_probs[ui] = logp;
        } else {
            d.actions[ui] = policy::argmax_action(dist);
            d.log_probs[ui] = std::log(std::max(dist.probs(d.actions[ui]), 1e-300));
        }
        d.entropies[ui] = policy::dist_entropy(dist);
        if (with_values) d.values[ui] = policy::value_forward(input, nets.mlp);
    }
    return d;
}

TrainResult train(const Config& cfg, long total_steps, std::uint64_t seed) {
    validate(cfg);
    const auto& t = cfg.train;
    Model model = init_model(cfg, seed);
    const int n = model.n_agents;
    const int m = model.m_tasks;

    std::vector<Rng> samplers;
    for (int i = 0; i < n; ++i) samplers.push_back(Rng::derive(seed, "action", static_cast<std::uint64_t>(i)));

    std::vector<std::vector<AdamState>> opt(static_cast<std::size_t>(n),
                                            std::vector<AdamState>(kTensorsPerAgent));
    std::vector<long> opt_step(static_cast<std::size_t>(n), 0);

    std::uint64_t episode_counter = 0;
    world::GridWorld w = world::init_world(cfg.scenario, Rng::derive_seed(seed, "episode", episode_counter));
    long steps_in_episode = 0;
    long completed_in_episode = 0;

    std::vector<RolloutBuffer> buffers(static_cast<std::size_t>(n));
    TrainResult result;
    long env_steps = 0;
    long iteration = 0;

    while (env_steps < total_steps) {
        const int batch = static_cast<int>(std::min<long>(t.batch_size, total_steps - env_steps));
        for (auto& b : buffers) b.reset(batch, model.obs_dim());

        double reward_sum = 0.0, entropy_sum = 0.0;
        int frag_start = 0;
        for (int k = 0; k < batch; ++k) {
            const pathing::CostMatrix costs = pathing::build_cost_matrix(w);
            DecisionStep d = policy_decide(model, w, costs, &samplers, true);
            const world::StepResult sr = world::step(w, d.actions, costs, t.blockage_threshold);
            const VectorXd rewards = compute_rewards(sr, costs, t);

            ++steps_in_episode;
            completed_in_episode += static_cast<long>(sr.completions.size());
            bool done = steps_in_episode >= cfg.scenario.episode_len;
            if (cfg.scenario.mode == TaskMode::Fixed && completed_in_episode >= m) done = true;

            for (int i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                buffers[ui].push(d.obs[ui], d.nbr[ui], d.actions[ui], d.log_probs[ui], rewards(i),
                                 d.values[ui], done);
                reward_sum += rewards(i);
                entropy_sum += d.entropies[ui];
            }
            ++env_steps;

            if (done) {
                ++episode_counter;
                w = world::init_world(cfg.scenario, Rng::derive_seed(seed, "episode", episode_counter));
                steps_in_episode = 0;
                completed_in_episode = 0;
            }

            // Close the fragment: bootstrap with the current state's value
            // unless the episode just ended.
            if ((k + 1) % t.rollout_fragment == 0 || k + 1 == batch) {
                const int frag_len = k + 1 - frag_start;
                std::vector<double> bootstraps(static_cast<std::size_t>(n), 0.0);
                if (!done) {
                    const pathing::CostMatrix boot_costs = pathing::build_cost_matrix(w);
                    const DecisionStep dv = policy_decide(model, w, boot_costs, nullptr, true);
                    bootstraps.assign(dv.values.begin(), dv.values.end());
                }
                for (int i = 0; i < n; ++i) {
                    auto& buf = buffers[static_cast<std::size_t>(i)];
                    const VectorXd fr = buf.rewards.segment(frag_start, frag_len);
                    const VectorXd fv = buf.values.segment(frag_start, frag_len);
                    const std::span<const std::uint8_t> fd{buf.dones.data() + frag_start,
                                                           static_cast<std::size_t>(frag_len)};
                    auto [adv, ret] = compute_gae(fr, fv, fd, bootstraps[static_cast<std::size_t>(i)],
                                                  t.gamma, t.gae_lambda);
                    buf.advantages.segment(frag_start, frag_len) = adv;
                    buf.returns.segment(frag_start, frag_len) = ret;
                }
                frag_start = k + 1;
            }
        }

        ++iteration;

        // Independent updates: each agent trains on its own batch only.
        std::vector<LossParts> agent_losses(static_cast<std::size_t>(n));
        std::vector<std::string> agent_errors(static_cast<std::size_t>(n));
        auto update_agent = [&](int i) {
            const auto ui = static_cast<std::size_t>(i);
            RolloutBuffer& buf = buffers[ui];
            AgentBatch ab;
            ab.obs = buf.obs.topRows(buf.size);
            ab.nbr = buf.nbr.topRows(buf.size);
            ab.actions = buf.actions.head(buf.size);
            ab.old_log_probs = buf.log_probs.head(buf.size);
            ab.returns = buf.returns.head(buf.size);
            ab.advantages = buf.advantages.head(buf.size);
            if (t.normalize_advantages && buf.size > 1) {
                const double mean = ab.advantages.mean();
                const double sd = std::sqrt((ab.advantages.array() - mean).square().sum() /
                                            static_cast<double>(buf.size));
                ab.advantages = (ab.advantages.array() - mean) / (sd + 1e-8);
            }

            LossParts sum;
            for (int it = 0; it < t.sgd_iters; ++it) {
                AgentGrads grads = zero_grads_like(model.agents[ui]);
                const LossParts parts = ppo_loss(ab, model, model.agents[ui], t, &grads);
                if (!std::isfinite(parts.total)) {
                    agent_errors[ui] = "training diverged: non-finite loss for agent " + std::to_string(i);
                    return;
                }
                ++opt_step[ui];
                int tensor = 0;
                for_each_tensor(model.agents[ui], grads, [&](auto& param, const auto& grad) {
                    adam_apply(param, grad, opt[ui][static_cast<std::size_t>(tensor++)], opt_step[ui],
                               t.lr, 0.9, 0.999, 1e-8);
                });
                sum.total += parts.total;
                sum.policy += parts.policy;
                sum.value += parts.value;
                sum.entropy += parts.entropy;
            }
            const double inv = 1.0 / static_cast<double>(t.sgd_iters);
            agent_losses[ui] = {sum.total * inv, sum.policy * inv, sum.value * inv, sum.entropy * inv};
        };

        const int threads = std::min(worker_threads(), n);
        if (threads <= 1) {
            for (int i = 0; i < n; ++i) update_agent(i);
        } else {
            std::vector<std::thread> pool;
            for (int tix = 0; tix < threads; ++tix)
                pool.emplace_back([&, tix]() {
                    for (int i = tix; i < n; i += threads) update_agent(i);
                });
            for (auto& th : pool) th.join();
        }
        for (const auto& err : agent_errors)
            if (!err.empty()) throw RuntimeFailure(err);

        CurveRow row;
        row.iteration = iteration;
        row.env_steps = env_steps;
        row.mean_reward = reward_sum / static_cast<double>(batch * n);
        row.mean_entropy = entropy_sum / static_cast<double>(batch * n);
        double pl = 0.0, vl = 0.0;
        for (const auto& lp : agent_losses) {
            pl += lp.policy;
            vl += lp.value;
        }
        row.mean_policy_loss = pl / n;
        row.mean_value_loss = vl / n;
        result.curve.push_back(row);
    }

    result.model = std::move(model);
    return result;
}

namespace {

ordered_json matrix_to_json(const MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json vector_to_json(const VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

MatrixXd matrix_from_json(const ordered_json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("checkpoint: expected matrix");
    const auto rows = j.size();
    const auto cols = j[0].size();
    MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw ConfigError("checkpoint: ragged matrix");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

VectorXd vector_from_json(const ordered_json& j) {
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

ordered_json mlp_to_json(const policy::Mlp& net) {
    ordered_json j;
    j["W1"] = matrix_to_json(net.W1);
    j["b1"] = vector_to_json(net.b1);
    j["W2"] = matrix_to_json(net.W2);
    j["b2"] = vector_to_json(net.b2);
    j["W3"] = matrix_to_json(net.W3);
    j["b3"] = vector_to_json(net.b3);
    return j;
}

policy::Mlp mlp_from_json(const ordered_json& j) {
    policy::Mlp net;
    net.W1 = matrix_from_json(j.at("W1"));
    net.b1 = vector_from_json(j.at("b1"));
    net.W2 = matrix_from_json(j.at("W2"));
    net.b2 = vector_from_json(j.at("b2"));
    net.W3 = matrix_from_json(j.at("W3"));
    net.b3 = vector_from_json(j.at("b3"));
    return net;
}

}  // namespace

std::string model_to_json(const Model& model) {
    ordered_json doc;
    doc["version"] = model.version;
    doc["n_agents"] = model.n_agents;
    doc["m_tasks"] = model.m_tasks;
    doc["embed_dim"] = model.embed_dim;
    doc["hidden_dim"] = model.hidden_dim;
    doc["embedding_mode"] = model.use_graphsage ? "sage" : "local";
    doc["policy_input"] = model.concat_obs ? "concat" : "embedding";
    doc["agents"] = ordered_json::array();
    for (const auto& nets : model.agents) {
        ordered_json a;
        a["sage"] = {{"W", matrix_to_json(nets.sage.W)}, {"W_prime", matrix_to_json(nets.sage.W_prime)}};
        a["policy"] = mlp_to_json(nets.mlp.policy);
        a["value"] = mlp_to_json(nets.mlp.value);
        doc["agents"].push_back(std::move(a));
    }
    return doc.dump(1);
}

Model model_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid checkpoint JSON: ") + e.what());
    }
    Model model;
    try {
        model.version = doc.at("version").get<int>();
        model.n_agents = doc.at("n_agents").get<int>();
        model.m_tasks = doc.at("m_tasks").get<int>();
        model.embed_dim = doc.at("embed_dim").get<int>();
        model.hidden_dim = doc.at("hidden_dim").get<int>();
        model.use_graphsage = doc.at("embedding_mode").get<std::string>() == "sage";
        model.concat_obs = doc.at("policy_input").get<std::string>() == "concat";
        for (const auto& a : doc.at("agents")) {
            AgentNets nets;
            nets.sage.W = matrix_from_json(a.at("sage").at("W"));
            nets.sage.W_prime = matrix_from_json(a.at("sage").at("W_prime"));
            nets.mlp.policy = mlp_from_json(a.at("policy"));
            nets.mlp.value = mlp_from_json(a.at("value"));
            model.agents.push_back(std::move(nets));
        }
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
    if (static_cast<int>(model.agents.size()) != model.n_agents)
        throw ConfigError("malformed checkpoint: agent count mismatch");
    return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write checkpoint '" + path + "'");
    out << model_to_json(model) << '\n';
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void write_curve_csv(const std::vector<CurveRow>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write curve CSV '" + path + "'");
    out << "iteration,env_steps,mean_reward,mean_entropy,mean_policy_loss,mean_value_loss\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& row : curve)
        out << row.iteration << ',' << row.env_steps << ',' << fmt(row.mean_reward) << ','
            << fmt(row.mean_entropy) << ',' << fmt(row.mean_policy_loss) << ','
            << fmt(row.mean_value_loss) << '\n';
}

}  // namespace swarm::ippo
