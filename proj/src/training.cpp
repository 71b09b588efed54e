#include "dcs/training.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dcs/version.hpp"

namespace dcs {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractViolation(std::string("train config: ") + what);
  };
  require(n >= 1 && k >= 1, "n and k must be at least 1");
  require(episodes >= 1, "episodes must be positive");
  require(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= 1,
          "epsilon must lie in [0, 1]");
  require(epsilon_end <= epsilon_start, "epsilon_end must not exceed epsilon_start");
  require(probe_episodes >= 1 || epsilon_decay_steps >= 1, "probe_episodes must be positive");
  require(gamma > 0 && gamma <= 1, "gamma must lie in (0, 1]");
  require(replay_capacity >= 1 && batch_size >= 1 && target_sync >= 1,
          "replay, batch and sync sizes must be positive");
  require(batch_size <= replay_capacity, "batch_size must not exceed replay_capacity");
  require(learning_rate > 0, "learning_rate must be positive");
  require(hidden >= 1 && mlp_hidden >= 1, "network sizes must be positive");
  require(episode_budget >= 1, "episode_budget must be positive");
  require(repeats >= 1, "repeats must be positive");
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"learner", c.learner == LearnerKind::Gcrl ? "gcrl" : "rl"},
          {"n", c.n},
          {"k", c.k},
          {"episodes", c.episodes},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_decay_steps", c.epsilon_decay_steps},
          {"probe_episodes", c.probe_episodes},
          {"epsilon_per_episode", c.epsilon_per_episode},
          {"gamma", c.gamma},
          {"replay_capacity", c.replay_capacity},
          {"batch_size", c.batch_size},
          {"target_sync", c.target_sync},
          {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm},
          {"hops", c.hops},
          {"hidden", c.hidden},
          {"mlp_hidden", c.mlp_hidden},
          {"aggregation", c.aggregation == neural::Aggregation::Normalized ? "normalized" : "sum"},
          {"episode_budget", c.episode_budget},
          {"seed", c.seed},
          {"repeats", c.repeats}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractViolation("train config: expected a JSON object");
  TrainConfig c;
  const nlohmann::json defaults = config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw ContractViolation("train config: unknown key " + key);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    if (j.contains("learner")) {
      const auto l = j.at("learner").get<std::string>();
      if (l != "gcrl" && l != "rl") throw ContractViolation("train config: unknown learner " + l);
      c.learner = l == "gcrl" ? LearnerKind::Gcrl : LearnerKind::Baseline;
    }
    if (j.contains("aggregation")) {
      const auto a = j.at("aggregation").get<std::string>();
      if (a != "normalized" && a != "sum") {
        throw ContractViolation("train config: unknown aggregation " + a);
      }
      c.aggregation = a == "sum" ? neural::Aggregation::Sum : neural::Aggregation::Normalized;
    }
    get("n", c.n);
    get("k", c.k);
    get("episodes", c.episodes);
    get("epsilon_start", c.epsilon_start);
    get("epsilon_end", c.epsilon_end);
    get("epsilon_decay_steps", c.epsilon_decay_steps);
    get("probe_episodes", c.probe_episodes);
    get("epsilon_per_episode", c.epsilon_per_episode);
    get("gamma", c.gamma);
    get("replay_capacity", c.replay_capacity);
    get("batch_size", c.batch_size);
    get("target_sync", c.target_sync);
    get("learning_rate", c.learning_rate);
    get("max_grad_norm", c.max_grad_norm);
    get("hops", c.hops);
    get("hidden", c.hidden);
    get("mlp_hidden", c.mlp_hidden);
    get("episode_budget", c.episode_budget);
    get("seed", c.seed);
    get("repeats", c.repeats);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const TrainConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

double epsilon_at(std::size_t step, double start, double end, std::size_t decay_steps) {
  if (decay_steps == 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

double auc(const std::vector<EpisodeLog>& log) {
  double sum = 0;
  for (const auto& e : log) sum += e.episode_return;
  return sum;
}

namespace {

using Vector = Eigen::VectorXd;

// Network-specific parts of the DQN loop.
struct GnnLearner {
  using Net = GnnModel;
  using Observation = std::shared_ptr<const GraphEncoding>;
  using Cache = neural::GnnCache<double>;

  std::size_t hops;
  const NormalizedAlphabet* alphabet;
  IncrementalGraphBuilder builder;

  GnnLearner(std::size_t h, const NormalizedAlphabet& a) : hops(h), alphabet(&a), builder(a) {}

  void begin_episode() { builder = IncrementalGraphBuilder(*alphabet); }
  Observation observe(const ExplorationState& es) {
    return std::make_shared<const GraphEncoding>(builder.update(es));
  }
  Vector q(const Net& net, const Observation& obs, Cache* cache) const {
    return graph_qvalues(net, *obs, hops, cache);
  }
  static void backward(const Net& net, const Cache& cache, const Vector& dq, Net& grad) {
    neural::gnn_backward(net, cache, dq, grad);
  }
  Snapshot snapshot(const Net& net, std::uint64_t seed) const {
    return GnnWeights{net, alphabet->labels(), seed};
  }
};

struct BaselineLearner {
  using Net = BaselineQNet;
  using Observation = std::shared_ptr<const Eigen::MatrixXd>;
  using Cache = neural::MlpCache<double>;

  const NormalizedAlphabet* alphabet;

  explicit BaselineLearner(const NormalizedAlphabet& a) : alphabet(&a) {}

  void begin_episode() {}
  Observation observe(const ExplorationState& es) {
    return std::make_shared<const Eigen::MatrixXd>(frontier_phi(es, *alphabet));
  }
  Vector q(const Net& net, const Observation& obs, Cache* cache) const {
    if (obs->rows() == 0) return {};
    return neural::mlp_forward(net, *obs, cache);
  }
  static void backward(const Net& net, const Cache& cache, const Vector& dq, Net& grad) {
    neural::mlp_backward(net, cache, dq, grad);
  }
  Snapshot snapshot(const Net& net, std::uint64_t seed) const {
    return BaselineWeights{net, alphabet->labels(), seed};
  }
};

template <typename Observation>
struct ReplayItem {
  Observation state;
  std::size_t action = 0;
  double reward = -1.0;
  Observation next;  // null when terminal
  // Max target-network Q of `next`, valid while target_version matches.
  double target_max = 0;
  std::size_t target_version = std::numeric_limits<std::size_t>::max();
};

template <typename Model>
double checksum(const Model& m) {
  double s = 0;
  m.for_each_block([&](const std::string&, const auto& b) { s += b.sum(); });
  return s;
}

std::size_t estimate_horizon(const CompositeModel& model, const TrainConfig& c) {
  if (c.epsilon_decay_steps > 0) return c.epsilon_decay_steps;
  Rng probe_rng(c.seed ^ 0x9e3779b97f4a7c15ull);
  RandomPolicy random;
  std::size_t total = 0;
  for (std::size_t i = 0; i < c.probe_episodes; ++i) {
    ExplorationState es(model);
    total += run_dcs(es, random, c.episode_budget, probe_rng).expansions;
  }
  const double mean = static_cast<double>(total) / static_cast<double>(c.probe_episodes);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(mean * c.episodes)));
}

template <typename Learner>
TrainResult run_training(Learner learner, typename Learner::Net online, const CompositeModel& model,
                         const TrainConfig& c, Rng& rng,
                         const std::optional<std::filesystem::path>& out_dir,
                         const TrainHooks& hooks) {
  using Net = typename Learner::Net;
  using Observation = typename Learner::Observation;
  using Item = ReplayItem<Observation>;

  TrainResult result;
  result.epsilon_decay_steps = estimate_horizon(model, c);
  Net target = online;
  std::size_t target_version = 0;
  neural::Adam<Net> adam(online, {c.learning_rate, 0.9, 0.999, 1e-8, c.max_grad_norm});
  ReplayBuffer<Item> replay(c.replay_capacity);
  std::size_t env_steps = 0;

  auto target_max = [&](Item& item) {
    if (!item.next) return 0.0;
    if (item.target_version != target_version) {
      const Vector q = learner.q(target, item.next, nullptr);
      item.target_max = q.size() == 0 ? 0.0 : q.maxCoeff();
      item.target_version = target_version;
    }
    return item.target_max;
  };

  auto gradient_step = [&]() {
    Net grad = online.zeros_like();
    double loss = 0;
    const double scale = 1.0 / static_cast<double>(c.batch_size);
    const double used_target = checksum(target);
    for (std::size_t b = 0; b < c.batch_size; ++b) {
      Item& item = replay.sample(rng);
      const double y = item.reward + c.gamma * target_max(item);
      typename Learner::Cache cache;
      const Vector q = learner.q(online, item.state, &cache);
      const double err = q[static_cast<Eigen::Index>(item.action)] - y;
      loss += err * err * scale;
      Vector dq = Vector::Zero(q.size());
      dq[static_cast<Eigen::Index>(item.action)] = 2.0 * err * scale;
      Learner::backward(online, cache, dq, grad);
    }
    if (!std::isfinite(loss)) {
      throw TrainingError("non-finite loss at gradient step " +
                          std::to_string(result.gradient_steps + 1));
    }
    adam.step(online, grad);
    ++result.gradient_steps;
    GradientStepInfo info;
    info.step = result.gradient_steps;
    info.target_checksum = used_target;
    info.replay_size = replay.size();
    if (result.gradient_steps % c.target_sync == 0) {
      target = online;
      ++target_version;
      info.target_synced = true;
    }
    info.online_checksum = checksum(online);
    if (hooks.on_gradient_step) hooks.on_gradient_step(info);
    return loss;
  };

  for (std::size_t episode = 1; episode <= c.episodes; ++episode) {
    ExplorationState es(model);
    learner.begin_episode();
    EpisodeLog entry;
    entry.episode = episode;
    auto current_epsilon = [&] {
      if (c.epsilon_per_episode) {
        return epsilon_at(episode - 1, c.epsilon_start, c.epsilon_end, c.episodes - 1);
      }
      return epsilon_at(env_steps, c.epsilon_start, c.epsilon_end, result.epsilon_decay_steps);
    };
    entry.epsilon = current_epsilon();
    double loss_sum = 0;
    std::size_t loss_count = 0;
    Observation obs = learner.observe(es);
    while (!es.decided() && !es.frontier().empty() && es.expansions() < c.episode_budget) {
      const double eps = current_epsilon();
      const Vector q = learner.q(online, obs, nullptr);
      const std::size_t action = epsilon_greedy(q, eps, rng);
      es.expand(es.frontier()[action]);
      ++env_steps;
      Item item;
      item.state = obs;
      item.action = action;
      if (!es.decided() && !es.frontier().empty()) {
        obs = learner.observe(es);
        item.next = obs;
      }
      replay.push(std::move(item));
      if (replay.size() >= c.batch_size) {
        loss_sum += gradient_step();
        ++loss_count;
      }
    }
    entry.expansions = es.expansions();
    entry.episode_return = -static_cast<double>(es.expansions());
    entry.loss_mean = loss_count ? loss_sum / static_cast<double>(loss_count)
                                 : std::numeric_limits<double>::quiet_NaN();
    result.log.push_back(entry);
    result.snapshots.push_back(learner.snapshot(online, c.seed));
    if (out_dir) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(3) << std::setfill('0') << episode << ".json";
      const auto path = *out_dir / name.str();
      std::visit([&](const auto& w) { save_weights(path, w); }, result.snapshots.back());
      result.snapshot_files.push_back(path);
    }
    spdlog::debug("episode {} expansions {} epsilon {:.3f} loss {:.4f}", episode, entry.expansions,
                  entry.epsilon, entry.loss_mean);
  }
  return result;
}

}  // namespace

TrainResult train(Domain domain, const TrainConfig& c,
                  const std::optional<std::filesystem::path>& out_dir, const TrainHooks& hooks) {
  c.validate();
  const CompositeModel model = generate_benchmark({domain, c.n, c.k});
  const NormalizedAlphabet alphabet(model);
  if (out_dir) std::filesystem::create_directories(*out_dir);
  Rng rng(c.seed);
  const auto hidden = static_cast<Eigen::Index>(c.hidden);
  const auto mlp_hidden = static_cast<Eigen::Index>(c.mlp_hidden);
  if (c.learner == LearnerKind::Gcrl) {
    auto net = GnnModel::random(kNodeFeatureDim, hidden,
                                static_cast<Eigen::Index>(edge_feature_dim(alphabet.size())),
                                mlp_hidden, rng, c.aggregation);
    return run_training(GnnLearner(c.hops, alphabet), std::move(net), model, c, rng, out_dir,
                        hooks);
  }
  auto net = BaselineQNet::random(static_cast<Eigen::Index>(phi_dim(alphabet.size())), mlp_hidden,
                                  rng);
  return run_training(BaselineLearner(alphabet), std::move(net), model, c, rng, out_dir, hooks);
}

void write_training_csv(std::ostream& out, const std::vector<EpisodeLog>& log, std::uint64_t seed,
                        const std::string& hash) {
  out << "# tool_version=" << kToolVersion << " seed=" << seed << " config_hash=" << hash
      << " weights_format=" << kWeightsFormatVersion << '\n';
  out << "episode,expansions,return,epsilon,loss_mean\n";
  for (const auto& e : log) {
    out << e.episode << ',' << e.expansions << ',' << e.episode_return << ','
        << std::setprecision(6) << e.epsilon << ',';
    if (std::isnan(e.loss_mean)) {
      out << "nan";
    } else {
      out << std::setprecision(9) << e.loss_mean;
    }
    out << '\n';
  }
}

std::unique_ptr<ExplorationPolicy> snapshot_policy(const Snapshot& s, std::size_t hops) {
  if (const auto* g = std::get_if<GnnWeights>(&s)) return std::make_unique<GcrlPolicy>(*g, hops);
  return std::make_unique<BaselineRlPolicy>(std::get<BaselineWeights>(s));
}

GridResult eval_grid(const PolicyFactory& factory, const std::string& policy_id, Domain domain,
                     int max_n, int max_k, std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw ContractViolation("eval_grid: budget must be at least 1");
  if (max_n < 1 || max_k < 1) throw ContractViolation("eval_grid: grid bounds must be positive");
  GridResult result;
  std::vector<std::vector<char>> solved(max_n + 1, std::vector<char>(max_k + 1, 0));
  for (int sum = 2; sum <= max_n + max_k; ++sum) {
    for (int n = 1; n <= max_n; ++n) {
      const int k = sum - n;
      if (k < 1 || k > max_k) continue;
      if ((n > 1 && !solved[n - 1][k]) || (k > 1 && !solved[n][k - 1])) continue;
      EvalRecord rec;
      rec.domain = to_string(domain);
      rec.n = n;
      rec.k = k;
      rec.policy = policy_id;
      rec.seed = seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const CompositeModel model = generate_benchmark({domain, n, k});
        auto policy = factory();
        const Verdict v = run_dcs(model, *policy, budget, seed);
        rec.solved = v.decided;
        rec.expansions = v.expansions;
      } catch (const std::bad_alloc&) {
        rec.solved = false;
        rec.expansions = budget;
      }
      rec.millis =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      solved[n][k] = rec.solved;
      result.solved += rec.solved;
      spdlog::debug("{}({},{}) {} solved={} expansions={}", rec.domain, n, k, policy_id, rec.solved,
                    rec.expansions);
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRecord>& records, std::uint64_t seed) {
  out << "# tool_version=" << kToolVersion << " seed=" << seed << '\n';
  out << "domain,n,k,policy,solved,expansions,millis,seed\n";
  for (const auto& r : records) {
    out << r.domain << ',' << r.n << ',' << r.k << ',' << r.policy << ',' << (r.solved ? 1 : 0)
        << ',' << r.expansions << ',' << std::fixed << std::setprecision(3) << r.millis
        << std::defaultfloat << ',' << r.seed << '\n';
  }
}

std::size_t best_snapshot(const std::vector<SnapshotScore>& scores) {
  if (scores.empty()) throw ContractViolation("best_snapshot: no snapshots");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.solved > b.solved || (a.solved == b.solved && a.expansions <= b.expansions)) best = i;
  }
  return best;
}

std::vector<BenchmarkSpec> validation_set(Domain domain) {
  return {{domain, 3, 3}, {domain, 4, 4}, {domain, 5, 5}};
}

SelectionResult select_snapshot(const std::vector<Snapshot>& snapshots,
                                const std::vector<BenchmarkSpec>& validation, std::size_t budget,
                                std::size_t hops, std::uint64_t seed) {
  if (snapshots.empty()) throw ContractViolation("select_snapshot: no snapshots");
  if (budget < 1) throw ContractViolation("select_snapshot: budget must be at least 1");
  std::vector<CompositeModel> models;
  for (const auto& spec : validation) models.push_back(generate_benchmark(spec));

  SelectionResult result;
  result.scores.resize(snapshots.size());
  std::optional<SnapshotScore> best;
  // Later snapshots win ties, so scanning backwards lets an earlier one be
  // abandoned as soon as it cannot strictly beat the best so far.
  for (std::size_t idx = snapshots.size(); idx-- > 0;) {
    SnapshotScore score;
    bool abandoned = false;
    for (std::size_t i = 0; i < models.size(); ++i) {
      // With no slack left every remaining instance must be solved within
      // the expansions that still beat the best so far.
      bool must_beat = false;
      std::size_t cap = budget;
      if (best) {
        const std::size_t reachable = score.solved + (models.size() - i);
        if (reachable < best->solved ||
            (reachable == best->solved && score.expansions >= best->expansions)) {
          abandoned = true;
          break;
        }
        if (reachable == best->solved) {
          must_beat = true;
          cap = std::min(budget, best->expansions - score.expansions - 1);
        }
      }
      auto policy = snapshot_policy(snapshots[idx], hops);
      const Verdict v = run_dcs(models[i], *policy, std::max<std::size_t>(cap, 1), seed);
      if (must_beat && (!v.decided || v.expansions > cap)) {
        abandoned = true;
        break;
      }
      score.solved += v.decided;
      score.expansions += v.expansions;
    }
    if (abandoned) continue;
    result.scores[idx] = score;
    if (!best || score.solved > best->solved ||
        (score.solved == best->solved && score.expansions < best->expansions)) {
      best = score;
      result.index = idx;
    }
  }
  return result;
}

}  // namespace dcs
