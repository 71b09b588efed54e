// dcs: generate benchmark models, run synthesis, train, select and evaluate.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include "dcs/benchmarks.hpp"
#include "dcs/model_io.hpp"
#include "dcs/policies.hpp"
#include "dcs/synthesis.hpp"
#include "dcs/training.hpp"
#include "dcs/version.hpp"

namespace fs = std::filesystem;
using namespace dcs;

namespace {

/// Bad flags, missing inputs or incompatible weights: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Domain domain_flag(const std::string& name) {
  const auto d = parse_domain(name);
  if (!d) throw UsageError("unknown domain: " + name);
  return *d;
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw UsageError("no such file: " + p.string());
}

PolicySpec policy_flag(const std::string& text) {
  PolicySpec spec;
  try {
    spec = parse_policy_spec(text);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  if (!spec.weights_path.empty()) require_file(spec.weights_path);
  return spec;
}

std::unique_ptr<ExplorationPolicy> instantiate(const PolicySpec& spec) {
  try {
    return make_policy(spec);
  } catch (const WeightsError& e) {
    throw UsageError(e.what());
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write " + p.string());
  return out;
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    open_out(path) << j.dump(2) << '\n';
  }
}

struct GenerateArgs {
  std::string domain;
  int n = 1, k = 1;
  std::string out;
};

void cmd_generate(const GenerateArgs& a) {
  const BenchmarkSpec spec{domain_flag(a.domain), a.n, a.k};
  if (a.n < 1 || a.k < 1) throw UsageError("--n and --k must be positive");
  const auto text = serialize_model(generate_benchmark(spec));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    open_out(a.out) << text;
    spdlog::info("wrote {}", a.out);
  }
}

struct SynthArgs {
  std::string model, policy = "ra", json_out;
  std::size_t budget = kDefaultBudget;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a) {
  require_file(a.model);
  const auto spec = policy_flag(a.policy);
  const auto model = load_model_file(a.model);
  auto policy = instantiate(spec);
  Verdict v;
  try {
    v = run_dcs(model, *policy, a.budget, a.seed);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  auto j = verdict_to_json(v, a.seed, a.policy, fs::path(a.model).filename().string());
  j["budget"] = a.budget;
  emit_json(j, a.json_out);
}

struct OracleArgs {
  std::string model, json_out;
  std::size_t max_states = 1000000;
};

void cmd_oracle(const OracleArgs& a) {
  require_file(a.model);
  const auto v = monolithic_oracle(load_model_file(a.model), a.max_states);
  auto j = verdict_to_json(v, 0, "oracle", fs::path(a.model).filename().string());
  emit_json(j, a.json_out);
}

struct TrainArgs {
  std::string domain, config, out_dir, learner;
  std::optional<std::size_t> episodes;
  std::optional<std::uint64_t> seed;
};

void cmd_train(const TrainArgs& a) {
  const Domain d = domain_flag(a.domain);
  TrainConfig c;
  if (!a.config.empty()) {
    require_file(a.config);
    std::ifstream in(a.config);
    try {
      c = config_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
      throw UsageError("invalid config " + a.config + ": " + e.what());
    }
  }
  if (a.episodes) c.episodes = *a.episodes;
  if (a.seed) c.seed = *a.seed;
  if (a.learner == "rl") c.learner = LearnerKind::Baseline;
  if (a.learner == "gcrl") c.learner = LearnerKind::Gcrl;
  try {
    c.validate();
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = a.out_dir;
  const auto hash = config_hash(c);
  spdlog::info("training {} ({}, {}) for {} episodes, seed {}, config {}", to_string(d), c.n, c.k,
               c.episodes, c.seed, hash);
  const auto r = train(d, c, dir);
  auto cfg = config_to_json(c);
  cfg["tool_version"] = kToolVersion;
  cfg["config_hash"] = hash;
  cfg["domain"] = to_string(d);
  open_out(dir / "config.json") << cfg.dump(2) << '\n';
  auto csv = open_out(dir / "training_log.csv");
  write_training_csv(csv, r.log, c.seed, hash);
  std::cout << nlohmann::json{{"episodes", r.log.size()},
                              {"auc", auc(r.log)},
                              {"gradient_steps", r.gradient_steps},
                              {"epsilon_decay_steps", r.epsilon_decay_steps},
                              {"seed", c.seed},
                              {"config_hash", hash},
                              {"out_dir", dir.string()},
                              {"tool_version", kToolVersion}}
                   .dump(2)
            << '\n';
}

std::vector<fs::path> snapshot_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("no such directory: " + dir.string());
  static const std::regex pattern(R"(snapshot_\d+\.json)");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && std::regex_match(e.path().filename().string(), pattern)) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw UsageError("no snapshot_<episode>.json files in " + dir.string());
  return out;
}

Snapshot load_snapshot(const fs::path& p) {
  try {
    if (weights_kind(p) == "rl") return load_baseline_weights(p);
    return load_gnn_weights(p);
  } catch (const WeightsError& e) {
    throw UsageError(e.what());
  }
}

struct SelectArgs {
  std::string snapshots, domain, out;
  std::size_t budget = kValidationBudget, hops = kDefaultHops;
  std::uint64_t seed = 0;
};

void cmd_select(const SelectArgs& a) {
  const Domain d = domain_flag(a.domain);
  const auto files = snapshot_files(a.snapshots);
  std::vector<Snapshot> snaps;
  for (const auto& f : files) snaps.push_back(load_snapshot(f));
  const auto sel = select_snapshot(snaps, validation_set(d), a.budget, a.hops, a.seed);
  nlohmann::json scores = nlohmann::json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    nlohmann::json row{{"file", files[i].filename().string()}};
    if (sel.scores[i]) {
      row["solved"] = sel.scores[i]->solved;
      row["expansions"] = sel.scores[i]->expansions;
    } else {
      row["pruned"] = true;
    }
    scores.push_back(row);
  }
  const auto chosen = files[sel.index];
  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    fs::copy_file(chosen, a.out, fs::copy_options::overwrite_existing);
  }
  std::cout << nlohmann::json{{"selected", chosen.string()},
                              {"index", sel.index},
                              {"domain", to_string(d)},
                              {"budget", a.budget},
                              {"seed", a.seed},
                              {"scores", scores},
                              {"tool_version", kToolVersion}}
                   .dump(2)
            << '\n';
}

struct EvalArgs {
  std::string policy, domain, out_csv;
  int max_n = 15, max_k = 15;
  std::size_t budget = kDefaultBudget;
  std::uint64_t seed = 0;
};

void cmd_eval_grid(const EvalArgs& a) {
  const Domain d = domain_flag(a.domain);
  const auto spec = policy_flag(a.policy);
  instantiate(spec);  // fail early on incompatible weights
  const auto grid = eval_grid([&] { return instantiate(spec); }, a.policy, d, a.max_n, a.max_k,
                              a.budget, a.seed);
  if (a.out_csv.empty()) {
    write_eval_csv(std::cout, grid.records, a.seed);
  } else {
    auto out = open_out(a.out_csv);
    write_eval_csv(out, grid.records, a.seed);
  }
  spdlog::info("{} solved {} of {} attempted instances", a.policy, grid.solved,
               grid.records.size());
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Directed controller synthesis with learned exploration policies", "dcs"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a benchmark model");
  generate->add_option("--domain", gen.domain, "AT, BW, DP, TA or TL")->required();
  generate->add_option("--n", gen.n, "first scale parameter")->required();
  generate->add_option("--k", gen.k, "second scale parameter")->required();
  generate->add_option("--out", gen.out, "output file (default stdout)");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "run on-the-fly synthesis on a model");
  synth->add_option("--model", syn.model, "model file")->required();
  synth->add_option("--policy", syn.policy, "random, bfs, dfs, ra, rl:<w>, gcrl:<w>[:k]");
  synth->add_option("--budget", syn.budget, "expansion budget");
  synth->add_option("--seed", syn.seed, "RNG seed");
  synth->add_option("--json-out", syn.json_out, "verdict file (default stdout)");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "monolithic synthesis over the explicit product");
  oracle->add_option("--model", orc.model, "model file")->required();
  oracle->add_option("--max-states", orc.max_states, "product state budget");
  oracle->add_option("--json-out", orc.json_out, "verdict file (default stdout)");

  TrainArgs tr;
  auto* training = app.add_subcommand("train", "train a policy on one benchmark instance");
  training->add_option("--domain", tr.domain, "benchmark domain")->required();
  training->add_option("--config", tr.config, "training config JSON");
  training->add_option("--out-dir", tr.out_dir, "snapshot and log directory")->required();
  training->add_option("--episodes", tr.episodes, "override the episode count");
  training->add_option("--seed", tr.seed, "override the seed");
  training->add_option("--learner", tr.learner, "gcrl or rl")
      ->check(CLI::IsMember({"gcrl", "rl"}));

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "pick the snapshot that generalizes best");
  select->add_option("--snapshots", sel.snapshots, "directory of snapshot files")->required();
  select->add_option("--domain", sel.domain, "benchmark domain")->required();
  select->add_option("--budget", sel.budget, "expansion budget per validation instance");
  select->add_option("--hops", sel.hops, "k-hop neighborhood for graph policies");
  select->add_option("--seed", sel.seed, "RNG seed");
  select->add_option("--out", sel.out, "copy the selected snapshot here");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval-grid", "evaluate a policy over the (n, k) grid");
  eval->add_option("--policy", ev.policy, "policy spec")->required();
  eval->add_option("--domain", ev.domain, "benchmark domain")->required();
  eval->add_option("--max-n", ev.max_n, "largest n")->check(CLI::PositiveNumber);
  eval->add_option("--max-k", ev.max_k, "largest k")->check(CLI::PositiveNumber);
  eval->add_option("--budget", ev.budget, "expansion budget per instance");
  eval->add_option("--seed", ev.seed, "RNG seed");
  eval->add_option("--out-csv", ev.out_csv, "results file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) cmd_generate(gen);
    if (*synth) cmd_synth(syn);
    if (*oracle) cmd_oracle(orc);
    if (*training) cmd_train(tr);
    if (*select) cmd_select(sel);
    if (*eval) cmd_eval_grid(ev);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
