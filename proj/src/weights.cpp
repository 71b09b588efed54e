#include <fstream>
#include <sstream>

#include "dcs/neural.hpp"
#include "dcs/version.hpp"

namespace dcs {

namespace {

using json = nlohmann::json;
using Matrix = neural::Matrix<double>;

json block_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

void block_from_json(const json& params, const std::string& name, Matrix& m) {
  if (!params.contains(name)) throw WeightsError("weights: missing parameter block " + name);
  const auto& b = params.at(name);
  const auto shape = b.at("shape").get<std::vector<Eigen::Index>>();
  if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
    throw WeightsError("weights: dimension mismatch in block " + name);
  }
  const auto& data = b.at("data");
  if (!data.is_array() || data.size() != static_cast<std::size_t>(m.size())) {
    throw WeightsError("weights: wrong element count in block " + name);
  }
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto& v = data[i++];
      if (!v.is_number()) throw WeightsError("weights: non-finite value in block " + name);
      m(r, c) = v.get<double>();
      if (!std::isfinite(m(r, c))) throw WeightsError("weights: non-finite value in block " + name);
    }
  }
}

json header(const char* kind, const std::vector<std::string>& alphabet, std::uint64_t seed) {
  return {{"format", "dcs-weights"}, {"version", kWeightsFormatVersion},
          {"kind", kind},            {"alphabet", alphabet},
          {"tool_version", kToolVersion}, {"seed", seed}};
}

void check_header(const json& j, const char* kind) {
  if (!j.is_object() || j.value("format", "") != "dcs-weights") {
    throw WeightsError("weights: not a weight document");
  }
  if (j.value("version", -1) != kWeightsFormatVersion) {
    throw WeightsError("weights: unsupported format version");
  }
  if (j.value("kind", "") != kind) {
    throw WeightsError(std::string("weights: expected kind ") + kind);
  }
}

template <typename Model>
void check_finite(const Model& m) {
  if (!neural::all_finite(m)) throw WeightsError("weights: non-finite parameter");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WeightsError("weights: cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw WeightsError("weights: malformed document " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw WeightsError("weights: cannot write " + path.string());
  out << j.dump(1) << '\n';
}

template <typename T, typename F>
T guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw WeightsError(std::string("weights: malformed document: ") + e.what());
  }
}

}  // namespace

json weights_to_json(const GnnWeights& w) {
  check_finite(w.model);
  json j = header("gcrl", w.alphabet, w.seed);
  j["dims"] = {{"node", w.model.node_dim()},
               {"hidden", w.model.hidden_dim()},
               {"edge", w.model.edge_dim()},
               {"mlp_hidden", w.model.mlp_hidden_dim()}};
  j["aggregation"] =
      w.model.aggregation == neural::Aggregation::Normalized ? "normalized" : "sum";
  json params = json::object();
  w.model.for_each_block(
      [&](const std::string& name, const Matrix& m) { params[name] = block_to_json(m); });
  j["params"] = std::move(params);
  return j;
}

json weights_to_json(const BaselineWeights& w) {
  check_finite(w.net);
  json j = header("rl", w.alphabet, w.seed);
  j["dims"] = {{"input", w.net.in_dim()}, {"mlp_hidden", w.net.hidden_dim()}};
  json params = json::object();
  w.net.for_each_block(
      [&](const std::string& name, const Matrix& m) { params[name] = block_to_json(m); });
  j["params"] = std::move(params);
  return j;
}

GnnWeights gnn_weights_from_json(const json& j) {
  return guarded<GnnWeights>([&] {
    check_header(j, "gcrl");
    const auto& d = j.at("dims");
    const auto agg_name = j.at("aggregation").get<std::string>();
    if (agg_name != "normalized" && agg_name != "sum") {
      throw WeightsError("weights: unknown aggregation " + agg_name);
    }
    const Eigen::Index dims[] = {d.at("node").get<Eigen::Index>(), d.at("hidden").get<Eigen::Index>(),
                                 d.at("edge").get<Eigen::Index>(),
                                 d.at("mlp_hidden").get<Eigen::Index>()};
    for (auto v : dims) {
      if (v < 1) throw WeightsError("weights: dimensions must be positive");
    }
    GnnWeights w;
    w.model = GnnModel::zeros(dims[0], dims[1], dims[2], dims[3],
                              agg_name == "sum" ? neural::Aggregation::Sum
                                                : neural::Aggregation::Normalized);
    w.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    w.seed = j.at("seed").get<std::uint64_t>();
    const auto& params = j.at("params");
    w.model.for_each_block(
        [&](const std::string& name, Matrix& m) { block_from_json(params, name, m); });
    return w;
  });
}

BaselineWeights baseline_weights_from_json(const json& j) {
  return guarded<BaselineWeights>([&] {
    check_header(j, "rl");
    const auto& d = j.at("dims");
    const auto in = d.at("input").get<Eigen::Index>();
    const auto hidden = d.at("mlp_hidden").get<Eigen::Index>();
    if (in < 1 || hidden < 1) throw WeightsError("weights: dimensions must be positive");
    BaselineWeights w;
    w.net = BaselineQNet::zeros(in, hidden);
    w.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    w.seed = j.at("seed").get<std::uint64_t>();
    const auto& params = j.at("params");
    w.net.for_each_block(
        [&](const std::string& name, Matrix& m) { block_from_json(params, name, m); });
    return w;
  });
}

void save_weights(const std::filesystem::path& path, const GnnWeights& w) {
  write_json(path, weights_to_json(w));
}
void save_weights(const std::filesystem::path& path, const BaselineWeights& w) {
  write_json(path, weights_to_json(w));
}
GnnWeights load_gnn_weights(const std::filesystem::path& path) {
  return gnn_weights_from_json(read_json(path));
}
BaselineWeights load_baseline_weights(const std::filesystem::path& path) {
  return baseline_weights_from_json(read_json(path));
}

std::string weights_kind(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw WeightsError("weights: document has no kind");
  }
  return j["kind"].get<std::string>();
}

}  // namespace dcs
