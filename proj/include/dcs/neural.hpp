#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dcs/neural/adam.hpp"
#include "dcs/neural/gcn.hpp"
#include "dcs/neural/mlp.hpp"

namespace dcs {

using GnnModel = neural::GnnModel<double>;
using BaselineQNet = neural::Mlp<double>;

inline constexpr Eigen::Index kDefaultHidden = 32;
inline constexpr Eigen::Index kDefaultMlpHidden = 64;

/// Malformed, truncated, mismatched or non-finite weight document.
class WeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted policy network together with the normalized alphabet its
/// features were computed over.
struct GnnWeights {
  GnnModel model;
  std::vector<std::string> alphabet;
  std::uint64_t seed = 0;
};

struct BaselineWeights {
  BaselineQNet net;
  std::vector<std::string> alphabet;
  std::uint64_t seed = 0;
};

/// Weight documents: {format, version, kind, dims, [aggregation], alphabet,
/// params: {name: {shape: [rows, cols], data: [row-major]}}, tool_version,
/// seed}. Values round-trip bit-exactly.
nlohmann::json weights_to_json(const GnnWeights& w);
nlohmann::json weights_to_json(const BaselineWeights& w);
GnnWeights gnn_weights_from_json(const nlohmann::json& j);
BaselineWeights baseline_weights_from_json(const nlohmann::json& j);

void save_weights(const std::filesystem::path& path, const GnnWeights& w);
void save_weights(const std::filesystem::path& path, const BaselineWeights& w);
GnnWeights load_gnn_weights(const std::filesystem::path& path);
BaselineWeights load_baseline_weights(const std::filesystem::path& path);
/// "gcrl" or "rl".
std::string weights_kind(const std::filesystem::path& path);

}  // namespace dcs
