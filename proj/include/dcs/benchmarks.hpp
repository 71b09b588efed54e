#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dcs/lts.hpp"

namespace dcs {

enum class Domain { AT, BW, DP, TA, TL };

inline constexpr Domain kAllDomains[] = {Domain::AT, Domain::BW, Domain::DP, Domain::TA,
                                         Domain::TL};

std::string to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view name);

struct BenchmarkSpec {
  Domain domain = Domain::AT;
  int n = 1;
  int k = 1;
};

/// Deterministic parameterized benchmark families.
///
///  AT  n planes, k altitude levels. request_i (uncontrollable) moves a plane
///      from the ground to a holding pattern; assign_i_l and descend_i_l
///      (controllable) place it at level l and move it one level down
///      (descend_i_1 lands). Two planes on one level crash the level.
///  BW  n documents through k review steps. route_i (controllable) sends a
///      document into review; accept_i_j / reject_i_j are uncontrollable;
///      return_i gives a rejected document back. The review board holds one
///      document at a time and jams if a second is routed in.
///  DP  n philosophers, n forks. left_i, right_i, step_i_j, release_i are
///      controllable; eat_i is not. Every philosopher must eat once.
///  TA  n services with k query rounds each. avail_i_j / unavail_i_j are
///      uncontrollable answers; reserve_i, commit and cancel are controllable.
///      Cancelling is only possible after an unavailable answer, and
///      committing after one breaks the purchase.
///  TL  n machines and n buffers of capacity k. take_i (controllable) starts
///      machine i, put_i (uncontrollable) deposits into buffer i and
///      overflows a full buffer; out (controllable) ships from the last
///      buffer. At least one item has to be shipped.
///
/// Throws ContractViolation when n or k is below 1.
CompositeModel generate_benchmark(const BenchmarkSpec& spec);

}  // namespace dcs
