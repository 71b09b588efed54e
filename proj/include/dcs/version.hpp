#pragma once

namespace dcs {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kWeightsFormatVersion = 1;
inline constexpr int kGraphDumpFormatVersion = 1;

}  // namespace dcs
