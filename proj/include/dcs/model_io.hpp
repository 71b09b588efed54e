#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dcs/lts.hpp"

namespace dcs {

/// Syntax or semantic error in a model document, with a 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses the textual model format:
///
///   # comment
///   controllable: take_1 take_2;
///   component Machine_1 {
///     states: idle busy;
///     init: idle;
///     marked: idle;
///     alphabet: extra_label;        (optional; labels without transitions)
///     controllable: take_1;         (optional; must agree with the global list)
///     trans: idle -take_1-> busy; busy -put_1-> idle;
///   }
///   compose: Machine_1 || Buffer_1;
///
/// Identifiers are [A-Za-z0-9_.]+. Only components named in `compose`
/// become part of the model, in that order.
CompositeModel parse_model(std::string_view text);

/// Canonical text: sorted labels, transitions sorted by (source, label,
/// target), states in id order. Always parseable by parse_model.
std::string serialize_model(const CompositeModel& model);

CompositeModel load_model_file(const std::string& path);
void save_model_file(const CompositeModel& model, const std::string& path);

}  // namespace dcs
