#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qvnet {

enum class ErrorCode {
  unknown_node,
  duplicate_link,
  self_loop,
  negative_rate,
  duplicate_node,
  non_monotonic_tick,
  insufficient_keys,
  no_path,
  invalid_quota,
  empty_subconn_set,
  unknown_subconnection,
  empty_qvnet,
  numerical_failure,
  qvnet_not_found,
  missing_static_route,
  invalid_pair,
  invalid_rule,
  parse_error,
  validation_error,
  overflow,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class; `what()`
/// carries a human-readable detail such as the offending link or node.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qvnet
