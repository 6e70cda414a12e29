#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ddet {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  Parse,
  GraphFormat,
  Unbalanced,
  NoSpanningTree,
  NonFinite,
  DegenerateGain,
  Infeasible,
  OutOfRange,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type. Simulation errors
// carry the step and (1-based) agent where they happened.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> step() const noexcept { return step_; }
  std::optional<std::size_t> agent() const noexcept { return agent_; }

  Error with_context(long step, std::optional<std::size_t> agent) const;

 private:
  ErrorKind kind_;
  std::optional<long> step_;
  std::optional<std::size_t> agent_;
};

}  // namespace ddet
