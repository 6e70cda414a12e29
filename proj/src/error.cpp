#include "ddet/error.hpp"

#include <fmt/format.h>

namespace ddet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::GraphFormat: return "GraphFormat";
    case ErrorKind::Unbalanced: return "Unbalanced";
    case ErrorKind::NoSpanningTree: return "NoSpanningTree";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DegenerateGain: return "DegenerateGain";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::OutOfRange: return "OutOfRange";
  }
  return "Unknown";
}

Error Error::with_context(long step, std::optional<std::size_t> agent) const {
  std::string msg = agent
      ? fmt::format("step {}, agent {}: {}", step, *agent + 1, what())
      : fmt::format("step {}: {}", step, what());
  Error e(kind_, msg);
  e.step_ = step;
  e.agent_ = agent;
  return e;
}

}  // namespace ddet
