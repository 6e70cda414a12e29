#pragma once

#include "ddet/engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ddet {

// How the attack section was resolved, kept for reporting.
struct AttackSource {
  enum class Kind { None, File, Generated } kind = Kind::None;
  std::string file;
  AttackBudget budget;
  long max_duration = 0;
  std::uint64_t seed = 0;
  bool per_agent = false;
};

struct ExperimentConfig {
  SimConfig sim;
  PlantCatalog catalog = PlantCatalog::Linear;
  AttackSource attack;
  std::string source;
};

// Loads a YAML experiment file with sections graph, gauge, plant, reference,
// gains, init, run (mandatory) and attack (optional). Overrides are
// `section.key=value` strings applied before validation; values are parsed
// as YAML, so lists work (`init.y=[1,2]`). Relative file paths resolve
// against the config file's directory.
//
// Errors: ErrorKind::Parse / InvalidArgument for config problems (with
// line numbers where known), ErrorKind::GraphFormat for an unreadable graph
// file, ErrorKind::Infeasible when attack generation fails.
ExperimentConfig load_experiment(const std::string& path,
                                 const std::vector<std::string>& overrides = {});

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir,
                                  const std::vector<std::string>& overrides = {},
                                  const std::string& source = "<config>");

}  // namespace ddet
