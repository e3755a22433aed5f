#pragma once

// JSON system and criteria files. Loading validates the whole file before
// anything is computed; every failure is a ConfigError whose message names
// the origin and either a line:column or a field path.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slm/khasminskii.hpp"
#include "slm/measure.hpp"
#include "slm/model.hpp"

namespace slm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  SystemSpec spec;
  std::string description;
  std::string note;
  std::vector<std::string> component_names;  // length d
  /// Claimed per-component outcome: "Martingale" or "StrictLocalMartingale".
  std::vector<std::string> claimed_outcome;
};

struct LyapunovCriterion {
  std::string V;
  double lambda = 0.0;
  bool explosion = false;
  MeasureTag measure = MeasureTag::original();
};

struct CriteriaConfig {
  struct Component {
    std::string A;
    std::string B;
    double r = 1.5;
    BoundSide side = BoundSide::UpperA_LowerTrace;
  };
  /// Empty, or one radial pair per component.
  std::vector<Component> components;
  std::vector<LyapunovCriterion> lyapunov;
  ConstantMap constants;

  /// Parsed pairs; constants of `system_constants` are visible unless
  /// shadowed by the file's own.
  std::vector<ComponentCriterion> build(const ConstantMap& system_constants) const;
};

/// Parses and validates; the SdeSystem is constructed once to catch
/// expression and correlation errors.
SystemConfig parse_system_config(const std::string& text, const std::string& origin);
CriteriaConfig parse_criteria_config(const std::string& text, const std::string& origin,
                                     const SystemConfig& system);

/// "builtin:<name>" selects a bundled config; anything else is a path.
SystemConfig load_system_config(const std::string& ref);
CriteriaConfig load_criteria_config(const std::string& ref, const SystemConfig& system);

/// Bundled criteria for a bundled system, when one exists.
std::optional<std::string> bundled_criteria_ref(const std::string& system_ref);

/// Embedded config files keyed by relative path, e.g. "systems/gbm.json".
const std::map<std::string, std::string>& bundled_configs();

SdeSystem build_system(const SystemConfig& config);

}  // namespace slm
