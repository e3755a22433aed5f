#pragma once

// Command-line front end. Exit codes: 0 success (verdicts of any kind are
// data), 2 configuration or usage error, 3 numerical failure.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slm/mc.hpp"

namespace slm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string system;
  std::string criteria;
  std::string measure = "P";
  std::size_t paths = 100'000;
  std::uint64_t seed = 42;
  double dt = 1e-4;
  double barrier_up = 1e8;
  double barrier_down = 1e-8;
  unsigned threads = 1;
  std::string out_dir = "out";
  std::vector<std::size_t> trace;
  bool emit_plot_data = false;
  std::size_t component = 0;  // duality: 0 means every component
};

struct ReproduceComponent {
  std::string name;
  std::string claimed;
  FinalLabel statistical = FinalLabel::Inconclusive;
  bool pass = false;
  std::string analytic_evidence;
  bool analytic_agrees = false;
  bool duality_pass = false;
};

struct ReproduceResult {
  int exit_code = kExitOk;
  /// Set for example2: the stated correlation is not PSD.
  bool stated_system_infeasible = false;
  std::string infeasibility;
  /// Name of the bundled system that actually ran.
  std::string system_name;
  std::vector<ReproduceComponent> components;
  bool pass = false;
};

int cmd_check(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_duality(const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& run, std::ostream& out, std::ostream& err);
/// `which` is example1-martingale, example1-strict or example2. Reports go
/// to <out_dir>/<which>/.
ReproduceResult cmd_reproduce(const std::string& which, const RunConfig& run, std::ostream& out,
                              std::ostream& err);

/// Parses argv and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slm::cli
