#pragma once

// Deterministic text serializations of verdicts and estimates. Keys keep a
// fixed order and doubles print in shortest round-trip form, so equal inputs
// give byte-identical files.

#include <string>
#include <vector>

#include "slm/config.hpp"
#include "slm/khasminskii.hpp"
#include "slm/mc.hpp"
#include "slm/sim.hpp"

namespace slm {

struct LyapunovVerdict {
  LyapunovCriterion criterion;
  CriterionVerdict verdict;
};

std::string criterion_report_json(const SystemConfig& system,
                                  const std::vector<ComponentVerdict>& components,
                                  const std::vector<LyapunovVerdict>& lyapunov);

std::string classification_report_json(const SystemConfig& system, const SimConfig& config,
                                       const ClassificationReport& report);

/// One row per component with the headline estimates.
std::string classification_summary_csv(const SystemConfig& system,
                                       const ClassificationReport& report);

/// "S: Martingale (defect ..., explosion ...)" per component.
std::string classification_verdict_lines(const SystemConfig& system,
                                         const ClassificationReport& report);

std::string duality_report_json(const SystemConfig& system, const SimConfig& config,
                                std::uint64_t seed, std::size_t n_paths,
                                const std::vector<DualityReport>& reports);

std::string simulation_summary_json(const SystemConfig& system, const SimConfig& config,
                                    const std::string& measure, std::uint64_t seed,
                                    const BatchResult& batch);

/// (t, x1, ..., x_{d+1}) rows.
std::string trace_csv(const PathTrace& trace);

/// (t, value) rows: the fraction of paths whose component crossed
/// barrier_up by time t, evaluated at every crossing and at `horizon`.
std::string explosion_cdf_csv(const std::vector<double>& sorted_hit_times, std::size_t n_paths,
                              double horizon);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace slm
