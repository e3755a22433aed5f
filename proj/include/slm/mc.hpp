#pragma once

// Monte Carlo estimators: the martingale defect under P, explosion
// frequencies under the Foellmer measures, the duality between the two and
// the final per-component classification.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slm/khasminskii.hpp"
#include "slm/sim.hpp"

namespace slm {

/// Point estimate with a 3-standard-error (99.7%) interval.
struct EstimateWithCI {
  static constexpr double kZ = 3.0;

  double point = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;

  double lower() const noexcept { return point - kZ * std_error; }
  double upper() const noexcept { return point + kZ * std_error; }
  bool contains(double v) const noexcept { return lower() <= v && v <= upper(); }
};

/// Sample mean and standard error of `values` (summed in index order).
EstimateWithCI mean_estimate(const std::vector<double>& values);

/// Frequency `hits / n` with the binomial standard error.
EstimateWithCI binomial_estimate(std::size_t hits, std::size_t n);

struct TerminalMean {
  EstimateWithCI estimate;
  std::size_t hit_up = 0;     // paths where some M-component reached barrier_up
  std::size_t hit_down = 0;   // paths where component j was absorbed
  std::size_t discarded = 0;  // failed paths
  /// Set when a path exploded under P; such paths count at barrier_up and
  /// the mean is biased.
  bool biased = false;
};

struct ExplosionEstimate {
  EstimateWithCI estimate;
  /// Same frequency at the lower barrier barrier_up * probe_fraction.
  EstimateWithCI at_lower_barrier;
  double barrier_delta = 0.0;
  std::size_t discarded = 0;
  /// The barrier delta exceeds the CI half-width and is significant on its
  /// own (more than 3 binomial standard errors).
  bool undetermined = false;
  /// Sorted crossing times of barrier_up by component j.
  std::vector<double> hit_times;
};

/// Reductions over an already simulated batch. j is 1-based.
TerminalMean terminal_mean_from(const BatchResult& batch, std::size_t j, double barrier_up);
ExplosionEstimate explosion_from(const BatchResult& batch, std::size_t j);

/// E_P[M^j_T] from paths simulated under P.
TerminalMean estimate_terminal_mean(const SdeSystem& system, const SimConfig& config,
                                    std::uint64_t seed, std::size_t n_paths, std::size_t j);

/// Frequency of M^j reaching barrier_up before T under `measure`
/// (normally P^j).
ExplosionEstimate estimate_explosion_probability(const SdeSystem& system,
                                                 const SimConfig& config, std::uint64_t seed,
                                                 std::size_t n_paths, MeasureTag measure,
                                                 std::size_t j,
                                                 BetaForm form = BetaForm::OwnComponent);

struct DualityReport {
  std::size_t component = 0;
  TerminalMean mean;
  ExplosionEstimate explosion;
  double gap = 0.0;  // |E_P[M^j_T] + P^j(explosion) - 1|
  double combined_se = 0.0;
  bool pass = false;
};

DualityReport duality_from(std::size_t j, const TerminalMean& mean,
                           const ExplosionEstimate& explosion);

/// Runs both sides with independent seeds derived from `seed`.
DualityReport duality_check(const SdeSystem& system, const SimConfig& config,
                            std::uint64_t seed, std::size_t n_paths, std::size_t j,
                            BetaForm form = BetaForm::OwnComponent);

/// Seeds used by the two sides: the P run and the P^j run.
std::uint64_t seed_for_original(std::uint64_t master);
std::uint64_t seed_for_foellmer(std::uint64_t master, std::size_t j);

enum class FinalLabel { Martingale, StrictLocalMartingale, Inconclusive };

struct BoundaryFrequencies {
  EstimateWithCI hits_zero;
  EstimateWithCI hits_infinity;
};

struct BoundaryDiagnostic {
  BoundaryFrequencies under_p;
  BoundaryFrequencies under_pj;
  /// Cases of the v-boundary taxonomy consistent with the observed hits,
  /// e.g. "martingale case 1".
  std::vector<std::string> consistent_cases;
};

BoundaryDiagnostic boundary_diagnostic(const BatchResult& under_p, const BatchResult& under_pj);

struct ComponentClassification {
  std::size_t component = 0;
  EstimateWithCI defect;  // 1 - E_P[M^j_T]
  ExplosionEstimate explosion;
  TerminalMean mean;
  DualityReport duality;
  std::optional<ComponentVerdict> analytic;
  FinalLabel final_label = FinalLabel::Inconclusive;
  /// "AGREE", "DISAGREE" or "NO-ANALYTIC".
  std::string analytic_agreement;
  BoundaryDiagnostic boundary;
  std::vector<std::string> notes;
};

struct ClassificationReport {
  std::string system_name;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<ComponentClassification> components;
};

/// Statistical decision rule: Martingale when both intervals contain 0,
/// StrictLocalMartingale when both lie above 0, otherwise Inconclusive.
FinalLabel decide(const EstimateWithCI& defect, const ExplosionEstimate& explosion,
                  bool biased_mean);

/// One P run shared by all components and one P^j run per component. When
/// `criteria` is non-empty the analytic checks run as well; the final label
/// always follows the statistics.
ClassificationReport classify(const SdeSystem& system, const SimConfig& config,
                              std::uint64_t seed, std::size_t n_paths,
                              const std::vector<ComponentCriterion>& criteria = {},
                              BetaForm form = BetaForm::OwnComponent);

const char* to_string(FinalLabel label);

}  // namespace slm
