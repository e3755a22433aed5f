#pragma once

// Euler-type path simulation with absorption at 0 and explosion to infinity
// approximated by finite barriers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slm/measure.hpp"
#include "slm/rng.hpp"

namespace slm {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { EulerLog, EulerDirect };

/// Explicit evaluates the drift at the start of the step. PredictorCorrector
/// blends it with the drift at the Euler-predicted state (same noise).
enum class DriftTreatment { Explicit, PredictorCorrector };

/// LocalVariance: dt = dt_base / (1 + dt_base * rate / eta) where rate is the
/// largest per-step log-variance or relative drift rate of the state.
/// QuadraticForm: dt = dt_base / (1 + <x, a x> / (1 + |x|^2)).
enum class StepRule { LocalVariance, QuadraticForm };

struct SimConfig {
  double dt_base = 1e-4;
  double barrier_up = 1e8;
  double barrier_down = 1e-8;
  bool adaptive = true;
  std::uint64_t max_steps = 20'000'000;
  Scheme scheme = Scheme::EulerLog;
  DriftTreatment drift = DriftTreatment::PredictorCorrector;
  double corrector_weight = 1.0;
  StepRule step_rule = StepRule::LocalVariance;
  double step_eta = 0.01;
  bool antithetic = false;
  /// First passages above barrier_up * probe_fraction are recorded so that a
  /// lower explosion barrier can be evaluated without a second run.
  double probe_fraction = 0.01;
  unsigned threads = 1;

  /// Throws std::invalid_argument when the config is unusable for `system`.
  void validate(const SdeSystem& system) const;
};

enum class EventKind { Survived, HitUp, HitDown };

struct ComponentEvent {
  EventKind kind = EventKind::Survived;
  double time = 0.0;
};

enum class PathStatus { Ok, MaxSteps, DomainError };

struct PathOutcome {
  /// Values at the stopping time: T, the explosion time, or the time the
  /// last M-component was absorbed. Absorbed M-components read barrier_down.
  std::vector<double> terminal_state;
  /// One entry per state slot; the last one is v.
  std::vector<ComponentEvent> events;
  /// First time each slot exceeded barrier_up * probe_fraction (|v| for v).
  std::vector<std::optional<double>> probe_up_time;
  /// First time v was at or below barrier_down, whether or not v absorbs.
  std::optional<double> v_down_time;
  std::uint64_t steps_used = 0;
  std::uint64_t seed_used = 0;
  PathStatus status = PathStatus::Ok;
  std::string failure;

  bool ok() const noexcept { return status == PathStatus::Ok; }
  /// True when some M-component reached barrier_up; the path stops there.
  /// v reaching barrier_up is frozen at +-barrier_up instead.
  bool exploded() const noexcept;
};

/// Optional per-step recording of (t, x).
struct PathTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

/// out = L z sqrt_dt for fresh standard normals z (negated when `flip`).
/// Slots of `out` beyond z.size() see zero noise in the trailing z entries.
void draw_correlated(const Eigen::MatrixXd& factor, PhiloxStream& stream, double sqrt_dt,
                     bool flip, std::span<double> z, std::span<double> out);

PathOutcome simulate_path(const EffectiveSystem& system, const SimConfig& config,
                          std::uint64_t seed, std::uint64_t path_index,
                          PathTrace* trace = nullptr);

struct BatchResult {
  std::vector<PathOutcome> outcomes;  // indexed by path
  std::size_t failed = 0;
};

/// Runs paths 0..n_paths-1 on config.threads threads. Output does not depend
/// on the thread count. Throws NumericalError when more than 1% of paths fail.
BatchResult simulate_batch(const EffectiveSystem& system, const SimConfig& config,
                           std::uint64_t seed, std::size_t n_paths);

}  // namespace slm
