#pragma once

// Deterministic explosion criteria: Lyapunov-function tests and the radial
// A/B comparison tests with their integral condition. Every inequality is
// verified on sampled states only, so verdicts are sampled evidence.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slm/expr.hpp"
#include "slm/measure.hpp"
#include "slm/model.hpp"

namespace slm {

/// Radial comparison functions A(u), B(u) on [r, inf).
struct TestFunctionPair {
  Expression A;
  Expression B;
  double r = 1.5;

  /// Parses A and B as expressions in the single variable `u`.
  static TestFunctionPair parse(const std::string& a, const std::string& b, double r = 1.5,
                                const ConstantMap& constants = {});
};

enum class IntegralClass { Divergent, Convergent, Undetermined };

struct IntegralTestResult {
  IntegralClass classification = IntegralClass::Undetermined;
  std::vector<double> ladder_R;  // 1e2 .. 1e8
  std::vector<double> ladder_I;  // I(R) at each rung
  /// Slope of log10 of the rung increments minus one: the power of the outer
  /// integrand's tail. NaN when it could not be fitted.
  double tail_exponent = 0.0;
  /// Sampled violations of A > 0, B > 0 on [r, 1e6].
  std::vector<std::string> pair_warnings;
  std::string diagnostic;
  /// Set when A or B failed to evaluate; names the offending expression.
  bool domain_error = false;
};

/// Classifies I(R) = int_r^R C(p)^-1 int_{1/2}^p C(s)/A(s) ds dp with
/// C(p) = exp(int_{1/2}^p B) as R -> infinity.
IntegralTestResult integral_test(const TestFunctionPair& pair);

/// Which of the two inequality systems is checked: A >= <x,ax> and
/// <x,ax> B >= Tr a + 2<x,b> (non-explosion), or both reversed (explosion).
enum class BoundSide { UpperA_LowerTrace, LowerA_UpperTrace };

struct ShellReport {
  double radius = 0.0;
  std::size_t points = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  double worst_a_margin = 0.0;      // relative, >= -1e-9 means holding
  double worst_trace_margin = 0.0;
  double min_eigenvalue = 0.0;      // smallest eigenvalue of a(x) on the shell
  double max_drift_norm = 0.0;
};

struct BoundCheckReport {
  BoundSide side = BoundSide::UpperA_LowerTrace;
  std::vector<ShellReport> shells;
  std::size_t samples_checked = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
  /// Up to 16 violating states.
  std::vector<std::vector<double>> violating_points;
  /// Sampled nondegeneracy of a(x) and finiteness of the drift, as required
  /// by the radial explosion criterion.
  bool nondegenerate = true;
  std::vector<std::string> skipped_reasons;  // first few domain errors

  bool holds() const noexcept { return samples_checked > 0 && violations == 0; }
};

/// Relative slack accepted in every inequality; ties count as holding.
inline constexpr double kInequalityTolerance = 1e-9;

/// Shell radii log-spaced from max(sqrt(2r), sqrt(d+1)) to 1e3.
std::vector<double> default_shell_radii(std::size_t state_size, double r = 1.5,
                                        std::size_t count = 12);

/// Deterministic states with |x| = radius and every coordinate >= 1. The set
/// is closed under permutations of the M-coordinates when d <= 4.
std::vector<std::vector<double>> shell_samples(std::size_t state_size, std::size_t d,
                                               double radius, std::size_t count);

BoundCheckReport ab_bound_check(const EffectiveSystem& system, const TestFunctionPair& pair,
                                BoundSide side, const std::vector<double>& shell_radii,
                                std::size_t samples_per_shell = 256);

/// LV = dV/dt + 1/2 sum a_ij d_ij V + sum b_i d_i V by finite differences.
double apply_generator(const EffectiveSystem& system, const Expression& V,
                       std::span<const double> state, double time);

enum class Verdict { SufficientNonExplosion, SufficientExplosion, Inconclusive };

struct CriterionVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::string which_theorem;
  double inequality_margin = 0.0;  // worst signed relative slack found
  IntegralClass integral_classification = IntegralClass::Undetermined;
  std::size_t samples_checked = 0;
  std::string notes;
  std::optional<BoundCheckReport> bounds;
  std::optional<IntegralTestResult> integral;
};

struct LyapunovGrid {
  std::vector<double> radii;
  std::vector<double> times;
  std::size_t samples_per_shell = 64;

  /// Radii log-spaced from sqrt(n) to 1e3 with 10 among them; times
  /// {0, T/2, T}.
  static LyapunovGrid standard(std::size_t state_size, double horizon);
};

CriterionVerdict lyapunov_nonexplosion_check(const EffectiveSystem& system, const Expression& V,
                                             double lambda, const LyapunovGrid& grid);

CriterionVerdict lyapunov_explosion_check(const EffectiveSystem& system, const Expression& V,
                                          double lambda, double horizon,
                                          const LyapunovGrid& grid);

enum class ComponentEvidence { MartingaleEvidence, StrictLocalEvidence, Inconclusive };

struct ComponentCriterion {
  TestFunctionPair pair;
  BoundSide side = BoundSide::UpperA_LowerTrace;
};

struct ComponentVerdict {
  std::size_t component = 0;  // 1-based
  ComponentEvidence evidence = ComponentEvidence::Inconclusive;
  CriterionVerdict criterion;
};

/// For each component j builds the P^j system and checks its pair.
std::vector<ComponentVerdict> theorem_main_classify(
    const SdeSystem& system, const std::vector<ComponentCriterion>& criteria,
    BetaForm form = BetaForm::OwnComponent, std::size_t samples_per_shell = 256);

const char* to_string(IntegralClass c);
const char* to_string(BoundSide s);
const char* to_string(Verdict v);
const char* to_string(ComponentEvidence e);

}  // namespace slm
