#pragma once

// Dynamics of the system under the original measure P and under the Foellmer
// measure P^j built from the j-th M-component. The measure change is realized
// purely as an additional drift; the density process is never materialized.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slm/expr.hpp"
#include "slm/model.hpp"

namespace slm {

class MeasureTag {
 public:
  static MeasureTag original() { return MeasureTag(0); }
  /// j is 1-based, 1 <= j <= d.
  static MeasureTag foellmer(std::size_t j);
  /// "P" or "P<j>" / "Pj:<j>".
  static MeasureTag parse(const std::string& text);

  bool is_original() const noexcept { return j_ == 0; }
  std::size_t component() const noexcept { return j_; }
  std::string label() const;

  friend bool operator==(const MeasureTag&, const MeasureTag&) = default;

 private:
  explicit MeasureTag(std::size_t j) : j_(j) {}
  std::size_t j_;
};

/// Which M factor multiplies the Girsanov drift of component i under P^j.
/// OwnComponent uses M^i, which reproduces the worked examples and the
/// covariation d[M^i, M^j]/M^j. LiteralMj uses M^j in place of M^i.
enum class BetaForm { OwnComponent, LiteralMj };

/// Extra drift under P^j: component i <= d gets Sigma_ij sigma_ii sigma_jj x_i
/// (x_j for LiteralMj), component d+1 gets Sigma_{j,d+1} sigma_jj sigma_bar.
/// j is 1-based.
std::vector<double> girsanov_drift(const SdeSystem& system, std::size_t j,
                                   std::span<const double> x, double t,
                                   BetaForm form = BetaForm::OwnComponent);

/// Same, from already evaluated coefficients; writes state_size() values.
void girsanov_drift(const SdeSystem& system, std::size_t j, std::span<const double> x,
                    std::span<const double> sigma, double sigma_bar, BetaForm form,
                    std::span<double> out) noexcept;

/// The system together with the drift vector it has under one measure. The
/// diffusion part is the one of the underlying SdeSystem.
class EffectiveSystem {
 public:
  EffectiveSystem(SdeSystem system, MeasureTag measure,
                  BetaForm form = BetaForm::OwnComponent);

  /// Adds `drift` to the drift of state slot `slot` (0-based). Used for test
  /// systems such as dX = X^2 dt that are not produced by a measure change.
  EffectiveSystem with_extra_drift(std::size_t slot, Expression drift) const;

  const SdeSystem& system() const noexcept { return system_; }
  const MeasureTag& measure() const noexcept { return measure_; }
  BetaForm beta_form() const noexcept { return form_; }
  std::size_t state_size() const noexcept { return system_.state_size(); }

  /// True when every drift term is identically zero.
  bool driftless() const noexcept { return driftless_; }

  /// True when some coefficient or drift term reads |x|.
  bool uses_norm() const noexcept;

  /// Full drift vector at x (checked evaluation).
  std::vector<double> drift(std::span<const double> x, double t) const;

  /// Hot-path drift from already evaluated coefficients.
  void drift_from(const EvalPoint& p, std::span<const double> sigma, double sigma_bar,
                  double b, std::span<double> out, bool& domain_error) const noexcept;

 private:
  SdeSystem system_;
  MeasureTag measure_;
  BetaForm form_;
  std::vector<Expression> extra_;
  std::vector<bool> has_extra_;
  bool driftless_ = true;
};

EffectiveSystem effective_sde(const SdeSystem& system, MeasureTag measure,
                              BetaForm form = BetaForm::OwnComponent);

}  // namespace slm
