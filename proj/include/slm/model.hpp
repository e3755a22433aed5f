#pragma once

// The stochastic-volatility system
//
//   dM^i = M^i sigma_ii(M, v) dB^i,      i = 1..d
//   dv   = sigma_bar(M, v) dZ + b(M, v) dt
//
// with W = (B, Z) a (d+1)-dimensional Brownian motion of correlation Sigma.
// State vectors are laid out as x = (M^1, ..., M^d, v).

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slm/expr.hpp"

namespace slm {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Symmetric, unit-diagonal matrix with entries in [-1, 1]. Positive
/// semidefiniteness is checked by factor_correlation.
class CorrelationMatrix {
 public:
  static constexpr double kPsdTolerance = 1e-10;

  explicit CorrelationMatrix(Eigen::MatrixXd entries);
  static CorrelationMatrix identity(std::size_t n);
  static CorrelationMatrix from_row_major(std::span<const double> values, std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double min_eigenvalue() const;

 private:
  Eigen::MatrixXd m_;
};

/// L with L L^T = Sigma. Cholesky when Sigma is positive definite; otherwise
/// an eigendecomposition factor with eigenvalues below 1e-12 clipped to 0.
/// Throws ModelError when Sigma has an eigenvalue below -1e-10.
Eigen::MatrixXd factor_correlation(const CorrelationMatrix& correlation);

/// Nearest PSD correlation matrix by eigenvalue clipping followed by
/// rescaling to a unit diagonal. Used only for explicitly labeled repairs.
CorrelationMatrix nearest_correlation(const CorrelationMatrix& correlation);

struct SystemSpec {
  std::string name;
  std::size_t d = 1;
  std::vector<std::string> sigma_diag;
  std::string sigma_bar;
  std::string b;
  std::vector<double> correlation;  // row-major (d+1)x(d+1)
  std::vector<double> initial_state;  // empty: all ones
  double horizon = 1.0;
  bool v_absorbing = false;
  ConstantMap constants;
};

class SdeSystem {
 public:
  SdeSystem(std::string name, std::vector<Expression> sigma_diag, Expression sigma_bar,
            Expression b, CorrelationMatrix correlation, std::vector<double> initial_state,
            double horizon, bool v_absorbing = false);

  /// Parses every expression with dimension d+1 and validates the result.
  static SdeSystem from_spec(const SystemSpec& spec);

  const std::string& name() const noexcept { return name_; }
  std::size_t d() const noexcept { return sigma_diag_.size(); }
  std::size_t state_size() const noexcept { return sigma_diag_.size() + 1; }
  const std::vector<Expression>& sigma_diag() const noexcept { return sigma_diag_; }
  const Expression& sigma_bar() const noexcept { return sigma_bar_; }
  const Expression& b() const noexcept { return b_; }
  const CorrelationMatrix& correlation() const noexcept { return correlation_; }
  /// Correlation factor, row-major (n x n).
  const Eigen::MatrixXd& correlation_factor() const noexcept { return factor_; }
  const std::vector<double>& initial_state() const noexcept { return initial_state_; }
  double horizon() const noexcept { return horizon_; }
  bool v_absorbing() const noexcept { return v_absorbing_; }

  /// Reorders the M-components: new component k is old component perm[k].
  /// v stays last; Sigma rows and columns move with their components.
  SdeSystem permuted(std::span<const std::size_t> perm) const;

 private:
  std::string name_;
  std::vector<Expression> sigma_diag_;
  Expression sigma_bar_;
  Expression b_;
  CorrelationMatrix correlation_;
  Eigen::MatrixXd factor_;
  std::vector<double> initial_state_;
  double horizon_;
  bool v_absorbing_;
};

/// Coefficient values at one state.
struct Coefficients {
  std::vector<double> sigma;  // sigma_ii, length d
  double sigma_bar = 0.0;
  double b = 0.0;
};

/// Evaluates sigma_ii, sigma_bar and b at x. Throws DomainError.
Coefficients evaluate_coefficients(const SdeSystem& system, std::span<const double> x,
                                   double t);

/// a(x) = D Sigma D^T with D = diag(x_1 sigma_11, ..., x_d sigma_dd, sigma_bar).
Eigen::MatrixXd diffusion_matrix(const SdeSystem& system, std::span<const double> x, double t);

/// <x, a(x) x>.
double quadratic_form(const SdeSystem& system, std::span<const double> x, double t);

}  // namespace slm
