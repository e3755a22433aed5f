#include "slm/model.hpp"

#include <algorithm>
#include <cmath>

namespace slm {

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols())
    throw ModelError("correlation matrix must be square and nonempty");
  const auto n = m_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m_(i, i) != 1.0)
      throw ModelError("correlation diagonal entry (" + std::to_string(i + 1) + "," +
                       std::to_string(i + 1) + ") must be exactly 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = m_(i, j);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0)
        throw ModelError("correlation entry (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ") must lie in [-1, 1]");
      if (v != m_(j, i))
        throw ModelError("correlation matrix is not symmetric at (" + std::to_string(i + 1) +
                         "," + std::to_string(j + 1) + ")");
    }
  }
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t n) {
  return CorrelationMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n)));
}

CorrelationMatrix CorrelationMatrix::from_row_major(std::span<const double> values,
                                                    std::size_t n) {
  if (values.size() != n * n)
    throw ModelError("correlation must have " + std::to_string(n * n) + " entries, got " +
                     std::to_string(values.size()));
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = values[i * n + j];
  return CorrelationMatrix(std::move(m));
}

double CorrelationMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd factor_correlation(const CorrelationMatrix& correlation) {
  const Eigen::MatrixXd& s = correlation.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -CorrelationMatrix::kPsdTolerance)
    throw ModelError("correlation matrix is not positive semidefinite (smallest eigenvalue " +
                     std::to_string(lmin) + ")");
  if (lmin > 1e-12) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  Eigen::VectorXd lambda = es.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    lambda(i) = lambda(i) < 1e-12 ? 0.0 : std::sqrt(lambda(i));
  // Largest eigenvalue first so rank-deficient factors have trailing zero columns.
  Eigen::MatrixXd l = (es.eigenvectors() * lambda.asDiagonal()).rowwise().reverse();
  // Flip column signs so the factor matches the Cholesky convention where it
  // can: a nonnegative leading entry in each column.
  for (Eigen::Index c = 0; c < l.cols(); ++c) {
    for (Eigen::Index r = 0; r < l.rows(); ++r) {
      if (std::fabs(l(r, c)) > 1e-14) {
        if (l(r, c) < 0) l.col(c) *= -1.0;
        break;
      }
    }
  }
  return l;
}

CorrelationMatrix nearest_correlation(const CorrelationMatrix& correlation) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(correlation.matrix());
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd m = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd scale = m.diagonal().cwiseSqrt().cwiseInverse();
  m = scale.asDiagonal() * m * scale.asDiagonal();
  // Round off representation noise so the result passes exact-diagonal and
  // symmetry validation.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::round(0.5 * (m(i, j) + m(j, i)) * 1e12) / 1e12;
      m(i, j) = m(j, i) = std::clamp(v, -1.0, 1.0);
    }
  }
  return CorrelationMatrix(std::move(m));
}

SdeSystem::SdeSystem(std::string name, std::vector<Expression> sigma_diag,
                     Expression sigma_bar, Expression b, CorrelationMatrix correlation,
                     std::vector<double> initial_state, double horizon, bool v_absorbing)
    : name_(std::move(name)),
      sigma_diag_(std::move(sigma_diag)),
      sigma_bar_(std::move(sigma_bar)),
      b_(std::move(b)),
      correlation_(std::move(correlation)),
      initial_state_(std::move(initial_state)),
      horizon_(horizon),
      v_absorbing_(v_absorbing) {
  const std::size_t n = sigma_diag_.size() + 1;
  if (sigma_diag_.empty()) throw ModelError("system needs at least one M-component (d >= 1)");
  for (std::size_t i = 0; i < sigma_diag_.size(); ++i)
    if (sigma_diag_[i].dimension() != n)
      throw ModelError("sigma_diag[" + std::to_string(i) + "] not parsed with dimension d+1");
  if (sigma_bar_.dimension() != n || b_.dimension() != n)
    throw ModelError("sigma_bar and b must be parsed with dimension d+1");
  if (correlation_.size() != n)
    throw ModelError("correlation must be " + std::to_string(n) + "x" + std::to_string(n));
  if (initial_state_.empty()) initial_state_.assign(n, 1.0);
  if (initial_state_.size() != n)
    throw ModelError("initial_state must have " + std::to_string(n) + " entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(initial_state_[i]))
      throw ModelError("initial_state entries must be finite");
    if (i + 1 < n && initial_state_[i] <= 0.0)
      throw ModelError("initial M-components must be strictly positive");
  }
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ModelError("T must be positive");
  factor_ = factor_correlation(correlation_);
}

SdeSystem SdeSystem::from_spec(const SystemSpec& spec) {
  if (spec.d == 0) throw ModelError("d must be positive");
  if (spec.sigma_diag.size() != spec.d)
    throw ModelError("sigma_diag must have d = " + std::to_string(spec.d) + " entries");
  const std::size_t n = spec.d + 1;
  std::vector<Expression> sig;
  for (const auto& s : spec.sigma_diag) sig.push_back(Expression::parse(s, n, spec.constants));
  auto corr = spec.correlation.empty()
                  ? CorrelationMatrix::identity(n)
                  : CorrelationMatrix::from_row_major(spec.correlation, n);
  return SdeSystem(spec.name, std::move(sig), Expression::parse(spec.sigma_bar, n, spec.constants),
                   Expression::parse(spec.b, n, spec.constants), std::move(corr),
                   spec.initial_state, spec.horizon, spec.v_absorbing);
}

SdeSystem SdeSystem::permuted(std::span<const std::size_t> perm) const {
  const std::size_t d = this->d();
  if (perm.size() != d) throw ModelError("permutation must have d entries");
  std::vector<std::size_t> full(perm.begin(), perm.end());
  full.push_back(d);
  std::vector<Expression> sig;
  for (std::size_t k = 0; k < d; ++k) sig.push_back(sigma_diag_.at(perm[k]).permuted(full));
  Eigen::MatrixXd c(d + 1, d + 1);
  for (std::size_t i = 0; i <= d; ++i)
    for (std::size_t j = 0; j <= d; ++j) c(i, j) = correlation_(full[i], full[j]);
  std::vector<double> x0(d + 1);
  for (std::size_t i = 0; i <= d; ++i) x0[i] = initial_state_[full[i]];
  return SdeSystem(name_, std::move(sig), sigma_bar_.permuted(full), b_.permuted(full),
                   CorrelationMatrix(std::move(c)), std::move(x0), horizon_, v_absorbing_);
}

Coefficients evaluate_coefficients(const SdeSystem& system, std::span<const double> x,
                                   double t) {
  Coefficients c;
  c.sigma.reserve(system.d());
  for (const auto& s : system.sigma_diag()) c.sigma.push_back(s.evaluate(x, t));
  c.sigma_bar = system.sigma_bar().evaluate(x, t);
  c.b = system.b().evaluate(x, t);
  return c;
}

Eigen::MatrixXd diffusion_matrix(const SdeSystem& system, std::span<const double> x, double t) {
  const std::size_t d = system.d();
  if (x.size() != d + 1) throw ModelError("state size mismatch");
  const Coefficients c = evaluate_coefficients(system, x, t);
  Eigen::VectorXd diag(d + 1);
  for (std::size_t i = 0; i < d; ++i) diag(i) = x[i] * c.sigma[i];
  diag(d) = c.sigma_bar;
  Eigen::MatrixXd a = diag.asDiagonal() * system.correlation().matrix() * diag.asDiagonal();
  return 0.5 * (a + a.transpose());
}

double quadratic_form(const SdeSystem& system, std::span<const double> x, double t) {
  // (Dx)^T Sigma (Dx) = |L^T D x|^2, which is nonnegative in floating point.
  const std::size_t d = system.d();
  if (x.size() != d + 1) throw ModelError("state size mismatch");
  const Coefficients c = evaluate_coefficients(system, x, t);
  Eigen::VectorXd y(d + 1);
  for (std::size_t i = 0; i < d; ++i) y(i) = x[i] * x[i] * c.sigma[i];
  y(d) = x[d] * c.sigma_bar;
  return (system.correlation_factor().transpose() * y).squaredNorm();
}

}  // namespace slm
