#include "slm/khasminskii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace slm {

TestFunctionPair TestFunctionPair::parse(const std::string& a, const std::string& b, double r,
                                         const ConstantMap& constants) {
  TestFunctionPair p;
  p.A = Expression::parse_univariate(a, "u", constants);
  p.B = Expression::parse_univariate(b, "u", constants);
  p.r = r;
  return p;
}

// ---------------------------------------------------------------------------
// Integral test

namespace {

struct IntegralFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

constexpr double kLower = 0.5;
constexpr int kFirstRung = 2;
constexpr int kLastRung = 8;
constexpr int kPanelsPerDecade = 16;
constexpr double kMaxPanelLogWeight = 20.0;
constexpr std::size_t kMaxPanels = 100000;

class Integrator {
 public:
  explicit Integrator(const TestFunctionPair& pair) : pair_(pair) {}

  double A(double u) const {
    const double v = pair_.A(u);
    if (!std::isfinite(v) || !(v > 0.0))
      throw IntegralFailure("A(u) = " + std::to_string(v) + " is not positive at u = " +
                            std::to_string(u));
    return v;
  }
  double B(double u) const {
    const double v = pair_.B(u);
    if (!std::isfinite(v))
      throw IntegralFailure("B(u) is not finite at u = " + std::to_string(u));
    return v;
  }

  double int_b(double a, double b) const {
    if (b == a) return 0.0;
    return GK::integrate([this](double s) { return B(s); }, a, b, 6, 1e-12);
  }

  // Panel [a, b] with known K(a). Returns K(b) and adds int_a^b K to
  // `outer` when the panel lies inside the outer range.
  double panel(double a, double b, double k_a, bool outer_active, double& outer) const {
    auto k_at = [&](double rho) {
      if (rho == a) return k_a;
      const double lb_rho = int_b(a, rho);
      const double inner = GK::integrate(
          [&](double s) { return std::exp(int_b(a, s) - lb_rho) / A(s); }, a, rho, 4, 1e-11);
      return k_a * std::exp(-lb_rho) + inner;
    };
    if (outer_active) outer += GK::integrate(k_at, a, b, 4, 1e-11);
    return k_at(b);
  }

  // Splits [a, b] until int B over each piece is moderate so that the
  // exponential weights stay resolvable.
  void split(double a, double b, std::vector<double>& out, int depth) const {
    if (depth < 48 && std::fabs(int_b(a, b)) > kMaxPanelLogWeight) {
      if (out.size() > kMaxPanels)
        throw IntegralFailure("B grows too fast to resolve C(p) on the panel grid");
      const double m = b / a > 1.0001 ? std::sqrt(a * b) : 0.5 * (a + b);
      split(a, m, out, depth + 1);
      split(m, b, out, depth + 1);
      return;
    }
    out.push_back(b);
  }

 private:
  const TestFunctionPair& pair_;
};

}  // namespace

IntegralTestResult integral_test(const TestFunctionPair& pair) {
  IntegralTestResult res;
  res.tail_exponent = std::numeric_limits<double>::quiet_NaN();
  const double r = pair.r;
  if (!(r >= kLower) || !std::isfinite(r)) {
    res.diagnostic = "lower endpoint r must be >= 1/2";
    return res;
  }

  // Sampled positivity of A and B on [r, 1e6].
  try {
    const int samples = 61;
    for (int k = 0; k < samples; ++k) {
      const double u = r * std::pow(1e6 / r, static_cast<double>(k) / (samples - 1));
      const double a = pair.A(u), b = pair.B(u);
      if (res.pair_warnings.size() < 8) {
        if (!(a > 0.0)) res.pair_warnings.push_back("A(" + std::to_string(u) + ") <= 0");
        if (!(b > 0.0)) res.pair_warnings.push_back("B(" + std::to_string(u) + ") <= 0");
      }
    }
  } catch (const DomainError& e) {
    res.domain_error = true;
    res.diagnostic = e.what();
    return res;
  }

  std::vector<double> nodes{kLower};
  for (int j = 0;; ++j) {
    const double p = std::pow(10.0, static_cast<double>(j) / kPanelsPerDecade);
    if (p > std::pow(10.0, kLastRung)) break;
    if (p > kLower) nodes.push_back(p);
  }
  nodes.push_back(r);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  const Integrator integ(pair);
  std::vector<double> increments;  // int over [10^k, 10^(k+1)] for k >= kFirstRung
  try {
    std::vector<double> grid{nodes.front()};
    for (std::size_t i = 1; i < nodes.size(); ++i) integ.split(nodes[i - 1], nodes[i], grid, 0);

    double k_val = 0.0;  // K(1/2) = 0
    double total = 0.0;
    double decade = 0.0;
    int next_rung = kFirstRung;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double a = grid[i - 1], b = grid[i];
      double piece = 0.0;
      k_val = integ.panel(a, b, k_val, a >= r, piece);
      if (!std::isfinite(k_val) || !std::isfinite(piece))
        throw IntegralFailure("non-finite integrand near p = " + std::to_string(b));
      total += piece;
      if (next_rung > kFirstRung) decade += piece;
      if (next_rung <= kLastRung && b == std::pow(10.0, next_rung)) {
        res.ladder_R.push_back(b);
        res.ladder_I.push_back(total);
        if (next_rung > kFirstRung) increments.push_back(decade);
        decade = 0.0;
        ++next_rung;
      }
    }
  } catch (const DomainError& e) {
    res.domain_error = true;
    res.diagnostic = e.what();
    return res;
  } catch (const IntegralFailure& e) {
    res.diagnostic = e.what();
    return res;
  }

  // Least-squares slope of log10(increment) against the decade index over
  // the last four rungs.
  const std::size_t m = 4;
  if (increments.size() < m) {
    res.diagnostic = "ladder too short";
    return res;
  }
  const std::size_t first = increments.size() - m;
  for (std::size_t k = first; k < increments.size(); ++k) {
    if (!(increments[k] > 0.0)) {
      res.diagnostic = "non-positive increment on the ladder";
      return res;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < increments.size(); ++k) {
    const double x = static_cast<double>(k), y = std::log10(increments[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  res.tail_exponent = slope - 1.0;
  bool decreasing = true;
  for (std::size_t k = first + 1; k < increments.size(); ++k)
    if (!(increments[k] < increments[k - 1])) decreasing = false;

  if (res.tail_exponent < -1.05 && decreasing) {
    res.classification = IntegralClass::Convergent;
  } else if (res.tail_exponent > -0.95) {
    res.classification = IntegralClass::Divergent;
  } else {
    res.classification = IntegralClass::Undetermined;
    res.diagnostic = "fitted tail exponent " + std::to_string(res.tail_exponent) +
                     " is within 0.05 of -1 (borderline, e.g. logarithmic growth)";
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<double> default_shell_radii(std::size_t state_size, double r, std::size_t count) {
  const double lo = std::max(std::sqrt(2.0 * r), std::sqrt(static_cast<double>(state_size)));
  const double hi = 1e3;
  std::vector<double> radii;
  if (count == 1) return {lo};
  for (std::size_t k = 0; k < count; ++k)
    radii.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return radii;
}

namespace {

double radical_inverse(std::uint64_t k, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (k > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(k % base);
    k /= base;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::vector<std::vector<double>> shell_samples(std::size_t n, std::size_t d, double radius,
                                               std::size_t count) {
  if (n == 0 || d >= n + 1 || n > std::size(kPrimes))
    throw std::invalid_argument("shell_samples supports 1..16 state slots");
  // The corner (1, ..., 1) sits at radius sqrt(n); allow for its rounding.
  double excess = radius * radius - static_cast<double>(n);
  if (excess < 0.0 && excess > -1e-12 * static_cast<double>(n)) excess = 0.0;
  if (excess < 0.0 || count == 0) return {};

  const bool symmetric = d >= 2 && d <= 4;
  const std::size_t perms = symmetric ? factorial(d) : 1;
  const std::size_t base = (count + perms - 1) / perms;

  // Positive directions: the diagonal, the axes, then a Halton sequence.
  std::vector<std::vector<double>> dirs;
  dirs.emplace_back(n, 1.0);
  for (std::size_t i = 0; i < n && dirs.size() < base; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    dirs.push_back(std::move(e));
  }
  for (std::uint64_t k = 1; dirs.size() < base; ++k) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = radical_inverse(k, kPrimes[i]);
    dirs.push_back(std::move(u));
  }

  std::vector<std::vector<double>> out;
  out.reserve(base * perms);
  std::vector<std::size_t> perm(d);
  for (auto& u : dirs) {
    double norm = 0.0;
    for (double c : u) norm += c * c;
    norm = std::sqrt(norm);
    for (double& c : u) c /= norm;
    const double s = std::accumulate(u.begin(), u.end(), 0.0);
    const double t = -s + std::sqrt(s * s + excess);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + t * u[i];
    if (!symmetric) {
      out.push_back(std::move(x));
      continue;
    }
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<double> y = x;
      for (std::size_t i = 0; i < d; ++i) y[i] = x[perm[i]];
      out.push_back(std::move(y));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// A/B bounds

namespace {

double relative_margin(double lhs, double rhs) {
  const double scale = std::max(std::fabs(lhs), std::fabs(rhs));
  if (scale == 0.0) return 0.0;
  return (lhs - rhs) / scale;
}

}  // namespace

BoundCheckReport ab_bound_check(const EffectiveSystem& system, const TestFunctionPair& pair,
                                BoundSide side, const std::vector<double>& shell_radii,
                                std::size_t samples_per_shell) {
  const SdeSystem& s = system.system();
  const std::size_t n = s.state_size();
  BoundCheckReport rep;
  rep.side = side;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  for (double radius : shell_radii) {
    ShellReport sh;
    sh.radius = radius;
    sh.worst_a_margin = sh.worst_trace_margin = std::numeric_limits<double>::infinity();
    sh.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& x : shell_samples(n, s.d(), radius, samples_per_shell)) {
      try {
        const double rho = euclidean_norm(x);
        const double u = 0.5 * rho * rho;
        const Eigen::MatrixXd a = diffusion_matrix(s, x, 0.0);
        const double q = quadratic_form(s, x, 0.0);
        const std::vector<double> b = system.drift(x, 0.0);
        double xb = 0.0, bnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          xb += x[i] * b[i];
          bnorm += b[i] * b[i];
        }
        const double rhs_trace = a.trace() + 2.0 * xb;
        const double au = pair.A(u), bu = pair.B(u);
        if (!std::isfinite(q) || !std::isfinite(rhs_trace) || !std::isfinite(au) ||
            !std::isfinite(bu))
          throw DomainError("", "non-finite value");
        double ma, mt;
        if (side == BoundSide::UpperA_LowerTrace) {
          ma = relative_margin(au, q);
          mt = relative_margin(q * bu, rhs_trace);
        } else {
          ma = relative_margin(q, au);
          mt = relative_margin(rhs_trace, q * bu);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        sh.min_eigenvalue = std::min(sh.min_eigenvalue, lmin);
        sh.max_drift_norm = std::max(sh.max_drift_norm, std::sqrt(bnorm));
        if (!(lmin > 1e-12 * std::max(1.0, a.trace()))) rep.nondegenerate = false;
        sh.worst_a_margin = std::min(sh.worst_a_margin, ma);
        sh.worst_trace_margin = std::min(sh.worst_trace_margin, mt);
        ++sh.points;
        if (std::min(ma, mt) < -kInequalityTolerance) {
          ++sh.violations;
          if (rep.violating_points.size() < 16) rep.violating_points.push_back(x);
        }
      } catch (const DomainError& e) {
        ++sh.skipped;
        if (rep.skipped_reasons.size() < 4) rep.skipped_reasons.push_back(e.what());
      }
    }
    if (sh.points == 0) {
      sh.worst_a_margin = sh.worst_trace_margin = sh.min_eigenvalue = 0.0;
    } else {
      rep.worst_margin = std::min({rep.worst_margin, sh.worst_a_margin, sh.worst_trace_margin});
    }
    rep.samples_checked += sh.points;
    rep.skipped += sh.skipped;
    rep.violations += sh.violations;
    rep.shells.push_back(sh);
  }
  if (rep.samples_checked == 0) {
    rep.worst_margin = 0.0;
    rep.nondegenerate = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Generator and Lyapunov checks

double apply_generator(const EffectiveSystem& system, const Expression& V,
                       std::span<const double> x, double t) {
  const SdeSystem& s = system.system();
  const std::size_t n = s.state_size();
  if (V.dimension() != n) throw std::invalid_argument("V must be parsed with dimension d+1");
  if (x.size() != n) throw std::invalid_argument("state size mismatch");
  const Eigen::MatrixXd a = diffusion_matrix(s, x, t);
  const std::vector<double> b = system.drift(x, t);
  double lv = V.depends_on_time() ? V.partial_derivative(x, t, kTimeIndex, 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (b[i] != 0.0) lv += b[i] * V.partial_derivative(x, t, i, 1);
    if (a(ii, ii) != 0.0) lv += 0.5 * a(ii, ii) * V.partial_derivative(x, t, i, 2);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double aij = a(ii, static_cast<Eigen::Index>(j));
      if (aij != 0.0) lv += aij * V.mixed_partial(x, t, i, j);  // a_ij = a_ji
    }
  }
  return lv;
}

LyapunovGrid LyapunovGrid::standard(std::size_t state_size, double horizon) {
  LyapunovGrid g;
  const double lo = std::max(1.0, std::sqrt(static_cast<double>(state_size)));
  g.radii.push_back(lo);
  for (int k = 0; k <= 12; ++k) {
    const double r = std::pow(10.0, k / 4.0);
    if (r > lo * (1.0 + 1e-12)) g.radii.push_back(r);
  }
  g.times = {0.0, 0.5 * horizon, horizon};
  return g;
}

namespace {

struct GridScan {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  bool negative_v = false;
  std::vector<double> shell_min_v;  // per radius, over x and t
  double max_v_at_horizon = -std::numeric_limits<double>::infinity();
  std::string first_error;
};

// sign = +1 checks LV <= lambda V, sign = -1 checks LV >= lambda V.
GridScan scan(const EffectiveSystem& system, const Expression& V, double lambda,
              const LyapunovGrid& grid, double sign, double horizon) {
  const SdeSystem& s = system.system();
  GridScan g;
  for (double radius : grid.radii) {
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& x : shell_samples(s.state_size(), s.d(), radius, grid.samples_per_shell)) {
      for (double t : grid.times) {
        try {
          const double v = V.evaluate(x, t);
          const double lv = apply_generator(system, V, x, t);
          if (!std::isfinite(v) || !std::isfinite(lv)) throw DomainError("", "non-finite value");
          vmin = std::min(vmin, v);
          if (v < 0.0) g.negative_v = true;
          if (t == horizon) g.max_v_at_horizon = std::max(g.max_v_at_horizon, v);
          const double slack = sign * (lambda * v - lv);  // >= 0 when holding
          const double scaled = slack / (1.0 + std::fabs(lv));
          g.worst = std::min(g.worst, scaled);
          if (scaled < -kInequalityTolerance) ++g.violations;
          ++g.checked;
        } catch (const DomainError& e) {
          ++g.skipped;
          if (g.first_error.empty()) g.first_error = e.what();
        }
      }
    }
    g.shell_min_v.push_back(vmin);
  }
  if (g.checked == 0) g.worst = 0.0;
  return g;
}

}  // namespace

CriterionVerdict lyapunov_nonexplosion_check(const EffectiveSystem& system, const Expression& V,
                                             double lambda, const LyapunovGrid& grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  CriterionVerdict out;
  out.which_theorem = "lyapunov-nonexplosion";
  const GridScan g = scan(system, V, lambda, grid, +1.0, -1.0);
  out.samples_checked = g.checked;
  out.inequality_margin = g.worst;

  // Growth: shell minima strictly increasing and the last one more than ten
  // times the one at radius 10.
  bool growth = g.shell_min_v.size() >= 2;
  for (std::size_t k = 1; k < g.shell_min_v.size(); ++k)
    if (!(g.shell_min_v[k] > g.shell_min_v[k - 1])) growth = false;
  std::size_t ref = 0;
  for (std::size_t k = 0; k < grid.radii.size(); ++k)
    if (std::fabs(std::log(grid.radii[k] / 10.0)) < std::fabs(std::log(grid.radii[ref] / 10.0)))
      ref = k;
  if (growth && !(g.shell_min_v.back() > 10.0 * g.shell_min_v[ref])) growth = false;

  std::string notes = "sampled evidence over " + std::to_string(g.checked) + " (t, x) points";
  if (g.skipped > 0) notes += "; " + std::to_string(g.skipped) + " skipped: " + g.first_error;
  if (g.negative_v) notes += "; V < 0 at sampled points";
  if (g.violations > 0) notes += "; LV - lambda V > 0 at " + std::to_string(g.violations) + " points";
  if (!growth) notes += "; growth condition fails (min V over shells not increasing to 10x)";
  out.notes = notes;
  if (g.checked > 0 && g.violations == 0 && growth && !g.negative_v)
    out.verdict = Verdict::SufficientNonExplosion;
  return out;
}

CriterionVerdict lyapunov_explosion_check(const EffectiveSystem& system, const Expression& V,
                                          double lambda, double horizon,
                                          const LyapunovGrid& grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  CriterionVerdict out;
  out.which_theorem = "lyapunov-explosion";
  LyapunovGrid g2 = grid;
  if (std::find(g2.times.begin(), g2.times.end(), horizon) == g2.times.end())
    g2.times.push_back(horizon);
  const GridScan g = scan(system, V, lambda, g2, -1.0, horizon);
  out.samples_checked = g.checked;
  out.inequality_margin = g.worst;

  const auto& x0 = system.system().initial_state();
  double v0 = std::numeric_limits<double>::quiet_NaN();
  try {
    v0 = V.evaluate(x0, 0.0);
  } catch (const DomainError&) {
  }
  const double sup_t = std::max(g.max_v_at_horizon, [&] {
    try {
      return V.evaluate(x0, horizon);
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }());
  const bool bounded = std::isfinite(sup_t);
  const bool gate = bounded && v0 > std::exp(-lambda * horizon) * sup_t;

  std::string notes = "sampled evidence over " + std::to_string(g.checked) + " (t, x) points";
  if (g.skipped > 0) notes += "; " + std::to_string(g.skipped) + " skipped: " + g.first_error;
  if (g.violations > 0) notes += "; LV < lambda V at " + std::to_string(g.violations) + " points";
  if (!bounded) notes += "; V not bounded on the grid";
  if (!gate)
    notes += "; V(0,x0) = " + std::to_string(v0) + " does not exceed exp(-lambda T) sup V(T,.) = " +
             std::to_string(std::exp(-lambda * horizon) * sup_t);
  out.notes = notes;
  if (g.checked > 0 && g.violations == 0 && gate) out.verdict = Verdict::SufficientExplosion;
  return out;
}

// ---------------------------------------------------------------------------
// Per-component classification

std::vector<ComponentVerdict> theorem_main_classify(const SdeSystem& system,
                                                    const std::vector<ComponentCriterion>& criteria,
                                                    BetaForm form, std::size_t samples_per_shell) {
  if (criteria.size() != system.d())
    throw std::invalid_argument("need one criterion per M-component (" +
                                std::to_string(system.d()) + "), got " +
                                std::to_string(criteria.size()));
  std::vector<ComponentVerdict> out;
  for (std::size_t j = 1; j <= system.d(); ++j) {
    const ComponentCriterion& c = criteria[j - 1];
    const EffectiveSystem eff(system, MeasureTag::foellmer(j), form);
    ComponentVerdict cv;
    cv.component = j;
    CriterionVerdict& v = cv.criterion;
    const bool explosion_side = c.side == BoundSide::LowerA_UpperTrace;
    v.which_theorem = explosion_side ? "radial-explosion" : "radial-nonexplosion";
    v.which_theorem += " under P" + std::to_string(j);
    BoundCheckReport bounds = ab_bound_check(
        eff, c.pair, c.side, default_shell_radii(system.state_size(), c.pair.r),
        samples_per_shell);
    IntegralTestResult integral = integral_test(c.pair);
    v.inequality_margin = bounds.worst_margin;
    v.samples_checked = bounds.samples_checked;
    v.integral_classification = integral.classification;

    std::vector<std::string> notes{"sampled evidence"};
    if (!bounds.holds())
      notes.push_back(std::to_string(bounds.violations) + " of " +
                      std::to_string(bounds.samples_checked) + " sampled states violate the bounds");
    if (bounds.skipped > 0) notes.push_back(std::to_string(bounds.skipped) + " states skipped");
    if (explosion_side && !bounds.nondegenerate)
      notes.push_back("a(x) is degenerate at sampled states (nondegeneracy fails)");
    if (!integral.diagnostic.empty()) notes.push_back("integral: " + integral.diagnostic);
    const IntegralClass wanted = explosion_side ? IntegralClass::Convergent
                                                : IntegralClass::Divergent;
    if (integral.classification != wanted)
      notes.push_back(std::string("integral is ") + to_string(integral.classification) +
                      ", the criterion needs " + to_string(wanted));
    for (std::size_t k = 0; k < notes.size(); ++k) v.notes += (k ? "; " : "") + notes[k];

    if (bounds.holds() && integral.classification == wanted) {
      if (!explosion_side) {
        v.verdict = Verdict::SufficientNonExplosion;
        cv.evidence = ComponentEvidence::MartingaleEvidence;
      } else if (bounds.nondegenerate) {
        v.verdict = Verdict::SufficientExplosion;
        cv.evidence = ComponentEvidence::StrictLocalEvidence;
      }
    }
    v.bounds = std::move(bounds);
    v.integral = std::move(integral);
    out.push_back(std::move(cv));
  }
  return out;
}

const char* to_string(IntegralClass c) {
  switch (c) {
    case IntegralClass::Divergent: return "Divergent";
    case IntegralClass::Convergent: return "Convergent";
    case IntegralClass::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(BoundSide s) {
  return s == BoundSide::UpperA_LowerTrace ? "UpperA_LowerTrace" : "LowerA_UpperTrace";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SufficientNonExplosion: return "SufficientNonExplosion";
    case Verdict::SufficientExplosion: return "SufficientExplosion";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(ComponentEvidence e) {
  switch (e) {
    case ComponentEvidence::MartingaleEvidence: return "MartingaleEvidence";
    case ComponentEvidence::StrictLocalEvidence: return "StrictLocalEvidence";
    case ComponentEvidence::Inconclusive: return "Inconclusive";
  }
  return "?";
}

}  // namespace slm
