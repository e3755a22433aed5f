#include "slm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace slm {

void SimConfig::validate(const SdeSystem& system) const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!(dt_base > 0.0) || !std::isfinite(dt_base)) fail("dt_base must be positive");
  if (dt_base > system.horizon()) fail("dt_base must not exceed the horizon T");
  if (!(barrier_down > 0.0) || !std::isfinite(barrier_down))
    fail("barrier_down must be positive");
  if (!(barrier_up > barrier_down) || !std::isfinite(barrier_up))
    fail("barrier_up must be finite and above barrier_down");
  const auto& x0 = system.initial_state();
  const double m0 = *std::min_element(x0.begin(), x0.end() - 1);
  const double m1 = *std::max_element(x0.begin(), x0.end() - 1);
  if (!(barrier_down < m0)) fail("barrier_down must lie below every initial M-component");
  if (!(m1 < barrier_up)) fail("barrier_up must lie above every initial M-component");
  if (max_steps == 0) fail("max_steps must be positive");
  if (!(step_eta > 0.0)) fail("step_eta must be positive");
  if (!(corrector_weight >= 0.0 && corrector_weight <= 1.0))
    fail("corrector_weight must lie in [0, 1]");
  if (!(probe_fraction > 0.0 && probe_fraction <= 1.0))
    fail("probe_fraction must lie in (0, 1]");
}

bool PathOutcome::exploded() const noexcept {
  return std::any_of(events.begin(), events.end() - 1,
                     [](const ComponentEvent& e) { return e.kind == EventKind::HitUp; });
}

void draw_correlated(const Eigen::MatrixXd& factor, PhiloxStream& stream, double sqrt_dt,
                     bool flip, std::span<double> z, std::span<double> out) {
  const std::size_t m = z.size();
  for (std::size_t k = 0; k < m; ++k) z[k] = flip ? -stream.normal() : stream.normal();
  // L is lower triangular for Cholesky factors but not for eigen factors.
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += factor(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(k)) * z[k];
    out[i] = s * sqrt_dt;
  }
}

namespace {

struct Workspace {
  explicit Workspace(std::size_t n)
      : sigma(n), mu(n), z(n), dw(n), xp(n), lp(n), sigma_p(n), mu_p(n) {}
  std::vector<double> sigma, mu, z, dw, xp, lp, sigma_p, mu_p;
  double sigma_bar = 0.0, sigma_bar_p = 0.0;
};

// Coefficients and the full drift vector at x. False on a domain error or a
// non-finite value.
bool evaluate_state(const EffectiveSystem& sys, bool needs_norm, const double* x, std::size_t n,
                    double t, double* sigma, double& sigma_bar, double* mu) noexcept {
  const SdeSystem& s = sys.system();
  const std::size_t d = n - 1;
  const double norm = needs_norm ? euclidean_norm(std::span<const double>(x, n)) : 0.0;
  const EvalPoint p{x, n, norm, t};
  bool err = false;
  for (std::size_t i = 0; i < d; ++i) sigma[i] = s.sigma_diag()[i].evaluate_fast(p, err);
  sigma_bar = s.sigma_bar().evaluate_fast(p, err);
  if (sys.driftless()) {
    std::fill(mu, mu + n, 0.0);
  } else {
    const double b = s.b().evaluate_fast(p, err);
    sys.drift_from(p, std::span<const double>(sigma, d), sigma_bar, b,
                   std::span<double>(mu, n), err);
  }
  if (err) return false;
  for (std::size_t i = 0; i < d; ++i)
    if (!std::isfinite(sigma[i])) return false;
  if (!std::isfinite(sigma_bar)) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(mu[i])) return false;
  return true;
}

std::string describe_failure(const EffectiveSystem& sys, std::span<const double> x, double t) {
  try {
    (void)evaluate_coefficients(sys.system(), x, t);
    (void)sys.drift(x, t);
  } catch (const std::exception& e) {
    return std::string(e.what()) + " at t=" + std::to_string(t);
  }
  return "non-finite coefficient or state at t=" + std::to_string(t);
}

}  // namespace

PathOutcome simulate_path(const EffectiveSystem& sys, const SimConfig& cfg, std::uint64_t seed,
                          std::uint64_t path_index, PathTrace* trace) {
  const SdeSystem& s = sys.system();
  const std::size_t n = s.state_size();
  const std::size_t d = n - 1;
  const double horizon = s.horizon();
  const Eigen::MatrixXd& factor = s.correlation_factor();
  const bool log_scheme = cfg.scheme == Scheme::EulerLog;
  const bool corrector = cfg.drift == DriftTreatment::PredictorCorrector && !sys.driftless() &&
                         cfg.corrector_weight > 0.0;
  const double alpha = cfg.corrector_weight;
  const double probe_level = cfg.barrier_up * cfg.probe_fraction;
  const double dt_floor = cfg.dt_base * 1e-6;
  const bool needs_norm = sys.uses_norm();
  // The last normal only drives v; skip it when v has no diffusion.
  std::size_t draws = n;
  if (s.sigma_bar().is_zero()) {
    bool coupled = false;
    for (std::size_t i = 0; i < d; ++i)
      if (factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) != 0.0) coupled = true;
    if (!coupled) draws = d;
  }

  PathOutcome out;
  out.seed_used = stream_key(seed, cfg.antithetic ? path_index / 2 : path_index);
  const bool flip = cfg.antithetic && (path_index % 2 == 1);
  PhiloxStream rng(out.seed_used);

  std::vector<double> x = s.initial_state();
  std::vector<double> logm(d);
  for (std::size_t i = 0; i < d; ++i) logm[i] = std::log(x[i]);
  std::vector<char> frozen(n, 0);
  out.events.assign(n, ComponentEvent{});
  out.probe_up_time.assign(n, std::nullopt);

  if (x[d] <= cfg.barrier_down) {
    out.v_down_time = 0.0;
    if (s.v_absorbing()) {
      out.events[d] = {EventKind::HitDown, 0.0};
      frozen[d] = 1;
    }
  }

  Workspace w(n);
  double t = 0.0;
  if (trace) {
    trace->times.push_back(t);
    trace->states.push_back(x);
  }

  bool exploded = false;
  while (t < horizon && !exploded) {
    if (out.steps_used >= cfg.max_steps) {
      out.status = PathStatus::MaxSteps;
      out.failure = "max_steps exhausted at t=" + std::to_string(t);
      break;
    }
    if (!evaluate_state(sys, needs_norm, x.data(), n, t, w.sigma.data(), w.sigma_bar, w.mu.data())) {
      out.status = PathStatus::DomainError;
      out.failure = describe_failure(sys, x, t);
      break;
    }

    double dt = cfg.dt_base;
    if (cfg.adaptive) {
      if (cfg.step_rule == StepRule::LocalVariance) {
        double rate = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (frozen[i]) continue;
          rate = std::max(rate, w.sigma[i] * w.sigma[i] + std::fabs(w.mu[i]) / x[i]);
        }
        if (!frozen[d]) {
          const double v = x[d];
          rate = std::max(rate, w.sigma_bar * w.sigma_bar / (1.0 + v * v) +
                                    std::fabs(w.mu[d]) / (1.0 + std::fabs(v)));
        }
        dt = cfg.dt_base / (1.0 + cfg.dt_base * rate / cfg.step_eta);
      } else {
        double q = 0.0, norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          w.z[i] = i < d ? x[i] * x[i] * w.sigma[i] : x[d] * w.sigma_bar;
          norm2 += x[i] * x[i];
        }
        for (std::size_t k = 0; k < n; ++k) {
          double c = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            c += factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * w.z[i];
          q += c * c;
        }
        dt = cfg.dt_base / (1.0 + q / (1.0 + norm2));
      }
      dt = std::max(dt, dt_floor);
    }
    double t_next = t + dt;
    if (t_next >= horizon || horizon - t_next < 1e-12 * horizon) {
      dt = horizon - t;
      t_next = horizon;
    }

    draw_correlated(factor, rng, std::sqrt(dt), flip, std::span<double>(w.z.data(), draws), w.dw);

    // Predictor (plain Euler step).
    for (std::size_t i = 0; i < d; ++i) {
      if (frozen[i]) {
        w.xp[i] = x[i];
        w.lp[i] = logm[i];
        continue;
      }
      const double si = w.sigma[i];
      if (log_scheme) {
        w.lp[i] = logm[i] + (w.mu[i] / x[i] - 0.5 * si * si) * dt + si * w.dw[i];
        w.xp[i] = std::exp(w.lp[i]);
      } else {
        w.xp[i] = x[i] + w.mu[i] * dt + x[i] * si * w.dw[i];
      }
    }
    w.xp[d] = frozen[d] ? x[d] : x[d] + w.mu[d] * dt + w.sigma_bar * w.dw[d];

    if (corrector) {
      bool usable = true;
      for (std::size_t i = 0; i < d; ++i)
        if (!(w.xp[i] > 0.0) || !std::isfinite(w.xp[i])) usable = false;
      if (!std::isfinite(w.xp[d])) usable = false;
      if (usable)
        usable = evaluate_state(sys, needs_norm, w.xp.data(), n, t_next, w.sigma_p.data(), w.sigma_bar_p,
                                w.mu_p.data());
      if (usable) {
        for (std::size_t i = 0; i < d; ++i) {
          if (frozen[i]) continue;
          const double si = w.sigma[i];
          if (log_scheme) {
            const double g = (1.0 - alpha) * w.mu[i] / x[i] + alpha * w.mu_p[i] / w.xp[i];
            w.lp[i] = logm[i] + (g - 0.5 * si * si) * dt + si * w.dw[i];
            w.xp[i] = std::exp(w.lp[i]);
          } else {
            const double g = (1.0 - alpha) * w.mu[i] + alpha * w.mu_p[i];
            w.xp[i] = x[i] + g * dt + x[i] * si * w.dw[i];
          }
        }
        if (!frozen[d])
          w.xp[d] = x[d] + ((1.0 - alpha) * w.mu[d] + alpha * w.mu_p[d]) * dt +
                    w.sigma_bar * w.dw[d];
      }
    }

    const double t_prev = t;
    t = t_next;
    ++out.steps_used;

    // Crossing time of `level` on the segment from a (at t_prev) to b (at t).
    const auto crossing = [&](double a, double b, double level) {
      const double frac = b == a ? 1.0 : std::clamp((level - a) / (b - a), 0.0, 1.0);
      return t_prev + frac * dt;
    };
    const auto log_crossing = [&](double a, double b, double level) {
      if (a > 0.0 && b > 0.0) return crossing(std::log(a), std::log(b), std::log(level));
      return crossing(a, b, level);
    };

    bool finite = true;
    for (std::size_t i = 0; i < d; ++i) {
      if (frozen[i]) continue;
      double xi = w.xp[i];
      if (std::isnan(xi)) {
        finite = false;
        continue;
      }
      if (log_scheme) logm[i] = w.lp[i];
      if (!out.probe_up_time[i] && xi >= probe_level)
        out.probe_up_time[i] = log_crossing(x[i], xi, probe_level);
      if (xi >= cfg.barrier_up) {
        out.events[i] = {EventKind::HitUp, log_crossing(x[i], xi, cfg.barrier_up)};
        exploded = true;
      } else if (xi <= cfg.barrier_down) {
        out.events[i] = {EventKind::HitDown, log_crossing(x[i], xi, cfg.barrier_down)};
        // barrier_down stands in for 0 so that 1/M terms stay finite.
        xi = cfg.barrier_down;
        if (log_scheme) logm[i] = std::log(xi);
        frozen[i] = 1;
      }
      x[i] = xi;
    }
    if (!frozen[d]) {
      const double v0 = x[d];
      const double v = w.xp[d];
      if (std::isnan(v)) finite = false;
      x[d] = v;
      if (!out.probe_up_time[d] && std::fabs(v) >= probe_level)
        out.probe_up_time[d] = crossing(std::fabs(v0), std::fabs(v), probe_level);
      if (v <= cfg.barrier_down) {
        const double tc = crossing(v0, v, cfg.barrier_down);
        if (!out.v_down_time) out.v_down_time = tc;
        if (s.v_absorbing()) {
          out.events[d] = {EventKind::HitDown, tc};
          x[d] = cfg.barrier_down;
          frozen[d] = 1;
        }
      }
      // v at its infinity proxy stays there; the M-components carry on.
      if (!frozen[d] && std::fabs(v) >= cfg.barrier_up) {
        out.events[d] = {EventKind::HitUp, crossing(std::fabs(v0), std::fabs(v), cfg.barrier_up)};
        x[d] = std::copysign(cfg.barrier_up, v);
        frozen[d] = 1;
      }
    }
    if (!finite) {
      out.status = PathStatus::DomainError;
      out.failure = "state became NaN at t=" + std::to_string(t);
      break;
    }
    if (trace) {
      trace->times.push_back(t);
      trace->states.push_back(x);
    }
    // With every M absorbed nothing left can change an M-component.
    if (std::all_of(frozen.begin(), frozen.begin() + static_cast<std::ptrdiff_t>(d),
                    [](char f) { return f != 0; }))
      break;
  }
  out.terminal_state = std::move(x);
  return out;
}

BatchResult simulate_batch(const EffectiveSystem& sys, const SimConfig& cfg, std::uint64_t seed,
                           std::size_t n_paths) {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be at least 1");
  cfg.validate(sys.system());
  BatchResult result;
  result.outcomes.resize(n_paths);

  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_paths));
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failed{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= n_paths) break;
        const std::size_t end = std::min(n_paths, begin + kChunk);
        for (std::size_t k = begin; k < end; ++k) {
          result.outcomes[k] = simulate_path(sys, cfg, seed, k);
          if (!result.outcomes[k].ok()) failed.fetch_add(1, std::memory_order_relaxed);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n_paths);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  result.failed = failed.load();
  if (result.failed * 100 > n_paths) {
    std::string first;
    for (const auto& o : result.outcomes)
      if (!o.ok()) {
        first = o.failure;
        break;
      }
    throw NumericalError(std::to_string(result.failed) + " of " + std::to_string(n_paths) +
                         " paths failed (more than 1%); first failure: " + first);
  }
  return result;
}

}  // namespace slm
