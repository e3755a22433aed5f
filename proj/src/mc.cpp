#include "slm/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slm {

EstimateWithCI mean_estimate(const std::vector<double>& values) {
  EstimateWithCI e;
  e.n_effective = values.size();
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  e.point = mean;
  if (values.size() > 1)
    e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                            static_cast<double>(values.size()));
  return e;
}

EstimateWithCI binomial_estimate(std::size_t hits, std::size_t n) {
  EstimateWithCI e;
  e.n_effective = n;
  if (n == 0) return e;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.point = p;
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return e;
}

TerminalMean terminal_mean_from(const BatchResult& batch, std::size_t j, double barrier_up) {
  TerminalMean out;
  std::vector<double> values;
  values.reserve(batch.outcomes.size());
  for (const auto& o : batch.outcomes) {
    if (!o.ok()) {
      ++out.discarded;
      continue;
    }
    double v = o.terminal_state[j - 1];
    if (o.exploded()) {
      ++out.hit_up;
      if (o.events[j - 1].kind == EventKind::HitUp) v = barrier_up;
    }
    if (o.events[j - 1].kind == EventKind::HitDown) ++out.hit_down;
    values.push_back(v);
  }
  out.estimate = mean_estimate(values);
  out.biased = out.hit_up > 0;
  return out;
}

ExplosionEstimate explosion_from(const BatchResult& batch, std::size_t j) {
  ExplosionEstimate out;
  std::size_t n = 0, hits = 0, probe_hits = 0;
  for (const auto& o : batch.outcomes) {
    if (!o.ok()) {
      ++out.discarded;
      continue;
    }
    ++n;
    if (o.events[j - 1].kind == EventKind::HitUp) {
      ++hits;
      out.hit_times.push_back(o.events[j - 1].time);
    }
    if (o.probe_up_time[j - 1].has_value()) ++probe_hits;
  }
  std::sort(out.hit_times.begin(), out.hit_times.end());
  out.estimate = binomial_estimate(hits, n);
  out.at_lower_barrier = binomial_estimate(probe_hits, n);
  out.barrier_delta = std::fabs(out.at_lower_barrier.point - out.estimate.point);
  // Paths above the lower barrier include those above barrier_up, so the
  // delta is itself a binomial frequency; a few stragglers are noise.
  const double delta_se = binomial_estimate(probe_hits - hits, n).std_error;
  out.undetermined = out.barrier_delta > EstimateWithCI::kZ * out.estimate.std_error &&
                     out.barrier_delta > EstimateWithCI::kZ * delta_se;
  return out;
}

TerminalMean estimate_terminal_mean(const SdeSystem& system, const SimConfig& config,
                                    std::uint64_t seed, std::size_t n_paths, std::size_t j) {
  if (j == 0 || j > system.d()) throw std::invalid_argument("component j must lie in 1..d");
  const EffectiveSystem eff(system, MeasureTag::original());
  return terminal_mean_from(simulate_batch(eff, config, seed, n_paths), j, config.barrier_up);
}

ExplosionEstimate estimate_explosion_probability(const SdeSystem& system,
                                                 const SimConfig& config, std::uint64_t seed,
                                                 std::size_t n_paths, MeasureTag measure,
                                                 std::size_t j, BetaForm form) {
  if (j == 0 || j > system.d()) throw std::invalid_argument("component j must lie in 1..d");
  const EffectiveSystem eff(system, measure, form);
  return explosion_from(simulate_batch(eff, config, seed, n_paths), j);
}

std::uint64_t seed_for_original(std::uint64_t master) { return derive_seed(master, 0); }

std::uint64_t seed_for_foellmer(std::uint64_t master, std::size_t j) {
  return derive_seed(master, 1000 + j);
}

DualityReport duality_from(std::size_t j, const TerminalMean& mean,
                           const ExplosionEstimate& explosion) {
  DualityReport r;
  r.component = j;
  r.mean = mean;
  r.explosion = explosion;
  r.gap = std::fabs(mean.estimate.point + explosion.estimate.point - 1.0);
  r.combined_se = std::hypot(mean.estimate.std_error, explosion.estimate.std_error);
  r.pass = r.gap <= EstimateWithCI::kZ * r.combined_se;
  return r;
}

DualityReport duality_check(const SdeSystem& system, const SimConfig& config,
                            std::uint64_t seed, std::size_t n_paths, std::size_t j,
                            BetaForm form) {
  const TerminalMean mean =
      estimate_terminal_mean(system, config, seed_for_original(seed), n_paths, j);
  const ExplosionEstimate expl = estimate_explosion_probability(
      system, config, seed_for_foellmer(seed, j), n_paths, MeasureTag::foellmer(j), j, form);
  return duality_from(j, mean, expl);
}

namespace {

BoundaryFrequencies boundary_frequencies(const BatchResult& batch) {
  std::size_t n = 0, zero = 0, inf = 0;
  for (const auto& o : batch.outcomes) {
    if (!o.ok()) continue;
    ++n;
    if (o.v_down_time) ++zero;
    if (o.events.back().kind == EventKind::HitUp) ++inf;
  }
  return {binomial_estimate(zero, n), binomial_estimate(inf, n)};
}

struct TaxonomyCase {
  const char* label;
  // Observed hits: zero under P, infinity under P, zero under P^j, infinity under P^j.
  bool zero_p, inf_p, zero_pj, inf_pj;
};

constexpr TaxonomyCase kCases[] = {
    {"martingale case 1", false, false, false, false},
    {"martingale case 2", true, false, true, false},
    {"martingale case 3", true, true, true, false},
    {"martingale case 4", false, true, false, false},
    {"martingale case 5", true, false, false, false},
    {"strict case 1", true, false, true, true},
    {"strict case 2", true, false, false, true},
    {"strict case 3", false, false, false, true},
    {"strict case 4", false, false, true, true},
    {"strict case 5", false, false, true, true},
    {"strict case 6", false, true, true, true},
};

}  // namespace

BoundaryDiagnostic boundary_diagnostic(const BatchResult& under_p, const BatchResult& under_pj) {
  BoundaryDiagnostic d;
  d.under_p = boundary_frequencies(under_p);
  d.under_pj = boundary_frequencies(under_pj);
  const bool zp = d.under_p.hits_zero.point > 0.0, ip = d.under_p.hits_infinity.point > 0.0;
  const bool zq = d.under_pj.hits_zero.point > 0.0, iq = d.under_pj.hits_infinity.point > 0.0;
  for (const auto& c : kCases)
    if (c.zero_p == zp && c.inf_p == ip && c.zero_pj == zq && c.inf_pj == iq)
      d.consistent_cases.emplace_back(c.label);
  return d;
}

FinalLabel decide(const EstimateWithCI& defect, const ExplosionEstimate& explosion,
                  bool biased_mean) {
  if (biased_mean || explosion.undetermined) return FinalLabel::Inconclusive;
  if (defect.contains(0.0) && explosion.estimate.contains(0.0)) return FinalLabel::Martingale;
  if (defect.lower() > 0.0 && explosion.estimate.lower() > 0.0)
    return FinalLabel::StrictLocalMartingale;
  return FinalLabel::Inconclusive;
}

ClassificationReport classify(const SdeSystem& system, const SimConfig& config,
                              std::uint64_t seed, std::size_t n_paths,
                              const std::vector<ComponentCriterion>& criteria, BetaForm form) {
  ClassificationReport rep;
  rep.system_name = system.name();
  rep.n_paths = n_paths;
  rep.seed = seed;

  std::vector<ComponentVerdict> analytic;
  if (!criteria.empty()) analytic = theorem_main_classify(system, criteria, form);

  const EffectiveSystem under_p(system, MeasureTag::original());
  const BatchResult batch_p = simulate_batch(under_p, config, seed_for_original(seed), n_paths);

  for (std::size_t j = 1; j <= system.d(); ++j) {
    const EffectiveSystem under_pj(system, MeasureTag::foellmer(j), form);
    const BatchResult batch_pj =
        simulate_batch(under_pj, config, seed_for_foellmer(seed, j), n_paths);

    ComponentClassification c;
    c.component = j;
    c.mean = terminal_mean_from(batch_p, j, config.barrier_up);
    c.explosion = explosion_from(batch_pj, j);
    c.defect = c.mean.estimate;
    c.defect.point = 1.0 - c.mean.estimate.point;
    c.duality = duality_from(j, c.mean, c.explosion);
    c.boundary = boundary_diagnostic(batch_p, batch_pj);
    c.final_label = decide(c.defect, c.explosion, c.mean.biased);

    if (c.mean.biased)
      c.notes.push_back(std::to_string(c.mean.hit_up) +
                        " paths reached barrier_up under P; the mean is biased");
    if (c.explosion.undetermined)
      c.notes.push_back("explosion frequency moves by " + std::to_string(c.explosion.barrier_delta) +
                        " when the barrier is lowered 100x (more than the CI half-width)");
    if (c.mean.estimate.point > 1.0 + EstimateWithCI::kZ * c.mean.estimate.std_error)
      c.notes.push_back("supermartingale bound violated: mean exceeds 1 + 3 SE");
    if (!c.duality.pass)
      c.notes.push_back("duality gap " + std::to_string(c.duality.gap) +
                        " exceeds 3 combined standard errors");
    if (c.mean.discarded + c.explosion.discarded > 0)
      c.notes.push_back(std::to_string(c.mean.discarded + c.explosion.discarded) +
                        " paths discarded (max_steps or domain errors)");

    if (!analytic.empty()) {
      c.analytic = analytic[j - 1];
      const ComponentEvidence e = c.analytic->evidence;
      const bool agree =
          (e == ComponentEvidence::MartingaleEvidence && c.final_label == FinalLabel::Martingale) ||
          (e == ComponentEvidence::StrictLocalEvidence &&
           c.final_label == FinalLabel::StrictLocalMartingale);
      c.analytic_agreement = agree ? "AGREE" : "DISAGREE";
    } else {
      c.analytic_agreement = "NO-ANALYTIC";
    }
    rep.components.push_back(std::move(c));
  }
  return rep;
}

const char* to_string(FinalLabel label) {
  switch (label) {
    case FinalLabel::Martingale: return "Martingale";
    case FinalLabel::StrictLocalMartingale: return "StrictLocalMartingale";
    case FinalLabel::Inconclusive: return "Inconclusive";
  }
  return "?";
}

}  // namespace slm
