#include "slm/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace slm {

namespace {

using ojson = nlohmann::ordered_json;

// NaN and infinities have no JSON form; they become strings.
ojson num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

ojson estimate_json(const EstimateWithCI& e) {
  ojson j;
  j["point"] = num(e.point);
  j["std_error"] = num(e.std_error);
  j["ci_lower"] = num(e.lower());
  j["ci_upper"] = num(e.upper());
  j["n"] = e.n_effective;
  return j;
}

ojson system_header(const SystemConfig& s) {
  ojson j;
  j["name"] = s.spec.name;
  if (!s.description.empty()) j["description"] = s.description;
  if (!s.note.empty()) j["note"] = s.note;
  j["d"] = s.spec.d;
  j["component_names"] = s.component_names;
  if (!s.claimed_outcome.empty()) j["claimed_outcome"] = s.claimed_outcome;
  return j;
}

ojson sim_config_json(const SimConfig& c) {
  ojson j;
  j["dt_base"] = num(c.dt_base);
  j["barrier_up"] = num(c.barrier_up);
  j["barrier_down"] = num(c.barrier_down);
  j["adaptive"] = c.adaptive;
  j["scheme"] = c.scheme == Scheme::EulerLog ? "euler-log" : "euler-direct";
  j["drift"] = c.drift == DriftTreatment::Explicit ? "explicit" : "predictor-corrector";
  j["corrector_weight"] = num(c.corrector_weight);
  j["step_rule"] = c.step_rule == StepRule::LocalVariance ? "local-variance" : "quadratic-form";
  j["step_eta"] = num(c.step_eta);
  j["antithetic"] = c.antithetic;
  j["probe_fraction"] = num(c.probe_fraction);
  j["max_steps"] = c.max_steps;
  // threads is deliberately absent: reports must not depend on it.
  return j;
}

ojson integral_json(const IntegralTestResult& r) {
  ojson j;
  j["classification"] = to_string(r.classification);
  j["tail_exponent"] = num(r.tail_exponent);
  ojson ladder = ojson::array();
  for (std::size_t k = 0; k < r.ladder_R.size(); ++k)
    ladder.push_back({{"R", num(r.ladder_R[k])}, {"I", num(r.ladder_I[k])}});
  j["ladder"] = ladder;
  j["pair_warnings"] = r.pair_warnings;
  j["diagnostic"] = r.diagnostic;
  j["domain_error"] = r.domain_error;
  return j;
}

ojson bounds_json(const BoundCheckReport& b) {
  ojson j;
  j["side"] = to_string(b.side);
  j["holds"] = b.holds();
  j["samples_checked"] = b.samples_checked;
  j["skipped"] = b.skipped;
  j["violations"] = b.violations;
  j["worst_margin"] = num(b.worst_margin);
  j["nondegenerate"] = b.nondegenerate;
  ojson shells = ojson::array();
  for (const auto& s : b.shells) {
    ojson sj;
    sj["radius"] = num(s.radius);
    sj["points"] = s.points;
    sj["skipped"] = s.skipped;
    sj["violations"] = s.violations;
    sj["worst_a_margin"] = num(s.worst_a_margin);
    sj["worst_trace_margin"] = num(s.worst_trace_margin);
    sj["min_eigenvalue"] = num(s.min_eigenvalue);
    sj["max_drift_norm"] = num(s.max_drift_norm);
    shells.push_back(sj);
  }
  j["shells"] = shells;
  ojson pts = ojson::array();
  for (const auto& p : b.violating_points) {
    ojson row = ojson::array();
    for (double v : p) row.push_back(num(v));
    pts.push_back(row);
  }
  j["violating_points"] = pts;
  j["skipped_reasons"] = b.skipped_reasons;
  return j;
}

ojson verdict_json(const CriterionVerdict& v) {
  ojson j;
  j["verdict"] = to_string(v.verdict);
  j["which_theorem"] = v.which_theorem;
  j["inequality_margin"] = num(v.inequality_margin);
  j["integral_classification"] = to_string(v.integral_classification);
  j["samples_checked"] = v.samples_checked;
  j["notes"] = v.notes;
  if (v.bounds) j["bounds"] = bounds_json(*v.bounds);
  if (v.integral) j["integral"] = integral_json(*v.integral);
  return j;
}

ojson frequencies_json(const BoundaryFrequencies& f) {
  return {{"hits_zero", estimate_json(f.hits_zero)},
          {"hits_infinity", estimate_json(f.hits_infinity)}};
}

ojson duality_json(const DualityReport& r) {
  ojson j;
  j["component"] = r.component;
  j["mean"] = estimate_json(r.mean.estimate);
  j["explosion"] = estimate_json(r.explosion.estimate);
  j["gap"] = num(r.gap);
  j["combined_se"] = num(r.combined_se);
  j["pass"] = r.pass;
  return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

const std::string& name_of(const SystemConfig& s, std::size_t j) {
  return s.component_names.at(j - 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string criterion_report_json(const SystemConfig& system,
                                  const std::vector<ComponentVerdict>& components,
                                  const std::vector<LyapunovVerdict>& lyapunov) {
  ojson root;
  root["system"] = system_header(system);
  ojson comps = ojson::array();
  for (const auto& c : components) {
    ojson j;
    j["component"] = c.component;
    j["name"] = name_of(system, c.component);
    j["evidence"] = to_string(c.evidence);
    j["criterion"] = verdict_json(c.criterion);
    comps.push_back(j);
  }
  root["components"] = comps;
  ojson lyap = ojson::array();
  for (const auto& l : lyapunov) {
    ojson j;
    j["V"] = l.criterion.V;
    j["lambda"] = num(l.criterion.lambda);
    j["kind"] = l.criterion.explosion ? "explosion" : "nonexplosion";
    j["measure"] = l.criterion.measure.label();
    j["result"] = verdict_json(l.verdict);
    lyap.push_back(j);
  }
  root["lyapunov"] = lyap;
  return dump(root);
}

std::string classification_report_json(const SystemConfig& system, const SimConfig& config,
                                       const ClassificationReport& report) {
  ojson root;
  root["system"] = system_header(system);
  root["n_paths"] = report.n_paths;
  root["seed"] = report.seed;
  root["numerics"] = sim_config_json(config);
  ojson comps = ojson::array();
  for (const auto& c : report.components) {
    ojson j;
    j["component"] = c.component;
    j["name"] = name_of(system, c.component);
    j["final_label"] = to_string(c.final_label);
    j["defect"] = estimate_json(c.defect);
    j["terminal_mean"] = estimate_json(c.mean.estimate);
    j["mean_hit_up"] = c.mean.hit_up;
    j["mean_hit_down"] = c.mean.hit_down;
    j["mean_biased"] = c.mean.biased;
    j["explosion"] = estimate_json(c.explosion.estimate);
    j["explosion_at_lower_barrier"] = estimate_json(c.explosion.at_lower_barrier);
    j["explosion_barrier_delta"] = num(c.explosion.barrier_delta);
    j["explosion_undetermined"] = c.explosion.undetermined;
    j["discarded_paths"] = c.mean.discarded + c.explosion.discarded;
    j["duality"] = duality_json(c.duality);
    j["analytic_agreement"] = c.analytic_agreement;
    if (c.analytic) {
      ojson a;
      a["evidence"] = to_string(c.analytic->evidence);
      a["criterion"] = verdict_json(c.analytic->criterion);
      j["analytic"] = a;
    }
    ojson b;
    b["under_P"] = frequencies_json(c.boundary.under_p);
    b["under_Pj"] = frequencies_json(c.boundary.under_pj);
    b["consistent_cases"] = c.boundary.consistent_cases;
    j["boundary"] = b;
    j["notes"] = c.notes;
    comps.push_back(j);
  }
  root["components"] = comps;
  return dump(root);
}

std::string classification_summary_csv(const SystemConfig& system,
                                       const ClassificationReport& report) {
  std::ostringstream out;
  out << "component,name,final_label,defect,defect_se,explosion,explosion_se,duality_gap,"
         "duality_pass,analytic\n";
  for (const auto& c : report.components) {
    out << c.component << ',' << name_of(system, c.component) << ','
        << to_string(c.final_label) << ',' << format_double(c.defect.point) << ','
        << format_double(c.defect.std_error) << ',' << format_double(c.explosion.estimate.point)
        << ',' << format_double(c.explosion.estimate.std_error) << ','
        << format_double(c.duality.gap) << ',' << (c.duality.pass ? "true" : "false") << ','
        << c.analytic_agreement << '\n';
  }
  return out.str();
}

std::string classification_verdict_lines(const SystemConfig& system,
                                         const ClassificationReport& report) {
  std::ostringstream out;
  for (const auto& c : report.components) {
    out << name_of(system, c.component) << ": " << to_string(c.final_label) << " (defect "
        << format_double(c.defect.point) << " +- " << format_double(3 * c.defect.std_error)
        << ", explosion " << format_double(c.explosion.estimate.point) << " +- "
        << format_double(3 * c.explosion.estimate.std_error) << ", analytic "
        << c.analytic_agreement << ")\n";
  }
  return out.str();
}

std::string duality_report_json(const SystemConfig& system, const SimConfig& config,
                                std::uint64_t seed, std::size_t n_paths,
                                const std::vector<DualityReport>& reports) {
  ojson root;
  root["system"] = system_header(system);
  root["n_paths"] = n_paths;
  root["seed"] = seed;
  root["numerics"] = sim_config_json(config);
  ojson comps = ojson::array();
  for (const auto& r : reports) {
    ojson j = duality_json(r);
    j["name"] = name_of(system, r.component);
    comps.push_back(j);
  }
  root["components"] = comps;
  return dump(root);
}

std::string simulation_summary_json(const SystemConfig& system, const SimConfig& config,
                                    const std::string& measure, std::uint64_t seed,
                                    const BatchResult& batch) {
  ojson root;
  root["system"] = system_header(system);
  root["measure"] = measure;
  root["n_paths"] = batch.outcomes.size();
  root["seed"] = seed;
  root["numerics"] = sim_config_json(config);
  root["failed_paths"] = batch.failed;
  std::uint64_t steps = 0;
  for (const auto& o : batch.outcomes) steps += o.steps_used;
  root["total_steps"] = steps;

  const std::size_t n = system.spec.d + 1;
  ojson slots = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> values;
    std::size_t up = 0, down = 0;
    for (const auto& o : batch.outcomes) {
      if (!o.ok()) continue;
      values.push_back(o.terminal_state[i]);
      if (o.events[i].kind == EventKind::HitUp) ++up;
      if (o.events[i].kind == EventKind::HitDown) ++down;
    }
    ojson j;
    j["slot"] = i < system.spec.d ? system.component_names[i] : std::string("v");
    j["terminal_mean"] = estimate_json(mean_estimate(values));
    j["hit_up"] = up;
    j["hit_down"] = down;
    slots.push_back(j);
  }
  root["slots"] = slots;
  std::size_t v_zero = 0;
  for (const auto& o : batch.outcomes)
    if (o.ok() && o.v_down_time) ++v_zero;
  root["v_reached_barrier_down"] = v_zero;
  return dump(root);
}

std::string trace_csv(const PathTrace& trace) {
  std::ostringstream out;
  out << 't';
  const std::size_t n = trace.states.empty() ? 0 : trace.states.front().size();
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << format_double(trace.times[k]);
    for (double v : trace.states[k]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::string explosion_cdf_csv(const std::vector<double>& sorted_hit_times, std::size_t n_paths,
                              double horizon) {
  std::ostringstream out;
  out << "t,value\n";
  out << "0,0\n";
  const double scale = n_paths ? 1.0 / static_cast<double>(n_paths) : 0.0;
  for (std::size_t k = 0; k < sorted_hit_times.size(); ++k)
    out << format_double(sorted_hit_times[k]) << ','
        << format_double(static_cast<double>(k + 1) * scale) << '\n';
  out << format_double(horizon) << ','
      << format_double(static_cast<double>(sorted_hit_times.size()) * scale) << '\n';
  return out.str();
}

}  // namespace slm
