#include "slm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "slm/config.hpp"
#include "slm/report.hpp"

namespace slm::cli {

namespace fs = std::filesystem;

namespace {

// Unusable numerics or arguments; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << content;
}

SimConfig sim_config(const RunConfig& run, const SdeSystem& system) {
  SimConfig c;
  c.dt_base = run.dt;
  c.barrier_up = run.barrier_up;
  c.barrier_down = run.barrier_down;
  c.threads = run.threads;
  try {
    c.validate(system);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void require_paths(const RunConfig& run) {
  if (run.paths == 0) throw UsageError("--paths must be positive");
}

struct Loaded {
  SystemConfig config;
  SdeSystem system;
};

Loaded load(const RunConfig& run) {
  if (run.system.empty()) throw UsageError("--system is required");
  SystemConfig cfg = load_system_config(run.system);
  SdeSystem sys = build_system(cfg);
  return {std::move(cfg), std::move(sys)};
}

// Criteria from --criteria, else the bundled criteria of a builtin system.
std::optional<CriteriaConfig> load_criteria(const RunConfig& run, const SystemConfig& system) {
  std::string ref = run.criteria;
  if (ref.empty()) {
    if (auto b = bundled_criteria_ref(run.system)) ref = *b;
  }
  if (ref.empty()) return std::nullopt;
  return load_criteria_config(ref, system);
}

// Runs `body` and maps exceptions to exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

struct CheckOutcome {
  std::vector<ComponentVerdict> components;
  std::vector<LyapunovVerdict> lyapunov;
  std::string report;
  bool domain_error = false;
};

CheckOutcome run_check(const Loaded& l, const CriteriaConfig& criteria, std::ostream& out,
                       std::ostream& err) {
  CheckOutcome c;
  if (!criteria.components.empty())
    c.components = theorem_main_classify(l.system, criteria.build(l.config.spec.constants));
  for (const auto& v : c.components) {
    const auto& name = l.config.component_names[v.component - 1];
    const auto& cc = criteria.components[v.component - 1];
    out << name << ": " << to_string(v.evidence) << " [" << v.criterion.which_theorem
        << "; integral " << to_string(v.criterion.integral_classification) << "; bounds "
        << (v.criterion.bounds && v.criterion.bounds->holds() ? "hold" : "fail") << "]\n";
    if (v.criterion.integral && v.criterion.integral->domain_error) {
      c.domain_error = true;
      err << "numerical failure: component " << name << ": A(u) = \"" << cc.A << "\" or B(u) = \""
          << cc.B << "\" cannot be evaluated on [r, inf): " << v.criterion.integral->diagnostic
          << '\n';
    }
  }
  ConstantMap merged = l.config.spec.constants;
  for (const auto& [k, v] : criteria.constants) merged[k] = v;
  for (const auto& lc : criteria.lyapunov) {
    const EffectiveSystem eff(l.system, lc.measure);
    const Expression V = Expression::parse(lc.V, l.system.state_size(), merged);
    const auto grid = LyapunovGrid::standard(l.system.state_size(), l.system.horizon());
    LyapunovVerdict lv{lc, lc.explosion
                               ? lyapunov_explosion_check(eff, V, lc.lambda, l.system.horizon(), grid)
                               : lyapunov_nonexplosion_check(eff, V, lc.lambda, grid)};
    out << "lyapunov " << lc.measure.label() << " V = " << lc.V << ": " << to_string(lv.verdict.verdict)
        << '\n';
    c.lyapunov.push_back(std::move(lv));
  }
  c.report = criterion_report_json(l.config, c.components, c.lyapunov);
  return c;
}

void write_classification(const fs::path& dir, const Loaded& l, const SimConfig& cfg,
                          const ClassificationReport& rep, bool plot) {
  write_file(dir / "classification_report.json", classification_report_json(l.config, cfg, rep));
  write_file(dir / "summary.csv", classification_summary_csv(l.config, rep));
  write_file(dir / "verdicts.txt", classification_verdict_lines(l.config, rep));
  if (plot)
    for (const auto& c : rep.components)
      write_file(dir / ("plot_explosion_cdf_" + l.config.component_names[c.component - 1] + ".csv"),
                 explosion_cdf_csv(c.explosion.hit_times, rep.n_paths, l.system.horizon()));
}

}  // namespace

int cmd_check(const RunConfig& run, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load(run);
    const auto criteria = load_criteria(run, l.config);
    if (!criteria) throw UsageError("check needs --criteria for a non-bundled system");
    const CheckOutcome c = run_check(l, *criteria, out, err);
    write_file(fs::path(run.out_dir) / "criterion_report.json", c.report);
    return c.domain_error ? kExitNumerical : kExitOk;
  });
}

int cmd_classify(const RunConfig& run, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_paths(run);
    const Loaded l = load(run);
    const auto criteria = load_criteria(run, l.config);
    const SimConfig cfg = sim_config(run, l.system);
    const auto rep = classify(l.system, cfg, run.seed, run.paths,
                              criteria ? criteria->build(l.config.spec.constants)
                                       : std::vector<ComponentCriterion>{});
    write_classification(run.out_dir, l, cfg, rep, run.emit_plot_data);
    out << classification_verdict_lines(l.config, rep);
    return kExitOk;
  });
}

int cmd_simulate(const RunConfig& run, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_paths(run);
    const Loaded l = load(run);
    const SimConfig cfg = sim_config(run, l.system);
    MeasureTag measure = MeasureTag::original();
    try {
      measure = MeasureTag::parse(run.measure);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (measure.component() > l.system.d()) throw UsageError("--measure component exceeds d");
    for (std::size_t k : run.trace)
      if (k >= run.paths) throw UsageError("--trace index " + std::to_string(k) + " >= --paths");

    const EffectiveSystem eff(l.system, measure);
    const BatchResult batch = simulate_batch(eff, cfg, run.seed, run.paths);
    const fs::path dir(run.out_dir);
    write_file(dir / "simulation_summary.json",
               simulation_summary_json(l.config, cfg, measure.label(), run.seed, batch));

    std::vector<std::size_t> traced = run.trace;
    if (traced.empty() && run.emit_plot_data) traced.push_back(0);
    for (std::size_t k : traced) {
      PathTrace trace;
      (void)simulate_path(eff, cfg, run.seed, k, &trace);
      if (!run.trace.empty())
        write_file(dir / ("trace_" + std::to_string(k) + ".csv"), trace_csv(trace));
      if (run.emit_plot_data) {
        for (std::size_t i = 0; i < l.system.state_size(); ++i) {
          std::ostringstream csv;
          csv << "t,value\n";
          for (std::size_t s = 0; s < trace.times.size(); ++s)
            csv << format_double(trace.times[s]) << ',' << format_double(trace.states[s][i]) << '\n';
          const std::string slot =
              i < l.system.d() ? l.config.component_names[i] : std::string("v");
          write_file(dir / ("plot_path" + std::to_string(k) + "_" + slot + ".csv"), csv.str());
        }
      }
    }
    out << "simulated " << run.paths << " paths of " << l.config.spec.name << " under "
        << measure.label() << " (" << batch.failed << " failed)\n";
    return kExitOk;
  });
}

int cmd_duality(const RunConfig& run, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_paths(run);
    const Loaded l = load(run);
    const SimConfig cfg = sim_config(run, l.system);
    if (run.component > l.system.d()) throw UsageError("--component exceeds d");
    std::vector<DualityReport> reports;
    for (std::size_t j = 1; j <= l.system.d(); ++j) {
      if (run.component != 0 && j != run.component) continue;
      reports.push_back(duality_check(l.system, cfg, run.seed, run.paths, j));
      const auto& r = reports.back();
      out << l.config.component_names[j - 1] << ": E[M_T] = " << format_double(r.mean.estimate.point)
          << ", P^j(explosion) = " << format_double(r.explosion.estimate.point) << ", gap "
          << format_double(r.gap) << " vs 3 SE = " << format_double(3 * r.combined_se) << ": "
          << (r.pass ? "PASS" : "FAIL") << '\n';
      if (run.emit_plot_data)
        write_file(fs::path(run.out_dir) /
                       ("plot_explosion_cdf_" + l.config.component_names[j - 1] + ".csv"),
                   explosion_cdf_csv(r.explosion.hit_times, run.paths, l.system.horizon()));
    }
    write_file(fs::path(run.out_dir) / "duality_report.json",
               duality_report_json(l.config, cfg, run.seed, run.paths, reports));
    return kExitOk;
  });
}

int cmd_validate(const RunConfig& run, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load(run);
    out << "OK system " << l.config.spec.name << " (d = " << l.system.d() << ")\n";
    if (const auto criteria = load_criteria(run, l.config))
      out << "OK criteria (" << criteria->components.size() << " components, "
          << criteria->lyapunov.size() << " lyapunov)\n";
    return kExitOk;
  });
}

ReproduceResult cmd_reproduce(const std::string& which, const RunConfig& run, std::ostream& out,
                              std::ostream& err) {
  ReproduceResult res;
  std::string name;
  std::string claim;
  if (which == "example1-martingale") {
    name = "example1_martingale";
    claim = "S is a true martingale";
  } else if (which == "example1-strict") {
    name = "example1_strict";
    claim = "S is a strict local martingale";
  } else if (which == "example2") {
    name = "example2";
    claim = "S a true martingale and N a strict local martingale";
  } else {
    err << "usage error: unknown example '" << which
        << "' (expected example1-martingale, example1-strict or example2)\n";
    res.exit_code = kExitConfig;
    return res;
  }

  std::ostringstream log;
  auto say = [&](const std::string& line) {
    out << line << '\n';
    log << line << '\n';
  };
  say("reproduce " + which);
  say("claim: " + claim);

  res.exit_code = guarded(err, [&] {
    require_paths(run);
    if (which == "example2") {
      try {
        (void)load_system_config("builtin:example2");
      } catch (const ConfigError& e) {
        res.stated_system_infeasible = true;
        res.infeasibility = e.what();
        say("stated system: INFEASIBLE (" + res.infeasibility + ")");
        say("running REPAIRED VARIANT example2_repaired; its verdicts are not a test of the "
            "stated system");
        name = "example2_repaired";
      }
    }
    RunConfig r = run;
    r.system = "builtin:" + name;
    r.criteria.clear();
    const Loaded l = load(r);
    const auto criteria = load_criteria(r, l.config);
    if (!criteria || criteria->components.empty())
      throw ConfigError(name + ": bundled criteria missing");
    res.system_name = l.config.spec.name;
    const fs::path dir = fs::path(run.out_dir) / which;

    std::ostringstream check_out;
    const CheckOutcome check = run_check(l, *criteria, check_out, err);
    write_file(dir / "criterion_report.json", check.report);
    if (check.domain_error) return kExitNumerical;

    const SimConfig cfg = sim_config(r, l.system);
    const auto rep =
        classify(l.system, cfg, run.seed, run.paths, criteria->build(l.config.spec.constants));
    write_classification(dir, l, cfg, rep, run.emit_plot_data);

    res.pass = true;
    for (const auto& c : rep.components) {
      ReproduceComponent rc;
      rc.name = l.config.component_names[c.component - 1];
      rc.claimed = l.config.claimed_outcome.at(c.component - 1);
      rc.statistical = c.final_label;
      rc.pass = rc.claimed == to_string(c.final_label);
      rc.duality_pass = c.duality.pass;
      const ComponentVerdict& av = check.components[c.component - 1];
      rc.analytic_evidence = to_string(av.evidence);
      const ComponentEvidence wanted = rc.claimed == "Martingale"
                                           ? ComponentEvidence::MartingaleEvidence
                                           : ComponentEvidence::StrictLocalEvidence;
      rc.analytic_agrees = av.evidence == wanted;
      res.pass = res.pass && rc.pass;

      say(rc.name + ": claimed " + rc.claimed);
      say("  statistical: " + std::string(to_string(c.final_label)) + " (defect " +
          format_double(c.defect.point) + " +- " + format_double(3 * c.defect.std_error) +
          ", P" + std::to_string(c.component) + "-explosion " +
          format_double(c.explosion.estimate.point) + " +- " +
          format_double(3 * c.explosion.estimate.std_error) + ", duality " +
          (c.duality.pass ? "pass" : "fail") + ") " + (rc.pass ? "PASS" : "FAIL"));
      say("  analytic: " + rc.analytic_evidence + " via " + av.criterion.which_theorem + " " +
          (rc.analytic_agrees ? "AGREE" : "DISAGREE"));
      if (!rc.analytic_agrees) {
        std::string diag = "    diagnostics: integral " +
                           std::string(to_string(av.criterion.integral_classification));
        if (av.criterion.integral)
          diag += " (tail exponent " + format_double(av.criterion.integral->tail_exponent) + ")";
        diag += "; " + av.criterion.notes;
        say(diag);
      }
      for (const auto& note : c.notes) say("  note: " + note);
      res.components.push_back(std::move(rc));
    }
    say(std::string(res.stated_system_infeasible ? "RESULT (repaired variant): " : "RESULT: ") +
        (res.pass ? "PASS" : "FAIL"));
    write_file(dir / "reproduce.txt", log.str());
    return kExitOk;
  });
  return res;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Martingale / strict local martingale checks for stochastic-volatility systems",
               "slmcheck"};
  app.require_subcommand(1);
  RunConfig rc;
  std::string trace_text;
  std::string which;

  auto add_common = [&](CLI::App* sub, bool sim) {
    sub->add_option("--system", rc.system, "system config file or builtin:<name>");
    sub->add_option("--criteria", rc.criteria, "criteria config file or builtin:<name>");
    sub->add_option("--out-dir", rc.out_dir, "directory for report files");
    if (!sim) return;
    sub->add_option("--paths", rc.paths, "number of Monte Carlo paths");
    sub->add_option("--seed", rc.seed, "master seed");
    sub->add_option("--dt", rc.dt, "base time step");
    sub->add_option("--barrier-up", rc.barrier_up, "explosion barrier");
    sub->add_option("--barrier-down", rc.barrier_down, "absorption barrier");
    sub->add_option("--threads", rc.threads, "worker threads (outputs do not depend on it)");
    sub->add_flag("--emit-plot-data", rc.emit_plot_data, "write (t, value) CSV files");
  };

  auto* check = app.add_subcommand("check", "deterministic criteria per component");
  add_common(check, false);
  auto* classify_cmd = app.add_subcommand("classify", "Monte Carlo classification");
  add_common(classify_cmd, true);
  auto* simulate = app.add_subcommand("simulate", "simulate paths under one measure");
  add_common(simulate, true);
  simulate->add_option("--measure", rc.measure, "P or Pj:<j>");
  simulate->add_option("--trace", trace_text, "comma-separated path indices to dump");
  auto* duality = app.add_subcommand("duality", "E_P[M^j_T] + P^j(explosion) = 1 check");
  add_common(duality, true);
  duality->add_option("--component", rc.component, "component j (default: all)");
  auto* reproduce = app.add_subcommand("reproduce", "rerun a bundled worked example");
  add_common(reproduce, true);
  reproduce->add_option("which", which, "example1-martingale | example1-strict | example2")
      ->required();
  auto* validate = app.add_subcommand("validate-config", "validate config files and exit");
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (!trace_text.empty()) {
    std::stringstream ss(trace_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const unsigned long long k = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        rc.trace.push_back(static_cast<std::size_t>(k));
      } catch (const std::exception&) {
        err << "usage error: --trace expects comma-separated path indices\n";
        return kExitConfig;
      }
    }
  }

  if (*check) return cmd_check(rc, out, err);
  if (*classify_cmd) return cmd_classify(rc, out, err);
  if (*simulate) return cmd_simulate(rc, out, err);
  if (*duality) return cmd_duality(rc, out, err);
  if (*validate) return cmd_validate(rc, out, err);
  return cmd_reproduce(which, rc, out, err).exit_code;
}

}  // namespace slm::cli
