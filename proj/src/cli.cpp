#include "shbreg/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shbreg/errors.hpp"
#include "shbreg/harness.hpp"
#include "shbreg/plot.hpp"

namespace shbreg::cli {

namespace fs = std::filesystem;

namespace {

struct Defaults {
  std::vector<double> levels;
  std::size_t runs, iters;
  double mu0, tau;
  std::size_t p, m;
};

Defaults defaults_for(Command c) {
  switch (c) {
    case Command::Example1:
    case Command::CompareSgd:
      return {{1e-1, 1e-2, 1e-3}, 100, 20000, 0.6, 1.4, 200, 1000};
    case Command::Example2:
      return {{0.5, 0.1, 0.01}, 1, 200000, 0.98, 1.0, 1000, 1000};
    case Command::StabilityCheck:
      return {{1e-2}, 200, 500, 0.6, 1.4, 5, 16};
    case Command::RateCheck:
      return {{}, 200, 5000, 0.6, 1.4, 20, 64};
    case Command::OracleCheck:
      return {{1e-2}, 100000, 5, 0.6, 1.4, 3, 8};
  }
  throw ConfigError("unknown command");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

fs::path write_ensemble(const fs::path& dir, const std::string& file, const EnsembleResult& r) {
  const fs::path path = dir / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os, r);
  if (!os) throw IoError("failed writing " + path.string());
  return path;
}

fs::path write_plot(const fs::path& dir, const std::string& file, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  const fs::path path = dir / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_svg_plot(os, title, series);
  if (!os) throw IoError("failed writing " + path.string());
  return path;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void log_stats(std::ostream& log, const std::string& label, const EnsembleResult& r) {
  const SemiConvergence s = semi_convergence_stats(r);
  log << label << ": n_min=" << s.n_min << " err_min=" << fmt("%.4e", s.err_min)
      << " err_final=" << fmt("%.4e", s.err_final) << '\n';
}

PlotSeries series_of(std::string label, const EnsembleResult& r) {
  return {std::move(label), r.iters, r.mean_sq_rel_err};
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::Example1: return "example1";
    case Command::Example2: return "example2";
    case Command::RateCheck: return "rate-check";
    case Command::StabilityCheck: return "stability-check";
    case Command::OracleCheck: return "oracle-check";
    case Command::CompareSgd: return "compare-sgd";
  }
  return "?";
}

std::string level_tag(double level) { return fmt("%g", level); }

Resolved resolve(const CliConfig& c) {
  const Defaults d = defaults_for(c.command);
  Resolved r{c.command,
             c.rel_levels.value_or(d.levels),
             c.runs.value_or(d.runs),
             c.iters.value_or(d.iters),
             c.policy,
             c.mu0.value_or(d.mu0),
             c.tau.value_or(d.tau),
             c.seed,
             c.out_dir,
             c.p.value_or(d.p),
             c.m.value_or(d.m),
             c.bound_scale,
             c.lambda_scale};
  if (c.command == Command::Example2) {
    if (c.m && *c.m != r.p) throw ConfigError("example2 uses m = p; drop --m or set it to --p");
    r.m = r.p;
  }
  if (r.runs < 1) throw ConfigError("--runs must be >= 1");
  // Hilbert solvers need mu0 < 1; the entropy solver needs mu0 < 2 mu = 1 as well.
  if (!(r.mu0 > 0.0 && r.mu0 < 1.0)) throw ConfigError("--mu0 must lie in (0, 1)");
  if (!(r.tau >= 1.0)) throw ConfigError("--tau must be >= 1");
  for (double l : r.rel_levels) {
    if (!(l >= 0.0)) throw ConfigError("noise levels must be >= 0");
  }
  const bool needs_levels = c.command != Command::RateCheck;
  if (needs_levels && r.rel_levels.empty()) throw ConfigError("--levels must not be empty");
  if (!(r.bound_scale > 0.0)) throw ConfigError("--bound-scale must be > 0");
  return r;
}

std::vector<fs::path> cmd_example1(const CliConfig& config, std::ostream& log) {
  const Resolved cfg = resolve(config);
  ensure_dir(cfg.out_dir);
  const ProblemInstance problem = build_example1(cfg.p, cfg.m);
  std::vector<fs::path> written;
  std::vector<PlotSeries> series;
  for (double level : cfg.rel_levels) {
    const NoisyData data = add_noise(problem, level, cfg.seed);
    const std::string tag = level_tag(level);

    const auto constant = monte_carlo(
        hilbert_run_spec(problem, data, StepPolicy::constant(cfg.mu0), Variant::SHB, cfg.iters),
        cfg.runs, cfg.seed);
    written.push_back(write_ensemble(cfg.out_dir, "ex1_" + tag + "_const.csv", constant));
    log_stats(log, "SHB delta_rel=" + tag, constant);
    series.push_back(series_of("SHB " + tag, constant));

    if (cfg.policy == PolicyChoice::Dp) {
      const auto dp = monte_carlo(
          hilbert_run_spec(problem, data,
                           StepPolicy::discrepancy(cfg.mu0, cfg.tau, data.per_eq_levels),
                           Variant::SHB, cfg.iters),
          cfg.runs, cfg.seed);
      written.push_back(write_ensemble(cfg.out_dir, "ex1_" + tag + "_dp.csv", dp));
      log_stats(log, "SHB-DP delta_rel=" + tag, dp);
      series.push_back(series_of("SHB-DP " + tag, dp));
    }
  }
  written.push_back(write_plot(cfg.out_dir, "ex1.svg", "Example 1: mean relative L2 error", series));
  return written;
}

std::vector<fs::path> cmd_compare_sgd(const CliConfig& config, std::ostream& log) {
  const Resolved cfg = resolve(config);
  ensure_dir(cfg.out_dir);
  const ProblemInstance problem = build_example1(cfg.p, cfg.m);
  std::vector<fs::path> written;
  std::vector<PlotSeries> series;
  for (double level : cfg.rel_levels) {
    const NoisyData data = add_noise(problem, level, cfg.seed);
    const std::string tag = level_tag(level);
    for (Variant v : {Variant::SHB, Variant::SGD}) {
      const std::string name = v == Variant::SHB ? "shb" : "sgd";
      const auto r = monte_carlo(
          hilbert_run_spec(problem, data, StepPolicy::constant(cfg.mu0), v, cfg.iters), cfg.runs,
          cfg.seed);
      written.push_back(write_ensemble(cfg.out_dir, "sgd_" + tag + "_" + name + ".csv", r));
      log_stats(log, name + " delta_rel=" + tag, r);
      series.push_back(series_of((v == Variant::SHB ? "SHB " : "SGD ") + tag, r));
    }
  }
  written.push_back(
      write_plot(cfg.out_dir, "compare_sgd.svg", "Heavy-ball vs SGD: mean relative L2 error", series));
  return written;
}

std::vector<fs::path> cmd_example2(const CliConfig& config, std::ostream& log) {
  const Resolved cfg = resolve(config);
  ensure_dir(cfg.out_dir);
  const ProblemInstance problem = build_example2(cfg.p);
  const Regularizer reg = Regularizer::entropy_simplex(problem.grid);
  std::vector<fs::path> written;
  std::vector<PlotSeries> series;

  for (double level : cfg.rel_levels) {
    const NoisyData data = add_noise(problem, level, cfg.seed);
    const std::string tag = level_tag(level);

    std::vector<std::pair<std::string, StepPolicy>> policies;
    policies.emplace_back("entropy", StepPolicy::constant(cfg.mu0, NormBasis::Full));
    if (cfg.policy == PolicyChoice::Dp) {
      policies.emplace_back("entropy-DP", StepPolicy::discrepancy(cfg.mu0, cfg.tau,
                                                                  data.per_eq_levels,
                                                                  NormBasis::Full));
    }
    for (const auto& [label, policy] : policies) {
      // One traced run checks the simplex invariant on every iterate.
      double worst = 0.0;
      run_banach(problem, data.values, reg, policy, std::min<std::size_t>(cfg.iters, 2000),
                 RunSeed{cfg.seed, 0}, [&](std::size_t, std::span<const double> x) {
                   worst = std::max(worst, std::abs(integrate(*problem.grid, x) - 1.0));
                 });
      const auto r = monte_carlo(
          banach_run_spec(problem, data, reg, policy, cfg.iters, RecordSchedule{1000, 100}),
          cfg.runs, cfg.seed);
      written.push_back(write_ensemble(cfg.out_dir, "ex2_" + tag + "_" + label + ".csv", r));
      log_stats(log, label + " delta_rel=" + tag, r);
      log << "  simplex max |integral - 1| = " << fmt("%.3e", worst) << '\n';
      series.push_back(series_of(label + " " + tag, r));
    }
  }
  written.push_back(write_plot(cfg.out_dir, "ex2.svg", "Example 2: relative L1 error", series));
  return written;
}

CheckOutcome stability_check(const CliConfig& config) {
  const Resolved cfg = resolve(config);
  const ProblemInstance problem = build_random(cfg.p, cfg.m, cfg.seed);
  const NoisyData noisy = add_noise(problem, cfg.rel_levels.front(), cfg.seed);
  const StepPolicy policy = StepPolicy::constant(cfg.mu0);
  const RateConstants constants =
      rate_constants(base_step_sizes(policy, problem.bundle), problem.bundle);

  const auto trace = monte_carlo(
      stability_run_spec(problem, noisy, policy, Variant::SHB, cfg.iters), cfg.runs, cfg.seed);
  const auto report = bound_check(
      trace,
      [&](std::size_t n) {
        return cfg.bound_scale * stability_bound(n, noisy.total_level, problem.p(), constants);
      },
      0.0);
  std::ostringstream detail;
  detail << "runs=" << cfg.runs << " iters=" << cfg.iters << " c0=" << fmt("%.4g", constants.c0)
         << " eta_bar=" << fmt("%.4g", constants.eta_bar)
         << " delta=" << fmt("%.4e", noisy.total_level)
         << " violations=" << report.violations.size()
         << " worst_margin=" << fmt("%.4e", report.worst_margin);
  return {"stability-check", report.passed, detail.str()};
}

CheckOutcome rate_check(const CliConfig& config) {
  const Resolved cfg = resolve(config);
  const ProblemInstance base = build_example1(cfg.p, cfg.m);
  CounterRng rng(cfg.seed, 0x1a3bda);
  Vector lambda(cfg.p);
  for (double& l : lambda) l = cfg.lambda_scale * rng.uniform_pm1();
  const Vector x0(cfg.m, 0.0);
  const StepPolicy policy = StepPolicy::constant(cfg.mu0);
  const SourceConditionInstance inst =
      source_condition_construct(base.bundle, lambda, x0, policy, base.sample_points);
  const ProblemInstance& problem = inst.problem;

  // Absolute errors: lambda = 0 makes the truth vanish.
  RunSpec spec;
  const RecordSchedule schedule{};
  spec.iters = schedule.iterations(cfg.iters);
  spec.truth_norm_sq = 1.0;
  spec.trace = [&](RunSeed seed) {
    Vector out;
    run(problem, problem.exact_data, policy, Variant::SHB, cfg.iters, seed,
        [&](std::size_t n, std::span<const double> x) {
          if (!schedule.records(n, cfg.iters)) return;
          double e = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x[j] - problem.truth[j];
            e += problem.grid->weights[j] * d * d;
          }
          out.push_back(e);
        });
    return out;
  };
  const auto trace = monte_carlo(spec, cfg.runs, cfg.seed);
  const auto report = bound_check(
      trace, [&](std::size_t n) { return rate_bound(n, problem.p(), inst.constants); }, 0.0);

  bool slope_ok = true;
  std::string slope_text = "n/a";
  const std::size_t lo = std::max<std::size_t>(cfg.iters / 10, 1);
  if (inst.constants.M0 > 0.0 && cfg.iters >= 20) {
    const double slope = loglog_slope(trace, lo, cfg.iters);
    slope_ok = slope <= -0.5;
    slope_text = fmt("%.3f", slope);
  }
  std::ostringstream detail;
  detail << "runs=" << cfg.runs << " iters=" << cfg.iters << " M0=" << fmt("%.4e", inst.constants.M0)
         << " c0=" << fmt("%.4g", inst.constants.c0) << " violations=" << report.violations.size()
         << " slope[" << lo << "," << cfg.iters << "]=" << slope_text;
  return {"rate-check", report.passed && slope_ok, detail.str()};
}

CheckOutcome oracle_check(const CliConfig& config) {
  const Resolved cfg = resolve(config);
  const ProblemInstance problem = build_random(cfg.p, cfg.m, cfg.seed);
  const NoisyData data = add_noise(problem, cfg.rel_levels.front(), cfg.seed);
  const StepPolicy policy = StepPolicy::constant(cfg.mu0);

  bool passed = true;
  std::ostringstream detail;
  detail << "runs=" << cfg.runs << " steps=" << cfg.iters;
  for (Variant v : {Variant::SHB, Variant::SGD}) {
    const Vector exact = enumerate_expectation(problem, data.values, policy, v, cfg.iters);
    const auto mc = monte_carlo(
        hilbert_run_spec(problem, data, policy, v, cfg.iters, RecordSchedule{cfg.iters, 1}),
        cfg.runs, cfg.seed);
    double worst = 0.0;  // largest |difference| in standard errors
    for (std::size_t n = 0; n < exact.size(); ++n) {
      const double diff = std::abs(mc.mean_sq_rel_err[n] - exact[n]);
      // 1e-12 relative absorbs summation rounding where all paths coincide.
      const double allowed = 4.0 * mc.std_err[n] + 1e-12 * std::abs(exact[n]);
      if (!(diff <= allowed)) passed = false;
      if (mc.std_err[n] > 0.0) worst = std::max(worst, diff / mc.std_err[n]);
    }
    detail << (v == Variant::SHB ? " shb" : " sgd") << "_max_z=" << fmt("%.3f", worst);
  }
  return {"oracle-check", passed, detail.str()};
}

int cmd_verify(const CliConfig& config, std::ostream& out) {
  CheckOutcome outcome;
  switch (config.command) {
    case Command::StabilityCheck: outcome = stability_check(config); break;
    case Command::RateCheck: outcome = rate_check(config); break;
    case Command::OracleCheck: outcome = oracle_check(config); break;
    default: throw ConfigError(command_name(config.command) + " is not a verification command");
  }
  out << "check=" << outcome.name << " status=" << (outcome.passed ? "PASS" : "FAIL") << ' '
      << outcome.detail << '\n';
  return outcome.passed ? 0 : 1;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Stochastic heavy-ball iterative regularization: experiments and checks"};
  app.require_subcommand(1);

  CliConfig config;
  std::vector<double> levels;
  std::string policy = "const";
  std::optional<std::size_t> p, m, runs, iters;
  std::optional<double> mu0, tau;

  const std::vector<std::pair<Command, std::string>> commands = {
      {Command::Example1, "Reproduce the Example 1 semi-convergence / DP ensembles"},
      {Command::Example2, "Reproduce the Example 2 entropy (mirror) runs"},
      {Command::RateCheck, "Check the exact-data rate bound on a source-condition instance"},
      {Command::StabilityCheck, "Check the noisy-vs-exact stability bound"},
      {Command::OracleCheck, "Compare Monte Carlo ensembles with exact path enumeration"},
      {Command::CompareSgd, "Compare the heavy-ball method with plain SGD on Example 1"},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(command_name(cmd), help);
    sub->add_option("--p", p, "Number of equations (sample points)");
    sub->add_option("--m", m, "Number of quadrature nodes");
    sub->add_option("--runs", runs, "Independent runs per ensemble");
    sub->add_option("--iters", iters, "Iterations per run");
    sub->add_option("--policy", policy, "Step-size policy")->check(CLI::IsMember({"const", "dp"}));
    sub->add_option("--mu0", mu0, "Step-size constant mu0");
    sub->add_option("--tau", tau, "Discrepancy factor tau");
    sub->add_option("--seed", config.seed, "Seed for noise and index streams");
    sub->add_option("--levels", levels, "Relative noise levels, comma separated")->delimiter(',');
    sub->add_option("--out", config.out_dir, "Output directory");
    if (cmd == Command::StabilityCheck) {
      sub->add_option("--bound-scale", config.bound_scale, "Multiply the proven bound");
    }
    if (cmd == Command::RateCheck) {
      sub->add_option("--lambda-scale", config.lambda_scale, "Scale the random source element");
    }
    subs.emplace_back(sub, cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (const auto& [sub, cmd] : subs) {
    if (sub->parsed()) config.command = cmd;
  }
  if (!levels.empty()) config.rel_levels = levels;
  config.policy = policy == "dp" ? PolicyChoice::Dp : PolicyChoice::Const;
  config.p = p;
  config.m = m;
  config.runs = runs;
  config.iters = iters;
  config.mu0 = mu0;
  config.tau = tau;

  try {
    switch (config.command) {
      case Command::Example1:
      case Command::Example2:
      case Command::CompareSgd: {
        const auto t0 = std::chrono::steady_clock::now();
        const auto files = config.command == Command::Example1   ? cmd_example1(config, std::cout)
                           : config.command == Command::Example2 ? cmd_example2(config, std::cout)
                                                                 : cmd_compare_sgd(config, std::cout);
        for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
        std::cout << "elapsed " << fmt("%.1f", std::chrono::duration<double>(
                                                   std::chrono::steady_clock::now() - t0)
                                                   .count())
                  << " s\n";
        return 0;
      }
      default:
        return cmd_verify(config, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace shbreg::cli
