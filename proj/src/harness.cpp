#include "shbreg/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <ostream>

#include "shbreg/errors.hpp"

namespace shbreg {

double truth_norm_sq(std::span<const double> truth, const Grid& grid, ErrorNorm norm) {
  detail::require_same_size(truth.size(), grid.size(), "truth_norm_sq");
  if (norm == ErrorNorm::L2) return weighted_norm_sq(grid, truth);
  double s = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) s += grid.weights[j] * std::abs(truth[j]);
  return s * s;
}

double rel_err_sq(std::span<const double> x, std::span<const double> truth, const Grid& grid,
                  ErrorNorm norm) {
  detail::require_same_size(x.size(), grid.size(), "rel_err_sq(x)");
  const double denom = truth_norm_sq(truth, grid, norm);
  if (!(denom > 0.0)) throw ConfigError("relative error needs a nonzero truth");
  double s = 0.0;
  if (norm == ErrorNorm::L2) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double e = x[j] - truth[j];
      s += grid.weights[j] * e * e;
    }
    return s / denom;
  }
  for (std::size_t j = 0; j < x.size(); ++j) s += grid.weights[j] * std::abs(x[j] - truth[j]);
  return s * s / denom;
}

std::vector<std::size_t> RecordSchedule::iterations(std::size_t n_iters) const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n <= n_iters; ++n) {
    if (records(n, n_iters)) out.push_back(n);
  }
  return out;
}

RunFailure::RunFailure(RunSeed seed, const std::string& what)
    : std::runtime_error("run (seed " + std::to_string(seed.seed) + ", stream " +
                         std::to_string(seed.stream) + ") failed: " + what),
      seed_(seed) {}

int worker_count() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("SHB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

namespace {

EnsembleResult reduce(const RunSpec& spec, const std::vector<Vector>& traces,
                      std::uint64_t base_seed) {
  const std::size_t len = spec.iters.size();
  const std::size_t runs = traces.size();
  EnsembleResult r;
  r.iters = spec.iters;
  r.mean_sq_rel_err.assign(len, 0.0);
  r.std_err.assign(len, 0.0);
  r.n_runs = runs;
  r.base_seed = base_seed;
  r.truth_norm_sq = spec.truth_norm_sq;

  for (const auto& t : traces) {
    for (std::size_t k = 0; k < len; ++k) r.mean_sq_rel_err[k] += t[k];
  }
  for (double& v : r.mean_sq_rel_err) v /= static_cast<double>(runs);
  if (runs > 1) {
    for (const auto& t : traces) {
      for (std::size_t k = 0; k < len; ++k) {
        const double d = t[k] - r.mean_sq_rel_err[k];
        r.std_err[k] += d * d;
      }
    }
    const double rn = static_cast<double>(runs);
    for (double& v : r.std_err) v = std::sqrt(v / (rn - 1.0) / rn);
  }
  return r;
}

Vector checked_trace(const RunSpec& spec, RunSeed seed) {
  Vector t = spec.trace(seed);
  if (t.size() != spec.iters.size()) {
    throw DimensionError("trace length " + std::to_string(t.size()) + " != recorded iterations " +
                         std::to_string(spec.iters.size()));
  }
  return t;
}

}  // namespace

EnsembleResult monte_carlo_serial(const RunSpec& spec, std::size_t n_runs,
                                  std::uint64_t base_seed) {
  if (n_runs < 1) throw ConfigError("monte_carlo needs n_runs >= 1");
  std::vector<Vector> traces(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    const RunSeed seed{base_seed, r};
    try {
      traces[r] = checked_trace(spec, seed);
    } catch (const std::exception& e) {
      throw RunFailure(seed, e.what());
    }
  }
  return reduce(spec, traces, base_seed);
}

EnsembleResult monte_carlo(const RunSpec& spec, std::size_t n_runs, std::uint64_t base_seed) {
  if (n_runs < 1) throw ConfigError("monte_carlo needs n_runs >= 1");
  std::vector<Vector> traces(n_runs);
  const auto runs = static_cast<std::ptrdiff_t>(n_runs);
  std::ptrdiff_t first_failure = runs;
  std::string failure_message;

#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (std::ptrdiff_t r = 0; r < runs; ++r) {
    try {
      traces[r] = checked_trace(spec, RunSeed{base_seed, static_cast<std::uint64_t>(r)});
    } catch (const std::exception& e) {
#pragma omp critical(shbreg_mc_failure)
      if (r < first_failure) {
        first_failure = r;
        failure_message = e.what();
      }
    }
  }
  if (first_failure < runs) {
    throw RunFailure(RunSeed{base_seed, static_cast<std::uint64_t>(first_failure)},
                     failure_message);
  }
  return reduce(spec, traces, base_seed);
}

RunSpec hilbert_run_spec(const ProblemInstance& problem, const NoisyData& data, StepPolicy policy,
                         Variant variant, std::size_t n_iters, RecordSchedule schedule,
                         ErrorNorm norm, Vector x0) {
  if (x0.empty()) x0.assign(problem.m(), 0.0);
  RunSpec spec;
  spec.iters = schedule.iterations(n_iters);
  spec.truth_norm_sq = truth_norm_sq(problem.truth, *problem.grid, norm);
  spec.trace = [&problem, &data, policy = std::move(policy), variant, n_iters, schedule, norm,
                x0 = std::move(x0)](RunSeed seed) {
    Vector out;
    out.reserve(schedule.iterations(n_iters).size());
    run(problem, data.values, policy, variant, n_iters, seed,
        [&](std::size_t n, std::span<const double> x) {
          if (schedule.records(n, n_iters)) {
            out.push_back(rel_err_sq(x, problem.truth, *problem.grid, norm));
          }
        },
        std::span<const double>(x0));
    return out;
  };
  return spec;
}

RunSpec banach_run_spec(const ProblemInstance& problem, const NoisyData& data,
                        const Regularizer& reg, StepPolicy policy, std::size_t n_iters,
                        RecordSchedule schedule, ErrorNorm norm) {
  RunSpec spec;
  spec.iters = schedule.iterations(n_iters);
  spec.truth_norm_sq = truth_norm_sq(problem.truth, *problem.grid, norm);
  spec.trace = [&problem, &data, &reg, policy = std::move(policy), n_iters, schedule,
                norm](RunSeed seed) {
    Vector out;
    run_banach(problem, data.values, reg, policy, n_iters, seed,
               [&](std::size_t n, std::span<const double> x) {
                 if (schedule.records(n, n_iters)) {
                   out.push_back(rel_err_sq(x, problem.truth, *problem.grid, norm));
                 }
               });
    return out;
  };
  return spec;
}

RunSpec stability_run_spec(const ProblemInstance& problem, const NoisyData& noisy,
                           StepPolicy policy, Variant variant, std::size_t n_iters,
                           RecordSchedule schedule, Vector x0) {
  if (policy.rule != StepRule::Constant) {
    throw ConfigError("stability ensembles need a constant step policy");
  }
  if (x0.empty()) x0.assign(problem.m(), 0.0);
  RunSpec spec;
  spec.iters = schedule.iterations(n_iters);
  spec.truth_norm_sq = truth_norm_sq(problem.truth, *problem.grid, ErrorNorm::L2);
  spec.trace = [&problem, &noisy, policy = std::move(policy), variant, n_iters, schedule,
                x0 = std::move(x0), scale = spec.truth_norm_sq](RunSeed seed) {
    HilbertSolver with_noise(problem.bundle, noisy.values, policy, variant, x0);
    HilbertSolver without(problem.bundle, problem.exact_data, policy, variant, x0);
    const Grid& g = *problem.grid;
    Vector diff(problem.m());
    auto distance = [&] {
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = with_noise.x()[j] - without.x()[j];
      return weighted_norm_sq(g, diff) / scale;
    };
    Vector out;
    out.push_back(distance());
    CounterRng rng(seed);
    for (std::size_t n = 1; n <= n_iters; ++n) {
      const std::size_t i = rng.index(problem.p());
      with_noise.advance(i);
      without.advance(i);
      if (schedule.records(n, n_iters)) out.push_back(distance());
    }
    return out;
  };
  return spec;
}

Vector enumerate_expectation_of(const ProblemInstance& problem, std::span<const double> data,
                                const StepPolicy& policy, Variant variant, std::size_t n_steps,
                                const StateMetric& metric,
                                std::optional<std::span<const double>> x0) {
  const std::size_t p = problem.p();
  std::size_t paths = 1;
  for (std::size_t k = 0; k < n_steps; ++k) {
    if (paths > kEnumerationGuard / p) {
      throw ResourceError("enumeration of p^n index paths exceeds the 10^6 guard");
    }
    paths *= p;
  }

  const Vector zeros(problem.m(), 0.0);
  const HilbertSolver root(problem.bundle, data, policy, variant, x0 ? *x0 : std::span(zeros));
  Vector acc(n_steps + 1, 0.0);
  const double inv_p = 1.0 / static_cast<double>(p);

  // Depth-first over the path tree; a node at depth d has probability p^-d.
  auto visit = [&](auto&& self, const HilbertSolver& node, std::size_t depth,
                   double prob) -> void {
    acc[depth] += prob * metric(node.state());
    if (depth == n_steps) return;
    for (std::size_t i = 0; i < p; ++i) {
      HilbertSolver child = node;
      child.advance(i);
      self(self, child, depth + 1, prob * inv_p);
    }
  };
  visit(visit, root, 0, 1.0);
  return acc;
}

Vector enumerate_expectation(const ProblemInstance& problem, std::span<const double> data,
                             const StepPolicy& policy, Variant variant, std::size_t n_steps) {
  return enumerate_expectation_of(problem, data, policy, variant, n_steps,
                                  [&](const SolverState& s) {
                                    return rel_err_sq(s.x_cur, problem.truth, *problem.grid,
                                                      ErrorNorm::L2);
                                  });
}

SourceConditionInstance source_condition_construct(const OperatorBundle& bundle,
                                                   std::span<const double> lambda_dagger,
                                                   std::span<const double> x0,
                                                   const StepPolicy& policy,
                                                   Vector sample_points) {
  const Grid& g = bundle.grid();
  detail::require_same_size(lambda_dagger.size(), bundle.size(), "source condition lambda");
  detail::require_same_size(x0.size(), g.size(), "source condition x0");
  if (sample_points.empty()) {
    sample_points.resize(bundle.size());
    for (std::size_t i = 0; i < bundle.size(); ++i) sample_points[i] = static_cast<double>(i);
  }

  Vector truth(g.size());
  bundle.adjoint_apply(lambda_dagger, truth);
  for (std::size_t j = 0; j < truth.size(); ++j) truth[j] += x0[j];

  const Vector eta = base_step_sizes(policy, bundle);
  RateConstants c = rate_constants(eta, bundle);
  Vector diff(g.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = x0[j] - truth[j];
  double dual = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) dual += lambda_dagger[i] * lambda_dagger[i] / eta[i];
  c.M0 = weighted_norm_sq(g, diff) + c.c0 * dual;

  return SourceConditionInstance{
      make_problem("source-condition", std::move(sample_points), bundle, std::move(truth)),
      Vector(lambda_dagger.begin(), lambda_dagger.end()), Vector(x0.begin(), x0.end()), c};
}

SemiConvergence semi_convergence_stats(const EnsembleResult& trace) {
  const auto& v = trace.mean_sq_rel_err;
  if (v.empty()) throw ConfigError("semi-convergence statistics need a non-empty trace");
  std::size_t k_min = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] < v[k_min]) k_min = k;
  }
  return {trace.iters[k_min], v[k_min], v.back()};
}

BoundReport bound_check(const EnsembleResult& trace,
                        const std::function<double(std::size_t)>& bound, double slack) {
  if (!(slack >= 0.0)) throw ConfigError("bound_check needs slack >= 0");
  BoundReport report;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  const double scale = trace.truth_norm_sq;
  for (std::size_t k = 0; k < trace.iters.size(); ++k) {
    const double mean = trace.mean_sq_rel_err[k] * scale;
    const double allowed = bound(trace.iters[k]) * (1.0 + slack) + 3.0 * trace.std_err[k] * scale;
    report.worst_margin = std::max(report.worst_margin, mean - allowed);
    if (!(mean <= allowed)) {
      report.passed = false;
      report.violations.push_back(trace.iters[k]);
    }
  }
  return report;
}

double loglog_slope(const EnsembleResult& trace, std::size_t lo, std::size_t hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < trace.iters.size(); ++k) {
    const std::size_t n = trace.iters[k];
    if (n < lo || n > hi || n == 0) continue;
    const double v = trace.mean_sq_rel_err[k];
    if (!(v > 0.0)) continue;
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw ConfigError("loglog_slope needs at least two positive points in range");
  const double c = static_cast<double>(count);
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

void write_csv(std::ostream& os, const EnsembleResult& result) {
  os << "iter,mean_sq_rel_err,std_err\n";
  char buf[96];
  for (std::size_t k = 0; k < result.iters.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.12e,%.12e\n", result.iters[k],
                  result.mean_sq_rel_err[k], result.std_err[k]);
    os << buf;
  }
}

}  // namespace shbreg
