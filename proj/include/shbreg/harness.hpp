#pragma once

// Monte Carlo ensembles over index paths, the exact path-enumeration oracle,
// source-condition instances, semi-convergence statistics and bound checks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shbreg/banach.hpp"
#include "shbreg/problems.hpp"
#include "shbreg/shb.hpp"

namespace shbreg {

enum class ErrorNorm { L2, L1 };

/// L2: ||x - t||_w^2 / ||t||_w^2. L1: (int |x - t|)^2 / (int |t|)^2.
/// Throws ConfigError when the truth has zero norm.
double rel_err_sq(std::span<const double> x, std::span<const double> truth, const Grid& grid,
                  ErrorNorm norm);

/// Squared norm of the truth in the metric's units, used to convert relative
/// ensembles back to absolute errors.
double truth_norm_sq(std::span<const double> truth, const Grid& grid, ErrorNorm norm);

/// Which iterations an ensemble records: every n up to dense_until, then every
/// stride-th, and always the last one.
struct RecordSchedule {
  std::size_t dense_until = 1000;
  std::size_t stride = 10;

  bool records(std::size_t n, std::size_t n_iters) const {
    return n <= dense_until || n % stride == 0 || n == n_iters;
  }
  std::vector<std::size_t> iterations(std::size_t n_iters) const;
};

struct EnsembleResult {
  std::vector<std::size_t> iters;
  Vector mean_sq_rel_err;
  Vector std_err;
  std::size_t n_runs = 0;
  std::uint64_t base_seed = 0;
  double truth_norm_sq = 1.0;  // multiply by this to get absolute squared errors
};

/// One ensemble member: maps a run's random stream to its metric at `iters`.
struct RunSpec {
  std::vector<std::size_t> iters;
  std::function<Vector(RunSeed)> trace;
  double truth_norm_sq = 1.0;
};

/// Error in a run, reported with the failing stream.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(RunSeed seed, const std::string& what);
  RunSeed seed() const { return seed_; }

 private:
  RunSeed seed_;
};

/// Worker count: the OpenMP default, capped by SHB_THREADS when set.
int worker_count();

/// Runs n_runs members with streams (base_seed, r) on an OpenMP pool. Traces
/// are reduced in run order, so the result does not depend on thread count.
EnsembleResult monte_carlo(const RunSpec& spec, std::size_t n_runs, std::uint64_t base_seed);

/// Serial reference for monte_carlo.
EnsembleResult monte_carlo_serial(const RunSpec& spec, std::size_t n_runs,
                                  std::uint64_t base_seed);

/// Relative error of the Hilbert solver's iterates. The problem and data must
/// outlive the returned spec. An empty x0 means the zero initial guess.
RunSpec hilbert_run_spec(const ProblemInstance& problem, const NoisyData& data, StepPolicy policy,
                         Variant variant, std::size_t n_iters, RecordSchedule schedule = {},
                         ErrorNorm norm = ErrorNorm::L2, Vector x0 = {});

/// Relative error of the mirror solver's iterates.
RunSpec banach_run_spec(const ProblemInstance& problem, const NoisyData& data,
                        const Regularizer& reg, StepPolicy policy, std::size_t n_iters,
                        RecordSchedule schedule = {}, ErrorNorm norm = ErrorNorm::L1);

/// ||x_n^delta - x_n||_w^2 / ||x^dagger||_w^2 where both runs share one index
/// path, one on noisy and one on exact data. Uses a constant policy.
RunSpec stability_run_spec(const ProblemInstance& problem, const NoisyData& noisy,
                           StepPolicy policy, Variant variant, std::size_t n_iters,
                           RecordSchedule schedule = {}, Vector x0 = {});

/// Maximum number of index paths enumerate_expectation will visit.
inline constexpr std::size_t kEnumerationGuard = 1'000'000;

using StateMetric = std::function<double(const SolverState&)>;

/// Exact E[metric(state_n)] for n = 0..n_steps by visiting all p^n_steps
/// equiprobable index paths. Throws ResourceError when p^n_steps > 10^6.
Vector enumerate_expectation_of(const ProblemInstance& problem, std::span<const double> data,
                                const StepPolicy& policy, Variant variant, std::size_t n_steps,
                                const StateMetric& metric,
                                std::optional<std::span<const double>> x0 = std::nullopt);

/// Exact E[rel_err_sq(x_n, truth)] (L2), n = 0..n_steps.
Vector enumerate_expectation(const ProblemInstance& problem, std::span<const double> data,
                             const StepPolicy& policy, Variant variant, std::size_t n_steps);

struct SourceConditionInstance {
  ProblemInstance problem;
  Vector lambda_dagger;
  Vector x0;
  RateConstants constants;  // c0, eta_bar from the policy; M0 from lambda_dagger
};

/// truth := x0 + A* lambda, exact data := A truth,
/// M0 := ||x0 - truth||_w^2 + c0 sum_i lambda_i^2 / eta_i.
SourceConditionInstance source_condition_construct(const OperatorBundle& bundle,
                                                   std::span<const double> lambda_dagger,
                                                   std::span<const double> x0,
                                                   const StepPolicy& policy,
                                                   Vector sample_points = {});

struct SemiConvergence {
  std::size_t n_min = 0;  // iteration number of the first minimum
  double err_min = 0.0;
  double err_final = 0.0;
};

SemiConvergence semi_convergence_stats(const EnsembleResult& trace);

struct BoundReport {
  bool passed = true;
  std::vector<std::size_t> violations;  // iteration numbers
  double worst_margin = 0.0;            // max over k of mean - allowed (absolute units)
};

/// Passes iff mean[k] <= bound(iters[k]) (1 + slack) + 3 std_err[k] for every k,
/// with the trace converted to absolute units via truth_norm_sq.
BoundReport bound_check(const EnsembleResult& trace, const std::function<double(std::size_t)>& bound,
                        double slack);

/// Least-squares slope of log(value) against log(iter) over iters in [lo, hi].
double loglog_slope(const EnsembleResult& trace, std::size_t lo, std::size_t hi);

/// CSV: header `iter,mean_sq_rel_err,std_err`, %.12e values, LF endings.
void write_csv(std::ostream& os, const EnsembleResult& result);

}  // namespace shbreg
