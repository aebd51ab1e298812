#pragma once

// Stochastic heavy-ball iteration in Hilbert space, its iterate-moving-average
// form, the plain stochastic gradient (row-action) baseline, step-size rules and
// the a-priori stopping / error-bound evaluators.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "shbreg/linops.hpp"
#include "shbreg/problems.hpp"
#include "shbreg/rng.hpp"

namespace shbreg {

/// Heavy-ball iterate pair plus the moving-average auxiliary z.
/// Invariant: z == x_cur + n (x_cur - x_prev).
struct SolverState {
  Vector x_cur;
  Vector x_prev;
  Vector z;
  std::size_t n = 0;

  static SolverState initial(std::span<const double> x0);
};

struct StepCoefficients {
  double alpha;
  double beta;
};

/// alpha_n = 1/(n+2), beta_n = n/(n+2).
StepCoefficients step_coefficients(std::size_t n);

enum class StepRule { Constant, Discrepancy };

/// Which norm the base step mu0 / ||.||^2 divides by: the sampled row's norm
/// (Hilbert solver) or the full operator norm (mirror solver admissibility).
enum class NormBasis { PerRow, Full };

struct StepPolicy {
  StepRule rule = StepRule::Constant;
  double mu0 = 0.6;
  double tau = 1.0;
  Vector per_eq_levels;  // Discrepancy only
  NormBasis basis = NormBasis::PerRow;

  static StepPolicy constant(double mu0, NormBasis basis = NormBasis::PerRow);
  static StepPolicy discrepancy(double mu0, double tau, Vector per_eq_levels,
                                NormBasis basis = NormBasis::PerRow);
};

/// Constant: mu0 / norm_sq. Discrepancy: mu0 / norm_sq when residual_abs > tau * delta_i,
/// otherwise 0. Throws DegenerateRowError when norm_sq == 0.
double step_size(const StepPolicy& policy, std::size_t row_index, double norm_sq,
                 double residual_abs);
double step_size(const StepPolicy& policy, std::size_t row_index, const RowOperator& row,
                 double residual_abs);

/// The undamped step sizes eta_i = mu0 / ||A_i||^2 (or mu0 / ||A||^2 for NormBasis::Full).
Vector base_step_sizes(const StepPolicy& policy, const OperatorBundle& bundle);

/// x <- x - alpha eta A_i^*(A_i x - y_i) + beta (x - x_prev); keeps z consistent.
void heavy_ball_step(SolverState& state, const RowOperator& row, double y_i, double eta,
                     StepCoefficients coeffs);

/// Two-step recursion with the standard coefficients.
void shb_step_twostep(SolverState& state, const RowOperator& row, double y_i, double eta);

/// z <- z - eta A_i^*(A_i x - y_i); x <- ((n+1) x + z)/(n+2).
void shb_step_ima(SolverState& state, const RowOperator& row, double y_i, double eta);

/// x <- x - eta A_i^*(A_i x - y_i).
void sgd_step(SolverState& state, const RowOperator& row, double y_i, double eta);

enum class Variant { SHB, SGD };

/// One stochastic run over fixed data. Holds the iterate and the resolved
/// per-row step sizes; the caller chooses indices or lets it draw them.
class HilbertSolver {
 public:
  /// Throws ConfigError unless 0 < eta_i ||A_i||^2 < 1 for every row.
  HilbertSolver(const OperatorBundle& bundle, std::span<const double> data, StepPolicy policy,
                Variant variant, std::span<const double> x0);

  /// One iteration using row `index`.
  void advance(std::size_t index);
  /// One iteration with a uniformly drawn row.
  void advance(CounterRng& rng) { advance(rng.index(bundle_->size())); }

  const SolverState& state() const { return state_; }
  std::span<const double> x() const { return state_.x_cur; }
  std::size_t iteration() const { return state_.n; }
  const Vector& base_steps() const { return eta_; }

 private:
  const OperatorBundle* bundle_;
  std::span<const double> data_;
  StepPolicy policy_;
  Variant variant_;
  Vector eta_;
  SolverState state_;
};

using Observer = std::function<void(std::size_t n, std::span<const double> x)>;

/// Runs n_iters iterations drawing i_n uniformly from the stream `seed`; calls
/// observer for every iterate including n = 0. x0 defaults to zero.
void run(const ProblemInstance& problem, std::span<const double> data, const StepPolicy& policy,
         Variant variant, std::size_t n_iters, RunSeed seed, const Observer& observer,
         std::optional<std::span<const double>> x0 = std::nullopt);

struct RateConstants {
  double c0 = 1.0;       // min_i (1 - eta_i ||A_i||^2)
  double eta_bar = 0.0;  // max_i eta_i
  double M0 = 0.0;       // ||x0 - x^dagger||^2 + c0 sum_i lambda_i^2 / eta_i
};

/// c0 and eta_bar from per-row step sizes; M0 left for the caller.
RateConstants rate_constants(std::span<const double> eta, const OperatorBundle& bundle);

/// n_delta = ceil(p / delta) - 1.
std::size_t a_priori_stop(std::size_t p, double total_level);

/// E||x_n^delta - x_n||^2 <= eta_bar n delta^2 / (c0 p)
double stability_bound(std::size_t n, double total_level, std::size_t p, const RateConstants& c);

/// E||x_n - x^dagger||^2 <= p M0 / (c0 (n+1))
double rate_bound(std::size_t n, std::size_t p, const RateConstants& c);

}  // namespace shbreg
