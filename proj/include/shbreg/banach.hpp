#pragma once

// Dual (mirror) stochastic heavy-ball iteration: the heavy-ball recursion runs
// on the dual variable xi, and the primal iterate is x = grad R*(xi).

#include <cstddef>
#include <optional>
#include <span>

#include "shbreg/linops.hpp"
#include "shbreg/problems.hpp"
#include "shbreg/rng.hpp"
#include "shbreg/shb.hpp"

namespace shbreg {

enum class RegularizerKind { EntropySimplex, Quadratic };

/// Strongly convex regularizer R on the quadrature-weighted space.
///  - EntropySimplex: R(x) = int x log x restricted to densities (mu = 1/2).
///  - Quadratic: R(x) = 1/2 ||x - x0||_w^2 (mu = 1/2 under the convention
///    R(t a + (1-t) b) + mu t (1-t) ||a - b||^2 <= t R(a) + (1-t) R(b)).
class Regularizer {
 public:
  static Regularizer entropy_simplex(std::shared_ptr<const Grid> grid);
  static Regularizer quadratic(std::shared_ptr<const Grid> grid, Vector center);

  RegularizerKind kind() const { return kind_; }
  double mu() const { return mu_; }
  const Grid& grid() const { return *grid_; }
  std::span<const double> center() const { return center_; }

 private:
  Regularizer(RegularizerKind kind, std::shared_ptr<const Grid> grid, double mu, Vector center);

  RegularizerKind kind_;
  std::shared_ptr<const Grid> grid_;
  double mu_;
  Vector center_;
};

/// x = grad R*(xi). Entropy: exp(xi - max xi) normalized by its trapezoidal
/// integral. Quadratic: x0 + xi.
Vector mirror_map(const Regularizer& reg, std::span<const double> xi);
void mirror_map_into(const Regularizer& reg, std::span<const double> xi, std::span<double> x);

struct DualState {
  Vector xi_cur;
  Vector xi_prev;
  Vector x;  // mirror_map(xi_cur)
  std::size_t n = 0;

  static DualState initial(const Regularizer& reg);
};

/// xi <- xi - alpha eta A_i^*(A_i x - y_i) + beta (xi - xi_prev); x <- grad R*(xi).
void banach_step(DualState& state, const Regularizer& reg, const RowOperator& row, double y_i,
                 double eta);

/// D(x_bar, x). Entropy: int x_bar log(x_bar / x) with 0 log 0 = 0, +infinity when
/// x vanishes where x_bar does not. Quadratic: 1/2 ||x_bar - x||_w^2.
double bregman_distance(const Regularizer& reg, std::span<const double> x_bar,
                        std::span<const double> x);

/// p M0/(n+1) + (n+1) delta^2 / p + delta^2 (the error envelope up to its constant).
double banach_rate_envelope(std::size_t n, std::size_t p, double total_level, double M0);

class MirrorSolver {
 public:
  /// Throws ConfigError unless 0 < eta_i < 2 mu / ||A||^2 for every row.
  MirrorSolver(const OperatorBundle& bundle, std::span<const double> data, const Regularizer& reg,
               StepPolicy policy);

  void advance(std::size_t index);
  void advance(CounterRng& rng) { advance(rng.index(bundle_->size())); }

  const DualState& state() const { return state_; }
  std::span<const double> x() const { return state_.x; }
  std::size_t iteration() const { return state_.n; }
  const Vector& base_steps() const { return eta_; }

 private:
  const OperatorBundle* bundle_;
  std::span<const double> data_;
  const Regularizer* reg_;
  StepPolicy policy_;
  Vector eta_;
  DualState state_;
};

void run_banach(const ProblemInstance& problem, std::span<const double> data,
                const Regularizer& reg, const StepPolicy& policy, std::size_t n_iters,
                RunSeed seed, const Observer& observer);

}  // namespace shbreg
