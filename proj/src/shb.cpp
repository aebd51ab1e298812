#include "shbreg/shb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shbreg/errors.hpp"

namespace shbreg {

SolverState SolverState::initial(std::span<const double> x0) {
  Vector x(x0.begin(), x0.end());
  return SolverState{x, x, x, 0};
}

StepCoefficients step_coefficients(std::size_t n) {
  const double d = static_cast<double>(n) + 2.0;
  return {1.0 / d, static_cast<double>(n) / d};
}

StepPolicy StepPolicy::constant(double mu0, NormBasis basis) {
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw ConfigError("step policy needs mu0 > 0");
  return StepPolicy{StepRule::Constant, mu0, 1.0, {}, basis};
}

StepPolicy StepPolicy::discrepancy(double mu0, double tau, Vector per_eq_levels, NormBasis basis) {
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw ConfigError("step policy needs mu0 > 0");
  if (!(tau >= 1.0)) throw ConfigError("discrepancy policy needs tau >= 1");
  for (double d : per_eq_levels) {
    if (!(d >= 0.0)) throw ConfigError("discrepancy policy needs nonnegative noise levels");
  }
  return StepPolicy{StepRule::Discrepancy, mu0, tau, std::move(per_eq_levels), basis};
}

double step_size(const StepPolicy& policy, std::size_t row_index, double norm_sq,
                 double residual_abs) {
  if (norm_sq == 0.0) {
    throw DegenerateRowError("step size requested for zero row " + std::to_string(row_index));
  }
  if (policy.rule == StepRule::Constant) return policy.mu0 / norm_sq;
  if (row_index >= policy.per_eq_levels.size()) {
    throw DimensionError("discrepancy policy has no noise level for row " +
                         std::to_string(row_index));
  }
  return residual_abs > policy.tau * policy.per_eq_levels[row_index] ? policy.mu0 / norm_sq : 0.0;
}

double step_size(const StepPolicy& policy, std::size_t row_index, const RowOperator& row,
                 double residual_abs) {
  return step_size(policy, row_index, row.norm_sq(), residual_abs);
}

namespace {

double basis_norm_sq(const StepPolicy& policy, const OperatorBundle& bundle, std::size_t i) {
  return policy.basis == NormBasis::Full ? bundle.full_norm_sq() : bundle.row(i).norm_sq();
}

void check_state(const SolverState& s, const RowOperator& row) {
  detail::require_same_size(s.x_cur.size(), row.size(), "solver state x");
  detail::require_same_size(s.x_prev.size(), row.size(), "solver state x_prev");
  detail::require_same_size(s.z.size(), row.size(), "solver state z");
}

// The update kernels take the residual A_i x - y_i so the solver can share it
// with the discrepancy test.

void ima_update(SolverState& s, const RowOperator& row, double residual, double eta) {
  const auto k = row.kernel_row();
  const double g = eta * residual;
  const double n1 = static_cast<double>(s.n) + 1.0;
  const double n2 = static_cast<double>(s.n) + 2.0;
  std::swap(s.x_prev, s.x_cur);
  for (std::size_t j = 0; j < k.size(); ++j) {
    s.z[j] -= g * k[j];
    s.x_cur[j] = (n1 * s.x_prev[j] + s.z[j]) / n2;
  }
  ++s.n;
}

void heavy_ball_update(SolverState& s, const RowOperator& row, double residual, double eta,
                       StepCoefficients c) {
  const auto k = row.kernel_row();
  const double g = c.alpha * eta * residual;
  for (std::size_t j = 0; j < k.size(); ++j) {
    s.x_prev[j] = s.x_cur[j] - g * k[j] + c.beta * (s.x_cur[j] - s.x_prev[j]);
  }
  std::swap(s.x_prev, s.x_cur);
  const double n1 = static_cast<double>(s.n) + 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    s.z[j] = s.x_cur[j] + n1 * (s.x_cur[j] - s.x_prev[j]);
  }
  ++s.n;
}

void sgd_update(SolverState& s, const RowOperator& row, double residual, double eta) {
  const auto k = row.kernel_row();
  const double g = eta * residual;
  const double n1 = static_cast<double>(s.n) + 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    s.x_prev[j] = s.x_cur[j];
    s.x_cur[j] -= g * k[j];
    s.z[j] = s.x_cur[j] + n1 * (s.x_cur[j] - s.x_prev[j]);
  }
  ++s.n;
}

}  // namespace

void heavy_ball_step(SolverState& state, const RowOperator& row, double y_i, double eta,
                     StepCoefficients coeffs) {
  check_state(state, row);
  heavy_ball_update(state, row, row.apply(state.x_cur) - y_i, eta, coeffs);
}

void shb_step_twostep(SolverState& state, const RowOperator& row, double y_i, double eta) {
  heavy_ball_step(state, row, y_i, eta, step_coefficients(state.n));
}

void shb_step_ima(SolverState& state, const RowOperator& row, double y_i, double eta) {
  check_state(state, row);
  ima_update(state, row, row.apply(state.x_cur) - y_i, eta);
}

void sgd_step(SolverState& state, const RowOperator& row, double y_i, double eta) {
  check_state(state, row);
  sgd_update(state, row, row.apply(state.x_cur) - y_i, eta);
}

Vector base_step_sizes(const StepPolicy& policy, const OperatorBundle& bundle) {
  Vector eta(bundle.size());
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const double norm = basis_norm_sq(policy, bundle, i);
    if (norm == 0.0) {
      throw DegenerateRowError("row " + std::to_string(i) + " has zero operator norm");
    }
    eta[i] = policy.mu0 / norm;
  }
  return eta;
}

HilbertSolver::HilbertSolver(const OperatorBundle& bundle, std::span<const double> data,
                             StepPolicy policy, Variant variant, std::span<const double> x0)
    : bundle_(&bundle),
      data_(data),
      policy_(std::move(policy)),
      variant_(variant),
      eta_(base_step_sizes(policy_, bundle)),
      state_(SolverState::initial(x0)) {
  detail::require_same_size(data.size(), bundle.size(), "HilbertSolver data");
  detail::require_same_size(x0.size(), bundle.grid().size(), "HilbertSolver x0");
  if (policy_.rule == StepRule::Discrepancy) {
    detail::require_same_size(policy_.per_eq_levels.size(), bundle.size(),
                              "HilbertSolver noise levels");
  }
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    if (!(eta_[i] * bundle.row(i).norm_sq() < 1.0)) {
      throw ConfigError("step sizes must satisfy eta_i ||A_i||^2 < 1 (mu0 = " +
                        std::to_string(policy_.mu0) + ")");
    }
  }
}

void HilbertSolver::advance(std::size_t index) {
  const RowOperator& row = bundle_->row(index);
  const double residual = row.apply(state_.x_cur) - data_[index];
  const double eta = policy_.rule == StepRule::Constant
                         ? eta_[index]
                         : step_size(policy_, index, basis_norm_sq(policy_, *bundle_, index),
                                     std::abs(residual));
  if (variant_ == Variant::SHB) {
    ima_update(state_, row, residual, eta);
  } else {
    sgd_update(state_, row, residual, eta);
  }
}

void run(const ProblemInstance& problem, std::span<const double> data, const StepPolicy& policy,
         Variant variant, std::size_t n_iters, RunSeed seed, const Observer& observer,
         std::optional<std::span<const double>> x0) {
  const Vector zeros(problem.m(), 0.0);
  HilbertSolver solver(problem.bundle, data, policy, variant, x0 ? *x0 : std::span(zeros));
  CounterRng rng(seed);
  if (observer) observer(0, solver.x());
  for (std::size_t k = 0; k < n_iters; ++k) {
    solver.advance(rng);
    if (observer) observer(solver.iteration(), solver.x());
  }
}

RateConstants rate_constants(std::span<const double> eta, const OperatorBundle& bundle) {
  detail::require_same_size(eta.size(), bundle.size(), "rate_constants");
  RateConstants c;
  c.c0 = 1.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    c.c0 = std::min(c.c0, 1.0 - eta[i] * bundle.row(i).norm_sq());
    c.eta_bar = std::max(c.eta_bar, eta[i]);
  }
  return c;
}

std::size_t a_priori_stop(std::size_t p, double total_level) {
  if (!(total_level > 0.0)) throw ConfigError("a-priori stopping needs delta > 0");
  if (p < 1) throw ConfigError("a-priori stopping needs p >= 1");
  const double ratio = std::ceil(static_cast<double>(p) / total_level);
  if (!(ratio < 0x1.0p62)) throw ConfigError("a-priori stopping index overflows");
  return static_cast<std::size_t>(ratio) - 1;
}

double stability_bound(std::size_t n, double total_level, std::size_t p, const RateConstants& c) {
  return c.eta_bar * static_cast<double>(n) * total_level * total_level /
         (c.c0 * static_cast<double>(p));
}

double rate_bound(std::size_t n, std::size_t p, const RateConstants& c) {
  return static_cast<double>(p) * c.M0 / (c.c0 * (static_cast<double>(n) + 1.0));
}

}  // namespace shbreg
