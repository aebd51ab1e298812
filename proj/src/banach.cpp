#include "shbreg/banach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shbreg/errors.hpp"

namespace shbreg {

Regularizer::Regularizer(RegularizerKind kind, std::shared_ptr<const Grid> grid, double mu,
                         Vector center)
    : kind_(kind), grid_(std::move(grid)), mu_(mu), center_(std::move(center)) {}

Regularizer Regularizer::entropy_simplex(std::shared_ptr<const Grid> grid) {
  if (!grid) throw ConfigError("regularizer needs a grid");
  for (double w : grid->weights) {
    if (!(w > 0.0)) throw ConfigError("entropy regularizer needs positive quadrature weights");
  }
  return Regularizer(RegularizerKind::EntropySimplex, std::move(grid), 0.5, {});
}

Regularizer Regularizer::quadratic(std::shared_ptr<const Grid> grid, Vector center) {
  if (!grid) throw ConfigError("regularizer needs a grid");
  detail::require_same_size(center.size(), grid->size(), "quadratic regularizer center");
  return Regularizer(RegularizerKind::Quadratic, std::move(grid), 0.5, std::move(center));
}

void mirror_map_into(const Regularizer& reg, std::span<const double> xi, std::span<double> x) {
  const Grid& g = reg.grid();
  detail::require_same_size(xi.size(), g.size(), "mirror_map(xi)");
  detail::require_same_size(x.size(), g.size(), "mirror_map(x)");
  if (reg.kind() == RegularizerKind::Quadratic) {
    const auto c = reg.center();
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = c[j] + xi[j];
    return;
  }
  const double top = *std::max_element(xi.begin(), xi.end());
  double integral = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = std::exp(xi[j] - top);
    integral += g.weights[j] * x[j];
  }
  const double inv = 1.0 / integral;
  for (double& v : x) v *= inv;
}

Vector mirror_map(const Regularizer& reg, std::span<const double> xi) {
  Vector x(xi.size());
  mirror_map_into(reg, xi, x);
  return x;
}

DualState DualState::initial(const Regularizer& reg) {
  const std::size_t m = reg.grid().size();
  DualState s{Vector(m, 0.0), Vector(m, 0.0), Vector(m, 0.0), 0};
  mirror_map_into(reg, s.xi_cur, s.x);
  return s;
}

namespace {

void dual_update(DualState& s, const Regularizer& reg, const RowOperator& row, double residual,
                 double eta) {
  const auto k = row.kernel_row();
  const StepCoefficients c = step_coefficients(s.n);
  const double g = c.alpha * eta * residual;
  for (std::size_t j = 0; j < k.size(); ++j) {
    s.xi_prev[j] = s.xi_cur[j] - g * k[j] + c.beta * (s.xi_cur[j] - s.xi_prev[j]);
  }
  std::swap(s.xi_prev, s.xi_cur);
  mirror_map_into(reg, s.xi_cur, s.x);
  ++s.n;
}

}  // namespace

void banach_step(DualState& state, const Regularizer& reg, const RowOperator& row, double y_i,
                 double eta) {
  detail::require_same_size(state.xi_cur.size(), row.size(), "dual state xi");
  detail::require_same_size(state.xi_prev.size(), row.size(), "dual state xi_prev");
  detail::require_same_size(state.x.size(), row.size(), "dual state x");
  dual_update(state, reg, row, row.apply(state.x) - y_i, eta);
}

double bregman_distance(const Regularizer& reg, std::span<const double> x_bar,
                        std::span<const double> x) {
  const Grid& g = reg.grid();
  detail::require_same_size(x_bar.size(), g.size(), "bregman_distance(x_bar)");
  detail::require_same_size(x.size(), g.size(), "bregman_distance(x)");
  double d = 0.0;
  if (reg.kind() == RegularizerKind::Quadratic) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double e = x_bar[j] - x[j];
      d += g.weights[j] * e * e;
    }
    return 0.5 * d;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x_bar[j] == 0.0) continue;
    if (x[j] == 0.0) return std::numeric_limits<double>::infinity();
    d += g.weights[j] * x_bar[j] * std::log(x_bar[j] / x[j]);
  }
  return d;
}

double banach_rate_envelope(std::size_t n, std::size_t p, double total_level, double M0) {
  const double n1 = static_cast<double>(n) + 1.0;
  const double pp = static_cast<double>(p);
  const double d2 = total_level * total_level;
  return pp * M0 / n1 + n1 * d2 / pp + d2;
}

MirrorSolver::MirrorSolver(const OperatorBundle& bundle, std::span<const double> data,
                           const Regularizer& reg, StepPolicy policy)
    : bundle_(&bundle),
      data_(data),
      reg_(&reg),
      policy_(std::move(policy)),
      eta_(base_step_sizes(policy_, bundle)),
      state_(DualState::initial(reg)) {
  detail::require_same_size(data.size(), bundle.size(), "MirrorSolver data");
  detail::require_same_size(reg.grid().size(), bundle.grid().size(), "MirrorSolver regularizer");
  if (policy_.rule == StepRule::Discrepancy) {
    detail::require_same_size(policy_.per_eq_levels.size(), bundle.size(),
                              "MirrorSolver noise levels");
  }
  const double limit = 2.0 * reg.mu() / bundle.full_norm_sq();
  for (double e : eta_) {
    if (!(e < limit)) {
      throw ConfigError("mirror step sizes must satisfy eta_i < 2 mu / ||A||^2 (mu0 = " +
                        std::to_string(policy_.mu0) + ")");
    }
  }
}

void MirrorSolver::advance(std::size_t index) {
  const RowOperator& row = bundle_->row(index);
  const double residual = row.apply(state_.x) - data_[index];
  double eta = eta_[index];
  if (policy_.rule == StepRule::Discrepancy && !(std::abs(residual) > policy_.tau *
                                                     policy_.per_eq_levels[index])) {
    eta = 0.0;
  }
  dual_update(state_, *reg_, row, residual, eta);
}

void run_banach(const ProblemInstance& problem, std::span<const double> data,
                const Regularizer& reg, const StepPolicy& policy, std::size_t n_iters,
                RunSeed seed, const Observer& observer) {
  MirrorSolver solver(problem.bundle, data, reg, policy);
  CounterRng rng(seed);
  if (observer) observer(0, solver.x());
  for (std::size_t k = 0; k < n_iters; ++k) {
    solver.advance(rng);
    if (observer) observer(solver.iteration(), solver.x());
  }
}

}  // namespace shbreg
