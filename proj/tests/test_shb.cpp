#include <gtest/gtest.h>

#include <cmath>

#include "shbreg/errors.hpp"
#include "shbreg/harness.hpp"
#include "shbreg/shb.hpp"
#include "support.hpp"

using namespace shbreg;
using shbreg::test::max_rel_diff;

namespace {

// On a two-node grid over [0,1] with kernel (1,1), constant vectors behave like
// scalars: A c = c, A* v = (v, v), ||A||^2 = 1.
RowOperator scalar_row() { return RowOperator(make_trapezoid_grid(0.0, 1.0, 2), Vector{1.0, 1.0}); }

std::vector<std::size_t> recorded_path(std::size_t p, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<std::size_t> path(n);
  for (auto& i : path) i = rng.index(p);
  return path;
}

}  // namespace

TEST(Coefficients, Formula) {
  const auto c0 = step_coefficients(0);
  EXPECT_EQ(c0.alpha, 0.5);
  EXPECT_EQ(c0.beta, 0.0);
  const auto c2 = step_coefficients(2);
  EXPECT_EQ(c2.alpha, 0.25);
  EXPECT_EQ(c2.beta, 0.5);
  double prev_a = 1.0, prev_b = -1.0;
  for (std::size_t n = 0; n < 5000; n += 7) {
    const auto c = step_coefficients(n);
    EXPECT_LT(c.alpha, prev_a);
    EXPECT_GT(c.beta, prev_b);
    EXPECT_NEAR(c.alpha * static_cast<double>(n + 2), 1.0, 1e-15);
    prev_a = c.alpha;
    prev_b = c.beta;
  }
  EXPECT_LT(step_coefficients(1'000'000).alpha, 1e-5);
  EXPECT_GT(step_coefficients(1'000'000).beta, 1.0 - 1e-5);
}

TEST(TwoStep, ScalarHandRecursion) {
  const RowOperator row = scalar_row();
  SolverState s = SolverState::initial(Vector{0.0, 0.0});
  shb_step_twostep(s, row, 1.0, 0.5);
  EXPECT_NEAR(s.x_cur[0], 0.25, 1e-15);
  shb_step_twostep(s, row, 1.0, 0.5);
  EXPECT_NEAR(s.x_cur[0], 11.0 / 24.0, 1e-15);
  EXPECT_EQ(s.n, 2u);
}

TEST(Ima, ScalarHandRecursion) {
  const RowOperator row = scalar_row();
  SolverState s = SolverState::initial(Vector{0.0, 0.0});
  shb_step_ima(s, row, 1.0, 0.5);
  EXPECT_NEAR(s.z[0], 0.5, 1e-15);
  EXPECT_NEAR(s.x_cur[0], 0.25, 1e-15);
  shb_step_ima(s, row, 1.0, 0.5);
  EXPECT_NEAR(s.z[0], 0.875, 1e-15);
  EXPECT_NEAR(s.x_cur[0], 11.0 / 24.0, 1e-15);
}

TEST(Sgd, ScalarHandRecursion) {
  const RowOperator row = scalar_row();
  SolverState s = SolverState::initial(Vector{0.0, 0.0});
  sgd_step(s, row, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(s.x_cur[0], 0.5);
  sgd_step(s, row, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(s.x_cur[0], 0.75);
}

TEST(Steps, InitialStateInvariant) {
  const Vector x0{1.0, -2.0, 3.0};
  const SolverState s = SolverState::initial(x0);
  EXPECT_EQ(s.x_cur, x0);
  EXPECT_EQ(s.x_prev, x0);
  EXPECT_EQ(s.z, x0);
  EXPECT_EQ(s.n, 0u);
}

TEST(Steps, FixedPointWhenResidualVanishes) {
  const ProblemInstance prob = build_random(4, 10, 3);
  for (auto step : {shb_step_twostep, shb_step_ima, sgd_step}) {
    SolverState s = SolverState::initial(prob.truth);
    for (std::size_t k = 0; k < 6; ++k) step(s, prob.bundle.row(k % 4), prob.exact_data[k % 4], 0.3);
    EXPECT_LT(max_rel_diff(s.x_cur, prob.truth), 1e-14);
  }
}

TEST(Steps, ZeroStepFreezesStateWithoutMomentum) {
  const ProblemInstance prob = build_random(3, 7, 4);
  const Vector x0 = shbreg::test::random_vector(7, 1);
  for (auto step : {shb_step_twostep, shb_step_ima, sgd_step}) {
    SolverState s = SolverState::initial(x0);
    step(s, prob.bundle.row(0), 5.0, 0.0);
    EXPECT_EQ(s.x_cur, x0);
    EXPECT_EQ(s.n, 1u);
  }
}

TEST(Ima, ZeroStepKeepsZAndAveragesTowardIt) {
  const ProblemInstance prob = build_random(3, 7, 5);
  SolverState s = SolverState::initial(Vector(7, 0.0));
  for (std::size_t k = 0; k < 5; ++k) shb_step_ima(s, prob.bundle.row(k % 3), prob.exact_data[k % 3], 0.4);
  const Vector z = s.z;
  double gap = max_rel_diff(s.x_cur, z);
  for (std::size_t k = 0; k < 20; ++k) {
    const Vector x = s.x_cur;
    shb_step_ima(s, prob.bundle.row(1), 0.0, 0.0);
    EXPECT_EQ(s.z, z);
    const double nn = static_cast<double>(s.n);
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_NEAR(s.x_cur[j], (nn * x[j] + z[j]) / (nn + 1.0), 1e-14 * (1.0 + std::abs(z[j])));
    }
    const double g = max_rel_diff(s.x_cur, z);
    EXPECT_LE(g, gap * (1.0 + 1e-12));
    gap = g;
  }
}

TEST(TwoStep, ZeroStepIsMomentumExtrapolation) {
  const ProblemInstance prob = build_random(2, 5, 6);
  SolverState s = SolverState::initial(Vector(5, 0.0));
  shb_step_twostep(s, prob.bundle.row(0), 1.0, 0.5);
  shb_step_twostep(s, prob.bundle.row(1), -1.0, 0.5);
  const Vector x = s.x_cur, xp = s.x_prev;
  const double beta = step_coefficients(s.n).beta;
  shb_step_twostep(s, prob.bundle.row(0), 0.0, 0.0);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(s.x_cur[j], x[j] + beta * (x[j] - xp[j]), 1e-15);
}

TEST(Steps, ImaConsistencyInvariant) {
  const ProblemInstance prob = build_random(5, 16, 7);
  const NoisyData d = add_noise(prob, 0.05, 7);
  const auto path = recorded_path(5, 300, 1);
  for (auto step : {shb_step_twostep, shb_step_ima, sgd_step}) {
    SolverState s = SolverState::initial(Vector(16, 0.0));
    for (std::size_t i : path) {
      const double eta = 0.6 / prob.bundle.row(i).norm_sq();
      step(s, prob.bundle.row(i), d.values[i], eta);
      const double n = static_cast<double>(s.n);
      for (std::size_t j = 0; j < 16; ++j) {
        const double expect = s.x_cur[j] + n * (s.x_cur[j] - s.x_prev[j]);
        EXPECT_NEAR(s.z[j], expect, 1e-10 * (1.0 + std::abs(expect)));
      }
    }
  }
}

TEST(Steps, FormEquivalenceOnRecordedPath) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemInstance prob = build_random(5, 16, seed);
    const NoisyData d = add_noise(prob, 0.01, seed);
    SolverState a = SolverState::initial(Vector(16, 0.0));
    SolverState b = a;
    for (std::size_t i : recorded_path(5, 200, seed)) {
      const double eta = 0.6 / prob.bundle.row(i).norm_sq();
      shb_step_twostep(a, prob.bundle.row(i), d.values[i], eta);
      shb_step_ima(b, prob.bundle.row(i), d.values[i], eta);
      ASSERT_LT(max_rel_diff(b.x_cur, a.x_cur), 1e-10) << "n=" << a.n;
    }
  }
}

TEST(Steps, SgdIsHeavyBallWithUnitAlphaZeroBeta) {
  const ProblemInstance prob = build_random(4, 12, 8);
  SolverState a = SolverState::initial(Vector(12, 0.0));
  SolverState b = a;
  for (std::size_t i : recorded_path(4, 100, 2)) {
    const double eta = 0.5 / prob.bundle.row(i).norm_sq();
    heavy_ball_step(a, prob.bundle.row(i), prob.exact_data[i], eta, StepCoefficients{1.0, 0.0});
    sgd_step(b, prob.bundle.row(i), prob.exact_data[i], eta);
    ASSERT_EQ(a.x_cur, b.x_cur);
  }
}

TEST(Steps, DimensionMismatchThrows) {
  const RowOperator row = scalar_row();
  SolverState s = SolverState::initial(Vector(3, 0.0));
  EXPECT_THROW(shb_step_twostep(s, row, 1.0, 0.5), DimensionError);
  EXPECT_THROW(shb_step_ima(s, row, 1.0, 0.5), DimensionError);
  EXPECT_THROW(sgd_step(s, row, 1.0, 0.5), DimensionError);
}

TEST(StepSize, DiscrepancyAndConstantRules) {
  const StepPolicy dp = StepPolicy::discrepancy(0.6, 1.4, Vector{0.5});
  EXPECT_EQ(step_size(dp, 0, 2.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(step_size(dp, 0, 2.0, 1.0), 0.3);
  EXPECT_EQ(step_size(dp, 0, 2.0, 0.7), 0.0);  // strict inequality
  const StepPolicy c = StepPolicy::constant(0.6);
  EXPECT_DOUBLE_EQ(step_size(c, 0, 4.0, 123.0), 0.15);
  EXPECT_DOUBLE_EQ(step_size(c, 0, 4.0, 0.0), 0.15);
}

TEST(StepSize, ErrorsAndValidation) {
  const RowOperator zero(make_trapezoid_grid(0.0, 1.0, 3), Vector(3, 0.0));
  EXPECT_THROW(step_size(StepPolicy::constant(0.6), 0, zero, 1.0), DegenerateRowError);
  EXPECT_THROW(StepPolicy::constant(0.0), ConfigError);
  EXPECT_THROW(StepPolicy::constant(-1.0), ConfigError);
  EXPECT_THROW(StepPolicy::discrepancy(0.6, 0.9, Vector{1.0}), ConfigError);
  EXPECT_THROW(StepPolicy::discrepancy(0.6, 1.4, Vector{-1.0}), ConfigError);
}

TEST(Solver, RejectsInadmissibleSteps) {
  const ProblemInstance prob = build_random(3, 8, 1);
  EXPECT_THROW(HilbertSolver(prob.bundle, prob.exact_data, StepPolicy::constant(1.0), Variant::SHB,
                             Vector(8, 0.0)),
               ConfigError);
  EXPECT_THROW(HilbertSolver(prob.bundle, Vector(2, 0.0), StepPolicy::constant(0.5), Variant::SHB,
                             Vector(8, 0.0)),
               DimensionError);
}

TEST(Solver, DiscrepancyBelowThresholdStillAdvances) {
  const ProblemInstance prob = build_random(3, 8, 2);
  const StepPolicy dp = StepPolicy::discrepancy(0.6, 1.0, Vector(3, 1e6));
  HilbertSolver solver(prob.bundle, prob.exact_data, dp, Variant::SHB, Vector(8, 0.0));
  for (std::size_t k = 0; k < 10; ++k) solver.advance(k % 3);
  EXPECT_EQ(solver.iteration(), 10u);
  for (double v : solver.x()) EXPECT_EQ(v, 0.0);
}

TEST(Solver, SolverMatchesStepFunctions) {
  const ProblemInstance prob = build_random(4, 9, 3);
  const StepPolicy pol = StepPolicy::constant(0.6);
  HilbertSolver shb(prob.bundle, prob.exact_data, pol, Variant::SHB, Vector(9, 0.0));
  HilbertSolver sgd(prob.bundle, prob.exact_data, pol, Variant::SGD, Vector(9, 0.0));
  SolverState a = SolverState::initial(Vector(9, 0.0)), b = a;
  for (std::size_t i : recorded_path(4, 50, 3)) {
    const double eta = shb.base_steps()[i];
    shb.advance(i);
    sgd.advance(i);
    shb_step_ima(a, prob.bundle.row(i), prob.exact_data[i], eta);
    sgd_step(b, prob.bundle.row(i), prob.exact_data[i], eta);
  }
  EXPECT_EQ(Vector(shb.x().begin(), shb.x().end()), a.x_cur);
  EXPECT_EQ(Vector(sgd.x().begin(), sgd.x().end()), b.x_cur);
}

TEST(Run, ZeroIterationsObservesOnlyStart) {
  const ProblemInstance prob = build_random(3, 6, 1);
  const Vector x0 = shbreg::test::random_vector(6, 4);
  std::vector<std::size_t> seen;
  run(prob, prob.exact_data, StepPolicy::constant(0.6), Variant::SHB, 0, RunSeed{1, 0},
      [&](std::size_t n, std::span<const double> x) {
        seen.push_back(n);
        EXPECT_EQ(Vector(x.begin(), x.end()), x0);
      },
      std::span<const double>(x0));
  EXPECT_EQ(seen, std::vector<std::size_t>{0});
}

TEST(Run, ObserverSeesEveryIterate) {
  const ProblemInstance prob = build_random(3, 6, 1);
  std::vector<std::size_t> seen;
  run(prob, prob.exact_data, StepPolicy::constant(0.6), Variant::SHB, 25, RunSeed{1, 0},
      [&](std::size_t n, std::span<const double>) { seen.push_back(n); });
  ASSERT_EQ(seen.size(), 26u);
  for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k], k);
}

TEST(Run, SingleRowIsSeedIndependent) {
  const ProblemInstance prob = build_random(1, 10, 2);
  auto trace = [&](RunSeed s) {
    std::vector<Vector> out;
    run(prob, prob.exact_data, StepPolicy::constant(0.6), Variant::SHB, 30, s,
        [&](std::size_t, std::span<const double> x) { out.emplace_back(x.begin(), x.end()); });
    return out;
  };
  EXPECT_EQ(trace(RunSeed{1, 0}), trace(RunSeed{99, 17}));
}

TEST(Run, DeterministicGivenSeed) {
  const ProblemInstance prob = build_random(5, 16, 3);
  const NoisyData d = add_noise(prob, 0.01, 2);
  auto trace = [&](RunSeed s, Variant v) {
    std::vector<Vector> out;
    run(prob, d.values, StepPolicy::constant(0.6), v, 200, s,
        [&](std::size_t, std::span<const double> x) { out.emplace_back(x.begin(), x.end()); });
    return out;
  };
  for (Variant v : {Variant::SHB, Variant::SGD}) {
    EXPECT_EQ(trace(RunSeed{4, 2}, v), trace(RunSeed{4, 2}, v));
    EXPECT_NE(trace(RunSeed{4, 2}, v), trace(RunSeed{4, 3}, v));
  }
}

TEST(Constants, ConstantPolicyGivesCZeroOneMinusMu) {
  const ProblemInstance prob = build_random(6, 14, 4);
  for (double mu0 : {0.1, 0.6, 0.95}) {
    const Vector eta = base_step_sizes(StepPolicy::constant(mu0), prob.bundle);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(eta[i] * prob.bundle.row(i).norm_sq(), mu0);
    const RateConstants c = rate_constants(eta, prob.bundle);
    EXPECT_DOUBLE_EQ(c.c0, 1.0 - mu0);
    EXPECT_DOUBLE_EQ(c.eta_bar, *std::max_element(eta.begin(), eta.end()));
    EXPECT_GT(c.c0, 0.0);
    EXPECT_LE(c.c0, 1.0);
  }
}

TEST(Bounds, APrioriStop) {
  EXPECT_EQ(a_priori_stop(100, 0.01), 9999u);
  EXPECT_EQ(a_priori_stop(1, 1.0), 0u);
  EXPECT_EQ(a_priori_stop(7, 0.3), 23u);
  EXPECT_EQ(a_priori_stop(7, 0.15), 46u);
  EXPECT_THROW(a_priori_stop(5, 0.0), ConfigError);
  EXPECT_THROW(a_priori_stop(5, -1.0), ConfigError);
}

TEST(Bounds, StabilityBound) {
  const RateConstants c{0.4, 0.6, 0.0};
  EXPECT_EQ(stability_bound(0, 0.1, 5, c), 0.0);
  EXPECT_NEAR(stability_bound(10, 0.1, 5, c), 0.03, 1e-15);
  EXPECT_DOUBLE_EQ(stability_bound(20, 0.1, 5, c), 2.0 * stability_bound(10, 0.1, 5, c));
}

TEST(Bounds, RateBound) {
  EXPECT_DOUBLE_EQ(rate_bound(0, 1, RateConstants{0.5, 1.0, 1.0}), 2.0);
  const RateConstants c{0.4, 1.0, 3.0};
  for (std::size_t n : {0u, 3u, 100u}) EXPECT_DOUBLE_EQ(rate_bound(2 * n + 1, 7, c), 0.5 * rate_bound(n, 7, c));
  EXPECT_LT(rate_bound(100'000'000, 7, c), 1e-6);
}

TEST(Energy, ExactDataEnergyIsNonIncreasing) {
  // Source-condition instance: the truth is the x0-minimal solution.
  const ProblemInstance base = build_random(3, 8, 12);
  const Vector lambda = shbreg::test::random_vector(3, 5);
  const Vector x0(8, 0.0);
  const StepPolicy pol = StepPolicy::constant(0.6);
  const auto inst = source_condition_construct(base.bundle, lambda, x0, pol);
  const ProblemInstance& prob = inst.problem;
  const Vector eta = base_step_sizes(pol, prob.bundle);
  const Grid& g = *prob.grid;
  const double p = static_cast<double>(prob.p());

  const StateMetric energy = [&](const SolverState& s) {
    Vector d(s.z);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= prob.truth[j];
    double res = 0.0;
    for (std::size_t i = 0; i < prob.p(); ++i) {
      const double r = prob.bundle.row(i).apply(s.x_prev) - prob.exact_data[i];
      res += eta[i] * r * r;
    }
    return weighted_norm_sq(g, d) + static_cast<double>(s.n) / p * res;
  };
  const Vector e = enumerate_expectation_of(prob, prob.exact_data, pol, Variant::SHB, 9, energy);
  ASSERT_EQ(e.size(), 10u);
  for (std::size_t n = 1; n < e.size(); ++n) EXPECT_LE(e[n], e[n - 1] * (1.0 + 1e-12)) << "n=" << n;
}
