#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "shbreg/errors.hpp"
#include "shbreg/problems.hpp"

using namespace shbreg;

TEST(Example1, KernelValues) {
  for (double s : {-6.0, -1.3, 0.0, 2.7, 6.0}) EXPECT_DOUBLE_EQ(example1::kernel(s, s), 2.0);
  EXPECT_NEAR(example1::phi(3.0), 0.0, 1e-15);
  EXPECT_NEAR(example1::phi(-3.0), 0.0, 1e-15);
  for (double s : {3.0001, 4.0, -5.5, 12.0}) EXPECT_EQ(example1::phi(s), 0.0);
  EXPECT_LT(example1::phi(2.999999), 1e-10);
  EXPECT_EQ(example1::truth(0.0), 0.0);
}

TEST(Example1, LayoutAndData) {
  const ProblemInstance prob = build_example1(7, 61);
  EXPECT_EQ(prob.p(), 7u);
  EXPECT_EQ(prob.m(), 61u);
  EXPECT_EQ(prob.grid->a, -6.0);
  EXPECT_EQ(prob.grid->b, 6.0);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR(prob.sample_points[i], -6.0 + 12.0 * static_cast<double>(i) / 6.0, 1e-15);
    const double y = prob.bundle.row(i).apply(prob.truth);
    EXPECT_NEAR(prob.exact_data[i], y, 1e-12 * std::abs(y) + 1e-300);
  }
  for (std::size_t j = 0; j < 61; ++j) EXPECT_DOUBLE_EQ(prob.truth[j], example1::truth(prob.grid->nodes[j]));
}

TEST(Example1, KernelSymmetricAtNodes) {
  const auto grid = make_trapezoid_grid(-6.0, 6.0, 41);
  for (double s : grid->nodes) {
    for (double t : grid->nodes) EXPECT_EQ(example1::kernel(s, t), example1::kernel(t, s));
  }
}

TEST(Example1, RejectsTinySizes) {
  EXPECT_THROW(build_example1(1, 10), ConfigError);
  EXPECT_THROW(build_example1(10, 1), ConfigError);
}

TEST(Example2, KernelAndTruth) {
  for (double s : {0.0, 0.37, 1.0}) EXPECT_DOUBLE_EQ(example2::kernel(s, s), 4.0);
  const ProblemInstance prob = build_example2(101);
  EXPECT_EQ(prob.m(), 101u);
  EXPECT_EQ(prob.p(), 101u);
  EXPECT_NEAR(integrate(*prob.grid, prob.truth), 1.0, 1e-12);
  for (double v : prob.truth) EXPECT_GT(v, 0.0);
  for (std::size_t i = 0; i < prob.p(); ++i) EXPECT_DOUBLE_EQ(prob.sample_points[i], prob.grid->nodes[i]);
  EXPECT_THROW(build_example2(1), ConfigError);
}

TEST(Noise, ZeroLevelReproducesExactData) {
  const ProblemInstance prob = build_example1(10, 50);
  const NoisyData d = add_noise(prob, 0.0, 5);
  EXPECT_EQ(d.values, prob.exact_data);
  EXPECT_EQ(d.total_level, 0.0);
}

TEST(Noise, LevelsAndBounds) {
  const ProblemInstance prob = build_example1(30, 80);
  const double ysup = sup_norm(prob.exact_data);
  for (double rel : {1e-3, 1e-1, 0.5}) {
    const NoisyData d = add_noise(prob, rel, 17);
    double sumsq = 0.0;
    for (std::size_t i = 0; i < prob.p(); ++i) {
      EXPECT_DOUBLE_EQ(d.per_eq_levels[i], rel * ysup);
      EXPECT_LE(std::abs(d.values[i] - prob.exact_data[i]), d.per_eq_levels[i]);
      sumsq += d.per_eq_levels[i] * d.per_eq_levels[i];
    }
    EXPECT_NEAR(d.total_level, std::sqrt(sumsq), 1e-12 * d.total_level);
    EXPECT_NEAR(d.total_level, std::sqrt(30.0) * rel * ysup, 1e-12 * d.total_level);
    EXPECT_EQ(d.rel_level, rel);
    EXPECT_EQ(d.seed, 17u);
  }
  EXPECT_THROW(add_noise(prob, -0.1, 1), ConfigError);
}

TEST(Noise, SeededAndBitIdentical) {
  const ProblemInstance prob = build_example1(20, 40);
  const NoisyData a = add_noise(prob, 0.01, 3);
  const NoisyData b = add_noise(prob, 0.01, 3);
  const NoisyData c = add_noise(prob, 0.01, 4);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Noise, TotalLevelTarget) {
  const ProblemInstance prob = build_random(6, 12, 2);
  const NoisyData d = add_noise_total(prob, 0.05, 1);
  EXPECT_NEAR(d.total_level, 0.05, 1e-14);
}

TEST(RandomInstance, DeterministicAndConsistent) {
  const ProblemInstance a = build_random(5, 16, 9);
  const ProblemInstance b = build_random(5, 16, 9);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.exact_data, b.exact_data);
  for (std::size_t i = 0; i < 5; ++i) {
    const double y = a.bundle.row(i).apply(a.truth);
    EXPECT_NEAR(a.exact_data[i], y, 1e-12 * std::abs(y));
  }
}

TEST(ProblemFile, RoundTripIsExact) {
  const ProblemInstance prob = build_example2(12);
  std::stringstream ss;
  write_problem(ss, prob);
  const ProblemTable back = read_problem(ss);
  const ProblemTable orig = to_table(prob);
  EXPECT_EQ(back.name, orig.name);
  EXPECT_EQ(back.p, orig.p);
  EXPECT_EQ(back.m, orig.m);
  EXPECT_EQ(back.a, orig.a);
  EXPECT_EQ(back.b, orig.b);
  EXPECT_EQ(back.nodes, orig.nodes);
  EXPECT_EQ(back.weights, orig.weights);
  EXPECT_EQ(back.truth, orig.truth);
  EXPECT_EQ(back.samples, orig.samples);
  EXPECT_EQ(back.exact_data, orig.exact_data);
}

TEST(ProblemFile, MatchesGolden) {
  std::ifstream is(std::string(SHBREG_GOLDEN_DIR) + "/example1_p5_m11.txt");
  ASSERT_TRUE(is) << "golden file missing";
  const ProblemTable golden = read_problem(is);
  const ProblemTable now = to_table(build_example1(5, 11));
  ASSERT_EQ(golden.m, now.m);
  ASSERT_EQ(golden.p, now.p);
  auto close = [](const Vector& a, const Vector& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-13 * (1.0 + std::abs(b[k])));
  };
  close(golden.nodes, now.nodes);
  close(golden.weights, now.weights);
  close(golden.truth, now.truth);
  close(golden.samples, now.samples);
  close(golden.exact_data, now.exact_data);
}

TEST(ProblemFile, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_problem(empty), IoError);
  std::stringstream ss;
  write_problem(ss, build_example1(3, 4));
  std::string text = ss.str();
  text.resize(text.size() / 2);
  std::stringstream cut(text);
  EXPECT_THROW(read_problem(cut), IoError);
}
