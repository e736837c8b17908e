#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "spongedim/fixtures.hpp"
#include "spongedim/measures.hpp"

using namespace spongedim;

namespace {

std::vector<double> stationary_of(const Matrix<double>& p) {
  std::vector<double> v(p.rows(), 1.0 / p.rows());
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> w(p.rows(), 0.0);
    for (std::size_t a = 0; a < p.rows(); ++a)
      for (std::size_t b = 0; b < p.rows(); ++b) w[b] += v[a] * p(a, b);
    v = w;
  }
  return v;
}

// Three digits over m = (3, 2); the first two share a level-2 label.
struct HiddenSetup {
  ExpansionSpec spec = build_expansion({3, 2});
  std::vector<Digit> digits{{0, 0}, {1, 0}, {2, 1}};
  Matrix<double> p = Matrix<double>::from_rows({{0.1, 0.6, 0.3}, {0.3, 0.2, 0.5}, {0.4, 0.4, 0.2}});
  ShiftMeasure<double> mu = ShiftMeasure<double>::markov(digits, stationary_of(p), p);
};

}  // namespace

TEST(Measure, ValidatesInputs) {
  const std::vector<Digit> ab{{0}, {1}};
  try {
    ShiftMeasure<double>::bernoulli(ab, {0.5, 0.6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidMeasure);
  }
  EXPECT_THROW(ShiftMeasure<double>::bernoulli(ab, {1.5, -0.5}), Error);
  EXPECT_THROW(ShiftMeasure<double>::markov(ab, {0.5, 0.5}, Matrix<double>::from_rows({{0.9, 0.1}, {0.9, 0.1}})), Error);
  try {
    ShiftMeasure<double>::bernoulli(fixtures::golden_mean().x, {0.5, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SupportViolation);
  }
}

TEST(Measure, CylindersOfMarkovChain) {
  const auto mu = ShiftMeasure<Rational>::markov(std::vector<Digit>{{0}, {1}}, {Rational(2, 3), Rational(1, 3)},
                                                  Matrix<Rational>::from_rows({{Rational(1, 2), Rational(1, 2)}, {Rational(1), Rational(0)}}));
  EXPECT_EQ(mu.cylinder(std::vector<int>{0, 1, 0}), Rational(1, 3));
  EXPECT_EQ(mu.cylinder(std::vector<int>{1, 1}), Rational(0));
}

TEST(Parry, GoldenMeanClosedForm) {
  const double phi = (1 + std::sqrt(5.0)) / 2;
  const auto mu = maximal_entropy_measure(fixtures::golden_mean().x);
  EXPECT_NEAR(mu.marginal()[0], phi * phi / (1 + phi * phi), 1e-12);
  EXPECT_NEAR(mu.marginal()[1], 1 / (1 + phi * phi), 1e-12);
  EXPECT_NEAR(mu.transition(0, 0), 1 / phi, 1e-12);
  EXPECT_NEAR(mu.transition(0, 1), 1 / (phi * phi), 1e-12);
  EXPECT_NEAR(mu.transition(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(measure_entropy(mu), std::log(phi), 1e-12);
  EXPECT_FALSE(maximal_entropy_measure_exact(fixtures::golden_mean().x));
}

TEST(Parry, ExactForIntegerRoot) {
  const auto mu = maximal_entropy_measure_exact(fixtures::sft_distinct_neighbours().x);
  ASSERT_TRUE(mu);
  for (std::size_t a = 0; a < 6; ++a) {
    EXPECT_EQ(mu->marginal()[a], Rational(1, 6));
    for (std::size_t b = 0; b < 6; ++b) EXPECT_EQ(mu->transition(a, b), a == b ? Rational(0) : Rational(1, 5));
  }
  const auto sponge = maximal_entropy_measure_exact(fixtures::sponge_d3().x);
  ASSERT_TRUE(sponge);
  EXPECT_TRUE(sponge->is_bernoulli());
}

TEST(Pushforward, BernoulliSumsOverFibers) {
  const auto f = fixtures::sponge_d3();
  const auto mu = ShiftMeasure<Rational>::bernoulli(f.x.digits(), {Rational(1, 12), Rational(1, 12), Rational(1, 6), Rational(1, 6),
                                                                   Rational(1, 4), Rational(1, 4)});
  const auto img = std::get<ShiftMeasure<Rational>>(pushforward(mu, f.spec, 2));
  std::map<Digit, Rational> by_label;
  for (std::size_t j = 0; j < img.size(); ++j) by_label[img.alphabet()[j]] = img.marginal()[j];
  EXPECT_EQ(by_label[(Digit{0, 1})], Rational(1, 2));
  EXPECT_EQ(by_label[(Digit{0, 0})], Rational(1, 12));
  const auto top = std::get<ShiftMeasure<Rational>>(pushforward(mu, f.spec, 3));
  EXPECT_EQ(top.marginal()[0], Rational(1, 2));
}

TEST(Pushforward, LumpedChainReproducesCylinders) {
  const auto f = fixtures::sft_distinct_neighbours();
  const auto mu = *maximal_entropy_measure_exact(f.x);
  const auto proj = project_levels(f.spec, f.x.digits());
  for (int level = 2; level <= 3; ++level) {
    const auto img = std::get<ShiftMeasure<Rational>>(pushforward(mu, f.spec, level));
    std::map<Word, Rational> mass;
    for (const auto& w : enumerate_language(f.x, 4)) {
      Word label;
      for (int a : w) label.push_back(proj.level(level).from_digit[a]);
      mass[label] += mu.cylinder(w);
    }
    for (const auto& [label, m] : mass) EXPECT_EQ(img.cylinder(label), m);
  }
}

TEST(Pushforward, NonLumpableGivesHiddenFactor) {
  HiddenSetup h;
  const auto img = pushforward(h.mu, h.spec, 2);
  ASSERT_TRUE(std::holds_alternative<HiddenFactor>(img));
  const auto& hidden = std::get<HiddenFactor>(img);
  const auto x = SubshiftSpec::full(h.digits);
  const auto proj = project_levels(h.spec, h.digits);
  std::map<Word, double> mass;
  for (const auto& w : enumerate_language(x, 5)) {
    Word label;
    for (int a : w) label.push_back(proj.level(2).from_digit[a]);
    mass[label] += h.mu.cylinder(w);
  }
  for (const auto& [label, m] : mass) EXPECT_NEAR(hidden.cylinder(label), m, 1e-14);
}

TEST(Pushforward, HiddenEntropyBracketTightens) {
  HiddenSetup h;
  const auto img = pushforward(h.mu, h.spec, 2);
  const auto& hidden = std::get<HiddenFactor>(img);
  const auto b = hidden.bracket(12);
  EXPECT_LE(b.lower, b.upper);
  EXPECT_LT(b.upper - b.lower, 1e-3);
  for (std::size_t k = 1; k < b.upper_by_depth.size(); ++k) EXPECT_LE(b.upper_by_depth[k], b.upper_by_depth[k - 1] + 1e-12);
  for (std::size_t k = 1; k < b.lower_by_depth.size(); ++k) EXPECT_GE(b.lower_by_depth[k], b.lower_by_depth[k - 1] - 1e-12);
  // The factor entropy lies below that of the chain and of the full 2-shift.
  EXPECT_LE(b.upper, measure_entropy(h.mu) + 1e-12);
  EXPECT_LE(b.upper, std::log(2.0) + 1e-12);
}

TEST(Dimension, LedrappierYoungOfUniformSponge) {
  const auto f = fixtures::sponge_d3();
  const auto d = ly_dimension(maximal_entropy_measure(f.x), f.spec);
  EXPECT_TRUE(d.exact());
  EXPECT_NEAR(d.lo, std::log(18.0) / (6 * std::log(2.0)), 1e-12);
}

TEST(Dimension, ErgodicityRequired) {
  const auto mu = ShiftMeasure<double>::markov(std::vector<Digit>{{0}, {1}}, {0.5, 0.5}, Matrix<double>::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  try {
    ly_dimension(mu, build_expansion({2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotErgodic);
  }
}

TEST(SoficMme, DistinctNeighbourFactor) {
  const auto f = fixtures::sft_distinct_neighbours();
  const SoficMme mme(factor_automaton(f.x, f.spec, 2));
  const double lambda = 1 + std::sqrt(3.0);
  EXPECT_NEAR(mme.perron_root(), lambda, 1e-12);
  // The factor is the SFT forbidding (0,0)(0,0); its Parry marginal is r_i^2 / sum r^2
  // with r = (lambda - 2, 1, 1).
  const double r0 = (lambda - 2) * (lambda - 2);
  EXPECT_NEAR(mme.cylinder(std::vector<int>{0}), r0 / (r0 + 2), 1e-12);
  EXPECT_NEAR(mme.cylinder(std::vector<int>{1}), 1 / (r0 + 2), 1e-12);
  EXPECT_NEAR(mme.cylinder(std::vector<int>{0, 0}), 0.0, 1e-15);
  double total = 0.0;
  for (const auto& w : enumerate_language(mme.automaton(), 5)) total += mme.cylinder(w);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(FullDimension, SpongeMarginal) {
  const auto f = fixtures::sponge_d3();
  const auto data = full_dim_marginal(f.x.digits(), f.spec);
  EXPECT_NEAR(data.Z, 3 * std::sqrt(2.0), 1e-12);
  for (double v : data.marginal) EXPECT_NEAR(v, 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(data.z(3, 1), std::pow(2.0, 2.0 / 3.0), 1e-14);
}

TEST(FullDimension, MarginalSumsToOne) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto f = fixtures::random_sponge(rng);
    const auto data = full_dim_marginal(f.x.digits(), f.spec);
    double total = 0.0;
    for (double v : data.marginal) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}
