#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>

#include "spongedim/fixtures.hpp"
#include "spongedim/spongedim.hpp"

using namespace spongedim;

namespace {

constexpr int kTrials = 40;

// Random SFT over a random sponge alphabet of at most eight digits; empty
// when pruning removes every digit.
std::optional<fixtures::Fixture> random_sft(std::mt19937_64& rng) {
  auto f = fixtures::random_sponge(rng, 1, 3, 5);
  std::vector<Digit> digits = f.x.digits();
  if (digits.size() > 8) digits.resize(8);
  std::bernoulli_distribution edge(0.6);
  Matrix<int> a(digits.size(), digits.size(), 0);
  for (std::size_t r = 0; r < digits.size(); ++r)
    for (std::size_t c = 0; c < digits.size(); ++c) a(r, c) = edge(rng) ? 1 : 0;
  try {
    return fixtures::Fixture{"random_sft", f.spec, SubshiftSpec::sft(digits, a)};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidSubshift) throw;
    return std::nullopt;
  }
}

std::vector<double> random_law(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> q(n);
  double total = 0.0;
  for (double& v : q) total += (v = e(rng));
  for (double& v : q) v /= total;
  return q;
}

}  // namespace

TEST(Properties, ScaleIdentities) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = fixtures::random_sponge(rng);
    const auto& spec = f.spec;
    for (int i = 2; i <= spec.s(); ++i) {
      EXPECT_NEAR(spec.alpha(i) * spec.theta(i), spec.theta(i - 1), 1e-14);
      EXPECT_LT(spec.alpha(i), 1.0);
    }
    for (int k : {1, 7, 100, 12345})
      for (int i = 1; i <= spec.s(); ++i) {
        const auto fl = spec.theta_floor(i, k);
        EXPECT_LE(fl, spec.theta(i) * k + 1e-9);
        EXPECT_GT(fl + 1, spec.theta(i) * k - 1e-9);
        if (i > 1) EXPECT_LE(spec.theta_floor(i - 1, k), fl);
      }
  }
}

TEST(Properties, ProjectionsCompose) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = fixtures::random_sponge(rng);
    for (const auto& x : f.x.digits()) {
      EXPECT_EQ(tau_digit(f.spec, 1, x), x);
      for (int i = 2; i <= f.spec.s(); ++i)
        EXPECT_EQ(tau_digit(f.spec, i, x), pi_digit(f.spec, i, tau_digit(f.spec, i - 1, x)));
    }
    // Projecting a word letterwise commutes with dropping its first letter.
    const auto words = enumerate_language(f.x, 2, EnumerationBudget{1000});
    const auto proj = project_levels(f.spec, f.x.digits());
    for (const auto& w : words)
      for (int i = 1; i <= f.spec.s(); ++i)
        EXPECT_EQ(proj.level(i).symbols[proj.level(i).from_digit[w[1]]], tau_digit(f.spec, i, f.x.digits()[w[1]]));
  }
}

TEST(Properties, CubeCountMethodsAgree) {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int t = 0; t < kTrials; ++t) {
    const auto f = random_sft(rng);
    if (!f) continue;
    ++checked;
    for (int k = 1; k <= 4; ++k)
      EXPECT_EQ(count_cubes(f->x, f->spec, k), count_cubes_by_enumeration(f->x, f->spec, k)) << "trial " << t << " k " << k;
  }
  EXPECT_GT(checked, kTrials / 2);
  for (int t = 0; t < 10; ++t) {
    const auto f = fixtures::random_sponge(rng, 1, 3, 4);
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(count_cubes(f.x, f.spec, k), count_cubes_dp(f.x, f.spec, k));
  }
}

TEST(Properties, CubeMassesSumToOne) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = random_sft(rng);
    if (!f) continue;
    std::optional<ShiftMeasure<double>> mu;
    try {
      mu = maximal_entropy_measure(f->x);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NotCertified);
      continue;
    }
    const int k = 3;
    std::map<ApproxCube, Word> cubes;
    for (const auto& w : enumerate_language(f->x, k)) cubes.emplace(approximate_cube(f->spec, detail::digits_of(f->x, w), k), w);
    double total = 0.0;
    for (const auto& [cube, w] : cubes) total += cube_measure(f->x, *mu, f->spec, w, k);
    EXPECT_NEAR(total, 1.0, 1e-12) << "trial " << t;
  }
}

TEST(Properties, DeltaResidualVanishes) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = fixtures::random_sponge(rng);
    const auto q = random_law(rng, f.x.size());
    EXPECT_NEAR(sum_delta_residual(f.x.digits(), f.spec, q), 0.0, 1e-12);
  }
}

TEST(Properties, DimensionsAreOrdered) {
  std::mt19937_64 rng(16);
  ReportOptions opt;
  opt.k_max = 6;
  opt.bracket_depth = 5;
  for (int t = 0; t < kTrials; ++t) {
    const auto f = fixtures::random_sponge(rng);
    const auto r = coincidence_report(f.x, f.spec, opt);
    EXPECT_GE(r.dim_haus.lo, -1e-12);
    EXPECT_LE(r.dim_haus.lo, r.dim_haus.hi);
    EXPECT_LE(r.dim_haus.hi, r.dim_box + 1e-12);
    EXPECT_LE(r.dim_box, f.spec.d() + 1e-12);
    EXPECT_EQ(r.verdict_A == DimVerdict::Coincide, std::abs(r.dim_box - r.dim_haus.hi) < 1e-9) << "trial " << t;
  }
  for (int t = 0; t < kTrials; ++t) {
    const auto f = random_sft(rng);
    if (!f) continue;
    DimensionReport r;
    try {
      r = coincidence_report(f->x, f->spec, opt);
    } catch (const Error& e) {
      EXPECT_TRUE(e.kind() == ErrorKind::NotCertified || e.kind() == ErrorKind::NotErgodic) << e.what();
      continue;
    }
    EXPECT_GE(r.dim_haus.lo, -1e-12);
    EXPECT_LE(r.dim_haus.lo, r.dim_haus.hi);
    EXPECT_LE(r.dim_haus.hi, r.dim_box + 1e-9);
    EXPECT_LE(r.ly_of_mme.hi, r.dim_box + 1e-9);
  }
}

TEST(Properties, ParryMeasureIsStationary) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = random_sft(rng);
    if (!f) continue;
    std::optional<ShiftMeasure<double>> mu;
    try {
      mu = maximal_entropy_measure(f->x);
    } catch (const Error&) {
      continue;
    }
    const std::size_t n = mu->size();
    for (std::size_t b = 0; b < n; ++b) {
      double in = 0.0;
      for (std::size_t a = 0; a < n; ++a) in += mu->marginal()[a] * mu->transition(a, b);
      EXPECT_NEAR(in, mu->marginal()[b], 1e-12);
    }
    for (std::size_t a = 0; a < n; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        row += mu->transition(a, b);
        if (!f->x.transition()(a, b)) EXPECT_EQ(mu->transition(a, b), 0.0);
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
    EXPECT_NEAR(measure_entropy(*mu), topological_entropy(f->x).entropy, 1e-10);
  }
}

TEST(Properties, PushforwardMarginalsSumToOne) {
  std::mt19937_64 rng(18);
  for (int t = 0; t < kTrials; ++t) {
    const auto f = fixtures::random_sponge(rng);
    const auto mu = ShiftMeasure<double>::bernoulli(f.x.digits(), random_law(rng, f.x.size()));
    for (int i = 1; i <= f.spec.s(); ++i) {
      const auto img = std::get<ShiftMeasure<double>>(pushforward(mu, f.spec, i));
      double total = 0.0;
      for (double v : img.marginal()) total += v;
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_LE(measure_entropy(img), measure_entropy(mu) + 1e-12);
    }
  }
}

TEST(Properties, ResultsIgnoreThreadCount) {
  const auto f = fixtures::sft_distinct_neighbours();
  auto run = [&](const char* threads) {
    ::setenv("SPONGEDIM_THREADS", threads, 1);
    const auto p = weighted_pressure(f.x, f.spec, 8);
    const auto r = coincidence_report(f.x, f.spec);
    const auto c = check_peres_condition(std::vector<double>{0.0, 0.09, -0.09}, build_expansion({64, 16, 8}));
    return std::tuple(p.estimates, r.dim_haus.lo, r.dim_haus.hi, c.normalized);
  };
  const auto one = run("1");
  const auto many = run("4");
  ::unsetenv("SPONGEDIM_THREADS");
  EXPECT_EQ(one, many);
}
