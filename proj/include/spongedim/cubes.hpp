#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "spongedim/dimensions.hpp"
#include "spongedim/error.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/matrix.hpp"
#include "spongedim/measures.hpp"
#include "spongedim/parallel.hpp"
#include "spongedim/symbolic.hpp"

namespace spongedim {

/// R_k(x) = sum_{l <= k} Lambda^{-l} x_l, exactly.
inline std::vector<Rational> represent(const ExpansionSpec& spec, std::span<const Digit> word, int k) {
  if (k < 0 || static_cast<int>(word.size()) < k) fail(ErrorKind::WordTooShort, "word shorter than the requested level");
  std::vector<Rational> point(spec.d(), Rational(0));
  for (int j = 0; j < spec.d(); ++j) {
    BigInt scale = 1;
    for (int l = 0; l < k; ++l) {
      if (!spec.contains(word[l])) fail(ErrorKind::InvalidDigit, "digit " + to_string(word[l]) + " outside the alphabet");
      scale *= spec.m()[j];
      point[j] += Rational(BigInt(word[l][j]), scale);
    }
  }
  return point;
}

struct ApproxCube {
  int k = 0;
  std::vector<std::int64_t> floors;  // floor(theta_i k), i = 1..s
  std::vector<Rational> anchor;
  std::vector<Rational> side;

  bool operator==(const ApproxCube& o) const { return k == o.k && anchor == o.anchor; }
  bool operator<(const ApproxCube& o) const { return std::tie(k, anchor) < std::tie(o.k, o.anchor); }
};

/// Floors floor(theta_i k) for i = 0..s.
inline std::vector<std::int64_t> level_floors(const ExpansionSpec& spec, int k) {
  std::vector<std::int64_t> out{0};
  for (int i = 1; i <= spec.s(); ++i) out.push_back(spec.theta_floor(i, k));
  return out;
}

/// Q_k(x): coordinate block i uses the first floor(theta_i k) digits.
inline ApproxCube approximate_cube(const ExpansionSpec& spec, std::span<const Digit> word, int k) {
  if (k < 1 || static_cast<int>(word.size()) < k) fail(ErrorKind::WordTooShort, "word shorter than the requested level");
  ApproxCube cube;
  cube.k = k;
  const auto floors = level_floors(spec, k);
  cube.floors.assign(floors.begin() + 1, floors.end());
  for (int i = 1; i <= spec.s(); ++i) {
    const int len = static_cast<int>(floors[i]);
    const auto partial = represent(spec, word, len);
    const Rational side(BigInt(1), boost::multiprecision::pow(BigInt(spec.n(i)), static_cast<unsigned>(len)));
    for (int j = spec.d_bound(i - 1); j < spec.d_bound(i); ++j) {
      cube.anchor.push_back(partial[j]);
      cube.side.push_back(side);
    }
  }
  return cube;
}

namespace detail {

inline std::vector<Digit> digits_of(const SubshiftSpec& x, std::span<const int> word) {
  std::vector<Digit> out;
  for (int a : word) out.push_back(x.digits().at(a));
  return out;
}

/// Level of position j (1-based) at cube level k.
inline std::vector<int> position_levels(const ExpansionSpec& spec, int k) {
  const auto floors = level_floors(spec, k);
  std::vector<int> out(k + 1, 0);
  for (int i = 1; i <= spec.s(); ++i)
    for (auto j = floors[i - 1] + 1; j <= floors[i]; ++j) out[j] = i;
  return out;
}

}  // namespace detail

/// #Q_k(X) by a subset construction over positions: each branch fixes the
/// level-i label at a position, and the state is the set of digits that can
/// end a word of L(X) with those labels.
inline BigInt count_cubes_dp(const SubshiftSpec& x, const ExpansionSpec& spec, int k, const EnumerationBudget& budget = {}) {
  if (k < 1) fail(ErrorKind::WordTooShort, "k must be positive");
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto levels = detail::position_levels(spec, k);
  const std::size_t n = x.size();
  using Subset = std::vector<char>;
  std::map<Subset, BigInt> states{{Subset(n, 1), BigInt(1)}};
  for (int j = 1; j <= k; ++j) {
    const auto& lvl = proj.level(levels[j]);
    std::map<Subset, BigInt> next;
    for (const auto& [subset, count] : states) {
      for (int b = 0; b < static_cast<int>(lvl.symbols.size()); ++b) {
        Subset target(n, 0);
        bool any = false;
        for (std::size_t dgt = 0; dgt < n; ++dgt) {
          if (lvl.from_digit[dgt] != b) continue;
          bool reach = j == 1;
          for (std::size_t a = 0; a < n && !reach; ++a) reach = subset[a] && x.allows(static_cast<int>(a), static_cast<int>(dgt));
          if (reach) target[dgt] = any = true;
        }
        if (any) next[target] += count;
      }
    }
    if (next.size() > budget.max_words) fail(ErrorKind::BudgetExceeded, "cube count state space exceeds the budget");
    states = std::move(next);
  }
  BigInt total = 0;
  for (const auto& [_, c] : states) total += c;
  return total;
}

/// #Q_k(X); full shifts use prod_i |D_i|^(floor(theta_i k) - floor(theta_{i-1} k)).
inline BigInt count_cubes(const SubshiftSpec& x, const ExpansionSpec& spec, int k, const EnumerationBudget& budget = {}) {
  if (k < 1) fail(ErrorKind::WordTooShort, "k must be positive");
  if (!x.is_full()) return count_cubes_dp(x, spec, k, budget);
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto floors = level_floors(spec, k);
  BigInt total = 1;
  for (int i = 1; i <= spec.s(); ++i)
    total *= boost::multiprecision::pow(BigInt(proj.level(i).symbols.size()), static_cast<unsigned>(floors[i] - floors[i - 1]));
  return total;
}

/// #Q_k(X) by enumerating L_k(X) and collecting distinct cubes.
inline BigInt count_cubes_by_enumeration(const SubshiftSpec& x, const ExpansionSpec& spec, int k, const EnumerationBudget& budget = {}) {
  std::set<ApproxCube> cubes;
  for (const Word& w : enumerate_language(x, k, budget)) cubes.insert(approximate_cube(spec, detail::digits_of(x, w), k));
  return BigInt(cubes.size());
}

/// R mu(Q_k(x)) = sum over I in Gamma_k(x) of mu(I), by a forward pass in
/// which position j only admits digits whose level-i label matches x_j.
template <class Scalar>
Scalar cube_measure(const SubshiftSpec& x, const ShiftMeasure<Scalar>& mu, const ExpansionSpec& spec, std::span<const int> word, int k) {
  if (k < 1 || static_cast<int>(word.size()) < k) fail(ErrorKind::WordTooShort, "word shorter than the requested level");
  if (mu.size() != x.size()) fail(ErrorKind::InvalidMeasure, "measure alphabet differs from the subshift digits");
  if (!x.admissible(word.first(k))) fail(ErrorKind::NotInLanguage, "word is not in the language of the subshift");
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto levels = detail::position_levels(spec, k);
  const std::size_t n = x.size();
  if (mu.is_bernoulli() && x.is_full()) {
    Scalar total(1);
    std::vector<std::vector<Scalar>> pushed;
    for (int i = 1; i <= spec.s(); ++i) pushed.push_back(push_vector<Scalar>(mu.marginal(), proj, i));
    for (int j = 1; j <= k; ++j) {
      const int i = levels[j];
      total *= pushed[i - 1][proj.level(i).from_digit[word[j - 1]]];
    }
    return total;
  }
  std::vector<Scalar> v(n, Scalar(0)), w(n);
  for (int j = 1; j <= k; ++j) {
    const auto& from = proj.level(levels[j]).from_digit;
    const int label = from[word[j - 1]];
    for (std::size_t b = 0; b < n; ++b) {
      w[b] = Scalar(0);
      if (from[b] != label) continue;
      if (j == 1) {
        w[b] = mu.marginal()[b];
        continue;
      }
      for (std::size_t a = 0; a < n; ++a)
        if (v[a] != 0 && x.allows(static_cast<int>(a), static_cast<int>(b))) w[b] += v[a] * mu.transition(a, b);
    }
    std::swap(v, w);
  }
  Scalar total(0);
  for (const auto& c : v) total += c;
  return total;
}

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace detail

/// log R mu(Q_k(x)) with per-step rescaling, for k where the mass underflows.
inline double log_cube_measure(const SubshiftSpec& x, const ShiftMeasure<double>& mu, const ExpansionSpec& spec, std::span<const int> word, int k) {
  if (k < 1 || static_cast<int>(word.size()) < k) fail(ErrorKind::WordTooShort, "word shorter than the requested level");
  if (mu.size() != x.size()) fail(ErrorKind::InvalidMeasure, "measure alphabet differs from the subshift digits");
  if (!x.admissible(word.first(k))) fail(ErrorKind::NotInLanguage, "word is not in the language of the subshift");
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto levels = detail::position_levels(spec, k);
  detail::CompensatedSum acc;
  if (mu.is_bernoulli() && x.is_full()) {
    std::vector<std::vector<double>> pushed;
    for (int i = 1; i <= spec.s(); ++i) pushed.push_back(push_vector<double>(mu.marginal(), proj, i));
    for (int j = 1; j <= k; ++j) acc.add(std::log(pushed[levels[j] - 1][proj.level(levels[j]).from_digit[word[j - 1]]]));
    return acc.value();
  }
  const std::size_t n = x.size();
  std::vector<double> v(n, 0.0), w(n);
  for (int j = 1; j <= k; ++j) {
    const auto& from = proj.level(levels[j]).from_digit;
    const int label = from[word[j - 1]];
    double mass = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      w[b] = 0.0;
      if (from[b] != label) continue;
      if (j == 1) {
        w[b] = mu.marginal()[b];
      } else {
        for (std::size_t a = 0; a < n; ++a)
          if (v[a] != 0.0 && x.allows(static_cast<int>(a), static_cast<int>(b))) w[b] += v[a] * mu.transition(a, b);
      }
      mass += w[b];
    }
    if (!(mass > 0.0)) return -INFINITY;
    for (double& e : w) e /= mass;
    acc.add(std::log(mass));
    std::swap(v, w);
  }
  return acc.value();
}

struct BoxSlope {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<int> k;
  std::vector<double> log_counts;
  std::vector<double> residuals;
};

/// Least-squares slope of log #Q_k(X) against k log n_s.
inline BoxSlope empirical_box_dimension(const SubshiftSpec& x, const ExpansionSpec& spec, int k_lo, int k_hi, const EnumerationBudget& budget = {}) {
  if (k_lo < 1 || k_hi <= k_lo) fail(ErrorKind::WordTooShort, "need 1 <= k_lo < k_hi");
  BoxSlope out;
  const double scale = std::log(static_cast<double>(spec.n(spec.s())));
  std::vector<double> xs;
  for (int k = k_lo; k <= k_hi; ++k) {
    out.k.push_back(k);
    xs.push_back(k * scale);
    out.log_counts.push_back(log_big(count_cubes(x, spec, k, budget)));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(out.log_counts.begin(), out.log_counts.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxx += (xs[j] - mx) * (xs[j] - mx);
    sxy += (xs[j] - mx) * (out.log_counts[j] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  for (std::size_t j = 0; j < xs.size(); ++j) out.residuals.push_back(out.log_counts[j] - (out.intercept + out.slope * xs[j]));
  return out;
}

/// Power gauge r^gamma or a Peres gauge.
using Gauge = std::variant<double, GaugeFunction>;

inline double log_gauge_at_scale(const Gauge& g, const ExpansionSpec& spec, int k) {
  const double log_r = -static_cast<double>(k) * std::log(static_cast<double>(spec.n(spec.s())));
  if (const double* gamma = std::get_if<double>(&g)) return *gamma * log_r;
  return std::get<GaugeFunction>(g).log_value_at_log(log_r);
}

enum class DensityVerdict { ConcentratedBounded, LinearVarianceGrowth };

inline std::string_view to_string(DensityVerdict v) {
  return v == DensityVerdict::ConcentratedBounded ? "ConcentratedBounded" : "LinearVarianceGrowth";
}

struct DensityOptions {
  std::size_t n_samples = 10'000;
  std::uint64_t seed = 1;
  /// Sample from the product of xi^(j) = (1 - delta/log j) p + (delta/log j) q
  /// instead of mu; p is mu's marginal.
  bool nu_mode = false;
  double delta = 0.5;
  std::vector<double> q;  // ν-mode perturbation direction; defaults to the classifier witness
  std::FILE* dump = nullptr;  // CSV lines "seed_index,k,log_density"
};

struct DensityDiagnostic {
  int k = 0;
  std::size_t n_samples = 0;
  double L_k = 0.0;  // log(#D^k phi(n_s^{-k}))
  double sample_mean = 0.0;
  double sample_var = 0.0;
  std::optional<double> theoretical_mean;  // of log Theta_k
  std::optional<double> theoretical_var;
  std::optional<double> nu_closed_form;  // -k log Z - delta sum_i Delta_i int dt/log t, minus log phi
  DensityVerdict verdict = DensityVerdict::ConcentratedBounded;
};

namespace detail {

/// Independent engine per sample, so results do not depend on chunking.
inline std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Mean and variance of log q(tau_i x) for x ~ (pushed law on D_i).
inline std::pair<double, double> log_moments(std::span<const double> law) {
  double mean = 0.0, second = 0.0;
  for (double v : law)
    if (v > 0.0) {
      mean += v * std::log(v);
      second += v * std::log(v) * std::log(v);
    }
  return {mean, std::max(0.0, second - mean * mean)};
}

}  // namespace detail

/// Monte Carlo statistics of log Theta_k = log R mu(Q_k(x)) - log phi(n_s^{-k})
/// over x ~ mu (or x ~ nu in ν-mode).
inline DensityDiagnostic density_diagnostic(const SubshiftSpec& x, const ExpansionSpec& spec, const ShiftMeasure<double>& mu, const Gauge& gauge,
                                            int k, const DensityOptions& opt = {}) {
  if (k < 1) fail(ErrorKind::WordTooShort, "k must be positive");
  if (opt.n_samples < 1) fail(ErrorKind::SamplerFailure, "need at least one sample");
  if (mu.size() != x.size()) fail(ErrorKind::InvalidMeasure, "measure alphabet differs from the subshift digits");
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto levels = detail::position_levels(spec, k);
  const double log_phi = log_gauge_at_scale(gauge, spec, k);
  const std::size_t n = x.size();
  const bool product = mu.is_bernoulli() && x.is_full();

  DensityDiagnostic out;
  out.k = k;
  out.n_samples = opt.n_samples;
  out.L_k = k * std::log(static_cast<double>(n)) + log_phi;

  // ν-mode: per-position laws xi^(j) over D.
  std::vector<double> q;
  if (opt.nu_mode) {
    if (!product) fail(ErrorKind::UnsupportedMeasure, "ν-mode needs a Bernoulli measure on a full shift");
    if (!(opt.delta > 0.0 && opt.delta <= std::log(2.0))) fail(ErrorKind::ConfigError, "ν-mode delta must lie in (0, log 2]");
    q = opt.q.empty() ? infinite_hausdorff_classifier(x.digits(), spec).witness.value_or(std::vector<double>{}) : opt.q;
    if (q.size() != n) fail(ErrorKind::UnsupportedMeasure, "ν-mode needs a perturbation vector q (no witness available)");
    detail::check_probability_vector<double>(q, "q");
  }
  auto xi = [&](int j) {
    std::vector<double> law(mu.marginal());
    if (!opt.nu_mode || j == 1) return law;
    const double eps = opt.delta / std::log(static_cast<double>(j));
    for (std::size_t a = 0; a < n; ++a) law[a] = (1.0 - eps) * law[a] + eps * q[a];
    return law;
  };

  // Position laws and their level pushforwards.
  std::vector<std::vector<double>> position_law, pushed_law;
  std::vector<std::vector<double>> level_pushed;  // Bernoulli mu: tau_i p
  for (int i = 1; i <= spec.s(); ++i) level_pushed.push_back(push_vector<double>(mu.marginal(), proj, i));
  if (opt.nu_mode) {
    for (int j = 1; j <= k; ++j) {
      position_law.push_back(xi(j));
      pushed_law.push_back(push_vector<double>(position_law.back(), proj, levels[j]));
    }
  }

  // Exact moments for independent positions.
  if (product) {
    double mean = 0.0, var = 0.0;
    for (int j = 1; j <= k; ++j) {
      const auto& law = opt.nu_mode ? pushed_law[j - 1] : level_pushed[levels[j] - 1];
      const auto [m, v] = detail::log_moments(law);
      mean += m;
      var += v;
    }
    out.theoretical_mean = mean - log_phi;
    out.theoretical_var = var;
    if (opt.nu_mode) {
      const FullDimData data = full_dim_marginal(x.digits(), spec);
      const auto deltas = level_deltas(mu.marginal(), q, proj);
      out.nu_closed_form = -k * std::log(data.Z) - opt.delta * peres_condition_lhs(deltas, spec, std::max(3, k)).value - log_phi;
    }
  }

  std::vector<std::discrete_distribution<int>> rows;
  std::discrete_distribution<int> first(mu.marginal().begin(), mu.marginal().end());
  if (!mu.is_bernoulli()) {
    const Matrix<double> p = mu.transition_matrix();
    for (std::size_t a = 0; a < n; ++a) rows.emplace_back(p.row(a).begin(), p.row(a).end());
  }
  std::vector<std::discrete_distribution<int>> nu_laws;
  for (const auto& law : position_law) nu_laws.emplace_back(law.begin(), law.end());

  std::vector<double> samples(opt.n_samples);
  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (opt.n_samples + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Word word(k);
    auto dist_first = first;
    auto dist_rows = rows;
    auto dist_nu = nu_laws;
    for (std::size_t s = c * kChunk; s < std::min(opt.n_samples, (c + 1) * kChunk); ++s) {
      auto rng = detail::sample_engine(opt.seed, s);
      for (int j = 0; j < k; ++j) {
        if (opt.nu_mode)
          word[j] = dist_nu[j](rng);
        else if (j == 0 || mu.is_bernoulli())
          word[j] = dist_first(rng);
        else
          word[j] = dist_rows[word[j - 1]](rng);
      }
      double log_mass = 0.0;
      if (opt.nu_mode) {
        detail::CompensatedSum acc;
        for (int j = 1; j <= k; ++j) acc.add(std::log(pushed_law[j - 1][proj.level(levels[j]).from_digit[word[j - 1]]]));
        log_mass = acc.value();
      } else {
        log_mass = log_cube_measure(x, mu, spec, word, k);
      }
      if (!std::isfinite(log_mass)) fail(ErrorKind::SamplerFailure, "sampled a word of zero mass");
      samples[s] = log_mass - log_phi;
    }
  });

  // Welford in sample order.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double delta = samples[s] - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (samples[s] - mean);
  }
  out.sample_mean = mean;
  out.sample_var = samples.size() > 1 ? m2 / static_cast<double>(samples.size() - 1) : 0.0;
  if (opt.dump)
    for (std::size_t s = 0; s < samples.size(); ++s) std::fprintf(opt.dump, "%zu,%d,%.17g\n", s, k, samples[s] + log_phi);

  const double spread = out.theoretical_var.value_or(out.sample_var);
  out.verdict = spread > 1e-12 * std::max(1.0, std::abs(out.sample_mean)) ? DensityVerdict::LinearVarianceGrowth : DensityVerdict::ConcentratedBounded;
  return out;
}

}  // namespace spongedim
