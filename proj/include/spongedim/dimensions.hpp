#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spongedim/error.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/matrix.hpp"
#include "spongedim/measures.hpp"
#include "spongedim/parallel.hpp"
#include "spongedim/quadrature.hpp"
#include "spongedim/symbolic.hpp"

namespace spongedim {

inline constexpr double kUniformityTol = 1e-10;

namespace detail {

/// max - min of log-values within tolerance.
inline bool constant_in_log(std::span<const double> logs, double tol = kUniformityTol) {
  if (logs.empty()) return true;
  const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  return *hi - *lo <= tol;
}

inline bool is_uniform(std::span<const double> p, double tol = kUniformityTol) {
  const double target = -std::log(static_cast<double>(p.size()));
  for (double v : p)
    if (!(v > 0.0) || std::abs(std::log(v) - target) > tol) return false;
  return true;
}

}  // namespace detail

/// Topological entropy of every factor X_i, i = 1..s.
inline std::vector<double> factor_entropies(const SubshiftSpec& x, const ExpansionSpec& spec) {
  const LevelProjection proj = project_levels(spec, x.digits());
  std::vector<double> h;
  for (int i = 1; i <= spec.s(); ++i) {
    if (x.is_full())
      h.push_back(std::log(static_cast<double>(proj.level(i).symbols.size())));
    else if (i == 1)
      h.push_back(topological_entropy(x, 1e-12, 1).entropy);
    else
      h.push_back(topological_entropy(factor_automaton(x, spec, i), 1e-12, 1).entropy);
  }
  return h;
}

/// sum_i (1/log n_i - 1/log n_{i-1}) h(X_i).
inline double box_dimension(const SubshiftSpec& x, const ExpansionSpec& spec) {
  require_weak_spec(x);
  const auto h = factor_entropies(x, spec);
  double dim = 0.0;
  for (int i = 1; i <= spec.s(); ++i) dim += spec.level_weight(i) * h[i - 1];
  return dim;
}

/// Closed form "log(N)/(M*log(b))" for full shifts when every n_i is a power
/// of one base b.
inline std::optional<std::string> box_dimension_symbolic(const SubshiftSpec& x, const ExpansionSpec& spec) {
  if (!x.is_full()) return std::nullopt;
  const int ns = spec.n(spec.s());
  for (int b = 2; b <= ns; ++b) {
    std::vector<std::int64_t> e;
    for (int n : spec.n_values()) {
      std::int64_t k = 0;
      while (n % b == 0) {
        n /= b;
        ++k;
      }
      if (n != 1) break;
      e.push_back(k);
    }
    if (static_cast<int>(e.size()) != spec.s()) continue;
    std::int64_t m = 1;
    for (auto v : e) m = std::lcm(m, v);
    std::vector<std::int64_t> c;
    for (std::size_t i = 0; i < e.size(); ++i) c.push_back(m / e[i] - (i == 0 ? 0 : m / e[i - 1]));
    std::int64_t g = m;
    for (auto v : c) g = std::gcd(g, v);
    const LevelProjection proj = project_levels(spec, x.digits());
    BigInt num = 1;
    for (int i = 1; i <= spec.s(); ++i)
      num *= boost::multiprecision::pow(BigInt(proj.level(i).symbols.size()), static_cast<unsigned>(c[i - 1] / g));
    return "log(" + num.str() + ")/(" + std::to_string(m / g) + "*log(" + std::to_string(b) + "))";
  }
  return std::nullopt;
}

/// log Z / log n_s for the sponge K = R(D^N).
inline double hausdorff_dimension_sponge(std::span<const Digit> digits, const ExpansionSpec& spec) {
  return std::log(full_dim_marginal(digits, spec).Z) / std::log(static_cast<double>(spec.n(spec.s())));
}

struct PressureResult {
  std::vector<double> estimates;    // log Z(k) / k, k = 1..k_max
  std::vector<double> running_inf;  // min of estimates[0..k-1]
  std::vector<double> increments;   // log Z(k) - log Z(k - 1), k = 2..k_max
  double upper = 0.0;               // running inf at k_max
  /// Last increment +- its change from the previous one, over log n_s. A
  /// convergence estimate, not a certified bound.
  Interval dimension;
};

/// Weighted topological pressure through the phi-recursion on L_k(X_i).
inline PressureResult weighted_pressure(const SubshiftSpec& x, const ExpansionSpec& spec, int k_max, const EnumerationBudget& budget = {}) {
  require_weak_spec(x);
  if (k_max < 1) fail(ErrorKind::WordTooShort, "k_max must be positive");
  const LevelProjection proj = project_levels(spec, x.digits());
  std::optional<SoficAutomaton> level2;
  if (spec.s() >= 2) level2 = factor_automaton(x, spec, 2);

  PressureResult out;
  double prev_log_z = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    double log_z = 0.0;
    if (spec.s() == 1) {
      log_z = log_big(count_words(x, k));
    } else {
      std::vector<Word> words = enumerate_language(*level2, k, budget);
      std::vector<double> phi(words.size());
      parallel_for(words.size(), [&](std::size_t w) { phi[w] = count_preimages<double>(x, proj, 2, words[w]); });
      for (int i = 3; i <= spec.s(); ++i) {
        const auto& up = proj.level(i).from_previous;
        const double a = spec.alpha(i - 1);
        std::map<Word, double> grouped;
        for (std::size_t w = 0; w < words.size(); ++w) {
          Word image(words[w].size());
          for (std::size_t t = 0; t < image.size(); ++t) image[t] = up[words[w][t]];
          grouped[image] += std::pow(phi[w], a);
        }
        words.clear();
        phi.clear();
        for (auto& [word, value] : grouped) {
          words.push_back(word);
          phi.push_back(value);
        }
      }
      const double as = spec.alpha(spec.s());
      double z = 0.0;
      for (double v : phi) z += std::pow(v, as);
      log_z = std::log(z);
    }
    if (k >= 2) out.increments.push_back(log_z - prev_log_z);
    prev_log_z = log_z;
    out.estimates.push_back(log_z / k);
    out.running_inf.push_back(k == 1 ? out.estimates.back() : std::min(out.running_inf.back(), out.estimates.back()));
  }
  out.upper = out.running_inf.back();
  const auto& inc = out.increments;
  const double last = inc.empty() ? out.estimates.back() : inc.back();
  const double gap = inc.size() >= 2 ? std::abs(inc.back() - inc[inc.size() - 2]) : std::abs(last);
  const double scale = std::log(static_cast<double>(spec.n(spec.s())));
  out.dimension = {(last - gap) / scale, (last + gap) / scale};
  return out;
}

struct FiberProfile {
  std::vector<std::vector<int>> f;  // f[i - 1][x] over the digits in input order
  bool uniform_fiber = true;
};

/// f_i(x) = #{y in D_{i-1} : pi_i(y) = tau_i(x)}, f_1 = 1.
inline FiberProfile fiber_profile(std::span<const Digit> digits, const ExpansionSpec& spec) {
  const LevelProjection proj = project_levels(spec, digits);
  FiberProfile out;
  out.f.push_back(std::vector<int>(digits.size(), 1));
  for (int i = 2; i <= spec.s(); ++i) {
    const auto& lvl = proj.level(i);
    std::vector<int> fi;
    for (std::size_t x = 0; x < digits.size(); ++x) fi.push_back(lvl.fiber_size[lvl.from_digit[x]]);
    if (std::adjacent_find(fi.begin(), fi.end(), std::not_equal_to<>()) != fi.end()) out.uniform_fiber = false;
    out.f.push_back(std::move(fi));
  }
  return out;
}

struct MmeEvidence {
  bool equal = false;
  std::vector<double> log_products;                   // per digit, all levels
  std::vector<std::vector<double>> cumulative_logs;   // [x][i - 1]: levels 1..i
  std::optional<std::vector<double>> fiber_form_logs;  // s <= 3 only
  std::optional<bool> fiber_form_equal;
};

/// Whether prod_i Z^(i)(tau_i x)^(alpha_i - 1) is constant over D, i.e.
/// whether the uniform Bernoulli measure has full dimension.
inline MmeEvidence mme_equals_full_dim(std::span<const Digit> digits, const ExpansionSpec& spec) {
  const FullDimData data = full_dim_marginal(digits, spec);
  MmeEvidence ev;
  for (std::size_t x = 0; x < digits.size(); ++x) {
    double acc = 0.0;
    std::vector<double> cumulative;
    for (int i = 1; i <= spec.s(); ++i) {
      acc += (spec.alpha(i) - 1.0) * std::log(data.z(i, data.projection.level(i).from_digit[x]));
      cumulative.push_back(acc);
    }
    ev.log_products.push_back(acc);
    ev.cumulative_logs.push_back(std::move(cumulative));
  }
  ev.equal = detail::constant_in_log(ev.log_products);
  if (spec.s() <= 3) {
    const FiberProfile fp = fiber_profile(digits, spec);
    std::vector<double> form;
    for (std::size_t x = 0; x < digits.size(); ++x) {
      double v = 0.0;
      if (spec.s() >= 2) v += (spec.theta(1) - 1.0) * std::log(static_cast<double>(fp.f[1][x]));
      if (spec.s() >= 3) v += (spec.theta(2) - 1.0) * std::log(static_cast<double>(fp.f[2][x]));
      form.push_back(v);
    }
    ev.fiber_form_equal = detail::constant_in_log(form);
    ev.fiber_form_logs = std::move(form);
    if (*ev.fiber_form_equal != ev.equal) fail(ErrorKind::InternalError, "fiber-product and Z-product tests disagree");
  }
  return ev;
}

/// Delta(p || q) = sum (p - q) log p, zero terms where p vanishes.
inline double delta_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorKind::InvalidMeasure, "delta divergence needs vectors over the same index set");
  double acc = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) {
      if (q[x] > 0.0) fail(ErrorKind::SupportViolation, "q is positive at index " + std::to_string(x) + " where p vanishes");
      continue;
    }
    acc += (p[x] - q[x]) * std::log(p[x]);
  }
  return acc;
}

/// Delta(tau_i p || tau_i q) for i = 1..s.
inline std::vector<double> level_deltas(std::span<const double> p, std::span<const double> q, const LevelProjection& proj) {
  if (p.size() != q.size()) fail(ErrorKind::InvalidMeasure, "p and q must have the same length");
  std::vector<double> out;
  for (int i = 1; i <= proj.s(); ++i) out.push_back(delta_divergence(push_vector<double>(p, proj, i), push_vector<double>(q, proj, i)));
  return out;
}

/// sum_i (theta_i - theta_{i-1}) Delta(tau_i p || tau_i q) with p the
/// full-dimension marginal; identically zero in exact arithmetic.
inline double sum_delta_residual(std::span<const Digit> digits, const ExpansionSpec& spec, std::span<const double> q) {
  if (q.size() != digits.size()) fail(ErrorKind::InvalidMeasure, "q must have one entry per digit");
  detail::check_probability_vector<double>(q, "q");
  const FullDimData data = full_dim_marginal(digits, spec);
  const auto deltas = level_deltas(data.marginal, q, data.projection);
  double acc = 0.0;
  for (int i = 1; i <= spec.s(); ++i) acc += (spec.theta(i) - spec.theta(i - 1)) * deltas[i - 1];
  return acc;
}

inline constexpr double kDeltaZeroTol = 1e-12;

struct PeresValue {
  double value = 0.0;
  bool clamped = false;  // a lower endpoint below 2 was raised to 2
};

/// sum_i Delta_i int_{theta_{i-1} k}^{theta_i k} dt / log t. Lower endpoints
/// below 2 are raised to 2, only for terms with Delta_i != 0; coefficients
/// within kDeltaZeroTol of zero count as zero.
inline PeresValue peres_condition_lhs(std::span<const double> deltas, const ExpansionSpec& spec, double k) {
  if (static_cast<int>(deltas.size()) != spec.s()) fail(ErrorKind::InvalidMeasure, "need one Delta coefficient per level");
  if (k < 3) fail(ErrorKind::WordTooShort, "k must be at least 3");
  PeresValue out;
  for (int i = 1; i <= spec.s(); ++i) {
    if (std::abs(deltas[i - 1]) <= kDeltaZeroTol) continue;
    double a = spec.theta(i - 1) * k;
    const double b = spec.theta(i) * k;
    if (a < 2.0) {
      a = 2.0;
      out.clamped = true;
    }
    if (b > a) out.value += deltas[i - 1] * log_integral(a, b);
  }
  return out;
}

inline PeresValue peres_condition_lhs(std::span<const double> p, std::span<const double> q, std::span<const Digit> digits,
                                      const ExpansionSpec& spec, double k) {
  const LevelProjection proj = project_levels(spec, digits);
  return peres_condition_lhs(level_deltas(p, q, proj), spec, k);
}

/// Log-spaced k-grid over [10^3, 10^6].
inline std::vector<double> peres_grid(int per_decade = 10) {
  std::vector<double> ks;
  for (int j = 0; j <= 3 * per_decade; ++j) ks.push_back(std::round(std::pow(10.0, 3.0 + static_cast<double>(j) / per_decade)));
  return ks;
}

struct PeresCheck {
  std::vector<double> k;
  std::vector<double> lhs;
  std::vector<double> normalized;  // lhs * (log k)^2 / k
  double constant = 0.0;           // min of normalized
  bool clamped = false;
};

inline PeresCheck check_peres_condition(std::span<const double> deltas, const ExpansionSpec& spec, const std::vector<double>& ks = peres_grid()) {
  PeresCheck out;
  out.k = ks;
  out.lhs.resize(ks.size());
  out.normalized.resize(ks.size());
  std::vector<char> clamped(ks.size(), 0);
  parallel_for(ks.size(), [&](std::size_t j) {
    const PeresValue v = peres_condition_lhs(deltas, spec, ks[j]);
    out.lhs[j] = v.value;
    out.normalized[j] = v.value * std::pow(std::log(ks[j]), 2) / ks[j];
    clamped[j] = v.clamped;
  });
  out.constant = *std::min_element(out.normalized.begin(), out.normalized.end());
  out.clamped = std::any_of(clamped.begin(), clamped.end(), [](char c) { return c != 0; });
  return out;
}

enum class HausClass { PositiveFinite, Infinite, ZeroOrInfinite, Undetermined };

inline std::string_view to_string(HausClass c) {
  switch (c) {
    case HausClass::PositiveFinite: return "PositiveFinite";
    case HausClass::Infinite: return "Infinite";
    case HausClass::ZeroOrInfinite: return "ZeroOrInfinite";
    case HausClass::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

struct HausClassification {
  HausClass cls = HausClass::Undetermined;
  std::vector<int> nonuniform_levels;
  std::optional<int> uniform_level;            // i_1 with tau_{i_1} q uniform
  std::optional<std::vector<double>> witness;  // q over D
  std::vector<double> deltas;                  // Delta(tau_i p || tau_i q)
  std::optional<PeresCheck> peres;
};

/// Decides H^{dim_H K}(K) from the number N of levels where tau_i p is not
/// uniform: N = 0 with uniform fibers is positive finite, N = 2 is infinite.
inline HausClassification infinite_hausdorff_classifier(std::span<const Digit> digits, const ExpansionSpec& spec) {
  const FullDimData data = full_dim_marginal(digits, spec);
  const auto& proj = data.projection;
  HausClassification out;
  for (int i = 1; i <= spec.s(); ++i)
    if (!detail::is_uniform(push_vector<double>(data.marginal, proj, i))) out.nonuniform_levels.push_back(i);
  const std::size_t n = out.nonuniform_levels.size();
  if (n == 1) fail(ErrorKind::InternalError, "exactly one level has a non-uniform marginal");
  if (n == 0) {
    out.cls = fiber_profile(digits, spec).uniform_fiber ? HausClass::PositiveFinite : HausClass::Undetermined;
    return out;
  }
  if (n > 2) return out;

  // q(x) = 1 / (#D_{i1} * #{y in D : tau_{i1} y = tau_{i1} x}) makes tau_{i1} q uniform.
  const int i1 = out.nonuniform_levels.front();
  const auto& lvl = proj.level(i1);
  std::vector<int> block(lvl.symbols.size(), 0);
  for (int c : lvl.from_digit) ++block[c];
  std::vector<double> q;
  for (int c : lvl.from_digit) q.push_back(1.0 / (static_cast<double>(lvl.symbols.size()) * block[c]));
  out.uniform_level = i1;
  out.deltas = level_deltas(data.marginal, q, proj);
  out.witness = std::move(q);
  out.peres = check_peres_condition(out.deltas, spec);
  out.cls = out.peres->constant > 0.0 ? HausClass::Infinite : HausClass::Undetermined;
  return out;
}

/// phi(r) = r^gamma exp(c |log r| / (log |log r|)^2) on (0, r_max), with
/// r_max = exp(-e) so that log |log r| >= 1.
class GaugeFunction {
 public:
  GaugeFunction(double gamma, double c_tilde) : gamma_(gamma), c_tilde_(c_tilde) {
    if (!(gamma > 0.0)) fail(ErrorKind::ConfigError, "gauge exponent must be positive");
    if (!(c_tilde > 0.0)) fail(ErrorKind::ConfigError, "gauge constant must be positive");
    // d log phi / d|log r| = -gamma + c g(L), g(L) = (L - 2) / L^3, L = log|log r|.
    // g peaks at L = 3 with value 1/27 and decreases afterwards.
    double l_star = 1.0;
    if (c_tilde / 27.0 >= gamma) {
      double lo = 3.0, hi = 6.0;
      while ((hi - 2.0) / (hi * hi * hi) >= gamma / c_tilde) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((mid - 2.0) / (mid * mid * mid) >= gamma / c_tilde ? lo : hi) = mid;
      }
      l_star = hi;
    }
    // Domain is (0, r0] with log r0 = -exp(l_star).
    log_r0_ = -std::exp(l_star);
    verify_monotone();
  }

  double gamma() const { return gamma_; }
  double c_tilde() const { return c_tilde_; }
  static double log_r_max() { return -std::exp(1.0); }
  /// log of the right end of the increasing domain.
  double log_domain_end() const { return log_r0_; }

  /// log phi(r) given log r; avoids underflow for tiny r.
  double log_value_at_log(double log_r) const {
    if (!(log_r < log_r_max())) fail(ErrorKind::DomainTooLarge, "gauge is only defined for r < exp(-e)");
    const double u = -log_r;
    return -gamma_ * u + c_tilde_ * u / std::pow(std::log(u), 2);
  }
  double log_value(double r) const {
    if (!(r > 0.0)) fail(ErrorKind::DomainTooLarge, "gauge needs r > 0");
    return log_value_at_log(std::log(r));
  }
  double operator()(double r) const { return std::exp(log_value(r)); }

 private:
  void verify_monotone() const {
    const double u0 = -log_r0_;
    double prev = INFINITY;
    for (int j = 1; j <= 400; ++j) {
      const double u = u0 * std::pow(10.0, j / 50.0);
      const double v = log_value_at_log(-u);
      if (v >= prev) fail(ErrorKind::InternalError, "gauge is not increasing on its declared domain");
      prev = v;
    }
  }

  double gamma_;
  double c_tilde_;
  double log_r0_ = 0.0;
};

inline GaugeFunction peres_gauge(double gamma, double c_tilde) { return GaugeFunction(gamma, c_tilde); }

enum class DimVerdict { Coincide, Differ, Undetermined };
enum class MeasureVerdict { Holds, Fails, Undetermined };

inline std::string_view to_string(DimVerdict v) {
  switch (v) {
    case DimVerdict::Coincide: return "Coincide";
    case DimVerdict::Differ: return "Differ";
    case DimVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}
inline std::string_view to_string(MeasureVerdict v) {
  switch (v) {
    case MeasureVerdict::Holds: return "Holds";
    case MeasureVerdict::Fails: return "Fails";
    case MeasureVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

/// A cylinder on which tau_i of the maximal entropy measure and the maximal
/// entropy measure of X_i disagree.
struct CylinderWitness {
  int level = 0;
  Word word;
  double pushed = 0.0;
  double maximal = 0.0;
};

struct ReportOptions {
  int depth = 3;
  int k_max = 10;
  int bracket_depth = 10;
  EnumerationBudget budget{};
};

struct DimensionReport {
  bool sponge = false;
  int d = 0;
  int weak_spec_gap = 0;
  double dim_box = 0.0;
  std::optional<std::string> dim_box_symbolic;
  Interval dim_haus;
  Interval ly_of_mme;
  DimVerdict verdict_A = DimVerdict::Undetermined;
  MeasureVerdict verdict_C = MeasureVerdict::Undetermined;
  HausClass haus_class = HausClass::Undetermined;

  // Sponges.
  std::optional<FiberProfile> fiber;
  std::optional<FullDimData> full_dim;
  std::optional<MmeEvidence> mme;
  std::optional<HausClassification> classification;

  // Subshifts of finite type.
  std::optional<PressureResult> pressure;
  std::optional<CylinderWitness> cylinder_witness;
  int agreement_depth = 0;
  std::vector<std::vector<double>> fiber_ratios;  // [i - 2][k - 1]: max/min #tau_i^{-1}(I)
};

namespace detail {

inline void check_report(const DimensionReport& r) {
  const double top = static_cast<double>(r.d) + 1e-9;
  for (double v : {r.dim_box, r.dim_haus.lo, r.dim_haus.hi, r.ly_of_mme.lo, r.ly_of_mme.hi})
    if (!(v >= -1e-9 && v <= top)) fail(ErrorKind::InternalError, "dimension outside [0, d]");
  if (r.dim_haus.lo > r.dim_box + 1e-9) fail(ErrorKind::InternalError, "Hausdorff dimension exceeds box dimension");
}

inline DimensionReport sponge_report(const SubshiftSpec& x, const ExpansionSpec& spec, const ReportOptions& opt) {
  DimensionReport r;
  r.sponge = true;
  r.d = spec.d();
  const auto& digits = x.digits();
  r.dim_box = box_dimension(x, spec);
  r.dim_box_symbolic = box_dimension_symbolic(x, spec);
  r.full_dim = full_dim_marginal(digits, spec);
  const double dh = std::log(r.full_dim->Z) / std::log(static_cast<double>(spec.n(spec.s())));
  r.dim_haus = {dh, dh};
  r.ly_of_mme = ly_dimension(maximal_entropy_measure(x), spec, opt.bracket_depth, opt.budget);
  r.fiber = fiber_profile(digits, spec);
  r.mme = mme_equals_full_dim(digits, spec);
  r.classification = infinite_hausdorff_classifier(digits, spec);
  r.verdict_A = r.fiber->uniform_fiber ? DimVerdict::Coincide : DimVerdict::Differ;
  r.verdict_C = r.mme->equal ? MeasureVerdict::Holds : MeasureVerdict::Fails;
  r.haus_class = r.classification->cls;
  // Sponges: equal dimensions iff some gauge gives positive finite measure.
  if (r.haus_class == HausClass::Undetermined && r.verdict_A == DimVerdict::Differ) r.haus_class = HausClass::ZeroOrInfinite;
  if (spec.s() <= 2 && (r.verdict_A == DimVerdict::Coincide) != (r.verdict_C == MeasureVerdict::Holds))
    fail(ErrorKind::InternalError, "s <= 2 but dimension and measure coincidence disagree");
  return r;
}

inline DimensionReport sft_report(const SubshiftSpec& x, const ExpansionSpec& spec, const ReportOptions& opt) {
  DimensionReport r;
  r.d = spec.d();
  r.dim_box = box_dimension(x, spec);
  r.pressure = weighted_pressure(x, spec, opt.k_max, opt.budget);
  const ShiftMeasure<double> parry = maximal_entropy_measure(x);
  r.ly_of_mme = ly_dimension(parry, spec, opt.bracket_depth, opt.budget);
  // Certified range [dim of the Parry image, dim_B], narrowed by the pressure
  // estimate when the two overlap.
  const double lo = std::min(r.ly_of_mme.lo, r.dim_box);
  r.dim_haus = {lo, r.dim_box};
  const Interval& est = r.pressure->dimension;
  if (est.lo <= r.dim_haus.hi && est.hi >= r.dim_haus.lo) r.dim_haus = {std::max(est.lo, r.dim_haus.lo), std::min(est.hi, r.dim_haus.hi)};
  if (spec.s() == 1) r.dim_haus = {r.dim_box, r.dim_box};

  const LevelProjection proj = project_levels(spec, x.digits());
  std::vector<SoficAutomaton> automata;
  std::vector<Pushforward<double>> pushed;
  std::vector<SoficMme> maximal;
  for (int i = 2; i <= spec.s(); ++i) {
    automata.push_back(factor_automaton(x, spec, i));
    pushed.push_back(pushforward(parry, spec, i));
    maximal.emplace_back(automata.back());
  }
  auto pushed_cylinder = [&](std::size_t j, const Word& w) {
    return std::visit([&](const auto& m) { return static_cast<double>(m.cylinder(w)); }, pushed[j]);
  };

  for (int k = 1; k <= opt.depth && !r.cylinder_witness; ++k) {
    for (std::size_t j = 0; j < automata.size() && !r.cylinder_witness; ++j) {
      for (const Word& w : enumerate_language(automata[j], k, opt.budget)) {
        const double a = pushed_cylinder(j, w), b = maximal[j].cylinder(w);
        if (std::abs(a - b) > 1e-9 * std::max(a, b)) {
          r.cylinder_witness = CylinderWitness{static_cast<int>(j) + 2, w, a, b};
          break;
        }
      }
    }
    if (!r.cylinder_witness) r.agreement_depth = k;
  }

  for (std::size_t j = 0; j < automata.size(); ++j) {
    std::vector<double> ratios;
    for (int k = 1; k <= opt.depth; ++k) {
      const auto words = enumerate_language(automata[j], k, opt.budget);
      std::vector<double> counts(words.size());
      parallel_for(words.size(), [&](std::size_t w) { counts[w] = count_preimages<double>(x, proj, static_cast<int>(j) + 2, words[w]); });
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      ratios.push_back(*hi / *lo);
    }
    r.fiber_ratios.push_back(std::move(ratios));
  }

  if (r.cylinder_witness) {
    r.verdict_A = DimVerdict::Differ;
    if (spec.s() <= 2) {
      r.verdict_C = MeasureVerdict::Fails;
      r.haus_class = HausClass::ZeroOrInfinite;
    }
  } else if (spec.s() == 1) {
    r.verdict_A = DimVerdict::Coincide;
    r.verdict_C = MeasureVerdict::Holds;
    r.haus_class = HausClass::PositiveFinite;
  }
  return r;
}

}  // namespace detail

/// Dimensions, coincidence verdicts and Hausdorff-measure class. Full shifts
/// take the exact sponge path; SFTs compare cylinder masses up to `depth`.
inline DimensionReport coincidence_report(const SubshiftSpec& x, const ExpansionSpec& spec, const ReportOptions& opt = {}) {
  validate_digits(spec, x.digits());
  DimensionReport r;
  r.weak_spec_gap = require_weak_spec(x);
  const int gap = r.weak_spec_gap;
  r = x.is_full() ? detail::sponge_report(x, spec, opt) : detail::sft_report(x, spec, opt);
  r.weak_spec_gap = gap;
  detail::check_report(r);
  return r;
}

}  // namespace spongedim
