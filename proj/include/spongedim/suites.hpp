#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "spongedim/cubes.hpp"
#include "spongedim/dimensions.hpp"
#include "spongedim/fixtures.hpp"
#include "spongedim/measures.hpp"
#include "spongedim/quadrature.hpp"

namespace spongedim::suites {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Check {
  int id;
  std::string name;
  std::function<bool(std::ostringstream&)> run;
};

namespace detail {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline std::vector<double> random_probability(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> q(n);
  double total = 0.0;
  for (double& v : q) total += (v = e(rng));
  for (double& v : q) v /= total;
  return q;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Three-scale sponge: box and Hausdorff dimensions.
inline bool sponge_d3_dimensions(std::ostringstream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = fixtures::sponge_d3();
  const DimensionReport r = coincidence_report(f.x, f.spec);
  const double secs = detail::seconds_since(t0);
  const double box = std::log(360.0) / (12.0 * std::log(2.0));
  const double haus = std::log(18.0) / (6.0 * std::log(2.0));
  out << "dim_box=" << r.dim_box << " (" << r.dim_box_symbolic.value_or("?") << ") dim_haus=" << r.dim_haus.mid() << " time=" << secs << "s";
  return detail::near(r.dim_box, box, 1e-9) && r.dim_haus.exact() && detail::near(r.dim_haus.lo, haus, 1e-9) &&
         r.dim_box_symbolic == "log(360)/(12*log(2))" && secs < 1.0;
}

/// Three-scale sponge: exact pushforwards of the uniform marginal.
inline bool sponge_d3_pushforwards(std::ostringstream& out) {
  const auto f = fixtures::sponge_d3();
  const auto mu = maximal_entropy_measure_exact(f.x);
  if (!mu) return out << "no exact maximal entropy measure", false;
  const FullDimData data = full_dim_marginal(f.x.digits(), f.spec);
  bool same = true;
  for (double v : data.marginal) same = same && detail::near(v, 1.0 / 6.0, 1e-12);
  const Rational sixth(1, 6), third(1, 3);
  const std::map<Digit, Rational> want2{{{0, 0}, sixth}, {{1, 0}, sixth}, {{2, 0}, sixth}, {{3, 0}, sixth}, {{0, 1}, third}};
  const std::map<Digit, Rational> want3{{{0}, Rational(2, 3)}, {{1}, third}};
  auto keyed = [&](int level) {
    const auto image = std::get<ShiftMeasure<Rational>>(pushforward(*mu, f.spec, level));
    std::map<Digit, Rational> out;
    for (std::size_t j = 0; j < image.size(); ++j) out[image.alphabet()[j]] = image.marginal()[j];
    return out;
  };
  const auto tau2 = keyed(2), tau3 = keyed(3);
  for (const auto& [level, image] : {std::pair{2, &tau2}, std::pair{3, &tau3}}) {
    out << "tau" << level << " p:";
    for (const auto& [y, v] : *image) out << " " << to_string(y) << "=" << v;
    out << "; ";
  }
  out << "full-dim marginal uniform=" << same;
  return tau2 == want2 && tau3 == want3 && same;
}

/// Three-scale sponge: dimensions differ, measures coincide, infinite measure.
inline bool sponge_d3_verdicts(std::ostringstream& out) {
  const auto f = fixtures::sponge_d3();
  const DimensionReport r = coincidence_report(f.x, f.spec);
  bool products = true;
  for (double v : r.mme->log_products) products = products && detail::near(v, -0.5 * std::log(2.0), 1e-12);
  out << "verdict_A=" << to_string(r.verdict_A) << " verdict_C=" << to_string(r.verdict_C) << " class=" << to_string(r.haus_class)
      << " log-products=-(1/2)log2:" << products;
  return r.verdict_A == DimVerdict::Differ && r.verdict_C == MeasureVerdict::Holds && r.mme->equal && products &&
         r.haus_class == HausClass::Infinite;
}

/// Four-scale two-family sponge: Z tables and the common product.
inline bool two_family_tables(std::ostringstream& out) {
  const auto f = fixtures::sponge_two_families(4);
  const FullDimData data = full_dim_marginal(f.x.digits(), f.spec);
  auto values = [&](int level) {
    std::set<double> v;
    for (double z : data.z_levels[level - 1]) v.insert(std::round(z * 1e9) / 1e9);
    return v;
  };
  const double root8 = std::round(2.0 * std::sqrt(2.0) * 1e9) / 1e9;
  const bool z_ok = values(2) == std::set<double>{1.0, 4.0} && values(3) == std::set<double>{2.0, 8.0} && values(4) == std::set<double>{root8};
  const MmeEvidence ev = mme_equals_full_dim(f.x.digits(), f.spec);
  bool product = true;
  for (const auto& c : ev.cumulative_logs) product = product && detail::near(c[2], -1.5 * std::log(2.0), 1e-12);
  const FiberProfile fp = fiber_profile(f.x.digits(), f.spec);
  const auto cls = infinite_hausdorff_classifier(f.x.digits(), f.spec);
  out << "Z tables ok=" << z_ok << " product through level 3 = 2^(-3/2):" << product << " uniform_fiber=" << fp.uniform_fiber
      << " mme_equals_full_dim=" << ev.equal << " class=" << to_string(cls.cls);
  return z_ok && product && !fp.uniform_fiber && ev.equal && cls.cls == HausClass::Infinite;
}

/// Distinct-neighbour SFT: Parry measure, lumped level-2 chain, verdict.
inline bool distinct_neighbour_sft(std::ostringstream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = fixtures::sft_distinct_neighbours();
  const auto parry = maximal_entropy_measure_exact(f.x);
  if (!parry) return out << "no exact Parry measure", false;
  bool parry_ok = true;
  for (std::size_t a = 0; a < 6; ++a) {
    parry_ok = parry_ok && parry->marginal()[a] == Rational(1, 6);
    for (std::size_t b = 0; b < 6; ++b) parry_ok = parry_ok && parry->transition(a, b) == (a == b ? Rational(0) : Rational(1, 5));
  }
  const auto pushed = pushforward(*parry, f.spec, 2);
  const auto* lumped = std::get_if<ShiftMeasure<Rational>>(&pushed);
  bool lump_ok = lumped != nullptr;
  if (lumped) {
    const std::vector<Rational> stationary{Rational(1, 6), Rational(1, 3), Rational(1, 2)};
    const std::vector<std::vector<Rational>> p{{Rational(0), Rational(2, 5), Rational(3, 5)},
                                               {Rational(1, 5), Rational(1, 5), Rational(3, 5)},
                                               {Rational(1, 5), Rational(2, 5), Rational(2, 5)}};
    lump_ok = lumped->marginal() == stationary && lumped->transition_matrix() == Matrix<Rational>::from_rows(p);
  }
  const DimensionReport r = coincidence_report(f.x, f.spec);
  const double secs = detail::seconds_since(t0);
  const bool witness = r.cylinder_witness && static_cast<int>(r.cylinder_witness->word.size()) <= 3;
  out << "parry=(1/6, A/5):" << parry_ok << " tau2 lumped exactly:" << lump_ok << " verdict_A=" << to_string(r.verdict_A);
  if (r.cylinder_witness) out << " witness length=" << r.cylinder_witness->word.size() << " at level " << r.cylinder_witness->level;
  out << " time=" << secs << "s";
  return parry_ok && lump_ok && r.verdict_A == DimVerdict::Differ && witness && secs < 5.0;
}

/// Cube count by the subset DP and by enumeration; exact cube mass.
inline bool sponge_d3_cubes(std::ostringstream& out) {
  const auto f = fixtures::sponge_d3();
  const BigInt dp = count_cubes_dp(f.x, f.spec, 4);
  const BigInt brute = count_cubes_by_enumeration(f.x, f.spec, 4);
  const BigInt fast = count_cubes(f.x, f.spec, 4);
  const auto mu = maximal_entropy_measure_exact(f.x);
  const std::vector<int> zeros(4, 0);  // digit 0 is (0,0,0)
  const Rational mass = cube_measure(f.x, *mu, f.spec, zeros, 4);
  out << "dp=" << dp << " enumeration=" << brute << " product=" << fast << " mass(0000)=" << mass;
  return dp == 360 && brute == 360 && fast == 360 && mass == Rational(1, 324);
}

/// On full shifts log Z(k)/k is constant and equals log Z.
inline bool full_shift_pressure(std::ostringstream& out) {
  bool ok = true;
  for (const auto& f : {fixtures::sponge_d3(), fixtures::full_alphabet()}) {
    const PressureResult p = weighted_pressure(f.x, f.spec, 6);
    const double log_z = std::log(full_dim_marginal(f.x.digits(), f.spec).Z);
    double worst = 0.0;
    for (double e : p.estimates) worst = std::max(worst, std::abs(e - log_z));
    out << f.name << ": max|logZ(k)/k - logZ|=" << worst << " ";
    ok = ok && worst < 1e-12;
  }
  return ok;
}

/// Sum-delta identity over random sponges and random q; classifier never
/// sees exactly one non-uniform level.
inline bool sum_delta_identity(std::ostringstream& out, std::uint64_t seed = 20240901) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  int one_level = 0;
  for (int s = 0; s < 20; ++s) {
    const auto f = fixtures::random_sponge(rng);
    for (int t = 0; t < 100; ++t) {
      const auto q = detail::random_probability(rng, f.x.size());
      worst = std::max(worst, std::abs(sum_delta_residual(f.x.digits(), f.spec, q)));
    }
    try {
      infinite_hausdorff_classifier(f.x.digits(), f.spec);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InternalError) throw;
      ++one_level;
    }
  }
  out << "max residual=" << worst << " sponges with N=1: " << one_level;
  return worst < 1e-10 && one_level == 0;
}

/// Two-scale sponges: uniform fibers, coincident measures and coincident
/// dimensions agree.
inline bool two_scale_equivalence(std::ostringstream& out, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  int exceptions = 0, uniform = 0;
  for (int s = 0; s < 200; ++s) {
    const auto f = fixtures::random_two_scale_sponge(rng);
    const bool a = fiber_profile(f.x.digits(), f.spec).uniform_fiber;
    const bool b = mme_equals_full_dim(f.x.digits(), f.spec).equal;
    const bool c = std::abs(hausdorff_dimension_sponge(f.x.digits(), f.spec) - box_dimension(f.x, f.spec)) < 1e-10;
    uniform += a;
    if (a != b || b != c) ++exceptions;
  }
  out << "200 sponges, " << uniform << " with uniform fibers, exceptions=" << exceptions;
  return exceptions == 0;
}

/// Variance of log R mu(Q_k) at k = 200 against k (1/9) (log 2)^2, and zero
/// variance when all fibers agree.
inline bool density_variance(std::ostringstream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  DensityOptions opt;
  opt.n_samples = 100'000;
  opt.seed = 12345;
  const int k = 200;
  const auto f = fixtures::sponge_d3();
  const auto mu = ShiftMeasure<double>::bernoulli(f.x.digits(), full_dim_marginal(f.x.digits(), f.spec).marginal);
  const DensityDiagnostic dd = density_diagnostic(f.x, f.spec, mu, Gauge{hausdorff_dimension_sponge(f.x.digits(), f.spec)}, k, opt);
  const double target = k * std::pow(std::log(2.0), 2) / 9.0;
  const auto g = fixtures::full_alphabet();
  const auto nu = ShiftMeasure<double>::bernoulli(g.x.digits(), full_dim_marginal(g.x.digits(), g.spec).marginal);
  const DensityDiagnostic control = density_diagnostic(g.x, g.spec, nu, Gauge{hausdorff_dimension_sponge(g.x.digits(), g.spec)}, k, opt);
  const double secs = detail::seconds_since(t0);
  out << "sample var=" << dd.sample_var << " target=" << target << " rel.err=" << std::abs(dd.sample_var / target - 1.0)
      << " control var=" << control.sample_var << " time=" << secs << "s";
  return std::abs(dd.sample_var / target - 1.0) < 0.10 && control.sample_var == 0.0 && secs < 60.0;
}

/// Least-squares slope of log #Q_k over k in [8, 16].
inline bool empirical_slope(std::ostringstream& out) {
  const auto f = fixtures::sponge_d3();
  const BoxSlope b = empirical_box_dimension(f.x, f.spec, 8, 16);
  const double box = box_dimension(f.x, f.spec);
  out << "slope=" << b.slope << " dim_box=" << box;
  return std::abs(b.slope - box) < 0.01;
}

/// Peres constant for the constructed witness and the log-integral value.
inline bool peres_constant(std::ostringstream& out) {
  const auto f = fixtures::sponge_d3();
  const auto cls = infinite_hausdorff_classifier(f.x.digits(), f.spec);
  const double li = log_integral(50.0, 100.0);
  const double oracle = boost::math::expint(std::log(100.0)) - boost::math::expint(std::log(50.0));
  const double c = cls.peres ? cls.peres->constant : 0.0;
  out << "c=" << c << (cls.peres && cls.peres->clamped ? " (lower endpoint clamped)" : "") << " int_50^100 dt/log t=" << li
      << " oracle=" << oracle;
  return cls.peres && c > 0.0 && std::abs(li - oracle) < 1e-6;
}

inline std::vector<Check> acceptance_checks() {
  return {{1, "sponge_d3 dimensions", sponge_d3_dimensions},
          {2, "sponge_d3 exact pushforwards", sponge_d3_pushforwards},
          {3, "sponge_d3 coincidence verdicts", sponge_d3_verdicts},
          {4, "two-family sponge Z tables", two_family_tables},
          {5, "distinct-neighbour SFT", distinct_neighbour_sft},
          {6, "cube count and cube mass", sponge_d3_cubes},
          {7, "full-shift pressure", full_shift_pressure},
          {8, "sum-delta identity", [](std::ostringstream& o) { return sum_delta_identity(o); }},
          {9, "two-scale equivalence", [](std::ostringstream& o) { return two_scale_equivalence(o); }},
          {10, "density variance", density_variance},
          {11, "empirical box slope", empirical_slope},
          {12, "Peres constant and log integral", peres_constant}};
}

/// Named suite: acceptance, paper-examples, identities or equivalence.
inline std::vector<Check> suite(const std::string& name) {
  auto all = acceptance_checks();
  auto pick = [&](std::initializer_list<int> ids) {
    std::vector<Check> out;
    for (int id : ids) out.push_back(all[id - 1]);
    return out;
  };
  if (name == "acceptance") return all;
  if (name == "paper-examples") return pick({1, 2, 3, 4, 5});
  if (name == "identities") return pick({7, 8});
  if (name == "equivalence") return pick({9});
  fail(ErrorKind::ConfigError, "unknown suite '" + name + "' (acceptance, paper-examples, identities, equivalence)");
}

inline CheckResult run_check(const Check& c) {
  CheckResult r{c.id, c.name, false, "", 0.0};
  std::ostringstream detail;
  detail.precision(12);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.pass = c.run(detail);
  } catch (const std::exception& e) {
    detail << " error: " << e.what();
    r.pass = false;
  }
  r.seconds = detail::seconds_since(t0);
  r.detail = detail.str();
  return r;
}

/// Runs every check, prints one line each, returns the number of failures.
inline int run_suite(const std::vector<Check>& checks, std::FILE* sink = stdout) {
  int failures = 0;
  for (const auto& c : checks) {
    const CheckResult r = run_check(c);
    failures += !r.pass;
    std::fprintf(sink, "[%s] %2d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
    std::fflush(sink);
  }
  std::fprintf(sink, "%zu checks, %d failed\n", checks.size(), failures);
  return failures;
}

}  // namespace spongedim::suites
