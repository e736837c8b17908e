#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spongedim/error.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/matrix.hpp"
#include "spongedim/parallel.hpp"
#include "spongedim/symbolic.hpp"

namespace spongedim {

inline constexpr double kProbabilityTol = 1e-12;

namespace detail {

inline bool is_zero(double x, double tol) { return std::abs(x) <= tol; }
inline bool is_zero(const Rational& x, double) { return x == 0; }
inline bool equal(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool equal(const Rational& a, const Rational& b, double) { return a == b; }

inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

template <class Scalar>
void check_probability_vector(std::span<const Scalar> p, const std::string& what) {
  Scalar total(0);
  for (const auto& v : p) {
    if (v < 0) fail(ErrorKind::InvalidMeasure, what + " has a negative entry");
    total += v;
  }
  if (!equal(total, Scalar(1), kProbabilityTol)) fail(ErrorKind::InvalidMeasure, what + " does not sum to 1");
}

}  // namespace detail

/// Bernoulli or Markov measure on sequences over `alphabet`. Scalar is
/// double or Rational; Rational keeps pushforwards exact.
template <class Scalar>
class ShiftMeasure {
 public:
  enum class Kind { Bernoulli, Markov };

  static ShiftMeasure bernoulli(std::vector<Digit> alphabet, std::vector<Scalar> marginal) {
    if (marginal.size() != alphabet.size()) fail(ErrorKind::InvalidMeasure, "marginal length differs from the alphabet size");
    detail::check_probability_vector<Scalar>(marginal, "marginal");
    ShiftMeasure mu;
    mu.kind_ = Kind::Bernoulli;
    mu.alphabet_ = std::move(alphabet);
    mu.marginal_ = std::move(marginal);
    return mu;
  }

  static ShiftMeasure markov(std::vector<Digit> alphabet, std::vector<Scalar> stationary, Matrix<Scalar> transition) {
    const std::size_t n = alphabet.size();
    if (stationary.size() != n || transition.rows() != n || transition.cols() != n)
      fail(ErrorKind::InvalidMeasure, "stationary vector and transition matrix must match the alphabet size");
    detail::check_probability_vector<Scalar>(stationary, "stationary vector");
    for (std::size_t a = 0; a < n; ++a) detail::check_probability_vector<Scalar>(transition.row(a), "transition row " + std::to_string(a));
    for (std::size_t b = 0; b < n; ++b) {
      Scalar acc(0);
      for (std::size_t a = 0; a < n; ++a) acc += stationary[a] * transition(a, b);
      if (!detail::equal(acc, stationary[b], kProbabilityTol)) fail(ErrorKind::InvalidMeasure, "stationary vector is not invariant");
    }
    ShiftMeasure mu;
    mu.kind_ = Kind::Markov;
    mu.alphabet_ = std::move(alphabet);
    mu.marginal_ = std::move(stationary);
    mu.transition_ = std::move(transition);
    return mu;
  }

  /// Measures hosted on a subshift: transitions may only use allowed pairs.
  static ShiftMeasure bernoulli(const SubshiftSpec& x, std::vector<Scalar> marginal) {
    auto mu = bernoulli(x.digits(), std::move(marginal));
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b)
        if (!detail::is_zero(mu.marginal_[a], kProbabilityTol) && !detail::is_zero(mu.marginal_[b], kProbabilityTol) &&
            !x.allows(static_cast<int>(a), static_cast<int>(b)))
          fail(ErrorKind::SupportViolation, "Bernoulli support uses a forbidden transition");
    return mu;
  }
  static ShiftMeasure markov(const SubshiftSpec& x, std::vector<Scalar> stationary, Matrix<Scalar> transition) {
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b)
        if (!detail::is_zero(transition(a, b), kProbabilityTol) && !x.allows(static_cast<int>(a), static_cast<int>(b)))
          fail(ErrorKind::SupportViolation, "transition matrix charges a forbidden transition");
    return markov(x.digits(), std::move(stationary), std::move(transition));
  }

  Kind kind() const { return kind_; }
  bool is_bernoulli() const { return kind_ == Kind::Bernoulli; }
  const std::vector<Digit>& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }
  /// Bernoulli marginal, or Markov stationary vector.
  const std::vector<Scalar>& marginal() const { return marginal_; }

  Scalar transition(std::size_t a, std::size_t b) const { return is_bernoulli() ? marginal_[b] : transition_(a, b); }
  Matrix<Scalar> transition_matrix() const {
    Matrix<Scalar> out(size(), size());
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b) out(a, b) = transition(a, b);
    return out;
  }

  /// mu([w]) for a word of symbol indices.
  Scalar cylinder(std::span<const int> word) const {
    if (word.empty()) return Scalar(1);
    for (int a : word)
      if (a < 0 || a >= static_cast<int>(size())) fail(ErrorKind::InvalidDigit, "symbol index out of range");
    Scalar p = marginal_[word[0]];
    for (std::size_t t = 1; t < word.size(); ++t) p *= transition(word[t - 1], word[t]);
    return p;
  }

  template <class U>
  ShiftMeasure<U> cast() const {
    std::vector<U> m;
    for (const auto& v : marginal_) m.push_back(static_cast<U>(v));
    if (is_bernoulli()) return ShiftMeasure<U>::bernoulli(alphabet_, std::move(m));
    Matrix<U> t(size(), size());
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b) t(a, b) = static_cast<U>(transition_(a, b));
    return ShiftMeasure<U>::markov(alphabet_, std::move(m), std::move(t));
  }

 private:
  Kind kind_ = Kind::Bernoulli;
  std::vector<Digit> alphabet_;
  std::vector<Scalar> marginal_;
  Matrix<Scalar> transition_;
};

inline ShiftMeasure<double> to_double(const ShiftMeasure<Rational>& mu) {
  std::vector<double> m;
  for (const auto& v : mu.marginal()) m.push_back(to_double(v));
  if (mu.is_bernoulli()) return ShiftMeasure<double>::bernoulli(mu.alphabet(), std::move(m));
  Matrix<double> t(mu.size(), mu.size());
  for (std::size_t a = 0; a < mu.size(); ++a)
    for (std::size_t b = 0; b < mu.size(); ++b) t(a, b) = to_double(mu.transition(a, b));
  return ShiftMeasure<double>::markov(mu.alphabet(), std::move(m), std::move(t));
}
inline const ShiftMeasure<double>& to_double(const ShiftMeasure<double>& mu) { return mu; }

/// Parry measure: uniform Bernoulli on a full shift, otherwise the Markov
/// chain P(a,b) = A(a,b) r(b) / (lambda r(a)) with stationary l(a) r(a).
inline ShiftMeasure<double> maximal_entropy_measure(const SubshiftSpec& x) {
  const std::size_t n = x.size();
  if (x.is_full()) return ShiftMeasure<double>::bernoulli(x.digits(), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  const Matrix<double> a = x.transition().cast<double>();
  if (!is_irreducible(a)) fail(ErrorKind::NotCertified, "maximal entropy measure requires an irreducible transition graph");
  const PerronResult pr = perron(a);
  Matrix<double> p(n, n, 0.0);
  std::vector<double> stationary(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stationary[i] = pr.left[i] * pr.right[i];
    total += stationary[i];
  }
  for (auto& v : stationary) v /= total;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = a(i, j) * pr.right[j] / (pr.eigenvalue * pr.right[i]);
      row += p(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= row;
  }
  return ShiftMeasure<double>::markov(x, std::move(stationary), std::move(p));
}

/// Exact Parry measure when the Perron root is an integer; nullopt
/// otherwise.
inline std::optional<ShiftMeasure<Rational>> maximal_entropy_measure_exact(const SubshiftSpec& x) {
  const std::size_t n = x.size();
  if (x.is_full()) return ShiftMeasure<Rational>::bernoulli(x.digits(), std::vector<Rational>(n, Rational(1, static_cast<long>(n))));
  const Matrix<double> ad = x.transition().cast<double>();
  if (!is_irreducible(ad)) fail(ErrorKind::NotCertified, "maximal entropy measure requires an irreducible transition graph");
  const double lambda = perron(ad).eigenvalue;
  const long root = std::lround(lambda);
  if (std::abs(lambda - static_cast<double>(root)) > 1e-9) return std::nullopt;

  Matrix<Rational> shifted(n, n), shifted_t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      shifted(i, j) = Rational(x.transition()(i, j)) - (i == j ? Rational(root) : Rational(0));
      shifted_t(j, i) = shifted(i, j);
    }
  auto right = rational_null_space(shifted);
  auto left = rational_null_space(shifted_t);
  if (right.size() != 1 || left.size() != 1) return std::nullopt;
  auto normalize_sign = [](std::vector<Rational>& v) {
    if (v[0] < 0)
      for (auto& e : v) e = -e;
  };
  normalize_sign(right[0]);
  normalize_sign(left[0]);
  const auto& r = right[0];
  const auto& l = left[0];
  for (std::size_t i = 0; i < n; ++i)
    if (r[i] <= 0 || l[i] <= 0) return std::nullopt;

  std::vector<Rational> stationary(n);
  Rational total = 0;
  for (std::size_t i = 0; i < n; ++i) total += l[i] * r[i];
  for (std::size_t i = 0; i < n; ++i) stationary[i] = l[i] * r[i] / total;
  Matrix<Rational> p(n, n, Rational(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (x.allows(static_cast<int>(i), static_cast<int>(j))) p(i, j) = r[j] / (Rational(root) * r[i]);
  return ShiftMeasure<Rational>::markov(x, std::move(stationary), std::move(p));
}

/// h(mu) in nats; 0 log 0 = 0.
template <class Scalar>
double measure_entropy(const ShiftMeasure<Scalar>& mu) {
  const auto m = to_double(mu);
  double h = 0.0;
  if (m.is_bernoulli()) {
    for (double p : m.marginal()) h -= detail::xlogx(p);
    return h;
  }
  for (std::size_t a = 0; a < m.size(); ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < m.size(); ++b) row -= detail::xlogx(m.transition(a, b));
    h += m.marginal()[a] * row;
  }
  return h;
}

struct EntropyBracket {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
  std::vector<double> upper_by_depth;  // H_{k+1} - H_k, k = 1..depth
  std::vector<double> lower_by_depth;  // H(X_1, Y_2..Y_{k+1}) - H(X_1, Y_2..Y_k)
};

/// Image of a Markov chain under a symbol-to-class map that is not
/// lumpable: a hidden Markov measure.
class HiddenFactor {
 public:
  HiddenFactor(std::vector<Digit> alphabet, std::vector<int> label_of, std::vector<double> stationary, Matrix<double> transition)
      : alphabet_(std::move(alphabet)), label_of_(std::move(label_of)), stationary_(std::move(stationary)), transition_(std::move(transition)) {}

  const std::vector<Digit>& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }

  /// Exact (up to rounding) cylinder probability via products of the
  /// class-restricted transition blocks.
  double cylinder(std::span<const int> word) const {
    if (word.empty()) return 1.0;
    std::vector<double> f = start(word[0]);
    for (std::size_t t = 1; t < word.size(); ++t) f = advance(f, word[t]);
    double total = 0.0;
    for (double v : f) total += v;
    return total;
  }

  /// Birch bounds lower <= h <= upper from blocks of length depth + 1.
  EntropyBracket bracket(int depth = 10, const EnumerationBudget& budget = {}) const {
    if (depth < 1) fail(ErrorKind::WordTooShort, "bracket depth must be positive");
    const std::size_t hidden = stationary_.size();
    // Block entropies of the factor (H) and of (X_1, Y_2..Y_n) (J), split by
    // the first symbol or first hidden state and reduced in index order.
    std::vector<std::vector<double>> h_parts(size(), std::vector<double>(depth + 2, 0.0));
    std::vector<std::vector<double>> j_parts(hidden, std::vector<double>(depth + 2, 0.0));
    std::atomic<std::uint64_t> nodes{0};
    auto walk = [&](auto&& self, const std::vector<double>& f, int n, std::vector<double>& acc) -> void {
      double mass = 0.0;
      for (double v : f) mass += v;
      if (mass <= 0.0) return;
      acc[n] -= detail::xlogx(mass);
      if (nodes.fetch_add(1) > budget.max_words) fail(ErrorKind::BudgetExceeded, "entropy bracket exceeded the enumeration budget");
      if (n == depth + 1) return;
      for (int b = 0; b < static_cast<int>(size()); ++b) self(self, advance(f, b), n + 1, acc);
    };
    parallel_for(size() + hidden, [&](std::size_t task) {
      if (task < size()) {
        walk(walk, start(static_cast<int>(task)), 1, h_parts[task]);
      } else {
        const std::size_t a = task - size();
        std::vector<double> f(hidden, 0.0);
        f[a] = stationary_[a];
        walk(walk, f, 1, j_parts[a]);
      }
    });
    std::vector<double> h(depth + 2, 0.0), j(depth + 2, 0.0);
    for (const auto& part : h_parts)
      for (int n = 1; n <= depth + 1; ++n) h[n] += part[n];
    for (const auto& part : j_parts)
      for (int n = 1; n <= depth + 1; ++n) j[n] += part[n];

    EntropyBracket out;
    out.depth = depth;
    for (int k = 1; k <= depth; ++k) {
      out.upper_by_depth.push_back(h[k + 1] - h[k]);
      out.lower_by_depth.push_back(j[k + 1] - j[k]);
    }
    out.upper = *std::min_element(out.upper_by_depth.begin(), out.upper_by_depth.end());
    out.lower = std::min(out.upper, *std::max_element(out.lower_by_depth.begin(), out.lower_by_depth.end()));
    return out;
  }

 private:
  std::vector<double> start(int label) const {
    std::vector<double> f(stationary_.size(), 0.0);
    for (std::size_t a = 0; a < f.size(); ++a)
      if (label_of_[a] == label) f[a] = stationary_[a];
    return f;
  }
  std::vector<double> advance(const std::vector<double>& f, int label) const {
    std::vector<double> g(f.size(), 0.0);
    for (std::size_t a = 0; a < f.size(); ++a) {
      if (f[a] == 0.0) continue;
      for (std::size_t b = 0; b < f.size(); ++b)
        if (label_of_[b] == label) g[b] += f[a] * transition_(a, b);
    }
    return g;
  }

  std::vector<Digit> alphabet_;
  std::vector<int> label_of_;
  std::vector<double> stationary_;
  Matrix<double> transition_;
};

/// tau_i p for a vector indexed like the level-1 digits used to build `proj`.
template <class Scalar>
std::vector<Scalar> push_vector(std::span<const Scalar> p, const LevelProjection& proj, int level) {
  const auto& lvl = proj.level(level);
  std::vector<Scalar> out(lvl.symbols.size(), Scalar(0));
  for (std::size_t a = 0; a < p.size(); ++a) out[lvl.from_digit[a]] += p[a];
  return out;
}

template <class Scalar>
using Pushforward = std::variant<ShiftMeasure<Scalar>, HiddenFactor>;

/// tau_i mu over the sorted level alphabet D_i. Markov chains give a Markov
/// image exactly when the class partition is strongly lumpable on the
/// support of the stationary vector.
template <class Scalar>
Pushforward<Scalar> pushforward(const ShiftMeasure<Scalar>& mu, const ExpansionSpec& spec, int level) {
  spec.check_level(level);
  if (level == 1) return mu;
  const LevelProjection proj = project_levels(spec, mu.alphabet());
  const auto& lvl = proj.level(level);
  const std::size_t classes = lvl.symbols.size();
  const std::vector<Scalar> marginal = push_vector<Scalar>(mu.marginal(), proj, level);
  if (mu.is_bernoulli()) return ShiftMeasure<Scalar>::bernoulli(lvl.symbols, marginal);

  Matrix<Scalar> lumped(classes, classes, Scalar(0));
  std::vector<char> seen(classes, 0);
  bool lumpable = true;
  for (std::size_t a = 0; a < mu.size() && lumpable; ++a) {
    if (detail::is_zero(mu.marginal()[a], kProbabilityTol)) continue;
    std::vector<Scalar> row(classes, Scalar(0));
    for (std::size_t b = 0; b < mu.size(); ++b) row[lvl.from_digit[b]] += mu.transition(a, b);
    const int c = lvl.from_digit[a];
    if (!seen[c]) {
      seen[c] = 1;
      for (std::size_t t = 0; t < classes; ++t) lumped(c, t) = row[t];
      continue;
    }
    for (std::size_t t = 0; t < classes; ++t) lumpable = lumpable && detail::equal(lumped(c, t), row[t], kProbabilityTol);
  }
  if (lumpable) {
    // Classes of zero stationary mass never occur; give them any stochastic row.
    for (std::size_t c = 0; c < classes; ++c)
      if (!seen[c]) lumped(c, c) = Scalar(1);
    return ShiftMeasure<Scalar>::markov(lvl.symbols, marginal, std::move(lumped));
  }
  const auto md = to_double(mu);
  std::vector<double> stationary(md.marginal());
  return HiddenFactor(lvl.symbols, lvl.from_digit, std::move(stationary), md.transition_matrix());
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool exact() const { return lo == hi; }
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

/// Entropy of a pushforward: exact for Bernoulli/Markov images, a Birch
/// bracket otherwise.
template <class Scalar>
Interval pushforward_entropy(const Pushforward<Scalar>& image, int depth = 10, const EnumerationBudget& budget = {}) {
  if (const auto* m = std::get_if<ShiftMeasure<Scalar>>(&image)) {
    const double h = measure_entropy(*m);
    return {h, h};
  }
  const auto b = std::get<HiddenFactor>(image).bracket(depth, budget);
  return {b.lower, b.upper};
}

/// Throws NotErgodic unless the chain restricted to its support is
/// irreducible.
template <class Scalar>
void require_ergodic(const ShiftMeasure<Scalar>& mu) {
  if (mu.is_bernoulli()) return;
  std::vector<int> support;
  for (std::size_t a = 0; a < mu.size(); ++a)
    if (!detail::is_zero(mu.marginal()[a], kProbabilityTol)) support.push_back(static_cast<int>(a));
  const int n = static_cast<int>(support.size());
  auto comps = strongly_connected_components(n, [&](int r, int c) { return !detail::is_zero(mu.transition(support[r], support[c]), kProbabilityTol); });
  if (comps.size() != 1) fail(ErrorKind::NotErgodic, "Markov measure has more than one recurrent class on its support");
}

/// d(mu) = sum_i (1/log n_i - 1/log n_{i-1}) h(tau_i mu).
template <class Scalar>
Interval ly_dimension(const ShiftMeasure<Scalar>& mu, const ExpansionSpec& spec, int depth = 10, const EnumerationBudget& budget = {}) {
  require_ergodic(mu);
  Interval total;
  for (int i = 1; i <= spec.s(); ++i) {
    const Interval h = pushforward_entropy<Scalar>(pushforward(mu, spec, i), depth, budget);
    const double w = spec.level_weight(i);
    // Weights are positive: n_i < n_{i-1}.
    total.lo += w * h.lo;
    total.hi += w * h.hi;
  }
  return total;
}

/// Maximal entropy measure of a sofic factor, read off the Parry measure of
/// the edge shift of the largest-entropy component of a right-resolving
/// presentation: mu(w) = sum_q l(q) r(q.w) / lambda^|w|.
class SoficMme {
 public:
  explicit SoficMme(const SoficAutomaton& aut) : aut_(aut) {
    const Matrix<double> adj = aut.adjacency();
    const int n = static_cast<int>(aut.state_count());
    auto comps = strongly_connected_components(n, [&](int r, int c) { return adj(r, c) != 0.0; });
    double best = -1.0;
    for (const auto& comp : comps) {
      if (comp.size() == 1 && adj(comp[0], comp[0]) == 0.0) continue;
      Matrix<double> sub(comp.size(), comp.size());
      for (std::size_t r = 0; r < comp.size(); ++r)
        for (std::size_t c = 0; c < comp.size(); ++c) sub(r, c) = adj(comp[r], comp[c]);
      const PerronResult pr = perron(sub);
      if (pr.eigenvalue > best * (1 + 1e-12)) {
        best = pr.eigenvalue;
        component_ = comp;
        perron_ = pr;
      }
    }
    if (best < 0) fail(ErrorKind::NotCertified, "factor presentation has no recurrent component");
    in_component_.assign(n, -1);
    for (std::size_t k = 0; k < component_.size(); ++k) in_component_[component_[k]] = static_cast<int>(k);
  }

  double perron_root() const { return perron_.eigenvalue; }
  const SoficAutomaton& automaton() const { return aut_; }

  double cylinder(std::span<const int> word) const {
    double total = 0.0;
    for (std::size_t k = 0; k < component_.size(); ++k) {
      int q = component_[k];
      for (int b : word) {
        q = aut_.next[q][b];
        if (q < 0 || in_component_[q] < 0) {
          q = -1;
          break;
        }
      }
      if (q >= 0) total += perron_.left[k] * perron_.right[in_component_[q]];
    }
    return total / std::pow(perron_.eigenvalue, static_cast<double>(word.size()));
  }

 private:
  SoficAutomaton aut_;
  std::vector<int> component_;
  std::vector<int> in_component_;
  PerronResult perron_;
};

/// Z-recursion data for the sponge K = R(D^N).
struct FullDimData {
  LevelProjection projection;
  std::vector<std::vector<double>> z_levels;  // z_levels[i - 1][index in D_i]
  double Z = 0.0;
  std::vector<double> marginal;  // over D, in the given order

  double z(int level, int symbol) const { return z_levels.at(level - 1).at(symbol); }
};

inline FullDimData full_dim_marginal(std::span<const Digit> digits, const ExpansionSpec& spec) {
  FullDimData out;
  out.projection = project_levels(spec, digits);
  const auto& proj = out.projection;
  out.z_levels.push_back(std::vector<double>(proj.level(1).symbols.size(), 1.0));
  for (int i = 2; i <= spec.s(); ++i) {
    const auto& lvl = proj.level(i);
    const double a = spec.alpha(i - 1);
    std::vector<double> z(lvl.symbols.size(), 0.0);
    const auto& prev = out.z_levels.back();
    for (std::size_t y = 0; y < prev.size(); ++y) z[lvl.from_previous[y]] += std::pow(prev[y], a);
    out.z_levels.push_back(std::move(z));
  }
  const double as = spec.alpha(spec.s());
  for (double v : out.z_levels.back()) out.Z += std::pow(v, as);
  for (std::size_t x = 0; x < digits.size(); ++x) {
    double log_p = -std::log(out.Z);
    for (int i = 1; i <= spec.s(); ++i) log_p += (spec.alpha(i) - 1.0) * std::log(out.z(i, proj.level(i).from_digit[x]));
    out.marginal.push_back(std::exp(log_p));
  }
  return out;
}

}  // namespace spongedim
