#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spongedim/error.hpp"
#include "spongedim/matrix.hpp"

namespace spongedim {

/// A digit of the alphabet A = prod_j {0, ..., m_j - 1}, or of one of its
/// coordinate-dropped images A_i.
struct Digit {
  std::vector<int> coords;

  Digit() = default;
  Digit(std::initializer_list<int> c) : coords(c) {}
  explicit Digit(std::vector<int> c) : coords(std::move(c)) {}

  std::size_t size() const { return coords.size(); }
  int operator[](std::size_t j) const { return coords[j]; }

  auto operator<=>(const Digit&) const = default;
  bool operator==(const Digit&) const = default;
};

inline std::string to_string(const Digit& x) {
  std::string s = "(";
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(x[j]);
  }
  return s + ")";
}

/// log(num) / log(den) for integers num, den >= 2; kept symbolic so that
/// floors of multiples can be decided exactly.
struct LogRatio {
  std::int64_t num = 1;
  std::int64_t den = 2;

  double value() const { return num == 1 ? 0.0 : std::log(static_cast<double>(num)) / std::log(static_cast<double>(den)); }

  /// floor(value() * k) for k >= 0, i.e. max{t : den^t <= num^k}.
  std::int64_t floor_times(std::int64_t k) const {
    if (num == 1 || k == 0) return 0;
    if (auto r = rational_exponents()) return (r->first * k) / r->second;
    const double approx = value() * static_cast<double>(k);
    const double nearest = std::round(approx);
    if (std::abs(approx - nearest) > 1e-9 * std::max(1.0, approx)) return static_cast<std::int64_t>(std::floor(approx));
    // Close to an integer: decide den^t <= num^k with exact integers.
    const auto t = static_cast<unsigned>(nearest);
    const BigInt lhs = boost::multiprecision::pow(BigInt(den), t);
    const BigInt rhs = boost::multiprecision::pow(BigInt(num), static_cast<unsigned>(k));
    return lhs <= rhs ? static_cast<std::int64_t>(t) : static_cast<std::int64_t>(t) - 1;
  }

  /// (a, c) with num = b^a and den = b^c for a common base b, when one
  /// exists; the ratio is then exactly a / c.
  std::optional<std::pair<std::int64_t, std::int64_t>> rational_exponents() const {
    for (std::int64_t b = 2; b <= std::min(num, den); ++b) {
      auto exponent = [b](std::int64_t v) -> std::int64_t {
        std::int64_t e = 0;
        while (v % b == 0) {
          v /= b;
          ++e;
        }
        return v == 1 ? e : -1;
      };
      const std::int64_t a = exponent(num), c = exponent(den);
      if (a > 0 && c > 0) {
        const std::int64_t g = std::gcd(a, c);
        return std::pair{a / g, c / g};
      }
    }
    return std::nullopt;
  }
};

/// The diagonal endomorphism diag(m_1, ..., m_d) together with its grouping
/// into s scale levels. Levels are 1-based throughout the public API.
class ExpansionSpec {
 public:
  ExpansionSpec() = default;

  int d() const { return static_cast<int>(m_.size()); }
  int s() const { return static_cast<int>(n_.size()); }
  const std::vector<int>& m() const { return m_; }
  const std::vector<int>& n_values() const { return n_; }

  /// n_i for 1 <= i <= s.
  int n(int i) const { return n_.at(check_level(i) - 1); }
  /// d_i for 0 <= i <= s.
  int d_bound(int i) const { return d_bounds_.at(i); }
  const std::vector<int>& d_bounds() const { return d_bounds_; }

  /// alpha_i = log n_i / log n_{i-1}, with alpha_1 = 0 (n_0 = infinity).
  double alpha(int i) const { return alpha_ratio(i).value(); }
  LogRatio alpha_ratio(int i) const {
    check_level(i);
    if (i == 1) return LogRatio{1, 2};
    return LogRatio{n_[i - 1], n_[i - 2]};
  }

  /// theta_i = log n_s / log n_i for 0 <= i <= s, theta_0 = 0.
  double theta(int i) const { return theta_ratio(i).value(); }
  LogRatio theta_ratio(int i) const {
    if (i < 0 || i > s()) fail(ErrorKind::LevelOutOfRange, "theta index " + std::to_string(i));
    if (i == 0) return LogRatio{1, 2};
    return LogRatio{n_.back(), n_[i - 1]};
  }

  /// Exact floor(theta_i * k).
  std::int64_t theta_floor(int i, std::int64_t k) const {
    if (i == s()) return k;
    return theta_ratio(i).floor_times(k);
  }

  std::vector<double> alphas() const {
    std::vector<double> out;
    for (int i = 1; i <= s(); ++i) out.push_back(alpha(i));
    return out;
  }
  std::vector<double> thetas() const {
    std::vector<double> out;
    for (int i = 0; i <= s(); ++i) out.push_back(theta(i));
    return out;
  }

  /// 1/log n_i - 1/log n_{i-1}, the Ledrappier-Young weight of level i.
  double level_weight(int i) const {
    const double here = 1.0 / std::log(static_cast<double>(n(i)));
    return i == 1 ? here : here - 1.0 / std::log(static_cast<double>(n(i - 1)));
  }

  /// Alphabet size #A.
  std::int64_t alphabet_size() const {
    std::int64_t total = 1;
    for (int v : m_) total *= v;
    return total;
  }

  bool contains(const Digit& x) const {
    if (static_cast<int>(x.size()) != d()) return false;
    for (int j = 0; j < d(); ++j)
      if (x[j] < 0 || x[j] >= m_[j]) return false;
    return true;
  }

  int check_level(int i) const {
    if (i < 1 || i > s()) fail(ErrorKind::LevelOutOfRange, "level " + std::to_string(i) + " outside 1.." + std::to_string(s()));
    return i;
  }

  friend ExpansionSpec build_expansion(std::span<const int> m);

 private:
  std::vector<int> m_;
  std::vector<int> n_;
  std::vector<int> d_bounds_;
};

inline ExpansionSpec build_expansion(std::span<const int> m) {
  if (m.empty()) fail(ErrorKind::TooSmall, "expansion must have at least one entry");
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] < 2) fail(ErrorKind::TooSmall, "entry m_" + std::to_string(j + 1) + " = " + std::to_string(m[j]) + " < 2");
    if (j > 0 && m[j] > m[j - 1])
      fail(ErrorKind::NonMonotone, "entries must be non-increasing (m_" + std::to_string(j) + " < m_" + std::to_string(j + 1) + ")");
  }
  ExpansionSpec spec;
  spec.m_.assign(m.begin(), m.end());
  spec.d_bounds_.push_back(0);
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (j == 0 || m[j] != m[j - 1]) {
      spec.n_.push_back(m[j]);
      if (j > 0) spec.d_bounds_.push_back(static_cast<int>(j));
    }
  }
  spec.d_bounds_.push_back(static_cast<int>(m.size()));
  return spec;
}

inline ExpansionSpec build_expansion(std::initializer_list<int> m) {
  return build_expansion(std::span<const int>(m.begin(), m.size()));
}

/// tau_i: keep the last d - d_{i-1} coordinates of a level-1 digit.
inline Digit tau_digit(const ExpansionSpec& spec, int i, const Digit& x) {
  spec.check_level(i);
  if (!spec.contains(x)) fail(ErrorKind::InvalidDigit, "digit " + to_string(x) + " outside the alphabet");
  const int drop = spec.d_bound(i - 1);
  return Digit(std::vector<int>(x.coords.begin() + drop, x.coords.end()));
}

/// pi_i: map a level-(i-1) digit to level i by dropping d_{i-1} - d_{i-2}
/// leading coordinates. pi_1 is the identity.
inline Digit pi_digit(const ExpansionSpec& spec, int i, const Digit& y) {
  spec.check_level(i);
  if (i == 1) return y;
  const int expected = spec.d() - spec.d_bound(i - 2);
  if (static_cast<int>(y.size()) != expected) fail(ErrorKind::InvalidDigit, "pi_" + std::to_string(i) + " expects a level-" + std::to_string(i - 1) + " digit");
  const int drop = spec.d_bound(i - 1) - spec.d_bound(i - 2);
  return Digit(std::vector<int>(y.coords.begin() + drop, y.coords.end()));
}

/// Index tables for the level alphabets D_i = tau_i(D) of a digit set D.
struct LevelProjection {
  struct Level {
    std::vector<Digit> symbols;      // D_i, sorted
    std::vector<int> from_digit;     // digit index in D -> index in D_i
    std::vector<int> from_previous;  // index in D_{i-1} -> index in D_i (level >= 2)
    std::vector<int> fiber_size;     // #pi_i^{-1}(y) within D_{i-1}, per y in D_i
  };
  std::vector<Level> levels;  // levels[i - 1]

  const Level& level(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
  int s() const { return static_cast<int>(levels.size()); }
};

inline void validate_digits(const ExpansionSpec& spec, std::span<const Digit> digits) {
  if (digits.empty()) fail(ErrorKind::InvalidDigit, "digit set must be nonempty");
  std::vector<Digit> sorted(digits.begin(), digits.end());
  for (const auto& x : sorted)
    if (!spec.contains(x)) fail(ErrorKind::InvalidDigit, "digit " + to_string(x) + " outside the alphabet");
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail(ErrorKind::InvalidDigit, "digits must be distinct");
}

inline LevelProjection project_levels(const ExpansionSpec& spec, std::span<const Digit> digits) {
  validate_digits(spec, digits);
  LevelProjection proj;
  for (int i = 1; i <= spec.s(); ++i) {
    LevelProjection::Level lvl;
    std::map<Digit, int> index;
    std::vector<Digit> images;
    for (const auto& x : digits) images.push_back(tau_digit(spec, i, x));
    for (const auto& y : images) index.emplace(y, 0);
    int next = 0;
    for (auto& [y, idx] : index) {
      idx = next++;
      lvl.symbols.push_back(y);
    }
    for (const auto& y : images) lvl.from_digit.push_back(index.at(y));
    lvl.fiber_size.assign(lvl.symbols.size(), 0);
    if (i == 1) {
      std::fill(lvl.fiber_size.begin(), lvl.fiber_size.end(), 1);
    } else {
      const auto& prev = proj.levels.back();
      for (const auto& y : prev.symbols) {
        const int target = index.at(pi_digit(spec, i, y));
        lvl.from_previous.push_back(target);
        ++lvl.fiber_size[target];
      }
    }
    proj.levels.push_back(std::move(lvl));
  }
  return proj;
}

}  // namespace spongedim
