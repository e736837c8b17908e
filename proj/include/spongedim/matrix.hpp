#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "spongedim/error.hpp"

namespace spongedim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double to_double(const BigInt& x) { return x.convert_to<double>(); }

/// Natural log of a big integer without overflowing a double.
inline double log_big(const BigInt& x) {
  if (x <= 0) return -INFINITY;
  const auto bits = boost::multiprecision::msb(x);
  if (bits < 1000) return std::log(x.convert_to<double>());
  const unsigned shift = static_cast<unsigned>(bits) - 60;
  const BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) fail(ErrorKind::InvalidSubshift, "ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  template <class U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(r, c) = static_cast<U>((*this)(r, c));
    return out;
  }

  std::vector<std::vector<T>> to_rows() const {
    std::vector<std::vector<T>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Strongly connected components of the graph with an edge r->c wherever
/// `has_edge(r, c)`. Components come out in reverse topological order.
inline std::vector<std::vector<int>> strongly_connected_components(
    int n, const std::function<bool(int, int)>& has_edge) {
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> components;
  int counter = 0;

  // Iterative Tarjan; recursion depth would be the state count.
  struct Frame {
    int v;
    int next;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < n) {
        const int w = f.next++;
        if (!has_edge(f.v, w)) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<int> comp;
        int w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  return components;
}

template <class T>
bool is_irreducible(const Matrix<T>& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return false;
  auto comps = strongly_connected_components(n, [&](int r, int c) { return a(r, c) != T{0}; });
  if (comps.size() != 1) return false;
  if (n == 1) return a(0, 0) != T{0};
  return true;
}

struct PerronResult {
  double eigenvalue = 0.0;
  std::vector<double> right;  // normalized to sum 1
  std::vector<double> left;   // normalized so that left . right = 1
  int iterations = 0;
  double bracket_width = 0.0;  // final Collatz-Wielandt bracket
};

struct PerronOptions {
  double tol = 1e-12;
  int max_iterations = 1'000'000;
};

namespace detail {

// Power iteration on B = A + I (primitive whenever A is irreducible). The
// Collatz-Wielandt quotients min/max (Bv)_i / v_i bracket rho(B).
inline std::vector<double> perron_vector(const Matrix<double>& a, const PerronOptions& opt,
                                         double& eigenvalue, int& iterations, double& width) {
  const std::size_t n = a.rows();
  std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t r = 0; r < n; ++r) {
      double acc = v[r];
      for (std::size_t c = 0; c < n; ++c) acc += a(r, c) * v[c];
      w[r] = acc;
    }
    double lo = INFINITY, hi = 0.0, total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double q = w[r] / v[r];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      total += w[r];
    }
    for (std::size_t r = 0; r < n; ++r) v[r] = w[r] / total;
    width = hi - lo;
    if (width < opt.tol * std::max(1.0, hi)) {
      eigenvalue = 0.5 * (lo + hi) - 1.0;
      iterations = it;
      return v;
    }
  }
  fail(ErrorKind::NoConvergence, "power iteration hit the iteration cap");
}

}  // namespace detail

/// Perron root and eigenvectors of an irreducible nonnegative matrix.
inline PerronResult perron(const Matrix<double>& a, const PerronOptions& opt = {}) {
  if (!a.square() || a.rows() == 0) fail(ErrorKind::InvalidSubshift, "perron: matrix must be square and nonempty");
  if (!is_irreducible(a)) fail(ErrorKind::NotCertified, "perron: matrix is reducible");
  PerronResult res;
  double width_r = 0.0, width_l = 0.0, lambda_l = 0.0;
  int it_l = 0;
  res.right = detail::perron_vector(a, opt, res.eigenvalue, res.iterations, width_r);
  res.left = detail::perron_vector(a.transposed(), opt, lambda_l, it_l, width_l);
  res.iterations = std::max(res.iterations, it_l);
  res.bracket_width = std::max(width_r, width_l);
  double dot = 0.0;
  for (std::size_t i = 0; i < res.right.size(); ++i) dot += res.left[i] * res.right[i];
  for (double& x : res.left) x /= dot;
  return res;
}

/// Spectral radius of any nonnegative matrix: max Perron root over its
/// irreducible diagonal blocks (trivial blocks contribute 0).
inline double spectral_radius(const Matrix<double>& a, const PerronOptions& opt = {}) {
  const int n = static_cast<int>(a.rows());
  auto comps = strongly_connected_components(n, [&](int r, int c) { return a(r, c) != 0.0; });
  double best = 0.0;
  for (const auto& comp : comps) {
    if (comp.size() == 1 && a(comp[0], comp[0]) == 0.0) continue;
    Matrix<double> sub(comp.size(), comp.size());
    for (std::size_t r = 0; r < comp.size(); ++r)
      for (std::size_t c = 0; c < comp.size(); ++c) sub(r, c) = a(comp[r], comp[c]);
    best = std::max(best, perron(sub, opt).eigenvalue);
  }
  return best;
}

/// Basis of the right null space of `a` over the rationals.
inline std::vector<std::vector<Rational>> rational_null_space(Matrix<Rational> a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<int> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a(p, c) == 0) ++p;
    if (p == rows) continue;
    for (std::size_t k = 0; k < cols; ++k) std::swap(a(p, k), a(r, k));
    const Rational inv = 1 / a(r, c);
    for (std::size_t k = 0; k < cols; ++k) a(r, k) *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a(i, c) == 0) continue;
      const Rational f = a(i, c);
      for (std::size_t k = 0; k < cols; ++k) a(i, k) -= f * a(r, k);
    }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  std::vector<char> is_pivot(cols, 0);
  for (int c : pivot_col) is_pivot[c] = 1;
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = -a(i, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace spongedim
