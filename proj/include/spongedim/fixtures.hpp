#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "spongedim/lattice.hpp"
#include "spongedim/matrix.hpp"
#include "spongedim/symbolic.hpp"

namespace spongedim::fixtures {

struct Fixture {
  std::string name;
  ExpansionSpec spec;
  SubshiftSpec x;
};

/// Three-scale sponge with 360 cubes at level 4 and a full-dimension
/// marginal that is not uniform.
inline Fixture sponge_d3() {
  std::vector<Digit> digits{{{0, 0, 0}}, {{0, 1, 0}}, {{0, 2, 0}}, {{0, 3, 0}}, {{0, 0, 1}}, {{1, 0, 1}}};
  return {"sponge_d3", build_expansion({64, 16, 8}), SubshiftSpec::full(std::move(digits))};
}

/// Four-scale sponge built from two 8-digit families with different fibers.
/// Coordinates past the fourth are free bits in both families.
inline Fixture sponge_two_families(int d = 4) {
  if (d < 4) fail(ErrorKind::InvalidDigit, "the two-family sponge needs d >= 4");
  std::vector<int> m{256, 16, 4, 2};
  for (int j = 4; j < d; ++j) m.push_back(2);
  std::vector<Digit> digits;
  const int extra = d - 4;
  for (int tail = 0; tail < (1 << extra); ++tail) {
    auto with_tail = [&](std::vector<int> head) {
      for (int j = 0; j < extra; ++j) head.push_back((tail >> j) & 1);
      return Digit{head};
    };
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 2; ++b) digits.push_back(with_tail({a, 0, b, 0}));
    for (int c = 0; c < 8; ++c) digits.push_back(with_tail({0, c, 0, 1}));
  }
  return {"sponge_two_families_d" + std::to_string(d), build_expansion(std::span<const int>(m)), SubshiftSpec::full(std::move(digits))};
}

/// Six digits over m = (4,3,2) where consecutive digits must differ.
inline Fixture sft_distinct_neighbours() {
  std::vector<Digit> digits{{{0, 0, 0}}, {{0, 1, 0}}, {{1, 1, 0}}, {{0, 2, 1}}, {{1, 2, 1}}, {{2, 2, 1}}};
  std::vector<std::vector<int>> rows(6, std::vector<int>(6, 1));
  for (int a = 0; a < 6; ++a) rows[a][a] = 0;
  return {"sft_distinct_neighbours", build_expansion({4, 3, 2}), SubshiftSpec::sft(std::move(digits), Matrix<int>::from_rows(rows))};
}

/// Golden mean shift on two digits of a one-dimensional expansion.
inline Fixture golden_mean() {
  std::vector<Digit> digits{{{0}}, {{1}}};
  return {"golden_mean", build_expansion({2}), SubshiftSpec::sft(std::move(digits), Matrix<int>::from_rows({{1, 1}, {1, 0}}))};
}

/// Every digit of m = (4,2,2): all fibers have equal size.
inline Fixture full_alphabet() {
  std::vector<Digit> digits;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) digits.push_back(Digit{{a, b, c}});
  return {"full_alphabet", build_expansion({4, 2, 2}), SubshiftSpec::full(std::move(digits))};
}

/// Random sponge with d <= max_d, 2 <= m_j <= max_m (sorted, non-increasing)
/// and a random nonempty digit set.
inline Fixture random_sponge(std::mt19937_64& rng, int min_d = 1, int max_d = 4, int max_m = 8) {
  std::uniform_int_distribution<int> pick_d(min_d, max_d), pick_m(2, max_m);
  const int d = pick_d(rng);
  std::vector<int> m(d);
  for (int& v : m) v = pick_m(rng);
  std::sort(m.rbegin(), m.rend());
  std::vector<Digit> all;
  std::vector<int> cur(d, 0);
  while (true) {
    all.push_back(Digit{cur});
    int j = d - 1;
    while (j >= 0 && ++cur[j] == m[j]) cur[j--] = 0;
    if (j < 0) break;
  }
  std::shuffle(all.begin(), all.end(), rng);
  std::uniform_int_distribution<std::size_t> pick_n(1, std::min<std::size_t>(all.size(), 24));
  all.resize(pick_n(rng));
  return {"random", build_expansion(std::span<const int>(m)), SubshiftSpec::full(std::move(all))};
}

/// Random sponge with exactly two distinct scales.
inline Fixture random_two_scale_sponge(std::mt19937_64& rng, int max_d = 4, int max_m = 8) {
  std::uniform_int_distribution<int> pick_d(2, max_d), pick_big(3, max_m);
  const int d = pick_d(rng);
  const int big = pick_big(rng);
  const int small = std::uniform_int_distribution<int>(2, big - 1)(rng);
  const int split = std::uniform_int_distribution<int>(1, d - 1)(rng);
  std::vector<int> m(d, small);
  std::fill(m.begin(), m.begin() + split, big);
  std::vector<Digit> all;
  std::vector<int> cur(d, 0);
  while (true) {
    all.push_back(Digit{cur});
    int j = d - 1;
    while (j >= 0 && ++cur[j] == m[j]) cur[j--] = 0;
    if (j < 0) break;
  }
  std::shuffle(all.begin(), all.end(), rng);
  std::uniform_int_distribution<std::size_t> pick_n(1, std::min<std::size_t>(all.size(), 24));
  all.resize(pick_n(rng));
  return {"random_two_scale", build_expansion(std::span<const int>(m)), SubshiftSpec::full(std::move(all))};
}

}  // namespace spongedim::fixtures
