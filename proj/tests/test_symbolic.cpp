#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spongedim/fixtures.hpp"
#include "spongedim/symbolic.hpp"

using namespace spongedim;

namespace {

std::vector<Digit> line_digits(int n) {
  std::vector<Digit> out;
  for (int a = 0; a < n; ++a) out.push_back(Digit{a});
  return out;
}

}  // namespace

TEST(Subshift, GoldenMeanCountsAreFibonacci) {
  const auto f = fixtures::golden_mean();
  BigInt a = 2, b = 3;
  EXPECT_EQ(count_words(f.x, 1), 2);
  EXPECT_EQ(count_words(f.x, 2), 3);
  for (int k = 3; k <= 40; ++k) {
    const BigInt c = a + b;
    EXPECT_EQ(count_words(f.x, k), c) << k;
    a = b;
    b = c;
  }
}

TEST(Subshift, DistinctNeighbourCounts) {
  const auto f = fixtures::sft_distinct_neighbours();
  EXPECT_EQ(count_words(f.x, 2), 30);
  EXPECT_EQ(count_words(f.x, 3), 150);
  EXPECT_EQ(count_words(f.x, 4), 750);
  EXPECT_EQ(enumerate_language(f.x, 3).size(), 150u);
}

TEST(Subshift, EnumerationIsLexicographicAndAdmissible) {
  const auto f = fixtures::golden_mean();
  const auto words = enumerate_language(f.x, 6);
  EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
  for (const auto& w : words) EXPECT_TRUE(f.x.admissible(w));
  EXPECT_EQ(BigInt(words.size()), count_words(f.x, 6));
}

TEST(Subshift, BudgetAndShortWords) {
  const auto x = SubshiftSpec::full(line_digits(10));
  try {
    enumerate_language(x, 8, EnumerationBudget{1000});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
  try {
    count_words(x, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WordTooShort);
  }
}

TEST(Subshift, PrunesDigitsWithoutSuccessorOrPredecessor) {
  // 2 has no successor, 3 has no predecessor.
  const auto x = SubshiftSpec::sft(line_digits(4), Matrix<int>::from_rows({{1, 1, 1, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}}));
  EXPECT_EQ(x.size(), 2u);
  EXPECT_EQ(x.pruned().size(), 2u);
  EXPECT_EQ(x.digits(), line_digits(2));
  try {
    SubshiftSpec::sft(line_digits(2), Matrix<int>::from_rows({{0, 1}, {0, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidSubshift);
  }
  EXPECT_THROW(SubshiftSpec::sft(line_digits(2), Matrix<int>::from_rows({{2, 1}, {1, 0}})), Error);
}

TEST(Subshift, WeakSpecificationGap) {
  EXPECT_EQ(weak_spec_gap(fixtures::sponge_d3().x), 0);
  EXPECT_EQ(weak_spec_gap(fixtures::golden_mean().x), 1);
  EXPECT_EQ(weak_spec_gap(fixtures::sft_distinct_neighbours().x), 1);
  // A 3-cycle needs a connecting word of length 2.
  const auto cycle = SubshiftSpec::sft(line_digits(3), Matrix<int>::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  EXPECT_EQ(weak_spec_gap(cycle), 2);
  const auto split = SubshiftSpec::sft(line_digits(2), Matrix<int>::from_rows({{1, 0}, {0, 1}}));
  EXPECT_FALSE(weak_spec_gap(split));
  try {
    require_weak_spec(split);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCertified);
  }
}

TEST(Entropy, GoldenMeanAndFullShift) {
  EXPECT_NEAR(topological_entropy(fixtures::golden_mean().x).entropy, std::log((1 + std::sqrt(5.0)) / 2), 1e-12);
  EXPECT_NEAR(topological_entropy(fixtures::sponge_d3().x).entropy, std::log(6.0), 1e-15);
  EXPECT_NEAR(topological_entropy(fixtures::sft_distinct_neighbours().x).entropy, std::log(5.0), 1e-12);
}

TEST(Factor, DistinctNeighbourLevelTwo) {
  const auto f = fixtures::sft_distinct_neighbours();
  const auto aut = factor_automaton(f.x, f.spec, 2);
  EXPECT_EQ(aut.labels, (std::vector<Digit>{{0, 0}, {1, 0}, {2, 1}}));
  // Only (0,0)(0,0) is forbidden among the nine pairs.
  EXPECT_EQ(count_words(aut, 2), 8);
  EXPECT_FALSE(aut.accepts(std::vector<int>{0, 0}));
  EXPECT_TRUE(aut.accepts(std::vector<int>{1, 1}));
  EXPECT_NEAR(topological_entropy(aut).entropy, std::log(1 + std::sqrt(3.0)), 1e-12);
}

TEST(Factor, LanguageMatchesProjectedWords) {
  for (const auto& f : {fixtures::sft_distinct_neighbours(), fixtures::sponge_d3()}) {
    const auto proj = project_levels(f.spec, f.x.digits());
    for (int level = 2; level <= f.spec.s(); ++level) {
      const auto aut = factor_automaton(f.x, f.spec, level);
      for (int k = 1; k <= 4; ++k) {
        std::set<Word> images;
        for (const auto& w : enumerate_language(f.x, k)) {
          Word img;
          for (int a : w) img.push_back(proj.level(level).from_digit[a]);
          images.insert(img);
        }
        const auto words = enumerate_language(aut, k);
        EXPECT_EQ(std::set<Word>(words.begin(), words.end()), images) << f.name << " level " << level << " k " << k;
        EXPECT_EQ(count_words(aut, k), BigInt(images.size()));
      }
    }
  }
}

TEST(Factor, PreimageCountsMatchEnumeration) {
  const auto f = fixtures::sft_distinct_neighbours();
  const auto proj = project_levels(f.spec, f.x.digits());
  for (int level = 2; level <= 3; ++level) {
    std::map<Word, int> counts;
    for (const auto& w : enumerate_language(f.x, 4)) {
      Word img;
      for (int a : w) img.push_back(proj.level(level).from_digit[a]);
      ++counts[img];
    }
    for (const auto& [img, c] : counts) {
      EXPECT_EQ(count_preimages<double>(f.x, proj, level, img), c);
      EXPECT_EQ(count_preimages<BigInt>(f.x, proj, level, img), c);
    }
  }
}
