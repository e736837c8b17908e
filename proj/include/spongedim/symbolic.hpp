#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "spongedim/error.hpp"
#include "spongedim/lattice.hpp"
#include "spongedim/matrix.hpp"

namespace spongedim {

/// A word is a sequence of symbol indices into some alphabet.
using Word = std::vector<int>;

struct EnumerationBudget {
  std::uint64_t max_words = 5'000'000;
};

/// A full shift or a one-step subshift of finite type over an ordered set of
/// distinct digits D. Transition rows index the current digit, columns the
/// next one.
class SubshiftSpec {
 public:
  enum class Kind { Full, Sft };

  static SubshiftSpec full(std::vector<Digit> digits) {
    check_distinct(digits);
    SubshiftSpec x;
    x.kind_ = Kind::Full;
    x.digits_ = std::move(digits);
    x.transition_ = Matrix<int>(x.digits_.size(), x.digits_.size(), 1);
    return x;
  }

  /// Builds an SFT; digits with no successor or no predecessor are pruned
  /// repeatedly and listed in pruned().
  static SubshiftSpec sft(std::vector<Digit> digits, const Matrix<int>& transition) {
    check_distinct(digits);
    if (transition.rows() != digits.size() || transition.cols() != digits.size())
      fail(ErrorKind::InvalidSubshift, "transition matrix must be " + std::to_string(digits.size()) + "x" + std::to_string(digits.size()));
    for (std::size_t r = 0; r < transition.rows(); ++r)
      for (std::size_t c = 0; c < transition.cols(); ++c)
        if (transition(r, c) != 0 && transition(r, c) != 1) fail(ErrorKind::InvalidSubshift, "transition entries must be 0 or 1");

    std::vector<int> alive(digits.size());
    std::iota(alive.begin(), alive.end(), 0);
    std::vector<Digit> pruned;
    for (bool changed = true; changed;) {
      changed = false;
      std::vector<int> keep;
      for (int a : alive) {
        bool out = false, in = false;
        for (int b : alive) {
          out = out || transition(a, b) == 1;
          in = in || transition(b, a) == 1;
        }
        if (out && in) {
          keep.push_back(a);
        } else {
          pruned.push_back(digits[a]);
          changed = true;
        }
      }
      alive = std::move(keep);
    }
    if (alive.empty()) fail(ErrorKind::InvalidSubshift, "every digit was pruned; the SFT is empty");

    SubshiftSpec x;
    x.kind_ = Kind::Sft;
    for (int a : alive) x.digits_.push_back(digits[a]);
    x.transition_ = Matrix<int>(alive.size(), alive.size());
    for (std::size_t r = 0; r < alive.size(); ++r)
      for (std::size_t c = 0; c < alive.size(); ++c) x.transition_(r, c) = transition(alive[r], alive[c]);
    x.pruned_ = std::move(pruned);
    return x;
  }

  Kind kind() const { return kind_; }
  bool is_full() const { return kind_ == Kind::Full; }
  const std::vector<Digit>& digits() const { return digits_; }
  std::size_t size() const { return digits_.size(); }
  const Matrix<int>& transition() const { return transition_; }
  const std::vector<Digit>& pruned() const { return pruned_; }
  bool allows(int a, int b) const { return transition_(a, b) == 1; }

  bool admissible(std::span<const int> word) const {
    for (int a : word)
      if (a < 0 || a >= static_cast<int>(size())) return false;
    for (std::size_t t = 1; t < word.size(); ++t)
      if (!allows(word[t - 1], word[t])) return false;
    return true;
  }

 private:
  static void check_distinct(const std::vector<Digit>& digits) {
    if (digits.empty()) fail(ErrorKind::InvalidSubshift, "digit set must be nonempty");
    std::vector<Digit> sorted = digits;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail(ErrorKind::InvalidSubshift, "digits must be distinct");
  }

  Kind kind_ = Kind::Full;
  std::vector<Digit> digits_;
  Matrix<int> transition_;
  std::vector<Digit> pruned_;
};

/// #L_k(X) by transfer-matrix powering.
inline BigInt count_words(const SubshiftSpec& x, int k) {
  if (k < 1) fail(ErrorKind::WordTooShort, "word length must be positive");
  const std::size_t n = x.size();
  if (x.is_full()) return boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(k));
  std::vector<BigInt> v(n, BigInt(1)), w(n);
  for (int step = 1; step < k; ++step) {
    for (std::size_t b = 0; b < n; ++b) {
      w[b] = 0;
      for (std::size_t a = 0; a < n; ++a)
        if (x.allows(static_cast<int>(a), static_cast<int>(b))) w[b] += v[a];
    }
    std::swap(v, w);
  }
  BigInt total = 0;
  for (const auto& c : v) total += c;
  return total;
}

namespace detail {

inline void check_budget(const BigInt& count, const EnumerationBudget& budget, const std::string& what) {
  if (count > BigInt(budget.max_words))
    fail(ErrorKind::BudgetExceeded, what + ": " + count.str() + " words exceed the enumeration budget of " + std::to_string(budget.max_words));
}

}  // namespace detail

/// L_k(X) in lexicographic order of digit indices.
inline std::vector<Word> enumerate_language(const SubshiftSpec& x, int k, const EnumerationBudget& budget = {}) {
  detail::check_budget(count_words(x, k), budget, "enumerate_language");
  std::vector<Word> out;
  Word word;
  const int n = static_cast<int>(x.size());
  auto extend = [&](auto&& self) -> void {
    if (static_cast<int>(word.size()) == k) {
      out.push_back(word);
      return;
    }
    for (int b = 0; b < n; ++b) {
      if (!word.empty() && !x.allows(word.back(), b)) continue;
      word.push_back(b);
      self(self);
      word.pop_back();
    }
  };
  extend(extend);
  return out;
}

/// Gap p certifying weak specification, or nullopt when the transition
/// graph is reducible (no certificate attempted).
inline std::optional<int> weak_spec_gap(const SubshiftSpec& x) {
  if (x.is_full()) return 0;
  const int n = static_cast<int>(x.size());
  int longest = 0;
  for (int a = 0; a < n; ++a) {
    // Shortest path with at least one edge from a to every b.
    std::vector<int> dist(n, -1);
    std::queue<int> frontier;
    for (int b = 0; b < n; ++b)
      if (x.allows(a, b)) {
        dist[b] = 1;
        frontier.push(b);
      }
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int b = 0; b < n; ++b)
        if (x.allows(u, b) && dist[b] < 0) {
          dist[b] = dist[u] + 1;
          frontier.push(b);
        }
    }
    for (int b = 0; b < n; ++b) {
      if (dist[b] < 0) return std::nullopt;
      longest = std::max(longest, dist[b]);
    }
  }
  return longest - 1;
}

inline int require_weak_spec(const SubshiftSpec& x) {
  auto p = weak_spec_gap(x);
  if (!p) fail(ErrorKind::NotCertified, "weak specification is not certified (reducible transition graph)");
  return *p;
}

/// Deterministic labeled automaton presenting a factor X_i = tau_i(X). Every
/// state accepts; a word is in L(X_i) iff it can be read from `initial`.
struct SoficAutomaton {
  int level = 1;
  std::vector<Digit> labels;                  // D_i, sorted
  std::vector<std::vector<int>> state_digits;  // one representative subset of D per state
  int initial = 0;
  std::vector<std::vector<int>> next;          // next[state][label], -1 when absent

  std::size_t state_count() const { return next.size(); }
  std::size_t label_count() const { return labels.size(); }

  /// Number of labeled edges between each pair of states.
  Matrix<double> adjacency() const {
    Matrix<double> a(state_count(), state_count(), 0.0);
    for (std::size_t q = 0; q < state_count(); ++q)
      for (int t : next[q])
        if (t >= 0) a(q, t) += 1.0;
    return a;
  }

  /// State reached after reading `word` from `from`, or -1.
  int run(std::span<const int> word, int from) const {
    int q = from;
    for (int b : word) {
      if (b < 0 || b >= static_cast<int>(label_count())) return -1;
      q = next[q][b];
      if (q < 0) return -1;
    }
    return q;
  }
  int run(std::span<const int> word) const { return run(word, initial); }
  bool accepts(std::span<const int> word) const { return run(word) >= 0; }
};

/// Subset construction on the label-projected SFT graph, followed by
/// follower-set minimization and pruning of dead ends.
inline SoficAutomaton factor_automaton(const SubshiftSpec& x, const ExpansionSpec& spec, int level) {
  spec.check_level(level);
  const LevelProjection proj = project_levels(spec, x.digits());
  const auto& lvl = proj.level(level);
  const int labels = static_cast<int>(lvl.symbols.size());
  const int n = static_cast<int>(x.size());

  // Subset states keyed by sorted digit lists; the empty key is the universal
  // initial state (nothing read yet).
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> subsets{{}};
  std::vector<std::vector<int>> next;
  ids[{}] = 0;
  for (std::size_t q = 0; q < subsets.size(); ++q) {
    std::vector<int> row(labels, -1);
    for (int b = 0; b < labels; ++b) {
      std::vector<int> target;
      for (int d = 0; d < n; ++d) {
        if (lvl.from_digit[d] != b) continue;
        bool reachable = q == 0;
        for (int a : subsets[q]) reachable = reachable || x.allows(a, d);
        if (reachable) target.push_back(d);
      }
      if (target.empty()) continue;
      auto [it, inserted] = ids.emplace(target, static_cast<int>(subsets.size()));
      if (inserted) subsets.push_back(target);
      row[b] = it->second;
    }
    next.push_back(std::move(row));
  }

  // Drop states without outgoing edges until none remain.
  std::vector<char> alive(subsets.size(), 1);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t q = 0; q < subsets.size(); ++q) {
      if (!alive[q]) continue;
      bool any = false;
      for (int t : next[q]) any = any || (t >= 0 && alive[t]);
      if (!any) {
        alive[q] = 0;
        changed = true;
      }
    }
  }
  if (!alive[0]) fail(ErrorKind::InvalidSubshift, "factor language is empty");
  for (auto& row : next)
    for (int& t : row)
      if (t >= 0 && !alive[t]) t = -1;

  // Moore refinement: states with equal follower sets merge.
  const int total = static_cast<int>(subsets.size());
  std::vector<int> block(total, 0);
  for (std::size_t blocks = 1;;) {
    std::map<std::vector<int>, int> signatures;
    std::vector<int> refined(total, -1);
    for (int q = 0; q < total; ++q) {
      if (!alive[q]) continue;
      std::vector<int> sig{block[q]};
      for (int t : next[q]) sig.push_back(t < 0 ? -1 : block[t]);
      auto [it, _] = signatures.emplace(sig, static_cast<int>(signatures.size()));
      refined[q] = it->second;
    }
    block = std::move(refined);
    if (signatures.size() == blocks) break;
    blocks = signatures.size();
  }

  // Quotient automaton restricted to states reachable from the initial one.
  SoficAutomaton aut;
  aut.level = level;
  aut.labels = lvl.symbols;
  std::map<int, int> renumber;
  std::vector<int> order{block[0]};
  std::map<int, int> representative;
  for (int q = 0; q < total; ++q)
    if (alive[q]) representative.emplace(block[q], q);
  renumber[block[0]] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int rep = representative.at(order[i]);
    for (int t : next[rep]) {
      if (t < 0) continue;
      if (renumber.emplace(block[t], static_cast<int>(order.size())).second) order.push_back(block[t]);
    }
  }
  aut.initial = 0;
  for (int b : order) {
    const int rep = representative.at(b);
    aut.state_digits.push_back(rep == 0 ? [&] {
      std::vector<int> all(n);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }()
                                        : subsets[rep]);
    std::vector<int> row(labels, -1);
    for (int l = 0; l < labels; ++l)
      if (next[rep][l] >= 0) row[l] = renumber.at(block[next[rep][l]]);
    aut.next.push_back(std::move(row));
  }
  return aut;
}

/// #L_k(X_i) read off a deterministic presentation.
inline BigInt count_words(const SoficAutomaton& aut, int k) {
  if (k < 1) fail(ErrorKind::WordTooShort, "word length must be positive");
  std::vector<BigInt> v(aut.state_count(), BigInt(0)), w(aut.state_count());
  v[aut.initial] = 1;
  for (int step = 0; step < k; ++step) {
    std::fill(w.begin(), w.end(), BigInt(0));
    for (std::size_t q = 0; q < aut.state_count(); ++q) {
      if (v[q] == 0) continue;
      for (int t : aut.next[q])
        if (t >= 0) w[t] += v[q];
    }
    std::swap(v, w);
  }
  BigInt total = 0;
  for (const auto& c : v) total += c;
  return total;
}

/// L_k(X_i) in lexicographic order of label indices.
inline std::vector<Word> enumerate_language(const SoficAutomaton& aut, int k, const EnumerationBudget& budget = {}) {
  detail::check_budget(count_words(aut, k), budget, "enumerate_language");
  std::vector<Word> out;
  Word word;
  auto extend = [&](auto&& self, int q) -> void {
    if (static_cast<int>(word.size()) == k) {
      out.push_back(word);
      return;
    }
    for (int b = 0; b < static_cast<int>(aut.label_count()); ++b) {
      const int t = aut.next[q][b];
      if (t < 0) continue;
      word.push_back(b);
      self(self, t);
      word.pop_back();
    }
  };
  extend(extend, aut.initial);
  return out;
}

struct EntropyResult {
  double entropy = 0.0;
  double perron_root = 0.0;
  /// log #L_k / k for k = 1..probe depth.
  std::vector<double> growth;
};

namespace detail {

template <class Counter>
std::vector<double> growth_sequence(const Counter& count, int probe_depth) {
  std::vector<double> out;
  for (int k = 1; k <= probe_depth; ++k) out.push_back(log_big(count(k)) / k);
  return out;
}

}  // namespace detail

/// h(X) = log of the spectral radius of the transition matrix.
inline EntropyResult topological_entropy(const SubshiftSpec& x, double tol = 1e-12, int probe_depth = 12) {
  if (!(tol > 0)) fail(ErrorKind::InvalidSubshift, "tolerance must be positive");
  EntropyResult res;
  res.perron_root = x.is_full() ? static_cast<double>(x.size()) : spectral_radius(x.transition().cast<double>(), {tol, 1'000'000});
  res.entropy = std::log(res.perron_root);
  res.growth = detail::growth_sequence([&](int k) { return count_words(x, k); }, probe_depth);
  return res;
}

inline EntropyResult topological_entropy(const SoficAutomaton& aut, double tol = 1e-12, int probe_depth = 12) {
  if (!(tol > 0)) fail(ErrorKind::InvalidSubshift, "tolerance must be positive");
  EntropyResult res;
  res.perron_root = spectral_radius(aut.adjacency(), {tol, 1'000'000});
  res.entropy = std::log(res.perron_root);
  res.growth = detail::growth_sequence([&](int k) { return count_words(aut, k); }, probe_depth);
  return res;
}

/// #{I in L_k(X) : tau_i(I) = word}, by a forward pass over digits.
template <class Count = double>
Count count_preimages(const SubshiftSpec& x, const LevelProjection& proj, int level, std::span<const int> word) {
  const auto& from = proj.level(level).from_digit;
  const std::size_t n = x.size();
  std::vector<Count> v(n, Count(0)), w(n);
  for (std::size_t t = 0; t < word.size(); ++t) {
    for (std::size_t b = 0; b < n; ++b) {
      if (from[b] != word[t]) {
        w[b] = 0;
        continue;
      }
      if (t == 0) {
        w[b] = 1;
        continue;
      }
      Count acc(0);
      for (std::size_t a = 0; a < n; ++a)
        if (x.allows(static_cast<int>(a), static_cast<int>(b))) acc += v[a];
      w[b] = acc;
    }
    std::swap(v, w);
  }
  Count total(0);
  for (const auto& c : v) total += c;
  return total;
}

}  // namespace spongedim
