#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zerosum/sequence.hpp"

namespace zerosum {

inline bool is_zero_sum(const Sequence& s) { return s.group().is_zero(s.sum()); }

namespace detail {

// Reachable sums of nonempty subsequences, as a dense table over the group.
// Multiplicities are iterated instance by instance but stop at the fixpoint,
// so huge multiplicities cost at most |G| rounds per distinct element.
inline std::vector<char> reachable_sums(const Sequence& s, const Guards& guards) {
  const GroupSpec& g = s.group();
  require(g.order() <= guards.max_group_order, Errc::size_guard_exceeded,
          "atoms.reachable_sums",
          "group order " + std::to_string(g.order()) + " exceeds guard " +
              std::to_string(guards.max_group_order));
  const long long n = g.order();
  std::vector<char> reach(static_cast<size_t>(n), 0);
  for (const auto& [elem, count] : s.terms()) {
    const long long ei = g.index_of(elem);
    for (long long rep = 0; rep < count; ++rep) {
      // next = reach  union  (reach + elem)  union  {elem}
      std::vector<char> next = reach;
      bool changed = false;
      for (long long i = 0; i < n; ++i) {
        if (!reach[static_cast<size_t>(i)]) continue;
        long long si = g.index_of(g.add(g.element_at(i), elem));
        if (!next[static_cast<size_t>(si)]) {
          next[static_cast<size_t>(si)] = 1;
          changed = true;
        }
      }
      if (!next[static_cast<size_t>(ei)]) {
        next[static_cast<size_t>(ei)] = 1;
        changed = true;
      }
      reach = std::move(next);
      if (!changed) break;  // fixpoint: more copies of elem add nothing
    }
  }
  return reach;
}

inline bool has_nonempty_zero_sum_subsequence(const Sequence& s, const Guards& guards) {
  if (s.empty()) return false;
  std::vector<char> reach = reachable_sums(s, guards);
  return reach[0] != 0;
}

}  // namespace detail

// True iff some subsequence T with 0 < |T| < |S| sums to zero.
// For non-zero-sum S this equals nonempty zero-sum reachability; for zero-sum S
// it suffices to delete one fixed instance (T or its complement avoids it).
inline bool has_proper_zero_sum_subsequence(const Sequence& s, const Guards& guards = Guards{}) {
  if (s.length() <= 1) return false;
  if (!is_zero_sum(s)) return detail::has_nonempty_zero_sum_subsequence(s, guards);
  Sequence reduced = s.remove_one(s.terms().front().first);
  return detail::has_nonempty_zero_sum_subsequence(reduced, guards);
}

// Atom: nonempty zero-sum sequence with no proper nonempty zero-sum
// subsequence (a minimal zero-sum sequence).
inline bool is_atom(const Sequence& s, const Guards& guards = Guards{}) {
  if (s.empty()) return false;
  if (!is_zero_sum(s)) return false;
  return !has_proper_zero_sum_subsequence(s, guards);
}

// 1 + sum (n_i - 1) over the factor list as presented (no renormalization).
inline int davenport_star(const GroupSpec& g) {
  require(!g.is_trivial(), Errc::trivial_group, "davenport_star", "rank-0 group");
  int d = 1;
  for (int f : g.factors()) d += f - 1;
  return d;
}

namespace detail {

// Shared depth-first scaffold over non-decreasing sequences of nonzero
// elements whose proper prefixes stay zero-sum free.  `emit` sees every atom
// of length >= 2 (when emit_atoms) and the walk tracks the deepest zero-sum
// free prefix for the Davenport search.
struct ZeroSumFreeWalk {
  const GroupSpec& g;
  long long max_len;
  long long node_budget;
  long long nodes = 0;
  long long deepest = 0;
  std::vector<GroupElement> deepest_prefix;
  std::vector<GroupElement> prefix;
  // caps[i] limits the multiplicity of element_at(i+1); empty means no cap.
  std::vector<long long> caps;

  template <typename Emit>
  void run(Emit&& emit) {
    const long long n = g.order();
    std::vector<char> reach(static_cast<size_t>(n), 0);
    walk(1, reach, emit);
  }

  template <typename Emit>
  void walk(long long start_index, const std::vector<char>& reach, Emit&& emit) {
    if (static_cast<long long>(prefix.size()) >= max_len) return;
    const long long n = g.order();
    for (long long ei = start_index; ei < n; ++ei) {
      if (!caps.empty()) {
        long long used = 0;
        for (const GroupElement& p : prefix)
          if (g.index_of(p) == ei) ++used;
        if (used >= caps[static_cast<size_t>(ei - 1)]) continue;
      }
      ++nodes;
      require(nodes <= node_budget, Errc::budget_exhausted, "atoms.search",
              "node budget exhausted");
      GroupElement e = g.element_at(ei);
      // sums reachable once e joins the prefix
      std::vector<char> next(reach);
      long long shifted_zero = ei;
      for (long long i = 1; i < n; ++i) {
        if (!reach[static_cast<size_t>(i)]) continue;
        long long si = g.index_of(g.add(g.element_at(i), e));
        next[static_cast<size_t>(si)] = 1;
      }
      next[static_cast<size_t>(shifted_zero)] = 1;
      prefix.push_back(e);
      if (next[0]) {
        // the only zero-sum subsequence a previously zero-sum-free prefix can
        // gain is one ending at e; if the whole prefix sums to zero it is
        // minimal, hence an atom
        GroupElement total = g.zero();
        for (const GroupElement& p : prefix) total = g.add(total, p);
        if (g.is_zero(total)) emit(prefix);
      } else {
        if (static_cast<long long>(prefix.size()) > deepest) {
          deepest = static_cast<long long>(prefix.size());
          deepest_prefix = prefix;
        }
        walk(ei, next, emit);
      }
      prefix.pop_back();
    }
  }
};

}  // namespace detail

// Every atom of length <= max_len, each exactly once, in the deterministic
// order produced by the lexicographic walk.  Includes the zero singleton.
inline std::vector<Sequence> enumerate_atoms(const GroupSpec& g, long long max_len,
                                             const Guards& guards = Guards{}) {
  require(!g.is_trivial(), Errc::trivial_group, "enumerate_atoms", "rank-0 group");
  require(g.order() <= guards.max_group_order, Errc::size_guard_exceeded, "enumerate_atoms",
          "group order exceeds guard");
  std::vector<Sequence> out;
  if (max_len >= 1) {
    out.push_back(Sequence::from_terms(g, {g.zero()}));
  }
  detail::ZeroSumFreeWalk walk{g, max_len, guards.budget_nodes};
  walk.run([&](const std::vector<GroupElement>& atom) {
    out.push_back(Sequence::from_terms(g, atom));
    require(static_cast<long long>(out.size()) <= guards.max_atom_count,
            Errc::size_guard_exceeded, "enumerate_atoms", "atom count exceeds guard");
  });
  return out;
}

struct DavenportReport {
  GroupSpec group;
  int d_star = 0;
  std::optional<int> d_exact;
  long long nodes_visited = 0;
  long long max_zero_sum_free_length = 0;
  std::optional<Sequence> zero_sum_free_witness;
};

// Exact Davenport constant: 1 + (longest zero-sum-free sequence), found by the
// guarded exhaustive walk.  d_exact is only set when the walk completed.
inline DavenportReport davenport_exact(const GroupSpec& g, const Guards& guards = Guards{}) {
  require(!g.is_trivial(), Errc::trivial_group, "davenport_exact", "rank-0 group");
  DavenportReport rep;
  rep.group = g;
  rep.d_star = davenport_star(g);
  require(g.order() <= guards.max_group_order, Errc::size_guard_exceeded, "davenport_exact",
          "group order exceeds guard");
  detail::ZeroSumFreeWalk walk{g, g.order(), guards.budget_nodes};
  walk.run([](const std::vector<GroupElement>&) {});
  rep.nodes_visited = walk.nodes;
  rep.max_zero_sum_free_length = walk.deepest;
  if (!walk.deepest_prefix.empty())
    rep.zero_sum_free_witness = Sequence::from_terms(g, walk.deepest_prefix);
  rep.d_exact = static_cast<int>(walk.deepest + 1);
  return rep;
}

// Pairing witness: unordered inverse pairs {g, -g} with multiplicities that
// together cover the sequence.  One exists iff v_0 = 0, v_g = v_{-g} whenever
// 2g != 0, and v_g is even whenever g != 0 and 2g = 0 (then |S| is even too).
struct Pairing {
  struct Entry {
    GroupElement first;
    GroupElement second;  // first + second = 0
    long long count = 0;
  };
  std::vector<Entry> pairs;

  long long pair_count() const {
    long long n = 0;
    for (const Entry& e : pairs) n += e.count;
    return n;
  }
};

inline std::optional<Pairing> pairing_into_length2_atoms(const Sequence& s) {
  const GroupSpec& g = s.group();
  Pairing out;
  for (const auto& [elem, count] : s.terms()) {
    if (g.is_zero(elem)) return std::nullopt;
    GroupElement inv = g.neg(elem);
    if (inv == elem) {
      if (count % 2 != 0) return std::nullopt;
      out.pairs.push_back({elem, elem, count / 2});
    } else if (elem < inv) {
      if (s.multiplicity(inv) != count) return std::nullopt;
      out.pairs.push_back({elem, inv, count});
    } else {
      if (s.multiplicity(inv) != count) return std::nullopt;
    }
  }
  return out;
}

inline bool is_product_of_length2_atoms(const Sequence& s) {
  return pairing_into_length2_atoms(s).has_value();
}

}  // namespace zerosum
