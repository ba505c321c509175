#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zerosum/atoms.hpp"
#include "zerosum/certificates.hpp"
#include "zerosum/construct.hpp"
#include "zerosum/group.hpp"
#include "zerosum/lengths.hpp"
#include "zerosum/sequence.hpp"

// The acceptance suite: eight checks tying the library to independent
// brute-force oracles and to the explicitly constructed witnesses.  Shared by
// the acceptance binary and the CLI `report` command so the table regenerates
// without manual steps.  Every expected value is either produced by an oracle
// in the same run or pinned here as a plain integer with the oracle that
// froze it named in the check's detail string.

namespace zerosum {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace report_detail {

// Failure-accumulating check helper: every failed condition is recorded, the
// criterion fails if any check failed, and the detail string says why.
struct Checker {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      append("FAIL: " + what);
    }
  }
  void note(const std::string& what) { append(what); }
  void append(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

inline std::string group_str(const GroupSpec& g) {
  std::string s = "[";
  for (size_t i = 0; i < g.factors().size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(g.factors()[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// Independent naive oracles for the randomized equivalence suites.  These are
// deliberately a third implementation style (expanded bitmask enumeration),
// distinct from both the library's dynamic programs and the unit-test
// oracles' multiplicity-space recursion.
// ---------------------------------------------------------------------------

// Element indices plus per-mask subset sums over the expanded term list.
struct MaskTables {
  int n = 0;                       // expanded length (must be <= 20)
  std::vector<long long> sums;     // sums[mask] = index of the subset sum
  std::vector<char> is_zero;       // is_zero[mask]

  MaskTables(const GroupSpec& g, const Sequence& s) {
    std::vector<long long> idx;
    for (const auto& [e, mult] : s.terms())
      for (long long i = 0; i < mult; ++i) idx.push_back(g.index_of(e));
    n = static_cast<int>(idx.size());
    const long long ord = g.order();
    std::vector<long long> add(static_cast<size_t>(ord * ord));
    for (long long a = 0; a < ord; ++a)
      for (long long b = 0; b < ord; ++b)
        add[static_cast<size_t>(a * ord + b)] =
            g.index_of(g.add(g.element_at(a), g.element_at(b)));
    const long long zero = g.index_of(g.zero());
    sums.assign(1u << n, zero);
    is_zero.assign(1u << n, 0);
    is_zero[0] = 1;
    for (std::uint32_t m = 1; m < (1u << n); ++m) {
      std::uint32_t low = m & (m - 1);
      int b = 0;
      while (!((m >> b) & 1u)) ++b;
      sums[m] = add[static_cast<size_t>(sums[low] * ord + idx[static_cast<size_t>(b)])];
      is_zero[m] = sums[m] == zero ? 1 : 0;
    }
  }
};

// Minimality by subset enumeration: nonempty, zero-sum, and no proper
// nonempty subset of the expanded list sums to zero.
inline bool subset_is_atom(const Sequence& s) {
  if (s.empty()) return false;
  MaskTables t(s.group(), s);
  const std::uint32_t full = (1u << t.n) - 1;
  if (!t.is_zero[full]) return false;
  for (std::uint32_t m = 1; m < full; ++m)
    if (t.is_zero[m]) return false;
  return true;
}

// Set of factorization lengths by subset enumeration: mark the minimal
// zero-sum masks, then recurse over the submasks covering the lowest element,
// so each factorization (a set partition into atoms) is counted exactly once.
inline std::set<long long> subset_set_of_lengths(const Sequence& s) {
  if (s.empty()) return {0};
  if (!is_zero_sum(s)) return {};
  MaskTables t(s.group(), s);
  const std::uint32_t full = (1u << t.n) - 1;

  // contains_zs[m]: m has a nonempty zero-sum submask (check single-bit
  // removals; any proper submask survives the removal of some bit)
  std::vector<char> contains_zs(full + 1, 0), minimal(full + 1, 0);
  for (std::uint32_t m = 1; m <= full; ++m) {
    if (t.is_zero[m]) {
      contains_zs[m] = 1;
      continue;
    }
    for (int b = 0; b < t.n && !contains_zs[m]; ++b)
      if ((m >> b) & 1u) contains_zs[m] |= contains_zs[m & ~(1u << b)];
  }
  for (std::uint32_t m = 1; m <= full; ++m) {
    if (!t.is_zero[m]) continue;
    bool proper = false;
    for (int b = 0; b < t.n && !proper; ++b)
      if ((m >> b) & 1u) proper = contains_zs[m & ~(1u << b)] != 0;
    minimal[m] = proper ? 0 : 1;
  }

  std::vector<std::set<long long>> memo(full + 1);
  std::vector<char> done(full + 1, 0);
  done[0] = 1;
  memo[0] = {0};
  auto rec = [&](auto&& self, std::uint32_t m) -> const std::set<long long>& {
    if (done[m]) return memo[m];
    done[m] = 1;
    std::uint32_t low = m & (~m + 1);
    std::uint32_t rest = m & ~low;
    // submasks of m containing `low`
    for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
      std::uint32_t atom = sub | low;
      if (minimal[atom])
        for (long long v : self(self, m & ~atom)) memo[m].insert(v + 1);
      if (sub == 0) break;
    }
    return memo[m];
  };
  return rec(rec, full);
}

// Pairability by factorization search: recursively match the first element
// with each possible inverse partner.
inline bool search_pairs(const GroupSpec& g, std::vector<GroupElement> elems) {
  if (elems.empty()) return true;
  if (elems.size() % 2 != 0) return false;
  GroupElement e = elems.front();
  if (g.is_zero(e)) return false;
  GroupElement want = g.neg(e);
  for (size_t j = 1; j < elems.size(); ++j) {
    if (elems[j] != want) continue;
    std::vector<GroupElement> rest;
    for (size_t i = 1; i < elems.size(); ++i)
      if (i != j) rest.push_back(elems[i]);
    if (search_pairs(g, std::move(rest))) return true;
    break;  // partners of equal value are interchangeable; one try suffices
  }
  return false;
}

inline bool subset_is_pair_product(const Sequence& s) {
  std::vector<GroupElement> elems;
  for (const auto& [e, mult] : s.terms())
    for (long long i = 0; i < mult; ++i) elems.push_back(e);
  return search_pairs(s.group(), std::move(elems));
}

// Deterministic random data ---------------------------------------------------

inline GroupSpec random_small_group(std::mt19937& rng) {
  static const std::vector<std::vector<int>> pool = {
      {2},    {3},    {4},    {5},    {6},    {7},    {8},       {9},
      {12},   {16},   {2, 2}, {2, 4}, {2, 6}, {2, 8}, {3, 3},    {4, 4},
      {2, 2, 2}, {2, 2, 4}, {15}, {2, 2, 2, 2}};
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  return GroupSpec::make(pool[pick(rng)]);
}

inline Sequence random_sequence(std::mt19937& rng, const GroupSpec& g, long long min_len,
                                long long max_len) {
  std::uniform_int_distribution<long long> len_dist(min_len, max_len);
  long long len = len_dist(rng);
  std::uniform_int_distribution<long long> elem_dist(0, g.order() - 1);
  std::vector<GroupElement> elems;
  for (long long i = 0; i < len; ++i) elems.push_back(g.element_at(elem_dist(rng)));
  return Sequence::from_terms(g, elems);
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

inline CriterionResult criterion_davenport(const Guards& guards) {
  Checker c;
  const std::vector<std::pair<std::vector<int>, int>> table = {
      {{2, 2}, 3}, {{3, 3}, 5}, {{2, 4}, 5}, {{2, 2, 2}, 4}, {{3, 3, 3}, 7}, {{5}, 5}, {{7}, 7}};
  for (const auto& [factors, expected] : table) {
    GroupSpec g = GroupSpec::make(factors);
    int ds = davenport_star(g);
    DavenportReport r = davenport_exact(g, guards);
    bool row = ds == expected && r.d_exact.has_value() && *r.d_exact == expected;
    c.check(row, group_str(g) + " expected " + std::to_string(expected) + ", got D* = " +
                     std::to_string(ds) + ", D = " +
                     (r.d_exact ? std::to_string(*r.d_exact) : std::string("none")));
    if (row) c.note(group_str(g) + " D = D* = " + std::to_string(expected));
  }
  return {1, "Davenport constants: exhaustive oracle matches the invariant-factor formula",
          c.ok, c.detail, 0.0};
}

inline CriterionResult criterion_rho_even(const Guards& guards) {
  Checker c;
  for (const std::vector<int>& factors :
       std::vector<std::vector<int>>{{2, 2}, {3, 3}, {2, 4}, {5}}) {
    GroupSpec g = GroupSpec::make(factors);
    DavenportReport dav = davenport_exact(g, guards);
    UnionReport u = union_k(g, 2, guards);
    bool row = u.exact && dav.d_exact.has_value() && u.hi == *dav.d_exact;
    c.check(row, group_str(g) + " rho_2 = " + std::to_string(u.hi) + " but D = " +
                     (dav.d_exact ? std::to_string(*dav.d_exact) : std::string("none")) +
                     (u.exact ? "" : " (inexact)"));
    if (row) c.note(group_str(g) + " rho_2 = D = " + std::to_string(u.hi));
  }
  return {2, "Even-index maxima: rho_2 equals the Davenport constant by exhaustive union", c.ok,
          c.detail, 0.0};
}

inline CriterionResult criterion_rho3_cyclic(const Guards& guards) {
  Checker c;
  const std::vector<std::pair<int, long long>> table = {{5, 6}, {7, 8}};
  for (const auto& [n, expected] : table) {
    GroupSpec g = GroupSpec::make({n});
    UnionReport u = union_k(g, 3, guards);
    bool row = u.exact && u.hi == expected;
    c.check(row, group_str(g) + " rho_3 = " + std::to_string(u.hi) + ", expected " +
                     std::to_string(expected));
    if (row) c.note(group_str(g) + " rho_3 = D + 1 = " + std::to_string(u.hi));
  }
  return {3, "Cyclic odd-index identity: rho_3 = D + 1 by exhaustive union", c.ok, c.detail, 0.0};
}

inline CriterionResult criterion_rho3_witnesses(const Guards& guards) {
  Checker c;
  const std::vector<std::pair<std::vector<int>, long long>> table = {
      {{2, 2}, 4}, {{3, 3}, 7}, {{2, 4}, 7}};
  for (const auto& [factors, expected] : table) {
    GroupSpec g = GroupSpec::make(factors);
    UnionReport u = union_k(g, 3, guards);
    c.check(u.exact && u.hi == expected, group_str(g) + " oracle rho_3 = " +
                                             std::to_string(u.hi) + ", expected " +
                                             std::to_string(expected));
    std::optional<RhoWitness> w = search_rho3_witness(g, guards);
    c.check(w.has_value(), group_str(g) + " no constructed witness found");
    if (w.has_value()) {
      c.check(w->bound.value == u.hi,
              group_str(g) + " witness reaches " + std::to_string(w->bound.value) +
                  " but the oracle maximum is " + std::to_string(u.hi));
    }
    DavenportReport dav = davenport_exact(g, guards);
    long long d = dav.d_exact.value_or(-1);
    c.check(d + 1 <= u.hi && u.hi <= d + d / 2,
            group_str(g) + " rho_3 = " + std::to_string(u.hi) +
                " outside the sandwich [D+1, D+D/2] with D = " + std::to_string(d));
    c.note(group_str(g) + " rho_3 = " + std::to_string(u.hi) + " (witness " +
           (w && w->certificate ? "certificate" : "inverse pairs") + ", sandwich [" +
           std::to_string(d + 1) + "," + std::to_string(d + d / 2) + "])");
  }
  return {4, "k* = 1 groups: constructed witnesses meet the exact rho_3 maximum", c.ok, c.detail,
          0.0};
}

inline void collect_constructions(const Guards& guards,
                                  std::vector<std::pair<std::string, ConstructionResult>>& out) {
  for (const auto& [n, m] : std::vector<std::pair<int, int>>{{3, 1}, {2, 2}, {3, 2}, {2, 3}, {5, 1}})
    out.push_back({"rank2(" + std::to_string(n) + "," + std::to_string(m) + ")",
                   rank2_nice(n, m, guards)});
  for (const auto& t : std::vector<std::array<int, 3>>{{2, 2, 2}, {2, 2, 4}, {3, 3, 3}, {2, 4, 4}})
    out.push_back({"rank3(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
                       std::to_string(t[2]) + ")",
                   rank3_nice(t[0], t[1], t[2], guards)});
  ConstructionResult r33 = build_nice(GroupSpec::make({3, 3}), guards);
  out.push_back({"compose(odd,odd)", compose_nice(r33, r33, guards)});
  ConstructionResult c222 = rank3_nice(2, 2, 2, guards);
  ConstructionResult klein = build_nice(GroupSpec::make({2, 2}), guards);
  out.push_back({"compose(even,even)", compose_nice(c222, c222, guards)});
  out.push_back({"compose(even,odd)", compose_nice(c222, klein, guards)});
  out.push_back({"compose(odd,even)", compose_nice(klein, c222, guards)});
  for (int d = 0; d <= 3; ++d)
    out.push_back({"pad(+" + std::to_string(d) + ")", pad_nice(klein, 1 + d, guards)});
}

inline CriterionResult criterion_constructions(
    const Guards& guards, const std::vector<std::pair<std::string, ConstructionResult>>& built) {
  Checker c;
  for (const auto& [label, r] : built) {
    VerificationReport rep = verify_nice(r.sequence, r.certificate, guards);
    c.check(rep.valid, label + " certificate fails: " + rep.first_failure());
    for (const TraceEntry& e : r.trace)
      c.check(e.passed, label + " stage check failed: " + e.stage + " (" + e.detail + ")");
    int ds = davenport_star(r.group);
    bool atoms_ok = true;
    for (const Sequence& a : r.certificate.atoms)
      if (a.length() != ds || !is_atom(a, guards)) atoms_ok = false;
    c.check(atoms_ok, label + " has an emitted atom that is not a length-D* atom");
    if (c.ok)
      c.note(label + " k* = " + std::to_string(r.k_star) + ", " +
             std::to_string(r.certificate.atoms.size()) + " atoms");
  }
  return {5, "Construction suite: assemblies, compositions and padding verify end to end", c.ok,
          c.detail, 0.0};
}

inline CriterionResult criterion_bound_arithmetic(
    const Guards& guards, const std::vector<std::pair<std::string, ConstructionResult>>& built) {
  Checker c;
  for (const auto& [label, r] : built) {
    auto [f_short, f_long] = lengths_from_nice(r.sequence, r.certificate, guards);
    int ds = davenport_star(r.group);
    long long expect_short = 2LL * r.k_star + 1;
    long long expect_long = static_cast<long long>(r.k_star) * ds + ds / 2;
    bool row = static_cast<long long>(f_short.size()) == expect_short &&
               static_cast<long long>(f_long.size()) == expect_long &&
               product_of(r.group, f_short) == r.sequence &&
               product_of(r.group, f_long) == r.sequence && r.bound.value == expect_long;
    c.check(row, label + " lengths (" + std::to_string(f_short.size()) + "," +
                     std::to_string(f_long.size()) + ") != expected (" +
                     std::to_string(expect_short) + "," + std::to_string(expect_long) +
                     ") or products differ");
    if (row) c.note(label + " {" + std::to_string(expect_short) + "," +
                    std::to_string(expect_long) + "} in L(A)");
  }
  return {6, "Bound arithmetic: witness factorization lengths are exactly 2k+1 and kD* + D*/2",
          c.ok, c.detail, 0.0};
}

inline CriterionResult criterion_randomized(const Guards& guards) {
  Checker c;
  const int cases = 10000;

  {
    std::mt19937 rng(20260801);
    int mismatches = 0, atoms_seen = 0;
    for (int i = 0; i < cases; ++i) {
      GroupSpec g = random_small_group(rng);
      Sequence s = random_sequence(rng, g, 1, 12);
      if (i % 2 == 0) {
        // bias half the cases toward zero-sum inputs
        if (s.length() >= 12) s = random_sequence(rng, g, 1, 11);
        s = s.add_one(g.neg(s.sum()));
      }
      bool lib = is_atom(s, guards);
      bool naive = subset_is_atom(s);
      if (lib != naive) ++mismatches;
      if (lib) ++atoms_seen;
    }
    c.check(mismatches == 0,
            "minimality: " + std::to_string(mismatches) + " DP/subset-enumeration mismatches");
    c.note("minimality: " + std::to_string(cases) + " cases, " + std::to_string(atoms_seen) +
           " atoms");
  }
  {
    std::mt19937 rng(20260802);
    LengthOracle oracle(guards);
    int mismatches = 0;
    for (int i = 0; i < cases; ++i) {
      GroupSpec g = random_small_group(rng);
      Sequence s = random_sequence(rng, g, 0, 11);
      s = s.add_one(g.neg(s.sum()));
      std::set<long long> lib = oracle.set_of_lengths(s).lengths;
      std::set<long long> naive = subset_set_of_lengths(s);
      if (lib != naive) ++mismatches;
    }
    c.check(mismatches == 0,
            "lengths: " + std::to_string(mismatches) + " memoized/naive mismatches");
    c.note("lengths: " + std::to_string(cases) + " zero-sum cases");
  }
  {
    std::mt19937 rng(20260803);
    int mismatches = 0, pairables = 0;
    for (int i = 0; i < cases; ++i) {
      GroupSpec g = random_small_group(rng);
      Sequence s(g);
      if (i % 2 == 0) {
        s = random_sequence(rng, g, 0, 12);
      } else {
        // bias toward genuinely pairable sequences
        Sequence base = random_sequence(rng, g, 0, 6);
        s = base;
        for (const auto& [e, mult] : base.terms())
          for (long long t = 0; t < mult; ++t) s = s.add_one(g.neg(e));
      }
      bool lib = is_product_of_length2_atoms(s);
      bool naive = subset_is_pair_product(s);
      if (lib != naive) ++mismatches;
      if (lib) ++pairables;
    }
    c.check(mismatches == 0,
            "pairs: " + std::to_string(mismatches) + " closed-form/search mismatches");
    c.note("pairs: " + std::to_string(cases) + " cases, " + std::to_string(pairables) +
           " pairable");
  }
  return {7, "Randomized oracle equivalence: 3 suites x 10^4 cases, fixed seeds", c.ok, c.detail,
          0.0};
}

inline CriterionResult criterion_honest_flagging(const Guards& guards) {
  Checker c;
  // An exhausted Davenport search must downgrade to the formula value and say
  // so, while still emitting a fully verified (weaker) bound.
  Guards tight = guards;
  tight.budget_nodes = 50;
  TheoremBound t = theorem_bound(GroupSpec::make({2, 2, 6}), 12, tight);
  c.check(!t.davenport_established, "exhausted search still claims an established constant");
  c.check(t.davenport == t.d_star, "fallback bound is not the formula value");
  bool flagged = false;
  for (const TraceEntry& e : t.trace)
    if (e.detail.find("not established") != std::string::npos) flagged = true;
  c.check(flagged, "downgrade is not flagged in the trace");
  c.check(t.value == 12LL * t.d_star + t.d_star / 2,
          "flagged bound value is not the certified fallback");
  c.note("[2,2,6] k=12 under a tiny search budget: bound " + std::to_string(t.value) +
         " flagged as formula-only");

  // Out-of-guard requests must refuse, never report a made-up number.
  bool guarded = false;
  try {
    union_k(GroupSpec::make({3, 3}), 4, guards);
  } catch (const Error& e) {
    guarded = e.code() == Errc::size_guard_exceeded;
  }
  c.check(guarded, "union beyond the arity guard did not refuse");
  bool timed_out = false;
  try {
    Guards zero = guards;
    zero.budget_secs = 0.0;
    union_k(GroupSpec::make({3, 3}), 2, zero);
  } catch (const Error& e) {
    timed_out = e.code() == Errc::budget_exhausted;
  }
  c.check(timed_out, "zero time budget did not surface as budget exhaustion");
  c.note("guard and budget violations refuse with typed errors");
  return {8, "Out-of-scope instances are flagged or refused, never fabricated", c.ok, c.detail,
          0.0};
}

}  // namespace report_detail

// Runs all eight acceptance criteria and returns one row per criterion.  A
// thrown error inside a criterion marks it failed with the error text; later
// criteria still run.
inline std::vector<CriterionResult> run_acceptance(const Guards& guards = Guards{}) {
  using namespace report_detail;
  std::vector<CriterionResult> out;
  std::vector<std::pair<std::string, ConstructionResult>> built;

  std::vector<std::pair<int, std::function<CriterionResult()>>> steps = {
      {1, [&] { return criterion_davenport(guards); }},
      {2, [&] { return criterion_rho_even(guards); }},
      {3, [&] { return criterion_rho3_cyclic(guards); }},
      {4, [&] { return criterion_rho3_witnesses(guards); }},
      {5,
       [&] {
         collect_constructions(guards, built);
         return criterion_constructions(guards, built);
       }},
      {6, [&] { return criterion_bound_arithmetic(guards, built); }},
      {7, [&] { return criterion_randomized(guards); }},
      {8, [&] { return criterion_honest_flagging(guards); }},
  };
  static const char* names[] = {
      "",
      "Davenport constants: exhaustive oracle matches the invariant-factor formula",
      "Even-index maxima: rho_2 equals the Davenport constant by exhaustive union",
      "Cyclic odd-index identity: rho_3 = D + 1 by exhaustive union",
      "k* = 1 groups: constructed witnesses meet the exact rho_3 maximum",
      "Construction suite: assemblies, compositions and padding verify end to end",
      "Bound arithmetic: witness factorization lengths are exactly 2k+1 and kD* + D*/2",
      "Randomized oracle equivalence: 3 suites x 10^4 cases, fixed seeds",
      "Out-of-scope instances are flagged or refused, never fabricated",
  };
  for (auto& [id, step] : steps) {
    auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = step();
    } catch (const Error& e) {
      r = {id, names[id], false, std::string("error: ") + e.what(), 0.0};
    } catch (const std::exception& e) {
      r = {id, names[id], false, std::string("unexpected exception: ") + e.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace zerosum
