#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "zerosum/atoms.hpp"

namespace zerosum {

// A factorization is an ordered list of atoms; order never matters
// semantically (factorizations are multisets) but keeping the list makes
// failures attributable by index.
using Factorization = std::vector<Sequence>;

struct LengthSet {
  Sequence source;
  std::set<long long> lengths;

  long long min() const { return lengths.empty() ? 0 : *lengths.begin(); }
  long long max() const { return lengths.empty() ? 0 : *lengths.rbegin(); }
  bool contains(long long v) const { return lengths.count(v) > 0; }
};

// Exact length-set machinery with a memo table shared across queries.  The
// memo maps the canonical sequence form to its full set of lengths; inserts
// are idempotent, so racing recomputation is harmless.
class LengthOracle {
 public:
  explicit LengthOracle(Guards guards = Guards{}) : guards_(guards) {}

  const Guards& guards() const { return guards_; }

  // All atoms dividing a, in canonical enumeration order.
  std::vector<Sequence> atoms_dividing(const Sequence& a) {
    const GroupSpec& g = a.group();
    require(!g.is_trivial(), Errc::trivial_group, "atoms_dividing", "rank-0 group");
    require(g.order() <= guards_.max_group_order, Errc::size_guard_exceeded, "atoms_dividing",
            "group order exceeds guard");
    std::vector<Sequence> out;
    if (a.contains(g.zero())) out.push_back(Sequence::from_terms(g, {g.zero()}));
    detail::ZeroSumFreeWalk walk{g, a.length(), guards_.budget_nodes};
    walk.caps.resize(static_cast<size_t>(g.order() - 1));
    for (long long ei = 1; ei < g.order(); ++ei)
      walk.caps[static_cast<size_t>(ei - 1)] = a.multiplicity(g.element_at(ei));
    walk.run([&](const std::vector<GroupElement>& atom) {
      out.push_back(Sequence::from_terms(g, atom));
    });
    return out;
  }

  // Exact set of factorization lengths of a zero-sum sequence.
  LengthSet set_of_lengths(const Sequence& a) {
    require(a.empty() || is_zero_sum(a), Errc::not_zero_sum, "set_of_lengths",
            "input does not sum to zero");
    require(a.length() <= guards_.max_sequence_length, Errc::size_guard_exceeded,
            "set_of_lengths",
            "sequence length " + std::to_string(a.length()) + " exceeds guard " +
                std::to_string(guards_.max_sequence_length));
    return LengthSet{a, lengths_rec(a)};
  }

  // A concrete factorization of the requested length, assembled greedily:
  // peel off any atom whose quotient still attains length-1 less.
  Factorization factorization_of_length(const Sequence& a, long long len) {
    require(a.empty() || is_zero_sum(a), Errc::not_zero_sum, "factorization_of_length",
            "input does not sum to zero");
    require(a.length() <= guards_.max_sequence_length, Errc::size_guard_exceeded,
            "factorization_of_length", "sequence length exceeds guard");
    Factorization out;
    Sequence rest = a;
    long long remaining = len;
    while (!rest.empty()) {
      bool advanced = false;
      for (const Sequence& u : atoms_dividing(rest)) {
        Sequence quotient = rest.divide(u);
        if (lengths_rec(quotient).count(remaining - 1) > 0) {
          out.push_back(u);
          rest = std::move(quotient);
          --remaining;
          advanced = true;
          break;
        }
      }
      require(advanced, Errc::not_a_factorization, "factorization_of_length",
              "length " + std::to_string(len) + " is not attainable");
    }
    require(remaining == 0, Errc::not_a_factorization, "factorization_of_length",
            "length " + std::to_string(len) + " is not attainable");
    return out;
  }

 private:
  std::set<long long> lengths_rec(const Sequence& a) {
    if (a.empty()) return {0};
    const std::string key = a.key();
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    std::set<long long> out;
    for (const Sequence& u : atoms_dividing(a)) {
      for (long long rest : lengths_rec(a.divide(u))) out.insert(rest + 1);
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      memo_.emplace(key, out);
    }
    return out;
  }

  Guards guards_;
  std::mutex mu_;
  std::unordered_map<std::string, std::set<long long>> memo_;
};

// Automorphisms used to deduplicate atom tuples: coordinate permutations
// between equal factors composed with per-factor unit scalings.  These are a
// subgroup of the full automorphism group; using a subgroup only weakens the
// deduplication, never the correctness.
namespace detail {

struct ElementMap {
  std::vector<int> position;  // new coordinate i reads old coordinate position[i]
  std::vector<int> unit;      // then scales by unit[i] modulo factors[i]

  GroupElement apply(const GroupSpec& g, const GroupElement& x) const {
    std::vector<long long> coords(static_cast<size_t>(g.rank()));
    for (size_t i = 0; i < coords.size(); ++i)
      coords[i] = static_cast<long long>(unit[i]) * x.residues[static_cast<size_t>(position[i])];
    return g.reduce(coords);
  }

  Sequence apply(const GroupSpec& g, const Sequence& s) const {
    std::vector<Sequence::Term> terms;
    terms.reserve(s.terms().size());
    for (const auto& [elem, count] : s.terms()) terms.emplace_back(apply(g, elem), count);
    return Sequence::from_multiplicities(g, terms);
  }
};

inline std::vector<ElementMap> elementary_automorphisms(const GroupSpec& g, long long cap) {
  const int r = g.rank();
  std::vector<int> identity(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) identity[static_cast<size_t>(i)] = i;

  // factor-preserving coordinate permutations
  std::vector<std::vector<int>> perms;
  std::vector<int> p = identity;
  do {
    bool ok = true;
    for (int i = 0; i < r; ++i)
      if (g.factors()[static_cast<size_t>(p[static_cast<size_t>(i)])] !=
          g.factors()[static_cast<size_t>(i)])
        ok = false;
    if (ok) perms.push_back(p);
    if (static_cast<long long>(perms.size()) > cap) break;
  } while (std::next_permutation(p.begin(), p.end()));

  // units per factor
  std::vector<std::vector<int>> units(static_cast<size_t>(r));
  long long unit_combos = 1;
  for (int i = 0; i < r; ++i) {
    int n = g.factors()[static_cast<size_t>(i)];
    for (int u = 1; u < n; ++u)
      if (std::gcd(u, n) == 1) units[static_cast<size_t>(i)].push_back(u);
    if (n == 1) units[static_cast<size_t>(i)].push_back(0);
    unit_combos *= static_cast<long long>(units[static_cast<size_t>(i)].size());
    if (unit_combos > cap) break;
  }

  std::vector<ElementMap> out;
  if (unit_combos > cap || static_cast<long long>(perms.size()) * unit_combos > cap) {
    std::vector<int> ones(static_cast<size_t>(r), 1);
    out.push_back(ElementMap{identity, ones});
    return out;
  }
  std::vector<size_t> pick(static_cast<size_t>(r), 0);
  for (const auto& perm : perms) {
    std::fill(pick.begin(), pick.end(), 0);
    for (;;) {
      std::vector<int> u(static_cast<size_t>(r));
      for (int i = 0; i < r; ++i) u[static_cast<size_t>(i)] = units[static_cast<size_t>(i)][pick[static_cast<size_t>(i)]];
      out.push_back(ElementMap{perm, u});
      int pos = 0;
      while (pos < r && ++pick[static_cast<size_t>(pos)] == units[static_cast<size_t>(pos)].size()) {
        pick[static_cast<size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == r) break;
    }
  }
  return out;
}

}  // namespace detail

struct UnionWitness {
  Sequence product;        // the analyzed product of k atoms
  Factorization base;      // the k atoms
  Factorization extremal;  // refactorization achieving the endpoint
};

struct UnionReport {
  GroupSpec group;
  int k = 0;
  std::set<long long> values;  // the union of all length sets containing k
  long long lo = 0;
  long long hi = 0;
  bool exact = false;            // false when a budget cut the enumeration short
  bool budget_exhausted = false; // endpoints are then lower/upper estimates only
  std::optional<UnionWitness> witness_lo;
  std::optional<UnionWitness> witness_hi;
  long long tuples_total = 0;     // canonical k-tuples of atoms examined
  long long orbits_deduped = 0;   // tuples skipped as automorphic copies
};

// Exact U_k by enumerating unordered k-tuples of atoms (up to the elementary
// automorphism subgroup) and taking the union of their length sets.  Every
// product of k atoms has k among its lengths, so the union over all products
// is exactly the union of all length sets containing k.
inline UnionReport union_k(const GroupSpec& g, int k, const Guards& guards = Guards{}) {
  require(!g.is_trivial(), Errc::trivial_group, "union_k", "rank-0 group");
  require(k >= 1, Errc::precondition_failed, "union_k", "k must be >= 1");
  require(k <= guards.max_union_k, Errc::size_guard_exceeded, "union_k",
          "k " + std::to_string(k) + " exceeds guard " + std::to_string(guards.max_union_k));
  const auto started = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >
           guards.budget_secs;
  };

  UnionReport rep;
  rep.group = g;
  rep.k = k;

  DavenportReport dav = davenport_exact(g, guards);
  std::vector<Sequence> atoms = enumerate_atoms(g, dav.d_exact.value(), guards);
  std::sort(atoms.begin(), atoms.end());
  std::vector<detail::ElementMap> autos = detail::elementary_automorphisms(g, 4096);

  // pass 1: canonical representatives of the k-tuples, in deterministic order
  const int n = static_cast<int>(atoms.size());
  std::vector<std::vector<int>> reps;
  std::unordered_set<std::string> seen;
  std::vector<int> tuple(static_cast<size_t>(k), 0);
  std::vector<std::string> mapped(static_cast<size_t>(k));
  for (;;) {
    std::string canon;
    for (const detail::ElementMap& f : autos) {
      for (int i = 0; i < k; ++i)
        mapped[static_cast<size_t>(i)] = f.apply(g, atoms[static_cast<size_t>(tuple[static_cast<size_t>(i)])]).key();
      std::sort(mapped.begin(), mapped.end());
      std::string candidate;
      for (const std::string& m : mapped) {
        candidate += m;
        candidate += '|';
      }
      if (canon.empty() || candidate < canon) canon = std::move(candidate);
    }
    ++rep.tuples_total;
    if (seen.insert(canon).second) {
      reps.push_back(tuple);
    } else {
      ++rep.orbits_deduped;
    }
    // next non-decreasing tuple
    int pos = k - 1;
    while (pos >= 0 && tuple[static_cast<size_t>(pos)] == n - 1) --pos;
    if (pos < 0) break;
    int v = tuple[static_cast<size_t>(pos)] + 1;
    for (int i = pos; i < k; ++i) tuple[static_cast<size_t>(i)] = v;
  }

  // pass 2: length sets per representative (worker threads share the memo)
  LengthOracle oracle(guards);
  std::vector<std::optional<std::set<long long>>> lengths(reps.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> expired{false};
  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= reps.size()) return;
      if (expired.load()) return;
      if (out_of_time()) {
        expired.store(true);
        return;
      }
      Sequence product(g);
      for (int idx : reps[i]) product = product.concat(atoms[static_cast<size_t>(idx)]);
      lengths[i] = oracle.set_of_lengths(product).lengths;
    }
  };
  int workers = std::max(1, guards.threads);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  // pass 3: deterministic merge in representative order
  std::optional<size_t> best_lo, best_hi;
  for (size_t i = 0; i < reps.size(); ++i) {
    if (!lengths[i].has_value()) continue;
    const std::set<long long>& ls = *lengths[i];
    if (!best_lo || *ls.begin() < *(*lengths[*best_lo]).begin()) best_lo = i;
    if (!best_hi || *ls.rbegin() > *(*lengths[*best_hi]).rbegin()) best_hi = i;
    rep.values.insert(ls.begin(), ls.end());
  }
  rep.budget_exhausted = expired.load();
  rep.exact = !rep.budget_exhausted;
  require(!rep.values.empty(), Errc::budget_exhausted, "union_k",
          "budget exhausted before any tuple was analyzed");
  rep.lo = *rep.values.begin();
  rep.hi = *rep.values.rbegin();

  auto build_witness = [&](size_t i, long long target) {
    UnionWitness w{Sequence(g), {}, {}};
    for (int idx : reps[i]) {
      w.base.push_back(atoms[static_cast<size_t>(idx)]);
      w.product = w.product.concat(atoms[static_cast<size_t>(idx)]);
    }
    w.extremal = oracle.factorization_of_length(w.product, target);
    return w;
  };
  if (best_lo) rep.witness_lo = build_witness(*best_lo, rep.lo);
  if (best_hi) rep.witness_hi = build_witness(*best_hi, rep.hi);
  return rep;
}

// A certified lower bound on rho_k: two checked factorizations of one
// sequence, the short one of length exactly k.  Membership of both lengths in
// L(A) puts |f_long| into U_k, hence rho_k >= |f_long|.
struct RhoBound {
  GroupSpec group;
  long long k = 0;
  long long value = 0;  // rho_k(group) >= value, certified
};

inline RhoBound rho_lower_bound_witness(const GroupSpec& g, long long k, const Sequence& a,
                                        const Factorization& f_short, const Factorization& f_long,
                                        const Guards& guards = Guards{}) {
  require(static_cast<long long>(f_short.size()) == k, Errc::precondition_failed,
          "rho_lower_bound_witness",
          "short factorization has " + std::to_string(f_short.size()) + " factors, expected " +
              std::to_string(k));
  auto check = [&](const Factorization& f, const std::string& which) {
    Sequence prod(g);
    for (size_t i = 0; i < f.size(); ++i) {
      require(f[i].group() == g, Errc::group_mismatch, "rho_lower_bound_witness",
              which + " factor " + std::to_string(i) + " lives over a different group");
      require(is_atom(f[i], guards), Errc::not_a_factorization, "rho_lower_bound_witness",
              which + " factor " + std::to_string(i) + " is not an atom");
      prod = prod.concat(f[i]);
    }
    require(prod == a, Errc::not_a_factorization, "rho_lower_bound_witness",
            which + " factorization does not multiply to the sequence");
  };
  check(f_short, "short");
  check(f_long, "long");
  return RhoBound{g, k, static_cast<long long>(f_long.size())};
}

}  // namespace zerosum
