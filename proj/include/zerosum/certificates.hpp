#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zerosum/lengths.hpp"

namespace zerosum {

// Certificate that a sequence is a product of 2k extremal atoms whose chosen
// elements pair off into inverse pairs.  All indices are 0-based.
struct PairNiceCertificate {
  GroupSpec group;
  std::vector<Sequence> atoms;                      // 2k atoms, each of length D*
  std::vector<GroupElement> chosen;                 // chosen[i] in supp(atoms[i])
  std::vector<std::pair<int, int>> chosen_pairing;  // matching on [0, 2k); pairs sum to 0

  int k() const { return static_cast<int>(atoms.size()) / 2; }

  Sequence product() const {
    Sequence a(group);
    for (const Sequence& u : atoms) a = a.concat(u);
    return a;
  }
};

// Certificate that a sequence of 2k+1 extremal atoms refactors into length-2
// atoms plus (odd branch) one length-3 atom.  The branch is forced by the
// parity of D*: odd D* leaves an odd element count that the length-3 atom
// absorbs; even D* instead borrows one extra element from inside an atom.
struct NiceCertificate {
  enum class Branch { odd, even };

  GroupSpec group;
  std::vector<Sequence> atoms;       // 2k+1 atoms, each of length D*
  std::vector<GroupElement> chosen;  // chosen[i] in supp(atoms[i])
  Branch branch = Branch::odd;

  // odd branch: chosen[triple[0..2]] multiply to a length-3 atom; the other
  // 2k-2 chosen elements pair into inverse pairs.
  std::array<int, 3> triple = {0, 0, 0};
  std::vector<std::pair<int, int>> chosen_pairing;

  // even branch: one extra element taken from atoms[extra_atom_index] after
  // its chosen element is removed; all 2k+2 selected elements pair into
  // inverse pairs.  Index 2k+1 in selected_pairing refers to the extra.
  int extra_atom_index = 0;
  GroupElement extra_element;
  std::vector<std::pair<int, int>> selected_pairing;

  // both branches: inverse-pair witness for A divided by all selected elements
  Pairing remainder_pairing;

  int k() const { return (static_cast<int>(atoms.size()) - 1) / 2; }

  Sequence product() const {
    Sequence a(group);
    for (const Sequence& u : atoms) a = a.concat(u);
    return a;
  }

  // The multiset of selected elements: all chosen, plus the extra on the even
  // branch.
  Sequence selected() const {
    std::vector<GroupElement> elems = chosen;
    if (branch == Branch::even) elems.push_back(extra_element);
    return Sequence::from_terms(group, elems);
  }
};

struct VerificationCheck {
  std::string stage;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  bool valid = true;
  std::vector<VerificationCheck> checks;
  int k = 0;
  int d_star = 0;
  long long short_length = 0;  // number of certificate atoms
  long long long_length = 0;   // refactorization length (nice certificates)

  std::string first_failure() const {
    for (const VerificationCheck& c : checks)
      if (!c.passed) return c.stage + (c.detail.empty() ? "" : ": " + c.detail);
    return "";
  }
};

namespace detail {

struct Checker {
  VerificationReport& rep;

  bool operator()(bool ok, const std::string& stage, const std::string& detail_on_fail) {
    rep.checks.push_back({stage, ok, ok ? "" : detail_on_fail});
    if (!ok) rep.valid = false;
    return ok;
  }
};

// True iff `pairs` is a perfect matching on exactly the index set `expected`.
inline bool is_matching_on(const std::vector<std::pair<int, int>>& pairs,
                           std::vector<int> expected) {
  std::vector<int> touched;
  for (const auto& [a, b] : pairs) {
    touched.push_back(a);
    touched.push_back(b);
  }
  std::sort(touched.begin(), touched.end());
  if (std::adjacent_find(touched.begin(), touched.end()) != touched.end()) return false;
  std::sort(expected.begin(), expected.end());
  return touched == expected;
}

// True iff the witness is made of inverse pairs and rebuilds `remainder`.
inline bool pairing_matches(const GroupSpec& g, const Pairing& w, const Sequence& remainder) {
  std::vector<Sequence::Term> terms;
  for (const Pairing::Entry& e : w.pairs) {
    if (!g.is_zero(g.add(e.first, e.second))) return false;
    if (e.count <= 0) return false;
    terms.emplace_back(e.first, e.count);
    terms.emplace_back(e.second, e.count);
  }
  return Sequence::from_multiplicities(g, terms) == remainder;
}

}  // namespace detail

// Structural verification of a pair-nice certificate against the sequence it
// claims to factor.  Failures are report entries, never exceptions.
inline VerificationReport verify_pair_nice(const Sequence& a, const PairNiceCertificate& c,
                                           const Guards& guards = Guards{}) {
  VerificationReport rep;
  detail::Checker check{rep};
  try {
    if (!check(c.group == a.group(), "group", "certificate and sequence groups differ"))
      return rep;
    if (!check(!c.group.is_trivial(), "group", "trivial group")) return rep;
    const int n = static_cast<int>(c.atoms.size());
    if (!check(n >= 2 && n % 2 == 0, "atom count",
               "expected a positive even number of atoms, got " + std::to_string(n)))
      return rep;
    rep.k = n / 2;
    rep.d_star = davenport_star(c.group);
    rep.short_length = n;
    check(c.product() == a, "product", "atoms do not multiply to the sequence");
    for (int i = 0; i < n; ++i) {
      const Sequence& u = c.atoms[static_cast<size_t>(i)];
      check(u.group() == c.group, "atom " + std::to_string(i) + " group", "wrong group");
      check(u.length() == rep.d_star, "atom " + std::to_string(i) + " length",
            "length " + std::to_string(u.length()) + ", expected " + std::to_string(rep.d_star));
      check(is_atom(u, guards), "atom " + std::to_string(i) + " minimality",
            "not a minimal zero-sum sequence");
    }
    if (!check(static_cast<int>(c.chosen.size()) == n, "chosen count",
               "expected one chosen element per atom"))
      return rep;
    for (int i = 0; i < n; ++i)
      check(c.atoms[static_cast<size_t>(i)].contains(c.chosen[static_cast<size_t>(i)]),
            "chosen " + std::to_string(i), "not in the support of its atom");
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    check(detail::is_matching_on(c.chosen_pairing, all), "chosen pairing shape",
          "not a perfect matching on the atom indices");
    for (const auto& [i, j] : c.chosen_pairing) {
      if (i < 0 || j < 0 || i >= n || j >= n) continue;  // shape check already failed
      check(c.group.is_zero(c.group.add(c.chosen[static_cast<size_t>(i)],
                                        c.chosen[static_cast<size_t>(j)])),
            "chosen pair (" + std::to_string(i) + "," + std::to_string(j) + ")",
            "elements do not sum to zero");
    }
  } catch (const Error& e) {
    check(false, "verification aborted", e.what());
  }
  return rep;
}

// Structural verification of a nice certificate.  On success the report also
// carries the two factorization lengths the certificate pins inside L(A).
inline VerificationReport verify_nice(const Sequence& a, const NiceCertificate& c,
                                      const Guards& guards = Guards{}) {
  VerificationReport rep;
  detail::Checker check{rep};
  try {
    if (!check(c.group == a.group(), "group", "certificate and sequence groups differ"))
      return rep;
    if (!check(!c.group.is_trivial(), "group", "trivial group")) return rep;
    const int n = static_cast<int>(c.atoms.size());
    if (!check(n >= 3 && n % 2 == 1, "atom count",
               "expected an odd number (>= 3) of atoms, got " + std::to_string(n)))
      return rep;
    rep.k = (n - 1) / 2;
    rep.d_star = davenport_star(c.group);
    rep.short_length = n;
    rep.long_length = static_cast<long long>(rep.k) * rep.d_star + rep.d_star / 2;
    check(c.product() == a, "product", "atoms do not multiply to the sequence");
    for (int i = 0; i < n; ++i) {
      const Sequence& u = c.atoms[static_cast<size_t>(i)];
      check(u.group() == c.group, "atom " + std::to_string(i) + " group", "wrong group");
      check(u.length() == rep.d_star, "atom " + std::to_string(i) + " length",
            "length " + std::to_string(u.length()) + ", expected " + std::to_string(rep.d_star));
      check(is_atom(u, guards), "atom " + std::to_string(i) + " minimality",
            "not a minimal zero-sum sequence");
    }
    if (!check(static_cast<int>(c.chosen.size()) == n, "chosen count",
               "expected one chosen element per atom"))
      return rep;
    for (int i = 0; i < n; ++i)
      check(c.atoms[static_cast<size_t>(i)].contains(c.chosen[static_cast<size_t>(i)]),
            "chosen " + std::to_string(i), "not in the support of its atom");

    const bool d_star_odd = rep.d_star % 2 == 1;
    if (!check((c.branch == NiceCertificate::Branch::odd) == d_star_odd, "branch parity",
               d_star_odd ? "odd D* requires the odd branch" : "even D* requires the even branch"))
      return rep;

    if (c.branch == NiceCertificate::Branch::odd) {
      std::vector<int> t(c.triple.begin(), c.triple.end());
      std::sort(t.begin(), t.end());
      if (!check(t[0] >= 0 && t[2] < n && t[0] != t[1] && t[1] != t[2], "triple indices",
                 "must be three distinct atom indices"))
        return rep;
      Sequence w0 = Sequence::from_terms(
          c.group, {c.chosen[static_cast<size_t>(c.triple[0])],
                    c.chosen[static_cast<size_t>(c.triple[1])],
                    c.chosen[static_cast<size_t>(c.triple[2])]});
      check(is_atom(w0, guards), "triple atom", "the three chosen elements are not an atom");
      std::vector<int> rest;
      for (int i = 0; i < n; ++i)
        if (i != c.triple[0] && i != c.triple[1] && i != c.triple[2]) rest.push_back(i);
      check(detail::is_matching_on(c.chosen_pairing, rest), "chosen pairing shape",
            "not a perfect matching on the non-triple indices");
      for (const auto& [i, j] : c.chosen_pairing) {
        if (i < 0 || j < 0 || i >= n || j >= n) continue;
        check(c.group.is_zero(c.group.add(c.chosen[static_cast<size_t>(i)],
                                          c.chosen[static_cast<size_t>(j)])),
              "chosen pair (" + std::to_string(i) + "," + std::to_string(j) + ")",
              "elements do not sum to zero");
      }
    } else {
      if (!check(c.extra_atom_index >= 0 && c.extra_atom_index < n, "extra index",
                 "atom index out of range"))
        return rep;
      Sequence leftover = c.atoms[static_cast<size_t>(c.extra_atom_index)].remove_one(
          c.chosen[static_cast<size_t>(c.extra_atom_index)]);
      check(leftover.contains(c.extra_element), "extra element",
            "not in the support of its atom after removing the chosen element");
      std::vector<int> all(static_cast<size_t>(n + 1));
      for (int i = 0; i <= n; ++i) all[static_cast<size_t>(i)] = i;
      check(detail::is_matching_on(c.selected_pairing, all), "selected pairing shape",
            "not a perfect matching on the atom indices plus the extra");
      auto selected_at = [&](int i) {
        return i == n ? c.extra_element : c.chosen[static_cast<size_t>(i)];
      };
      for (const auto& [i, j] : c.selected_pairing) {
        if (i < 0 || j < 0 || i > n || j > n) continue;
        check(c.group.is_zero(c.group.add(selected_at(i), selected_at(j))),
              "selected pair (" + std::to_string(i) + "," + std::to_string(j) + ")",
              "elements do not sum to zero");
      }
    }

    Sequence sel = c.selected();
    if (check(sel.divides(a), "selected divides", "selected elements do not divide the product")) {
      Sequence remainder = a.divide(sel);
      check(detail::pairing_matches(c.group, c.remainder_pairing, remainder),
            "remainder pairing", "witness does not rebuild the remainder from inverse pairs");
    }
  } catch (const Error& e) {
    check(false, "verification aborted", e.what());
  }
  return rep;
}

// Concatenation of two pair-nice certificates over one group.
inline PairNiceCertificate combine_pair_nice(const PairNiceCertificate& c1,
                                             const PairNiceCertificate& c2,
                                             const Guards& guards = Guards{}) {
  require(c1.group == c2.group, Errc::group_mismatch, "combine_pair_nice",
          "certificates over different groups");
  VerificationReport r1 = verify_pair_nice(c1.product(), c1, guards);
  require(r1.valid, Errc::invalid_input, "combine_pair_nice",
          "left certificate fails verification: " + r1.first_failure());
  VerificationReport r2 = verify_pair_nice(c2.product(), c2, guards);
  require(r2.valid, Errc::invalid_input, "combine_pair_nice",
          "right certificate fails verification: " + r2.first_failure());
  PairNiceCertificate out = c1;
  const int shift = static_cast<int>(c1.atoms.size());
  out.atoms.insert(out.atoms.end(), c2.atoms.begin(), c2.atoms.end());
  out.chosen.insert(out.chosen.end(), c2.chosen.begin(), c2.chosen.end());
  for (const auto& [i, j] : c2.chosen_pairing)
    out.chosen_pairing.emplace_back(i + shift, j + shift);
  return out;
}

// Elementwise negation: atoms and chosen elements flip sign; the pairing
// keeps its index structure, since negation preserves inverse pairs.
inline PairNiceCertificate negate_pair_nice(const PairNiceCertificate& c) {
  PairNiceCertificate out = c;
  for (Sequence& u : out.atoms) u = u.negate();
  for (GroupElement& g : out.chosen) g = c.group.neg(g);
  return out;
}

// The even-D* upgrade: a pair-nice certificate for E plus one extremal atom
// X1 with E*X1 a product of inverse pairs yields a nice certificate for E*X1.
// The borrowed element is searched deterministically (lexicographically least
// x in supp(X1) with -x available inside some atom's leftover).
inline NiceCertificate nice_from_pair_nice_even(const PairNiceCertificate& cE, const Sequence& x1,
                                                const Guards& guards = Guards{}) {
  const GroupSpec& g = cE.group;
  const int d_star = davenport_star(g);
  require(d_star % 2 == 0, Errc::precondition_failed, "nice_from_pair_nice_even",
          "requires even D*, got " + std::to_string(d_star));
  require(x1.group() == g, Errc::group_mismatch, "nice_from_pair_nice_even",
          "atom over a different group");
  VerificationReport rE = verify_pair_nice(cE.product(), cE, guards);
  require(rE.valid, Errc::precondition_failed, "nice_from_pair_nice_even",
          "pair-nice input fails verification: " + rE.first_failure());
  require(x1.length() == d_star && is_atom(x1, guards), Errc::precondition_failed,
          "nice_from_pair_nice_even", "X1 must be an atom of length D*");
  Sequence a = cE.product().concat(x1);
  require(is_product_of_length2_atoms(a), Errc::precondition_failed, "nice_from_pair_nice_even",
          "E*X1 is not a product of inverse pairs");

  const int n = static_cast<int>(cE.atoms.size());
  // leftovers[i] = atoms[i] minus its chosen element
  std::vector<Sequence> leftovers;
  leftovers.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    leftovers.push_back(cE.atoms[static_cast<size_t>(i)].remove_one(
        cE.chosen[static_cast<size_t>(i)]));

  std::optional<GroupElement> x;
  int donor = -1;
  for (const GroupElement& cand : x1.support()) {  // support is sorted: least first
    GroupElement want = g.neg(cand);
    for (int i = 0; i < n && donor < 0; ++i)
      if (leftovers[static_cast<size_t>(i)].contains(want)) donor = i;
    if (donor < 0 && x1.remove_one(cand).contains(want)) donor = n;  // X1's own leftover
    if (donor >= 0) {
      x = cand;
      break;
    }
  }
  require(x.has_value(), Errc::internal_inconsistency, "nice_from_pair_nice_even",
          "no element of supp(X1) has an inverse inside the atom leftovers; "
          "this contradicts the pairing hypothesis");

  NiceCertificate out;
  out.group = g;
  out.atoms = cE.atoms;
  out.atoms.push_back(x1);
  out.chosen = cE.chosen;
  out.chosen.push_back(*x);
  out.branch = NiceCertificate::Branch::even;
  out.extra_atom_index = donor;
  out.extra_element = g.neg(*x);
  out.selected_pairing = cE.chosen_pairing;
  out.selected_pairing.emplace_back(n, n + 1);  // X1's chosen with the extra
  Sequence remainder = a.divide(out.selected());
  auto witness = pairing_into_length2_atoms(remainder);
  require(witness.has_value(), Errc::internal_inconsistency, "nice_from_pair_nice_even",
          "remainder lost pairability after removing inverse pairs");
  out.remainder_pairing = *witness;
  VerificationReport rep = verify_nice(a, out, guards);
  require(rep.valid, Errc::internal_inconsistency, "nice_from_pair_nice_even",
          "assembled certificate fails verification: " + rep.first_failure());
  return out;
}

// The odd-D* upgrade: a pair-nice certificate for E plus three extremal atoms
// X1,X2,X3 and marked elements a1,a2,a3 whose product is a length-3 atom.
inline NiceCertificate nice_from_pair_nice_odd(const PairNiceCertificate& cE, const Sequence& x1,
                                               const Sequence& x2, const Sequence& x3,
                                               const GroupElement& a1, const GroupElement& a2,
                                               const GroupElement& a3,
                                               const Guards& guards = Guards{}) {
  const GroupSpec& g = cE.group;
  const int d_star = davenport_star(g);
  require(d_star % 2 == 1, Errc::precondition_failed, "nice_from_pair_nice_odd",
          "requires odd D*, got " + std::to_string(d_star));
  VerificationReport rE = verify_pair_nice(cE.product(), cE, guards);
  require(rE.valid, Errc::precondition_failed, "nice_from_pair_nice_odd",
          "pair-nice input fails verification: " + rE.first_failure());
  const Sequence* xs[3] = {&x1, &x2, &x3};
  const GroupElement* as[3] = {&a1, &a2, &a3};
  for (int i = 0; i < 3; ++i) {
    require(xs[i]->group() == g, Errc::group_mismatch, "nice_from_pair_nice_odd",
            "atom over a different group");
    require(xs[i]->length() == d_star && is_atom(*xs[i], guards), Errc::precondition_failed,
            "nice_from_pair_nice_odd", "X" + std::to_string(i + 1) + " must be an atom of length D*");
    require(xs[i]->contains(*as[i]), Errc::precondition_failed, "nice_from_pair_nice_odd",
            "a" + std::to_string(i + 1) + " is not in the support of X" + std::to_string(i + 1));
  }
  Sequence w0 = Sequence::from_terms(g, {a1, a2, a3});
  require(is_atom(w0, guards), Errc::precondition_failed, "nice_from_pair_nice_odd",
          "a1*a2*a3 is not an atom");
  Sequence a = cE.product().concat(x1).concat(x2).concat(x3);
  require(is_product_of_length2_atoms(a.divide(w0)), Errc::precondition_failed,
          "nice_from_pair_nice_odd", "E*X1*X2*X3 without the triple is not a product of inverse pairs");

  const int n = static_cast<int>(cE.atoms.size());
  NiceCertificate out;
  out.group = g;
  out.atoms = cE.atoms;
  out.atoms.push_back(x1);
  out.atoms.push_back(x2);
  out.atoms.push_back(x3);
  out.chosen = cE.chosen;
  out.chosen.push_back(a1);
  out.chosen.push_back(a2);
  out.chosen.push_back(a3);
  out.branch = NiceCertificate::Branch::odd;
  out.triple = {n, n + 1, n + 2};
  out.chosen_pairing = cE.chosen_pairing;
  Sequence remainder = a.divide(out.selected());
  auto witness = pairing_into_length2_atoms(remainder);
  require(witness.has_value(), Errc::internal_inconsistency, "nice_from_pair_nice_odd",
          "remainder lost pairability after removing inverse pairs");
  out.remainder_pairing = *witness;
  VerificationReport rep = verify_nice(a, out, guards);
  require(rep.valid, Errc::internal_inconsistency, "nice_from_pair_nice_odd",
          "assembled certificate fails verification: " + rep.first_failure());
  return out;
}

// The two factorizations a nice certificate pins inside L(A): the 2k+1
// certificate atoms, and the refactorization into the length-3 atom (odd
// branch only) plus inverse pairs.  Both are re-checked to multiply to A.
inline std::pair<Factorization, Factorization> lengths_from_nice(const Sequence& a,
                                                                 const NiceCertificate& c,
                                                                 const Guards& guards = Guards{}) {
  VerificationReport rep = verify_nice(a, c, guards);
  require(rep.valid, Errc::invalid_certificate, "lengths_from_nice",
          "certificate fails verification: " + rep.first_failure());
  Factorization f_short = c.atoms;

  Factorization f_long;
  const GroupSpec& g = c.group;
  if (c.branch == NiceCertificate::Branch::odd) {
    f_long.push_back(Sequence::from_terms(g, {c.chosen[static_cast<size_t>(c.triple[0])],
                                              c.chosen[static_cast<size_t>(c.triple[1])],
                                              c.chosen[static_cast<size_t>(c.triple[2])]}));
    for (const auto& [i, j] : c.chosen_pairing)
      f_long.push_back(Sequence::from_terms(g, {c.chosen[static_cast<size_t>(i)],
                                                c.chosen[static_cast<size_t>(j)]}));
  } else {
    const int n = static_cast<int>(c.atoms.size());
    auto selected_at = [&](int i) {
      return i == n ? c.extra_element : c.chosen[static_cast<size_t>(i)];
    };
    for (const auto& [i, j] : c.selected_pairing)
      f_long.push_back(Sequence::from_terms(g, {selected_at(i), selected_at(j)}));
  }
  long long pair_total = c.remainder_pairing.pair_count();
  require(pair_total <= static_cast<long long>(guards.max_expand), Errc::size_guard_exceeded,
          "lengths_from_nice", "remainder witness too large to expand");
  for (const Pairing::Entry& e : c.remainder_pairing.pairs)
    for (long long i = 0; i < e.count; ++i)
      f_long.push_back(Sequence::from_terms(g, {e.first, e.second}));

  require(static_cast<long long>(f_long.size()) == rep.long_length, Errc::internal_inconsistency,
          "lengths_from_nice",
          "refactorization length " + std::to_string(f_long.size()) + " != expected " +
              std::to_string(rep.long_length));
  require(product_of(g, f_long) == a, Errc::internal_inconsistency, "lengths_from_nice",
          "refactorization does not multiply back to the sequence");
  return {std::move(f_short), std::move(f_long)};
}

}  // namespace zerosum
