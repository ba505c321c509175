#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"
#include "zerosum/lengths.hpp"

using zerosum::Errc;
using zerosum::Error;
using zerosum::Factorization;
using zerosum::GroupElement;
using zerosum::GroupSpec;
using zerosum::Guards;
using zerosum::LengthOracle;
using zerosum::Sequence;
using zerosum::UnionReport;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::usage;
}

std::set<long long> to_set(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("set of lengths on pinned examples") {
  LengthOracle oracle;
  GroupSpec z3 = GroupSpec::make({3});
  CHECK(oracle.set_of_lengths(Sequence(z3)).lengths == to_set({0}));
  // 1^3 * 2^3: either two triples or three inverse pairs
  Sequence a = Sequence::from_multiplicities(z3, {{z3.element({1}), 3}, {z3.element({2}), 3}});
  CHECK(oracle.set_of_lengths(a).lengths == to_set({2, 3}));
  GroupSpec z5 = GroupSpec::make({5});
  Sequence b = Sequence::from_multiplicities(z5, {{z5.element({1}), 3}, {z5.element({4}), 3}});
  CHECK(oracle.set_of_lengths(b).lengths == to_set({3}));
}

TEST_CASE("set of lengths rejects bad input") {
  LengthOracle oracle;
  GroupSpec z5 = GroupSpec::make({5});
  Sequence bad = Sequence::from_terms(z5, {z5.element({1})});
  CHECK(code_of([&] { oracle.set_of_lengths(bad); }) == Errc::not_zero_sum);
  Guards tight;
  tight.max_sequence_length = 3;
  LengthOracle small(tight);
  Sequence big = Sequence::from_multiplicities(z5, {{z5.element({1}), 5}});
  CHECK(code_of([&] { small.set_of_lengths(big); }) == Errc::size_guard_exceeded);
}

TEST_CASE("atoms_dividing matches brute force") {
  std::mt19937 rng(5150);
  LengthOracle oracle;
  for (int i = 0; i < 200; ++i) {
    GroupSpec g = oracles::random_group(rng, 16);
    Sequence s = oracles::random_sequence(rng, g, 8);
    std::vector<Sequence> fast = oracle.atoms_dividing(s);
    std::vector<Sequence> naive = oracles::naive_atoms_dividing(s);
    std::sort(fast.begin(), fast.end());
    std::sort(naive.begin(), naive.end());
    INFO("group " << g.str() << " sequence " << s.key());
    REQUIRE(fast == naive);
  }
}

TEST_CASE("memoized lengths match naive recursion on random data") {
  std::mt19937 rng(628318);
  LengthOracle oracle;  // shared memo across cases on purpose
  for (int i = 0; i < 250; ++i) {
    GroupSpec g = oracles::random_group(rng, 16);
    Sequence s = oracles::random_zero_sum_sequence(rng, g, 10);
    INFO("group " << g.str() << " sequence " << s.key());
    REQUIRE(oracle.set_of_lengths(s).lengths == oracles::naive_set_of_lengths(s));
  }
}

TEST_CASE("length set invariants") {
  std::mt19937 rng(40490);
  LengthOracle oracle;
  for (int i = 0; i < 150; ++i) {
    GroupSpec g = oracles::random_group(rng, 16);
    Sequence s = oracles::random_zero_sum_sequence(rng, g, 10);
    auto ls = oracle.set_of_lengths(s).lengths;
    if (s.empty()) {
      CHECK(ls == to_set({0}));
      continue;
    }
    REQUIRE_FALSE(ls.empty());
    CHECK(*ls.begin() >= 1);
    if (s.length() >= 2 && !s.contains(g.zero()))
      CHECK(*ls.rbegin() <= s.length() / 2);
    // supersets: L(s * s') contains sums of lengths pointwise
    Sequence t = oracles::random_zero_sum_sequence(rng, g, 6);
    if (s.length() + t.length() <= 12) {
      auto lt = oracle.set_of_lengths(t).lengths;
      auto lst = oracle.set_of_lengths(s.concat(t)).lengths;
      for (long long x : ls)
        for (long long y : lt) CHECK(lst.count(x + y) == 1);
    }
  }
}

TEST_CASE("factorization_of_length produces checked witnesses") {
  std::mt19937 rng(777);
  LengthOracle oracle;
  int built = 0;
  for (int i = 0; i < 80; ++i) {
    GroupSpec g = oracles::random_group(rng, 16);
    Sequence s = oracles::random_zero_sum_sequence(rng, g, 9);
    auto ls = oracle.set_of_lengths(s).lengths;
    for (long long len : ls) {
      Factorization f = oracle.factorization_of_length(s, len);
      CHECK(static_cast<long long>(f.size()) == len);
      Sequence prod(g);
      for (const Sequence& u : f) {
        CHECK(zerosum::is_atom(u));
        prod = prod.concat(u);
      }
      CHECK(prod == s);
      ++built;
    }
    if (!s.empty()) {
      long long bad = *ls.rbegin() + 1;
      CHECK(code_of([&] { oracle.factorization_of_length(s, bad); }) ==
            Errc::not_a_factorization);
    }
  }
  CHECK(built > 50);
}

TEST_CASE("union_k reproduces the even-index identity at k=1") {
  // max U_2 equals the Davenport constant
  for (const std::vector<int>& f : {std::vector<int>{2, 2}, {3, 3}, {2, 4}, {5}}) {
    GroupSpec g = GroupSpec::make(f);
    UnionReport rep = zerosum::union_k(g, 2);
    long long d = zerosum::davenport_exact(g).d_exact.value();
    INFO("group " << g.str());
    CHECK(rep.exact);
    CHECK(rep.hi == d);
    CHECK(rep.values.count(2) == 1);
    CHECK(rep.lo >= 1);
  }
}

TEST_CASE("union_k odd identities on small instances") {
  UnionReport rho3_z5 = zerosum::union_k(GroupSpec::make({5}), 3);
  CHECK(rho3_z5.exact);
  CHECK(rho3_z5.hi == 6);
  UnionReport rho3_z2z2 = zerosum::union_k(GroupSpec::make({2, 2}), 3);
  CHECK(rho3_z2z2.exact);
  CHECK(rho3_z2z2.hi == 4);
}

TEST_CASE("union_k values form an interval containing k") {
  for (int k = 1; k <= 3; ++k) {
    UnionReport rep = zerosum::union_k(GroupSpec::make({2, 4}), k);
    INFO("k = " << k);
    CHECK(rep.values.count(k) == 1);
    for (long long v = rep.lo; v <= rep.hi; ++v) CHECK(rep.values.count(v) == 1);
  }
}

TEST_CASE("union additivity spot check") {
  GroupSpec g = GroupSpec::make({2, 2});
  UnionReport u1 = zerosum::union_k(g, 1);
  UnionReport u2 = zerosum::union_k(g, 2);
  UnionReport u3 = zerosum::union_k(g, 3);
  for (long long x : u1.values)
    for (long long y : u2.values) CHECK(u3.values.count(x + y) == 1);
}

TEST_CASE("union_k witnesses re-verify") {
  UnionReport rep = zerosum::union_k(GroupSpec::make({3, 3}), 2);
  REQUIRE(rep.witness_hi.has_value());
  const auto& w = *rep.witness_hi;
  CHECK(w.base.size() == 2);
  CHECK(static_cast<long long>(w.extremal.size()) == rep.hi);
  // both factorizations checkout independently
  zerosum::RhoBound bound =
      zerosum::rho_lower_bound_witness(rep.group, 2, w.product, w.base, w.extremal);
  CHECK(bound.value == rep.hi);
  REQUIRE(rep.witness_lo.has_value());
  CHECK(static_cast<long long>(rep.witness_lo->extremal.size()) == rep.lo);
}

TEST_CASE("union_k guard and budget handling") {
  GroupSpec g = GroupSpec::make({2, 2});
  CHECK(code_of([&] { zerosum::union_k(g, 0); }) == Errc::precondition_failed);
  CHECK(code_of([&] { zerosum::union_k(GroupSpec::make({}), 1); }) == Errc::trivial_group);
  Guards tight;
  tight.max_union_k = 2;
  CHECK(code_of([&] { zerosum::union_k(g, 3, tight); }) == Errc::size_guard_exceeded);
  Guards no_time;
  no_time.budget_secs = -1.0;  // expires immediately
  CHECK(code_of([&] { zerosum::union_k(g, 2, no_time); }) == Errc::budget_exhausted);
}

TEST_CASE("rho lower bound witness validates its inputs") {
  GroupSpec g = GroupSpec::make({2, 2});
  GroupElement a = g.element({1, 0}), b = g.element({0, 1}), c = g.element({1, 1});
  Sequence u = Sequence::from_terms(g, {a, b, c});
  Sequence product = u.power(3);
  Factorization f_short = {u, u, u};
  Factorization f_long = {u, Sequence::from_terms(g, {a, a}), Sequence::from_terms(g, {b, b}),
                          Sequence::from_terms(g, {c, c})};
  zerosum::RhoBound bound = zerosum::rho_lower_bound_witness(g, 3, product, f_short, f_long);
  CHECK(bound.value == 4);
  CHECK(bound.k == 3);

  // single-atom self-witness
  zerosum::RhoBound one = zerosum::rho_lower_bound_witness(g, 1, u, {u}, {u});
  CHECK(one.value == 1);

  CHECK(code_of([&] { zerosum::rho_lower_bound_witness(g, 2, product, f_short, f_long); }) ==
        Errc::precondition_failed);
  Factorization wrong_product = {u, u};
  CHECK(code_of([&] {
          zerosum::rho_lower_bound_witness(g, 2, product, wrong_product, f_long);
        }) == Errc::not_a_factorization);
  Factorization non_atom = {u, u, Sequence::from_terms(g, {a, b})};
  try {
    zerosum::rho_lower_bound_witness(g, 3, product, non_atom, f_long);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_a_factorization);
    CHECK(std::string(e.what()).find("factor 2") != std::string::npos);
  }
}
