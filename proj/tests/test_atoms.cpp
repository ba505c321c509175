#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "oracles.hpp"
#include "zerosum/atoms.hpp"

using zerosum::Errc;
using zerosum::Error;
using zerosum::GroupElement;
using zerosum::GroupSpec;
using zerosum::Guards;
using zerosum::Sequence;

namespace {

// Naive atom listing: try every multiset of length <= max_len.
std::vector<Sequence> naive_enumerate_atoms(const GroupSpec& g, long long max_len) {
  std::vector<Sequence> out;
  std::vector<GroupElement> cur;
  std::function<void(long long)> rec = [&](long long start) {
    if (!cur.empty()) {
      Sequence s = Sequence::from_terms(g, cur);
      if (oracles::naive_is_atom(s)) out.push_back(s);
    }
    if (static_cast<long long>(cur.size()) >= max_len) return;
    for (long long i = start; i < g.order(); ++i) {
      cur.push_back(g.element_at(i));
      rec(i);
      cur.pop_back();
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("zero-sum and proper zero-sum subsequence basics") {
  GroupSpec g = GroupSpec::make({3});
  auto seq = [&](std::initializer_list<long long> xs) {
    std::vector<GroupElement> elems;
    for (long long x : xs) elems.push_back(g.element({x}));
    return Sequence::from_terms(g, elems);
  };
  CHECK(zerosum::is_zero_sum(seq({1, 2})));
  CHECK(zerosum::is_zero_sum(seq({1, 1, 1})));
  CHECK_FALSE(zerosum::is_zero_sum(seq({1, 1})));
  CHECK(zerosum::is_zero_sum(Sequence(g)));
  CHECK_FALSE(zerosum::has_proper_zero_sum_subsequence(seq({1, 1, 1})));
  CHECK(zerosum::has_proper_zero_sum_subsequence(seq({1, 2, 1, 2})));
  CHECK(zerosum::has_proper_zero_sum_subsequence(seq({0, 1})));
  CHECK_FALSE(zerosum::has_proper_zero_sum_subsequence(seq({0})));
  CHECK_FALSE(zerosum::has_proper_zero_sum_subsequence(Sequence(g)));
}

TEST_CASE("atom predicate on hand-checked cases") {
  GroupSpec g = GroupSpec::make({3});
  auto seq = [&](std::initializer_list<long long> xs) {
    std::vector<GroupElement> elems;
    for (long long x : xs) elems.push_back(g.element({x}));
    return Sequence::from_terms(g, elems);
  };
  CHECK(zerosum::is_atom(seq({0})));
  CHECK(zerosum::is_atom(seq({1, 2})));
  CHECK(zerosum::is_atom(seq({1, 1, 1})));
  CHECK_FALSE(zerosum::is_atom(seq({0, 0})));
  CHECK_FALSE(zerosum::is_atom(seq({1, 1, 2, 2})));
  CHECK_FALSE(zerosum::is_atom(seq({1})));
  CHECK_FALSE(zerosum::is_atom(Sequence(g)));

  GroupSpec h = GroupSpec::make({2, 2});
  Sequence tri = Sequence::from_terms(
      h, {h.element({0, 1}), h.element({1, 0}), h.element({1, 1})});
  CHECK(zerosum::is_atom(tri));
}

TEST_CASE("proper zero-sum subsequence matches brute force on random data") {
  std::mt19937 rng(20260822);
  for (int i = 0; i < 400; ++i) {
    GroupSpec g = oracles::random_group(rng, 16);
    Sequence s = oracles::random_sequence(rng, g, 9);
    bool fast = zerosum::has_proper_zero_sum_subsequence(s);
    bool naive = oracles::naive_has_proper_zero_sum_subsequence(s);
    INFO("group " << g.str() << " sequence " << s.key());
    REQUIRE(fast == naive);
  }
}

TEST_CASE("huge multiplicities hit the reachability fixpoint, not the loop") {
  GroupSpec g = GroupSpec::make({2});
  Sequence s = Sequence::from_multiplicities(g, {{g.element({1}), 1LL << 30}});
  CHECK(zerosum::has_proper_zero_sum_subsequence(s));
  CHECK_FALSE(zerosum::is_atom(s));
  CHECK(zerosum::is_product_of_length2_atoms(s));
  Sequence two = Sequence::from_multiplicities(g, {{g.element({1}), 2}});
  CHECK(zerosum::is_atom(two));
}

TEST_CASE("atom enumeration matches brute force") {
  for (const std::vector<int>& factors :
       {std::vector<int>{2, 2}, {3}, {5}, {2, 4}, {3, 3}, {2, 2, 2}}) {
    GroupSpec g = GroupSpec::make(factors);
    long long d = zerosum::davenport_exact(g).d_exact.value();
    std::vector<Sequence> fast = zerosum::enumerate_atoms(g, d);
    std::vector<Sequence> naive = naive_enumerate_atoms(g, d);
    std::vector<Sequence> fast_sorted = fast;
    std::sort(fast_sorted.begin(), fast_sorted.end());
    INFO("group " << g.str());
    REQUIRE(fast_sorted.size() == naive.size());
    CHECK(fast_sorted == naive);
    // no duplicates in the walk output
    CHECK(std::adjacent_find(fast_sorted.begin(), fast_sorted.end()) == fast_sorted.end());
  }
}

TEST_CASE("atom counts on hand-checked groups") {
  GroupSpec z2z2 = GroupSpec::make({2, 2});
  CHECK(zerosum::enumerate_atoms(z2z2, 3).size() == 5);  // {0}, three doubles, one triple
  GroupSpec z3 = GroupSpec::make({3});
  CHECK(zerosum::enumerate_atoms(z3, 3).size() == 4);  // {0}, {1,2}, {1,1,1}, {2,2,2}
  // length cap respected
  CHECK(zerosum::enumerate_atoms(z3, 2).size() == 2);
}

TEST_CASE("davenport star formula") {
  CHECK(zerosum::davenport_star(GroupSpec::make({2, 2})) == 3);
  CHECK(zerosum::davenport_star(GroupSpec::make({3, 3})) == 5);
  CHECK(zerosum::davenport_star(GroupSpec::make({2, 4})) == 5);
  CHECK(zerosum::davenport_star(GroupSpec::make({2, 2, 2})) == 4);
  CHECK(zerosum::davenport_star(GroupSpec::make({3, 3, 3})) == 7);
  CHECK(zerosum::davenport_star(GroupSpec::make({5})) == 5);
  CHECK(zerosum::davenport_star(GroupSpec::raw({3, 3, 2, 4})) == 9);
  CHECK_THROWS_AS(zerosum::davenport_star(GroupSpec::make({})), Error);
}

TEST_CASE("exact davenport constant via exhaustive search") {
  auto d_of = [](std::vector<int> f) {
    return zerosum::davenport_exact(GroupSpec::make(std::move(f))).d_exact.value();
  };
  CHECK(d_of({2, 2}) == 3);
  CHECK(d_of({3, 3}) == 5);
  CHECK(d_of({2, 4}) == 5);
  CHECK(d_of({2, 2, 2}) == 4);
  CHECK(d_of({3, 3, 3}) == 7);
  CHECK(d_of({5}) == 5);
  CHECK(d_of({7}) == 7);
  CHECK(d_of({2, 6}) == 7);  // rank two: exact equals the star bound

  zerosum::DavenportReport rep = zerosum::davenport_exact(GroupSpec::make({3, 3}));
  REQUIRE(rep.zero_sum_free_witness.has_value());
  const Sequence& w = *rep.zero_sum_free_witness;
  CHECK(w.length() == rep.max_zero_sum_free_length);
  CHECK(w.length() + 1 == rep.d_exact.value());
  CHECK_FALSE(zerosum::is_zero_sum(w));
  // witness truly has no nonempty zero-sum subsequence
  for (const Sequence& d : oracles::all_divisors(w))
    if (!d.empty()) CHECK_FALSE(zerosum::is_zero_sum(d));
}

TEST_CASE("pairing into inverse pairs") {
  GroupSpec g = GroupSpec::make({4});
  auto seq = [&](std::vector<std::pair<long long, long long>> terms) {
    std::vector<Sequence::Term> t;
    for (auto [x, m] : terms) t.emplace_back(g.element({x}), m);
    return Sequence::from_multiplicities(g, t);
  };
  auto check_witness = [](const Sequence& s) {
    auto w = zerosum::pairing_into_length2_atoms(s);
    REQUIRE(w.has_value());
    CHECK(w->pair_count() * 2 == s.length());
    Sequence rebuilt(s.group());
    for (const auto& e : w->pairs) {
      CHECK(s.group().is_zero(s.group().add(e.first, e.second)));
      rebuilt = rebuilt.concat(Sequence::from_multiplicities(
          s.group(), {{e.first, e.count}}));
      rebuilt = rebuilt.concat(Sequence::from_multiplicities(
          s.group(), {{e.second, e.count}}));
    }
    CHECK(rebuilt == s);
  };
  check_witness(seq({{1, 2}, {3, 2}}));
  check_witness(seq({{2, 4}}));  // self-inverse element, even multiplicity
  check_witness(Sequence(g));   // empty product
  CHECK_FALSE(zerosum::pairing_into_length2_atoms(seq({{1, 2}, {3, 1}})).has_value());
  CHECK_FALSE(zerosum::pairing_into_length2_atoms(seq({{2, 3}})).has_value());
  CHECK_FALSE(zerosum::pairing_into_length2_atoms(seq({{0, 2}})).has_value());
  CHECK_FALSE(zerosum::pairing_into_length2_atoms(seq({{1, 1}})).has_value());
  CHECK(zerosum::is_product_of_length2_atoms(seq({{1, 5}, {3, 5}})));
}

TEST_CASE("pairability is closed under removing a pairable divisor") {
  std::mt19937 rng(917);
  GroupSpec g = GroupSpec::make({2, 6});
  for (int i = 0; i < 200; ++i) {
    // build a pairable sequence, split off a pairable part, remainder must pair
    std::uniform_int_distribution<long long> elem(0, g.order() - 1);
    Sequence s(g);
    for (int p = 0; p < 5; ++p) {
      GroupElement e = g.element_at(elem(rng));
      if (g.is_zero(e)) continue;
      s = s.add_one(e).add_one(g.neg(e));
    }
    REQUIRE(zerosum::is_product_of_length2_atoms(s));
    if (s.empty()) continue;
    GroupElement x = s.terms().front().first;
    Sequence part = Sequence::from_terms(g, {x, g.neg(x)});
    REQUIRE(part.divides(s));
    CHECK(zerosum::is_product_of_length2_atoms(s.divide(part)));
  }
}

TEST_CASE("guards trip on oversized inputs") {
  Guards tight;
  tight.max_group_order = 4;
  GroupSpec g = GroupSpec::make({3, 3});
  Sequence s = Sequence::from_terms(g, {g.element({1, 1}), g.element({2, 2})});
  try {
    zerosum::has_proper_zero_sum_subsequence(s, tight);
    FAIL("expected a guard error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::size_guard_exceeded);
  }
  try {
    zerosum::enumerate_atoms(g, 5, tight);
    FAIL("expected a guard error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::size_guard_exceeded);
  }
}
