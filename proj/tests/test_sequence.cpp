#include <catch2/catch_amalgamated.hpp>

#include "zerosum/sequence.hpp"

using zerosum::Errc;
using zerosum::Error;
using zerosum::GroupElement;
using zerosum::GroupSpec;
using zerosum::Sequence;

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

}  // namespace

TEST_CASE("sequences store a canonical sorted multiset") {
  GroupSpec g = GroupSpec::make({2, 4});
  Sequence s = Sequence::from_terms(g, {g.element({1, 3}), g.element({0, 1}),
                                        g.element({1, 3}), g.element({0, 1}),
                                        g.element({0, 1})});
  REQUIRE(s.terms().size() == 2);
  CHECK(s.terms()[0].first == g.element({0, 1}));
  CHECK(s.terms()[0].second == 3);
  CHECK(s.terms()[1].first == g.element({1, 3}));
  CHECK(s.terms()[1].second == 2);
  CHECK(s.length() == 5);
  CHECK(s.multiplicity(g.element({0, 1})) == 3);
  CHECK(s.multiplicity(g.element({1, 0})) == 0);
  CHECK(s.contains(g.element({1, 3})));
  CHECK(s.key() == "[2,4]:3x(0,1);2x(1,3);");
  // same multiset in any input order compares equal
  Sequence t = Sequence::from_multiplicities(
      g, {{g.element({1, 3}), 2}, {g.element({0, 1}), 3}});
  CHECK(s == t);
}

TEST_CASE("sum respects multiplicities") {
  GroupSpec g = GroupSpec::make({5});
  Sequence s = Sequence::from_multiplicities(g, {{g.element({2}), 4}, {g.element({1}), 2}});
  CHECK(s.sum() == g.element({0}));
  CHECK(Sequence(g).sum() == g.zero());
}

TEST_CASE("concat divides and divide round-trip") {
  GroupSpec g = GroupSpec::make({3, 3});
  Sequence a = Sequence::from_terms(g, {g.element({1, 0}), g.element({1, 0}), g.element({0, 2})});
  Sequence b = Sequence::from_terms(g, {g.element({1, 0}), g.element({2, 1})});
  Sequence ab = a.concat(b);
  CHECK(ab.length() == 5);
  CHECK(ab.multiplicity(g.element({1, 0})) == 3);
  CHECK(a.divides(ab));
  CHECK(b.divides(ab));
  CHECK(ab.divide(a) == b);
  CHECK(ab.divide(b) == a);
  CHECK_FALSE(ab.divides(a));
  CHECK(code_of([&] { a.divide(b); }) == Errc::not_a_subsequence);
  // empty sequence divides everything and is the unit
  Sequence e(g);
  CHECK(e.divides(a));
  CHECK(a.concat(e) == a);
  CHECK(a.divide(e) == a);
  CHECK(a.divide(a) == e);
}

TEST_CASE("negate and power") {
  GroupSpec g = GroupSpec::make({4});
  Sequence s = Sequence::from_multiplicities(g, {{g.element({1}), 2}, {g.element({2}), 1}});
  Sequence n = s.negate();
  CHECK(n.multiplicity(g.element({3})) == 2);
  CHECK(n.multiplicity(g.element({2})) == 1);
  CHECK(n.negate() == s);
  Sequence p = s.power(3);
  CHECK(p.length() == 9);
  CHECK(p.multiplicity(g.element({1})) == 6);
  CHECK(s.power(0) == Sequence(g));
  CHECK(code_of([&] { s.power(-1); }) == Errc::invalid_input);
}

TEST_CASE("add_one remove_one expand") {
  GroupSpec g = GroupSpec::make({6});
  Sequence s = Sequence::from_terms(g, {g.element({5})});
  Sequence s2 = s.add_one(g.element({11}));  // reduces mod 6
  CHECK(s2.multiplicity(g.element({5})) == 2);
  Sequence s3 = s2.remove_one(g.element({5}));
  CHECK(s3 == s);
  CHECK(code_of([&] { s.remove_one(g.element({0})); }) == Errc::not_a_subsequence);
  auto flat = s2.expand();
  REQUIRE(flat.size() == 2);
  CHECK(flat[0] == g.element({5}));
}

TEST_CASE("group mismatch is rejected") {
  GroupSpec g = GroupSpec::make({3});
  GroupSpec h = GroupSpec::make({9});
  Sequence a = Sequence::from_terms(g, {g.element({1})});
  Sequence b = Sequence::from_terms(h, {h.element({1})});
  CHECK(code_of([&] { a.concat(b); }) == Errc::group_mismatch);
  CHECK(code_of([&] { a.divides(b); }) == Errc::group_mismatch);
}

TEST_CASE("multiplicity cap") {
  GroupSpec g = GroupSpec::make({2});
  Sequence s = Sequence::from_multiplicities(g, {{g.element({1}), zerosum::kMaxMultiplicity}});
  CHECK(code_of([&] { s.concat(s); }) == Errc::multiplicity_overflow);
  CHECK(code_of([&] { s.power(2); }) == Errc::multiplicity_overflow);
}

TEST_CASE("product_of concatenates in order") {
  GroupSpec g = GroupSpec::make({4});
  Sequence a = Sequence::from_terms(g, {g.element({1})});
  Sequence b = Sequence::from_terms(g, {g.element({3})});
  Sequence p = zerosum::product_of(g, {a, b, a});
  CHECK(p.length() == 3);
  CHECK(p.multiplicity(g.element({1})) == 2);
  CHECK(zerosum::product_of(g, {}) == Sequence(g));
}
