#include <catch2/catch_amalgamated.hpp>

#include "zerosum/group.hpp"

using zerosum::direct_sum;
using zerosum::Errc;
using zerosum::Error;
using zerosum::GroupElement;
using zerosum::GroupSpec;

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

TEST_CASE("group construction validates factors and chain") {
  REQUIRE_NOTHROW(GroupSpec::make({2, 4}));
  REQUIRE_NOTHROW(GroupSpec::make({3, 3, 3}));
  REQUIRE_NOTHROW(GroupSpec::make({}));
  CHECK(code_of([] { GroupSpec::make({4, 2}); }) == Errc::non_divisible_chain);
  CHECK(code_of([] { GroupSpec::make({2, 3}); }) == Errc::non_divisible_chain);
  CHECK(code_of([] { GroupSpec::make({1, 2}); }) == Errc::invalid_factor);
  CHECK(code_of([] { GroupSpec::make({0}); }) == Errc::invalid_factor);
  CHECK(code_of([] { GroupSpec::raw({-3}); }) == Errc::invalid_factor);
  // raw admits non-chain presentations but records the fact
  GroupSpec raw = GroupSpec::raw({4, 2});
  CHECK_FALSE(raw.is_chain());
  CHECK(GroupSpec::raw({2, 4}).is_chain());
}

TEST_CASE("group invariants") {
  GroupSpec g = GroupSpec::make({2, 6});
  CHECK(g.rank() == 2);
  CHECK(g.order() == 12);
  CHECK(g.exponent() == 6);
  CHECK_FALSE(g.is_cyclic());
  CHECK_FALSE(g.is_trivial());
  CHECK_FALSE(g.is_p_group());
  CHECK(GroupSpec::make({2, 4}).is_p_group());
  CHECK(GroupSpec::make({7}).is_p_group());
  CHECK(GroupSpec::make({7}).is_cyclic());
  CHECK(GroupSpec::make({}).is_trivial());
  CHECK(GroupSpec::make({}).order() == 1);
  CHECK(g.str() == "[2,6]");
}

TEST_CASE("element arithmetic wraps per factor") {
  GroupSpec g = GroupSpec::make({3, 9});
  GroupElement a = g.element({2, 7});
  GroupElement b = g.element({2, 5});
  CHECK(g.add(a, b) == g.element({1, 3}));
  CHECK(g.sub(a, b) == g.element({0, 2}));
  CHECK(g.neg(a) == g.element({1, 2}));
  CHECK(g.add(a, g.neg(a)) == g.zero());
  CHECK(g.scalar_mul(5, a) == g.element({10, 35}));
  CHECK(g.scalar_mul(-1, a) == g.neg(a));
  CHECK(g.scalar_mul(0, a) == g.zero());
  CHECK(g.element({-1, -1}) == g.element({2, 8}));
  CHECK(g.is_zero(g.zero()));
  CHECK_FALSE(g.is_zero(a));
}

TEST_CASE("element order") {
  GroupSpec g = GroupSpec::make({2, 6});
  CHECK(g.element_order(g.zero()) == 1);
  CHECK(g.element_order(g.element({1, 0})) == 2);
  CHECK(g.element_order(g.element({0, 1})) == 6);
  CHECK(g.element_order(g.element({1, 3})) == 2);
  CHECK(g.element_order(g.element({1, 2})) == 6);
}

TEST_CASE("rank mismatches are rejected") {
  GroupSpec g = GroupSpec::make({3, 3});
  GroupElement wrong = GroupSpec::make({3}).element({1});
  CHECK(code_of([&] { g.add(g.zero(), wrong); }) == Errc::rank_mismatch);
  CHECK(code_of([&] { g.reduce({1}); }) == Errc::rank_mismatch);
  CHECK(code_of([&] { g.basis(2); }) == Errc::rank_mismatch);
}

TEST_CASE("dense indexing is a bijection") {
  GroupSpec g = GroupSpec::make({2, 4});
  auto all = g.elements();
  REQUIRE(all.size() == 8);
  for (long long i = 0; i < 8; ++i) {
    CHECK(g.index_of(all[static_cast<size_t>(i)]) == i);
    CHECK(g.element_at(i) == all[static_cast<size_t>(i)]);
  }
  // lexicographic order of residue tuples
  CHECK(std::is_sorted(all.begin(), all.end()));
  zerosum::Guards tight;
  tight.max_group_order = 4;
  CHECK(code_of([&] { g.elements(tight); }) == Errc::size_guard_exceeded);
}

TEST_CASE("basis vectors") {
  GroupSpec g = GroupSpec::make({2, 4, 4});
  CHECK(g.basis(0) == g.element({1, 0, 0}));
  CHECK(g.basis(2) == g.element({0, 0, 1}));
  CHECK(g.element_order(g.basis(1)) == 4);
}

TEST_CASE("direct sum keeps both coordinate blocks") {
  GroupSpec a = GroupSpec::make({3, 3});
  GroupSpec b = GroupSpec::make({2, 4});
  zerosum::DirectSum d = direct_sum(a, b);
  CHECK(d.group.factors() == std::vector<int>({3, 3, 2, 4}));
  CHECK_FALSE(d.group.is_chain());
  CHECK(d.group.order() == a.order() * b.order());
  GroupElement x = a.element({1, 2});
  GroupElement y = b.element({1, 3});
  GroupElement p = d.pair(x, y);
  CHECK(p == d.group.element({1, 2, 1, 3}));
  CHECK(d.project1(p) == x);
  CHECK(d.project2(p) == y);
  CHECK(d.group.add(d.embed1(x), d.embed2(y)) == p);
  // embeddings are group homomorphisms on their blocks
  GroupElement x2 = a.element({2, 2});
  CHECK(d.embed1(a.add(x, x2)) == d.group.add(d.embed1(x), d.embed1(x2)));
}
