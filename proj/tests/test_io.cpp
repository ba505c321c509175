#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "zerosum/io.hpp"

using namespace zerosum;
using io::json;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error to be thrown");
  return Errc::internal_inconsistency;
}

GroupElement el(std::initializer_list<int> r) { return GroupElement(std::vector<int>(r)); }

}  // namespace

TEST_CASE("groups, elements and sequences round-trip through JSON") {
  GroupSpec g = GroupSpec::make({2, 4});

  SECTION("group") {
    json j = io::group_to_json(g);
    CHECK(j.dump() == "[2,4]");
    CHECK(io::group_from_json(j) == g);
  }
  SECTION("non-chain presentation survives") {
    GroupSpec raw = GroupSpec::raw({4, 2});
    json j = io::group_to_json(raw);
    GroupSpec back = io::group_from_json(j);
    CHECK(back.factors() == raw.factors());
    CHECK_FALSE(back.is_chain());
  }
  SECTION("element") {
    GroupElement e = el({1, 3});
    json j = io::element_to_json(e);
    CHECK(j.dump() == "[1,3]");
    CHECK(io::element_from_json(g, j) == e);
    // residues are reduced on parse
    CHECK(io::element_from_json(g, io::parse("[3,7]")) == el({1, 3}));
  }
  SECTION("sequence, bit-exact and canonically ordered") {
    Sequence s = Sequence::from_terms(g, {el({1, 3}), el({0, 1}), el({0, 1}), el({1, 0})});
    json j = io::sequence_to_json(s);
    Sequence back = io::sequence_from_json(j);
    CHECK(back == s);
    CHECK(io::dump(j) == io::dump(io::sequence_to_json(back)));
    // terms are emitted in canonical sorted order regardless of insertion order
    CHECK(j["terms"].dump() == "[[0,1],[0,1],[1,0],[1,3]]");
  }
  SECTION("expansion guard") {
    Guards tight;
    tight.max_expand = 3;
    Sequence s = Sequence::from_multiplicities(g, {{el({0, 1}), 4}});
    CHECK(code_of([&] { io::sequence_to_json(s, tight); }) == Errc::size_guard_exceeded);
  }
  SECTION("malformed input is rejected with invalid_input") {
    CHECK(code_of([] { io::parse("{not json"); }) == Errc::invalid_input);
    CHECK(code_of([&] { io::sequence_from_json(io::parse("{\"group\":[2,4]}")); }) ==
          Errc::invalid_input);
    CHECK(code_of([&] { io::element_from_json(g, io::parse("[1,\"x\"]")); }) ==
          Errc::invalid_input);
    CHECK(code_of([] { io::group_from_json(io::parse("[2,1]")); }) == Errc::invalid_factor);
  }
}

TEST_CASE("nice certificates round-trip and re-verify") {
  SECTION("odd branch") {
    NiceCertificate c = rank2_nice(3, 1).certificate;
    json j = io::nice_to_json(c);
    CHECK(j["kind"] == "nice");
    CHECK(j["branch"] == "odd");
    NiceCertificate back = io::nice_from_json(j);
    CHECK(back.atoms == c.atoms);
    CHECK(back.chosen == c.chosen);
    CHECK(back.triple == c.triple);
    CHECK(back.chosen_pairing == c.chosen_pairing);
    VerificationReport rep = verify_nice(back.product(), back);
    CAPTURE(rep.first_failure());
    CHECK(rep.valid);
    CHECK(io::dump(io::nice_to_json(back)) == io::dump(j));
  }
  SECTION("even branch") {
    NiceCertificate c = rank3_nice(2, 2, 2).certificate;
    json j = io::nice_to_json(c);
    CHECK(j["branch"] == "even");
    NiceCertificate back = io::nice_from_json(j);
    CHECK(back.extra_atom_index == c.extra_atom_index);
    CHECK(back.extra_element == c.extra_element);
    CHECK(back.selected_pairing == c.selected_pairing);
    VerificationReport rep = verify_nice(back.product(), back);
    CAPTURE(rep.first_failure());
    CHECK(rep.valid);
  }
  SECTION("tampering is caught by verification, not parsing") {
    NiceCertificate c = rank2_nice(3, 1).certificate;
    json j = io::nice_to_json(c);
    j["chosen"][0] = io::element_to_json(c.group.add(c.chosen[0], c.group.basis(0)));
    NiceCertificate back = io::nice_from_json(j);  // parses fine
    CHECK_FALSE(verify_nice(back.product(), back).valid);
  }
  SECTION("wrong kind is rejected") {
    NiceCertificate c = rank2_nice(3, 1).certificate;
    json j = io::nice_to_json(c);
    j["kind"] = "pair_nice";
    CHECK(code_of([&] { io::nice_from_json(j); }) == Errc::invalid_input);
  }
}

TEST_CASE("pair-nice certificates round-trip") {
  GroupSpec g = GroupSpec::make({2, 2});
  Sequence u = Sequence::from_terms(g, {el({1, 0}), el({0, 1}), el({1, 1})});
  PairNiceCertificate c;
  c.group = g;
  c.atoms = {u, u};
  c.chosen = {el({1, 0}), el({1, 0})};
  c.chosen_pairing = {{0, 1}};
  REQUIRE(verify_pair_nice(c.product(), c).valid);

  json j = io::pair_nice_to_json(c);
  CHECK(io::certificate_kind(j) == "pair_nice");
  PairNiceCertificate back = io::pair_nice_from_json(j);
  CHECK(back.atoms == c.atoms);
  CHECK(back.chosen == c.chosen);
  CHECK(back.chosen_pairing == c.chosen_pairing);
  CHECK(verify_pair_nice(back.product(), back).valid);
}

TEST_CASE("construction results re-verify from their JSON serialization") {
  ConstructionResult r = build_nice(GroupSpec::make({3, 3}));
  json j = io::construction_to_json(r);
  ConstructionResult back = io::construction_from_json(j);

  CHECK(back.group == r.group);
  CHECK(back.k_star == r.k_star);
  CHECK(back.sequence == r.sequence);
  CHECK(back.bound.k == r.bound.k);
  CHECK(back.bound.value == r.bound.value);
  CHECK(back.trace.size() == r.trace.size());

  // the parsed certificate verifies against the parsed sequence from scratch
  VerificationReport rep = verify_nice(back.sequence, back.certificate);
  CAPTURE(rep.first_failure());
  REQUIRE(rep.valid);
  CHECK(rep.k == back.k_star);

  // and the parsed witness factorizations re-certify the bound
  auto [f_short, f_long] = lengths_from_nice(back.sequence, back.certificate);
  RhoBound b = rho_lower_bound_witness(back.group, static_cast<long long>(f_short.size()),
                                       back.sequence, f_short, f_long);
  CHECK(b.value == back.bound.value);

  // byte-identical re-serialization
  CHECK(io::dump(io::construction_to_json(back)) == io::dump(j));
}

TEST_CASE("reports serialize with stable schemas") {
  SECTION("davenport") {
    DavenportReport r = davenport_exact(GroupSpec::make({3, 3}));
    json j = io::davenport_to_json(r);
    CHECK(j["d_star"] == 5);
    CHECK(j["d_exact"] == 5);
    CHECK(j["group"].dump() == "[3,3]");
    CHECK(j["zero_sum_free_witness"].is_array());
    CHECK(j["zero_sum_free_witness"].size() == 4);
  }
  SECTION("length set") {
    GroupSpec g = GroupSpec::make({3});
    LengthOracle oracle(Guards{});
    Sequence a = Sequence::from_multiplicities(g, {{el({1}), 3}, {el({2}), 3}});
    json j = io::length_set_to_json(oracle.set_of_lengths(a));
    CHECK(j["lengths"].dump() == "[2,3]");
    CHECK(j["min"] == 2);
    CHECK(j["max"] == 3);
  }
  SECTION("union report with witnesses") {
    UnionReport r = union_k(GroupSpec::make({2, 2}), 2);
    json j = io::union_report_to_json(r);
    CHECK(j["exact"] == true);
    CHECK(j["hi"] == 3);
    REQUIRE(j["witness_hi"].is_object());
    CHECK(j["witness_hi"]["base"].size() == 2);
    CHECK(j["witness_hi"]["extremal"].size() == 3);
  }
  SECTION("theorem bound") {
    TheoremBound t = theorem_bound(GroupSpec::make({3, 3}), 8);
    json j = io::theorem_to_json(t);
    CHECK(j["davenport_established"] == true);
    CHECK(j["k_star"] == 6);
    CHECK(j["value"] == t.value);
    CHECK(j["trace"].is_array());
  }
  SECTION("verification report") {
    NiceCertificate c = rank2_nice(3, 1).certificate;
    json j = io::verification_to_json(verify_nice(c.product(), c));
    CHECK(j["valid"] == true);
    CHECK(j["checks"].is_array());
    CHECK(j["checks"].size() > 0);
  }
}
