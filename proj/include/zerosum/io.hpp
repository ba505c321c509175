#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zerosum/atoms.hpp"
#include "zerosum/certificates.hpp"
#include "zerosum/construct.hpp"
#include "zerosum/group.hpp"
#include "zerosum/lengths.hpp"
#include "zerosum/sequence.hpp"

// JSON serialization with pinned, deterministic schemas.  nlohmann::json with
// the default (alphabetically ordered) object representation, so identical
// values dump to identical bytes.  Parsers validate shape explicitly and fail
// with invalid_input naming the offending field; they never trust structure.
//
// Schemas:
//   group        [n1,...,nr]                     invariant factors
//   element      [r1,...,rr]                     residues, one per factor
//   sequence     {"group":[...],"terms":[[...],...]}   terms with repetition,
//                                                canonical sorted order
//   pairing      [{"count":c,"first":[...],"second":[...]},...]
//   certificate  {"kind":"nice"|"pair_nice","group":[...],"atoms":[[[...],...],...],
//                 "chosen":[[...],...],"branch":"odd"|"even",
//                 "triple":[i,j,k]?,"extra":{"atom_index":i,"element":[...]}?,
//                 "pairings":{"chosen"|"selected":[[i,j],...],"remainder":pairing}}
// Indices are 0-based throughout.

namespace zerosum {
namespace io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Parse helpers
// ---------------------------------------------------------------------------

inline const json& expect(const json& j, const char* key, const std::string& where) {
  require(j.is_object(), Errc::invalid_input, where, "expected an object");
  auto it = j.find(key);
  require(it != j.end(), Errc::invalid_input, where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline long long expect_int(const json& j, const std::string& where) {
  require(j.is_number_integer(), Errc::invalid_input, where, "expected an integer");
  return j.get<long long>();
}

inline bool expect_bool(const json& j, const std::string& where) {
  require(j.is_boolean(), Errc::invalid_input, where, "expected a boolean");
  return j.get<bool>();
}

inline std::string expect_string(const json& j, const std::string& where) {
  require(j.is_string(), Errc::invalid_input, where, "expected a string");
  return j.get<std::string>();
}

inline const json& expect_array(const json& j, const std::string& where) {
  require(j.is_array(), Errc::invalid_input, where, "expected an array");
  return j;
}

// ---------------------------------------------------------------------------
// Groups and elements
// ---------------------------------------------------------------------------

inline json group_to_json(const GroupSpec& g) {
  json j = json::array();
  for (int f : g.factors()) j.push_back(f);
  return j;
}

inline GroupSpec group_from_json(const json& j, const std::string& where = "group_from_json") {
  expect_array(j, where);
  std::vector<int> factors;
  for (const json& v : j) factors.push_back(static_cast<int>(expect_int(v, where + ".factor")));
  // raw: direct-sum presentations of composed results need not form a chain
  return GroupSpec::raw(std::move(factors));
}

inline json element_to_json(const GroupElement& e) {
  json j = json::array();
  for (int r : e.residues) j.push_back(r);
  return j;
}

inline GroupElement element_from_json(const GroupSpec& g, const json& j,
                                      const std::string& where = "element_from_json") {
  expect_array(j, where);
  std::vector<int> residues;
  for (const json& v : j) residues.push_back(static_cast<int>(expect_int(v, where + ".residue")));
  return g.reduce_checked(GroupElement(std::move(residues)));
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

// Terms with repetition, in the sequence's canonical order.
inline json terms_to_json(const Sequence& s, const Guards& guards = Guards{}) {
  require(s.length() <= guards.max_expand, Errc::size_guard_exceeded, "terms_to_json",
          "sequence too long to expand into a term list");
  json j = json::array();
  for (const auto& [e, mult] : s.terms())
    for (long long i = 0; i < mult; ++i) j.push_back(element_to_json(e));
  return j;
}

inline Sequence terms_from_json(const GroupSpec& g, const json& j,
                                const std::string& where = "terms_from_json") {
  expect_array(j, where);
  std::vector<GroupElement> elems;
  for (const json& v : j) elems.push_back(element_from_json(g, v, where + ".term"));
  return Sequence::from_terms(g, elems);
}

inline json sequence_to_json(const Sequence& s, const Guards& guards = Guards{}) {
  json j;
  j["group"] = group_to_json(s.group());
  j["terms"] = terms_to_json(s, guards);
  return j;
}

inline Sequence sequence_from_json(const json& j,
                                   const std::string& where = "sequence_from_json") {
  GroupSpec g = group_from_json(expect(j, "group", where), where + ".group");
  return terms_from_json(g, expect(j, "terms", where), where + ".terms");
}

inline json factorization_to_json(const Factorization& f, const Guards& guards = Guards{}) {
  json j = json::array();
  for (const Sequence& s : f) j.push_back(terms_to_json(s, guards));
  return j;
}

inline Factorization factorization_from_json(const GroupSpec& g, const json& j,
                                             const std::string& where = "factorization_from_json") {
  expect_array(j, where);
  Factorization f;
  for (const json& v : j) f.push_back(terms_from_json(g, v, where + ".factor"));
  return f;
}

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

inline json pairing_to_json(const Pairing& p) {
  json j = json::array();
  for (const Pairing::Entry& e : p.pairs) {
    json entry;
    entry["count"] = e.count;
    entry["first"] = element_to_json(e.first);
    entry["second"] = element_to_json(e.second);
    j.push_back(entry);
  }
  return j;
}

inline Pairing pairing_from_json(const GroupSpec& g, const json& j,
                                 const std::string& where = "pairing_from_json") {
  expect_array(j, where);
  Pairing p;
  for (const json& v : j) {
    Pairing::Entry e;
    e.count = expect_int(expect(v, "count", where), where + ".count");
    e.first = element_from_json(g, expect(v, "first", where), where + ".first");
    e.second = element_from_json(g, expect(v, "second", where), where + ".second");
    p.pairs.push_back(std::move(e));
  }
  return p;
}

inline json index_pairs_to_json(const std::vector<std::pair<int, int>>& pairs) {
  json j = json::array();
  for (const auto& [a, b] : pairs) j.push_back(json::array({a, b}));
  return j;
}

inline std::vector<std::pair<int, int>> index_pairs_from_json(
    const json& j, const std::string& where = "index_pairs_from_json") {
  expect_array(j, where);
  std::vector<std::pair<int, int>> out;
  for (const json& v : j) {
    expect_array(v, where + ".pair");
    require(v.size() == 2, Errc::invalid_input, where, "index pair must have exactly 2 entries");
    out.push_back({static_cast<int>(expect_int(v[0], where)),
                   static_cast<int>(expect_int(v[1], where))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

inline json nice_to_json(const NiceCertificate& c, const Guards& guards = Guards{}) {
  json j;
  j["kind"] = "nice";
  j["group"] = group_to_json(c.group);
  json atoms = json::array();
  for (const Sequence& a : c.atoms) atoms.push_back(terms_to_json(a, guards));
  j["atoms"] = std::move(atoms);
  json chosen = json::array();
  for (const GroupElement& e : c.chosen) chosen.push_back(element_to_json(e));
  j["chosen"] = std::move(chosen);
  json pairings;
  if (c.branch == NiceCertificate::Branch::odd) {
    j["branch"] = "odd";
    j["triple"] = json::array({c.triple[0], c.triple[1], c.triple[2]});
    pairings["chosen"] = index_pairs_to_json(c.chosen_pairing);
  } else {
    j["branch"] = "even";
    json extra;
    extra["atom_index"] = c.extra_atom_index;
    extra["element"] = element_to_json(c.extra_element);
    j["extra"] = std::move(extra);
    pairings["selected"] = index_pairs_to_json(c.selected_pairing);
  }
  pairings["remainder"] = pairing_to_json(c.remainder_pairing);
  j["pairings"] = std::move(pairings);
  return j;
}

inline NiceCertificate nice_from_json(const json& j,
                                      const std::string& where = "nice_from_json") {
  require(expect_string(expect(j, "kind", where), where + ".kind") == "nice", Errc::invalid_input,
          where, "kind must be \"nice\"");
  NiceCertificate c;
  c.group = group_from_json(expect(j, "group", where), where + ".group");
  for (const json& v : expect_array(expect(j, "atoms", where), where + ".atoms"))
    c.atoms.push_back(terms_from_json(c.group, v, where + ".atom"));
  for (const json& v : expect_array(expect(j, "chosen", where), where + ".chosen"))
    c.chosen.push_back(element_from_json(c.group, v, where + ".chosen"));
  std::string branch = expect_string(expect(j, "branch", where), where + ".branch");
  const json& pairings = expect(j, "pairings", where);
  if (branch == "odd") {
    c.branch = NiceCertificate::Branch::odd;
    const json& t = expect_array(expect(j, "triple", where), where + ".triple");
    require(t.size() == 3, Errc::invalid_input, where, "triple must have exactly 3 entries");
    for (int i = 0; i < 3; ++i)
      c.triple[static_cast<size_t>(i)] = static_cast<int>(expect_int(t[static_cast<size_t>(i)], where + ".triple"));
    c.chosen_pairing = index_pairs_from_json(expect(pairings, "chosen", where + ".pairings"),
                                             where + ".pairings.chosen");
  } else if (branch == "even") {
    c.branch = NiceCertificate::Branch::even;
    const json& extra = expect(j, "extra", where);
    c.extra_atom_index =
        static_cast<int>(expect_int(expect(extra, "atom_index", where + ".extra"), where + ".extra.atom_index"));
    c.extra_element =
        element_from_json(c.group, expect(extra, "element", where + ".extra"), where + ".extra.element");
    c.selected_pairing = index_pairs_from_json(expect(pairings, "selected", where + ".pairings"),
                                               where + ".pairings.selected");
  } else {
    require(false, Errc::invalid_input, where, "branch must be \"odd\" or \"even\"");
  }
  c.remainder_pairing = pairing_from_json(c.group, expect(pairings, "remainder", where + ".pairings"),
                                          where + ".pairings.remainder");
  return c;
}

inline json pair_nice_to_json(const PairNiceCertificate& c, const Guards& guards = Guards{}) {
  json j;
  j["kind"] = "pair_nice";
  j["group"] = group_to_json(c.group);
  json atoms = json::array();
  for (const Sequence& a : c.atoms) atoms.push_back(terms_to_json(a, guards));
  j["atoms"] = std::move(atoms);
  json chosen = json::array();
  for (const GroupElement& e : c.chosen) chosen.push_back(element_to_json(e));
  j["chosen"] = std::move(chosen);
  json pairings;
  pairings["chosen"] = index_pairs_to_json(c.chosen_pairing);
  j["pairings"] = std::move(pairings);
  return j;
}

inline PairNiceCertificate pair_nice_from_json(const json& j,
                                               const std::string& where = "pair_nice_from_json") {
  require(expect_string(expect(j, "kind", where), where + ".kind") == "pair_nice",
          Errc::invalid_input, where, "kind must be \"pair_nice\"");
  PairNiceCertificate c;
  c.group = group_from_json(expect(j, "group", where), where + ".group");
  for (const json& v : expect_array(expect(j, "atoms", where), where + ".atoms"))
    c.atoms.push_back(terms_from_json(c.group, v, where + ".atom"));
  for (const json& v : expect_array(expect(j, "chosen", where), where + ".chosen"))
    c.chosen.push_back(element_from_json(c.group, v, where + ".chosen"));
  c.chosen_pairing = index_pairs_from_json(
      expect(expect(j, "pairings", where), "chosen", where + ".pairings"), where + ".pairings.chosen");
  return c;
}

inline std::string certificate_kind(const json& j, const std::string& where = "certificate_kind") {
  return expect_string(expect(j, "kind", where), where + ".kind");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json verification_to_json(const VerificationReport& r) {
  json j;
  j["valid"] = r.valid;
  j["k"] = r.k;
  j["d_star"] = r.d_star;
  j["short_length"] = r.short_length;
  j["long_length"] = r.long_length;
  json checks = json::array();
  for (const VerificationCheck& c : r.checks) {
    json e;
    e["stage"] = c.stage;
    e["passed"] = c.passed;
    e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return j;
}

inline json davenport_to_json(const DavenportReport& r, const Guards& guards = Guards{}) {
  json j;
  j["group"] = group_to_json(r.group);
  j["d_star"] = r.d_star;
  if (r.d_exact.has_value())
    j["d_exact"] = *r.d_exact;
  else
    j["d_exact"] = nullptr;
  j["nodes_visited"] = r.nodes_visited;
  j["max_zero_sum_free_length"] = r.max_zero_sum_free_length;
  if (r.zero_sum_free_witness.has_value())
    j["zero_sum_free_witness"] = terms_to_json(*r.zero_sum_free_witness, guards);
  else
    j["zero_sum_free_witness"] = nullptr;
  return j;
}

inline json length_set_to_json(const LengthSet& s, const Guards& guards = Guards{}) {
  json j;
  j["sequence"] = sequence_to_json(s.source, guards);
  json lengths = json::array();
  for (long long v : s.lengths) lengths.push_back(v);
  j["lengths"] = std::move(lengths);
  j["min"] = s.min();
  j["max"] = s.max();
  return j;
}

inline json union_report_to_json(const UnionReport& r, const Guards& guards = Guards{}) {
  json j;
  j["group"] = group_to_json(r.group);
  j["k"] = r.k;
  json values = json::array();
  for (long long v : r.values) values.push_back(v);
  j["values"] = std::move(values);
  j["lo"] = r.lo;
  j["hi"] = r.hi;
  j["exact"] = r.exact;
  j["budget_exhausted"] = r.budget_exhausted;
  j["tuples_total"] = r.tuples_total;
  j["orbits_deduped"] = r.orbits_deduped;
  auto witness = [&](const std::optional<UnionWitness>& w) -> json {
    if (!w.has_value()) return nullptr;
    json e;
    e["product"] = terms_to_json(w->product, guards);
    e["base"] = factorization_to_json(w->base, guards);
    e["extremal"] = factorization_to_json(w->extremal, guards);
    return e;
  };
  j["witness_lo"] = witness(r.witness_lo);
  j["witness_hi"] = witness(r.witness_hi);
  return j;
}

inline json trace_to_json(const std::vector<TraceEntry>& trace) {
  json j = json::array();
  for (const TraceEntry& e : trace) {
    json t;
    t["stage"] = e.stage;
    t["detail"] = e.detail;
    t["passed"] = e.passed;
    j.push_back(std::move(t));
  }
  return j;
}

inline std::vector<TraceEntry> trace_from_json(const json& j,
                                               const std::string& where = "trace_from_json") {
  expect_array(j, where);
  std::vector<TraceEntry> trace;
  for (const json& v : j) {
    TraceEntry e;
    e.stage = expect_string(expect(v, "stage", where), where + ".stage");
    e.detail = expect_string(expect(v, "detail", where), where + ".detail");
    e.passed = expect_bool(expect(v, "passed", where), where + ".passed");
    trace.push_back(std::move(e));
  }
  return trace;
}

inline json rho_bound_to_json(const RhoBound& b) {
  json j;
  j["group"] = group_to_json(b.group);
  j["k"] = b.k;
  j["value"] = b.value;
  return j;
}

inline RhoBound rho_bound_from_json(const json& j,
                                    const std::string& where = "rho_bound_from_json") {
  RhoBound b;
  b.group = group_from_json(expect(j, "group", where), where + ".group");
  b.k = expect_int(expect(j, "k", where), where + ".k");
  b.value = expect_int(expect(j, "value", where), where + ".value");
  return b;
}

inline json construction_to_json(const ConstructionResult& r, const Guards& guards = Guards{}) {
  json j;
  j["group"] = group_to_json(r.group);
  j["k_star"] = r.k_star;
  j["sequence"] = sequence_to_json(r.sequence, guards);
  j["certificate"] = nice_to_json(r.certificate, guards);
  j["bound"] = rho_bound_to_json(r.bound);
  j["trace"] = trace_to_json(r.trace);
  return j;
}

inline ConstructionResult construction_from_json(const json& j,
                                                 const std::string& where = "construction_from_json") {
  ConstructionResult r;
  r.group = group_from_json(expect(j, "group", where), where + ".group");
  r.k_star = static_cast<int>(expect_int(expect(j, "k_star", where), where + ".k_star"));
  r.sequence = sequence_from_json(expect(j, "sequence", where), where + ".sequence");
  r.certificate = nice_from_json(expect(j, "certificate", where), where + ".certificate");
  r.bound = rho_bound_from_json(expect(j, "bound", where), where + ".bound");
  r.trace = trace_from_json(expect(j, "trace", where), where + ".trace");
  return r;
}

inline json theorem_to_json(const TheoremBound& t, const Guards& guards = Guards{}) {
  json j;
  j["group"] = group_to_json(t.group);
  j["k"] = t.k;
  j["k_star"] = t.k_star;
  j["d_star"] = t.d_star;
  j["davenport"] = t.davenport;
  j["davenport_established"] = t.davenport_established;
  j["value"] = t.value;
  j["bound"] = rho_bound_to_json(t.bound);
  j["witness"] = sequence_to_json(t.witness, guards);
  j["trace"] = trace_to_json(t.trace);
  return j;
}

// Deterministic dump: sorted keys (the default object is an ordered map over
// strings), fixed indentation, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse(const std::string& text, const std::string& where = "io.parse") {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), Errc::invalid_input, where, "malformed JSON");
  return j;
}

}  // namespace io
}  // namespace zerosum
