#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zerosum/group.hpp"

namespace zerosum {

// Multiplicity cap; anything beyond it is a modelling error, not a real input.
inline constexpr long long kMaxMultiplicity = 1LL << 32;

// Element of the free abelian monoid over a group: a finite multiset of group
// elements, stored canonically as (element, multiplicity) pairs sorted by
// element.  Immutable value semantics: every operation returns a new sequence.
class Sequence {
 public:
  using Term = std::pair<GroupElement, long long>;

  explicit Sequence(GroupSpec group) : group_(std::move(group)) {}

  static Sequence from_terms(const GroupSpec& group, const std::vector<GroupElement>& terms) {
    Sequence s(group);
    for (const GroupElement& g : terms) s.bump(group.reduce_checked(g), 1);
    s.normalize();
    return s;
  }

  static Sequence from_multiplicities(const GroupSpec& group,
                                      const std::vector<Term>& terms) {
    Sequence s(group);
    for (const Term& t : terms) {
      require(t.second > 0, Errc::invalid_input, "Sequence.from_multiplicities",
              "multiplicity must be positive");
      s.bump(group.reduce_checked(t.first), t.second);
    }
    s.normalize();
    return s;
  }

  const GroupSpec& group() const { return group_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  long long length() const {
    long long n = 0;
    for (const Term& t : terms_) n += t.second;
    return n;
  }

  long long multiplicity(const GroupElement& g) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), g,
                               [](const Term& t, const GroupElement& e) { return t.first < e; });
    if (it != terms_.end() && it->first == g) return it->second;
    return 0;
  }

  bool contains(const GroupElement& g) const { return multiplicity(g) > 0; }

  std::vector<GroupElement> support() const {
    std::vector<GroupElement> out;
    out.reserve(terms_.size());
    for (const Term& t : terms_) out.push_back(t.first);
    return out;
  }

  GroupElement sum() const {
    GroupElement acc = group_.zero();
    for (const Term& t : terms_) acc = group_.add(acc, group_.scalar_mul(t.second, t.first));
    return acc;
  }

  Sequence concat(const Sequence& other) const {
    check_group(other, "Sequence.concat");
    Sequence out(group_);
    out.terms_.reserve(terms_.size() + other.terms_.size());
    size_t i = 0, j = 0;
    while (i < terms_.size() || j < other.terms_.size()) {
      if (j == other.terms_.size() || (i < terms_.size() && terms_[i].first < other.terms_[j].first)) {
        out.terms_.push_back(terms_[i++]);
      } else if (i == terms_.size() || other.terms_[j].first < terms_[i].first) {
        out.terms_.push_back(other.terms_[j++]);
      } else {
        long long m = terms_[i].second + other.terms_[j].second;
        require(m <= kMaxMultiplicity, Errc::multiplicity_overflow, "Sequence.concat",
                "multiplicity cap exceeded");
        out.terms_.emplace_back(terms_[i].first, m);
        ++i;
        ++j;
      }
    }
    return out;
  }

  bool divides(const Sequence& whole) const {
    check_group(whole, "Sequence.divides");
    for (const Term& t : terms_)
      if (whole.multiplicity(t.first) < t.second) return false;
    return true;
  }

  // this / part; requires part | this.
  Sequence divide(const Sequence& part) const {
    check_group(part, "Sequence.divide");
    require(part.divides(*this), Errc::not_a_subsequence, "Sequence.divide",
            "argument does not divide the sequence");
    Sequence out(group_);
    out.terms_.reserve(terms_.size());
    for (const Term& t : terms_) {
      long long m = t.second - part.multiplicity(t.first);
      if (m > 0) out.terms_.emplace_back(t.first, m);
    }
    return out;
  }

  Sequence negate() const {
    Sequence out(group_);
    out.terms_.reserve(terms_.size());
    for (const Term& t : terms_) out.bump(group_.neg(t.first), t.second);
    out.normalize();
    return out;
  }

  Sequence power(long long k) const {
    require(k >= 0, Errc::invalid_input, "Sequence.power", "negative exponent");
    Sequence out(group_);
    if (k == 0) return out;
    out.terms_.reserve(terms_.size());
    for (const Term& t : terms_) {
      long long m = t.second * k;
      require(m / k == t.second && m <= kMaxMultiplicity, Errc::multiplicity_overflow,
              "Sequence.power", "multiplicity cap exceeded");
      out.terms_.emplace_back(t.first, m);
    }
    return out;
  }

  Sequence add_one(const GroupElement& g) const {
    Sequence out(*this);
    out.bump(group_.reduce_checked(g), 1);
    out.normalize();
    return out;
  }

  Sequence remove_one(const GroupElement& g) const {
    require(multiplicity(g) > 0, Errc::not_a_subsequence, "Sequence.remove_one",
            "element not present");
    Sequence out(group_);
    out.terms_.reserve(terms_.size());
    for (const Term& t : terms_) {
      long long m = t.second - (t.first == g ? 1 : 0);
      if (m > 0) out.terms_.emplace_back(t.first, m);
    }
    return out;
  }

  // Terms expanded with repetition, in canonical order.
  std::vector<GroupElement> expand(const Guards& guards = Guards{}) const {
    require(length() <= guards.max_expand, Errc::size_guard_exceeded, "Sequence.expand",
            "expanded length exceeds guard");
    std::vector<GroupElement> out;
    out.reserve(static_cast<size_t>(length()));
    for (const Term& t : terms_)
      for (long long i = 0; i < t.second; ++i) out.push_back(t.first);
    return out;
  }

  // Canonical string form; doubles as memoization key.  The group is part of
  // the key: equal multisets over different groups are different sequences.
  std::string key() const {
    std::string s = group_.str();
    s += ":";
    for (const Term& t : terms_) {
      s += std::to_string(t.second);
      s += "x";
      s += t.first.str();
      s += ";";
    }
    return s;
  }

  friend bool operator==(const Sequence& a, const Sequence& b) {
    return a.group_ == b.group_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const Sequence& a, const Sequence& b) { return !(a == b); }
  friend bool operator<(const Sequence& a, const Sequence& b) { return a.terms_ < b.terms_; }

 private:
  void bump(const GroupElement& g, long long count) {
    terms_.emplace_back(g, count);
  }

  void normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.first < b.first; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const Term& t : terms_) {
      if (!merged.empty() && merged.back().first == t.first) {
        merged.back().second += t.second;
        require(merged.back().second <= kMaxMultiplicity, Errc::multiplicity_overflow,
                "Sequence.normalize", "multiplicity cap exceeded");
      } else {
        merged.push_back(t);
      }
    }
    terms_ = std::move(merged);
  }

  void check_group(const Sequence& other, const std::string& stage) const {
    require(group_ == other.group_, Errc::group_mismatch, stage,
            "sequences over different groups");
  }

  GroupSpec group_;
  std::vector<Term> terms_;
};

// Product of a list of sequences over one group.
inline Sequence product_of(const GroupSpec& group, const std::vector<Sequence>& parts) {
  Sequence acc(group);
  for (const Sequence& s : parts) acc = acc.concat(s);
  return acc;
}

}  // namespace zerosum
