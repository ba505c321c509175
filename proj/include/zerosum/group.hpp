#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "zerosum/config.hpp"
#include "zerosum/errors.hpp"

namespace zerosum {

// Element of a finite abelian group, stored as one residue per cyclic factor,
// each normalized into [0, n_i).
struct GroupElement {
  std::vector<int> residues;

  GroupElement() = default;
  explicit GroupElement(std::vector<int> r) : residues(std::move(r)) {}

  int rank() const { return static_cast<int>(residues.size()); }

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.residues == b.residues;
  }
  friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }
  friend bool operator<(const GroupElement& a, const GroupElement& b) {
    return a.residues < b.residues;
  }
  friend bool operator<=(const GroupElement& a, const GroupElement& b) { return !(b < a); }
  friend bool operator>(const GroupElement& a, const GroupElement& b) { return b < a; }
  friend bool operator>=(const GroupElement& a, const GroupElement& b) { return !(a < b); }

  std::string str() const {
    std::string s = "(";
    for (size_t i = 0; i < residues.size(); ++i) {
      if (i > 0) s += ",";
      s += std::to_string(residues[i]);
    }
    s += ")";
    return s;
  }
};

// Finite abelian group presented as a direct sum of cyclic factors.  The
// checked constructor enforces the invariant-factor chain n_1 | n_2 | ... | n_r;
// the raw constructor admits any factor list >= 2 (used for direct sums, whose
// presentation deliberately keeps the concatenated factor order).
class GroupSpec {
 public:
  GroupSpec() = default;

  static GroupSpec make(std::vector<int> factors) {
    validate_factors(factors, "GroupSpec.make");
    for (size_t i = 0; i + 1 < factors.size(); ++i) {
      require(factors[i + 1] % factors[i] == 0, Errc::non_divisible_chain, "GroupSpec.make",
              std::to_string(factors[i]) + " does not divide " + std::to_string(factors[i + 1]));
    }
    return GroupSpec(std::move(factors), true);
  }

  static GroupSpec raw(std::vector<int> factors) {
    validate_factors(factors, "GroupSpec.raw");
    bool chain = true;
    for (size_t i = 0; i + 1 < factors.size(); ++i) {
      if (factors[i + 1] % factors[i] != 0) chain = false;
    }
    return GroupSpec(std::move(factors), chain);
  }

  const std::vector<int>& factors() const { return factors_; }
  int rank() const { return static_cast<int>(factors_.size()); }
  bool is_chain() const { return chain_; }
  bool is_trivial() const { return factors_.empty(); }
  bool is_cyclic() const { return factors_.size() <= 1; }

  long long order() const {
    long long o = 1;
    for (int f : factors_) o *= f;
    return o;
  }

  long long exponent() const {
    long long e = 1;
    for (int f : factors_) e = std::lcm(e, static_cast<long long>(f));
    return e;
  }

  bool is_p_group() const {
    if (factors_.empty()) return false;
    int p = smallest_prime_factor(factors_[0]);
    for (int f : factors_) {
      int x = f;
      while (x % p == 0) x /= p;
      if (x != 1) return false;
    }
    return true;
  }

  friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
    return a.factors_ == b.factors_;
  }
  friend bool operator!=(const GroupSpec& a, const GroupSpec& b) { return !(a == b); }

  std::string str() const {
    std::string s = "[";
    for (size_t i = 0; i < factors_.size(); ++i) {
      if (i > 0) s += ",";
      s += std::to_string(factors_[i]);
    }
    s += "]";
    return s;
  }

  // --- element arithmetic ---

  GroupElement zero() const { return GroupElement(std::vector<int>(factors_.size(), 0)); }

  bool is_zero(const GroupElement& a) const {
    check_rank(a, "GroupSpec.is_zero");
    for (int r : a.residues)
      if (r != 0) return false;
    return true;
  }

  // Normalizes arbitrary integer coordinates into canonical residues.
  GroupElement reduce(const std::vector<long long>& coords) const {
    require(coords.size() == factors_.size(), Errc::rank_mismatch, "GroupSpec.reduce",
            "expected rank " + std::to_string(rank()));
    std::vector<int> r(coords.size());
    for (size_t i = 0; i < coords.size(); ++i) {
      long long m = coords[i] % factors_[i];
      if (m < 0) m += factors_[i];
      r[i] = static_cast<int>(m);
    }
    return GroupElement(std::move(r));
  }

  GroupElement element(std::initializer_list<long long> coords) const {
    return reduce(std::vector<long long>(coords));
  }

  // Rank check plus residue normalization for externally built elements.
  GroupElement reduce_checked(const GroupElement& a) const {
    check_rank(a, "GroupSpec.reduce_checked");
    return reduce(std::vector<long long>(a.residues.begin(), a.residues.end()));
  }

  GroupElement add(const GroupElement& a, const GroupElement& b) const {
    check_rank(a, "GroupSpec.add");
    check_rank(b, "GroupSpec.add");
    std::vector<int> r(factors_.size());
    for (size_t i = 0; i < factors_.size(); ++i) {
      int s = a.residues[i] + b.residues[i];
      if (s >= factors_[i]) s -= factors_[i];
      r[i] = s;
    }
    return GroupElement(std::move(r));
  }

  GroupElement neg(const GroupElement& a) const {
    check_rank(a, "GroupSpec.neg");
    std::vector<int> r(factors_.size());
    for (size_t i = 0; i < factors_.size(); ++i) {
      r[i] = a.residues[i] == 0 ? 0 : factors_[i] - a.residues[i];
    }
    return GroupElement(std::move(r));
  }

  GroupElement sub(const GroupElement& a, const GroupElement& b) const { return add(a, neg(b)); }

  GroupElement scalar_mul(long long c, const GroupElement& a) const {
    check_rank(a, "GroupSpec.scalar_mul");
    std::vector<int> r(factors_.size());
    for (size_t i = 0; i < factors_.size(); ++i) {
      long long m = (c % factors_[i]) * a.residues[i] % factors_[i];
      if (m < 0) m += factors_[i];
      r[i] = static_cast<int>(m);
    }
    return GroupElement(std::move(r));
  }

  long long element_order(const GroupElement& a) const {
    check_rank(a, "GroupSpec.element_order");
    long long o = 1;
    for (size_t i = 0; i < factors_.size(); ++i) {
      long long n = factors_[i];
      long long d = std::gcd(n, static_cast<long long>(a.residues[i]));
      o = std::lcm(o, n / d);
    }
    return o;
  }

  // Standard basis vector e_i (0-based position).
  GroupElement basis(int i) const {
    require(i >= 0 && i < rank(), Errc::rank_mismatch, "GroupSpec.basis", "index out of range");
    std::vector<int> r(factors_.size(), 0);
    r[i] = factors_[i] == 1 ? 0 : 1;
    return GroupElement(std::move(r));
  }

  // --- dense indexing (mixed radix, lexicographic) ---

  long long index_of(const GroupElement& a) const {
    check_rank(a, "GroupSpec.index_of");
    long long idx = 0;
    for (size_t i = 0; i < factors_.size(); ++i) idx = idx * factors_[i] + a.residues[i];
    return idx;
  }

  GroupElement element_at(long long idx) const {
    std::vector<int> r(factors_.size());
    for (size_t i = factors_.size(); i-- > 0;) {
      r[i] = static_cast<int>(idx % factors_[i]);
      idx /= factors_[i];
    }
    return GroupElement(std::move(r));
  }

  // All elements in lexicographic order; guarded by max_group_order.
  std::vector<GroupElement> elements(const Guards& guards = Guards{}) const {
    require(order() <= guards.max_group_order, Errc::size_guard_exceeded, "GroupSpec.elements",
            "group order " + std::to_string(order()) + " exceeds guard " +
                std::to_string(guards.max_group_order));
    std::vector<GroupElement> out;
    out.reserve(static_cast<size_t>(order()));
    for (long long i = 0; i < order(); ++i) out.push_back(element_at(i));
    return out;
  }

 private:
  GroupSpec(std::vector<int> factors, bool chain) : factors_(std::move(factors)), chain_(chain) {}

  static void validate_factors(const std::vector<int>& factors, const std::string& stage) {
    for (int f : factors)
      require(f >= 2, Errc::invalid_factor, stage, "factor " + std::to_string(f) + " < 2");
  }

  static int smallest_prime_factor(int n) {
    for (int p = 2; p * p <= n; ++p)
      if (n % p == 0) return p;
    return n;
  }

  void check_rank(const GroupElement& a, const std::string& stage) const {
    require(a.rank() == rank(), Errc::rank_mismatch, stage,
            "element rank " + std::to_string(a.rank()) + " vs group rank " + std::to_string(rank()));
  }

  std::vector<int> factors_;
  bool chain_ = true;
};

// Direct sum with the concatenated (non-renormalized) factor list plus the two
// coordinate embeddings.  Keeping the raw presentation keeps every embedded
// element recognizable and keeps D* additive minus one.
struct DirectSum {
  GroupSpec group;
  GroupSpec left;
  GroupSpec right;

  GroupElement embed1(const GroupElement& a) const {
    require(a.rank() == left.rank(), Errc::rank_mismatch, "DirectSum.embed1", "rank mismatch");
    std::vector<int> r(a.residues);
    r.resize(group.factors().size(), 0);
    return GroupElement(std::move(r));
  }

  GroupElement embed2(const GroupElement& b) const {
    require(b.rank() == right.rank(), Errc::rank_mismatch, "DirectSum.embed2", "rank mismatch");
    std::vector<int> r(group.factors().size(), 0);
    for (size_t i = 0; i < b.residues.size(); ++i) r[left.rank() + i] = b.residues[i];
    return GroupElement(std::move(r));
  }

  GroupElement pair(const GroupElement& a, const GroupElement& b) const {
    return group.add(embed1(a), embed2(b));
  }

  GroupElement project1(const GroupElement& g) const {
    std::vector<int> r(g.residues.begin(), g.residues.begin() + left.rank());
    return GroupElement(std::move(r));
  }

  GroupElement project2(const GroupElement& g) const {
    std::vector<int> r(g.residues.begin() + left.rank(), g.residues.end());
    return GroupElement(std::move(r));
  }
};

inline DirectSum direct_sum(const GroupSpec& a, const GroupSpec& b) {
  std::vector<int> f = a.factors();
  f.insert(f.end(), b.factors().begin(), b.factors().end());
  return DirectSum{GroupSpec::raw(std::move(f)), a, b};
}

}  // namespace zerosum
