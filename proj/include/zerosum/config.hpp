#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>

#include "zerosum/errors.hpp"

namespace zerosum {

// Resource guards for the exhaustive procedures.  Every guard is explicit and
// an exceeded guard raises SizeGuardExceeded / BudgetExhausted; no silent
// truncation happens anywhere.
struct Guards {
  long long max_sequence_length = 24;    // length-set computations
  long long max_group_order = 128;       // reachability tables, atom enumeration
  long long max_atom_count = 20000;      // atom enumeration output size
  int max_union_k = 3;                   // exact union_k arity
  long long budget_nodes = 200000000;    // search-node budget for backtracking
  double budget_secs = 300.0;            // wall-clock budget for union_k
  long long max_expand = 1000000;        // expanded term lists (serialization)
  int threads = 1;                       // worker cap for parallel reductions

  static Guards ci() {
    Guards g;
    g.max_sequence_length = 18;
    g.max_group_order = 64;
    g.max_atom_count = 5000;
    g.budget_nodes = 50000000;
    g.budget_secs = 60.0;
    return g;
  }
  static Guards desk() { return Guards{}; }
  static Guards heavy() {
    Guards g;
    g.max_sequence_length = 30;
    g.max_group_order = 512;
    g.max_atom_count = 100000;
    g.budget_nodes = 2000000000;
    g.budget_secs = 3600.0;
    return g;
  }

  // Profile from ZEROSUM_GUARD_PROFILE (ci|desk|heavy); unset or unknown -> desk.
  static Guards from_env() {
    const char* p = std::getenv("ZEROSUM_GUARD_PROFILE");
    Guards g;
    if (p != nullptr) {
      std::string s(p);
      if (s == "ci") g = ci();
      else if (s == "heavy") g = heavy();
      else g = desk();
    }
    unsigned hw = std::thread::hardware_concurrency();
    g.threads = hw == 0 ? 1 : static_cast<int>(hw);
    return g;
  }
};

}  // namespace zerosum
