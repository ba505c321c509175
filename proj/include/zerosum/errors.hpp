#pragma once

#include <stdexcept>
#include <string>

namespace zerosum {

// Error categories; the CLI maps them onto exit codes (see tools/zerosum_cli.cpp).
enum class Errc {
  invalid_factor,        // group factor < 2
  non_divisible_chain,   // invariant factors do not divide in order
  rank_mismatch,         // element rank != group rank
  group_mismatch,        // operands live over different groups
  trivial_group,         // operation undefined on the rank-0 group
  size_guard_exceeded,   // instance larger than the configured guard
  budget_exhausted,      // search budget ran out before completion
  multiplicity_overflow, // sequence multiplicity beyond the configured cap
  not_a_subsequence,     // divide() with a non-dividing argument
  not_zero_sum,          // length-set input with nonzero sum
  not_a_factorization,   // witness factors do not multiply to the sequence
  invalid_input,         // malformed structural input
  invalid_certificate,   // certificate fails structural validation
  precondition_failed,   // combinator input violates a stated precondition
  atom_check_failed,     // a sequence claimed to be an atom is not
  pairing_check_failed,  // a sequence claimed to pair into inverse pairs does not
  internal_inconsistency,// a step the construction guarantees did not hold
  k_mismatch,            // composition inputs with different k
  normalization_failed,  // certificate cannot be brought into the required layout
  cyclic_group,          // construction requested for a cyclic (or trivial) group
  usage                  // command-line usage error
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_factor: return "InvalidFactor";
    case Errc::non_divisible_chain: return "NonDivisibleChain";
    case Errc::rank_mismatch: return "RankMismatch";
    case Errc::group_mismatch: return "GroupMismatch";
    case Errc::trivial_group: return "TrivialGroup";
    case Errc::size_guard_exceeded: return "SizeGuardExceeded";
    case Errc::budget_exhausted: return "BudgetExhausted";
    case Errc::multiplicity_overflow: return "MultiplicityOverflow";
    case Errc::not_a_subsequence: return "NotASubsequence";
    case Errc::not_zero_sum: return "NotZeroSum";
    case Errc::not_a_factorization: return "NotAFactorization";
    case Errc::invalid_input: return "InvalidInput";
    case Errc::invalid_certificate: return "InvalidCertificate";
    case Errc::precondition_failed: return "PreconditionFailed";
    case Errc::atom_check_failed: return "AtomCheckFailed";
    case Errc::pairing_check_failed: return "PairingCheckFailed";
    case Errc::internal_inconsistency: return "InternalInconsistency";
    case Errc::k_mismatch: return "KMismatch";
    case Errc::normalization_failed: return "NormalizationFailed";
    case Errc::cyclic_group: return "CyclicGroup";
    case Errc::usage: return "Usage";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string stage, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + " at " + stage + ": " + message),
        code_(code),
        stage_(std::move(stage)) {}

  Errc code() const { return code_; }
  const std::string& stage() const { return stage_; }

 private:
  Errc code_;
  std::string stage_;
};

[[noreturn]] inline void fail(Errc code, const std::string& stage, const std::string& message) {
  throw Error(code, stage, message);
}

inline void require(bool ok, Errc code, const std::string& stage, const std::string& message) {
  if (!ok) fail(code, stage, message);
}

}  // namespace zerosum
