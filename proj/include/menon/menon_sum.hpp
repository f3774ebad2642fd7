#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "menon/arith.hpp"
#include "menon/characters.hpp"

namespace menon {

// The quantity everything here evaluates:
//
//   S(n, r; chi_1..chi_s) = sum over a_1..a_s in (Z/n)^* and b_1..b_r in Z/n
//                           of gcd(a_1-1, ..., a_s-1, b_1, ..., b_r, n)
//                           * chi_1(a_1) * ... * chi_s(a_s).
//
// Characters may be handed in modulo any divisor of n; the query lifts them.
// s = 0 is rejected: the closed forms assume at least one character.
class MenonQuery {
 public:
  MenonQuery(Natural n, unsigned r, std::vector<DirichletCharacter> characters);

  const Natural& n() const { return n_; }
  unsigned r() const { return r_; }
  const std::vector<DirichletCharacter>& characters() const { return characters_; }
  std::size_t s() const { return characters_.size(); }

 private:
  Natural n_;
  unsigned r_;
  std::vector<DirichletCharacter> characters_;
};

enum class Agreement { matched, mismatched, oracle_skipped };

struct PrimePowerFactor {
  Natural prime_power;
  Natural local_value;
};

struct MenonReport {
  Natural n;
  unsigned r = 0;
  std::size_t s = 0;
  Natural d;   // lcm of the character conductors
  Natural n0;  // product of p^{v_p(n)} over primes p | d
  Natural closed_form;
  std::optional<Natural> oracle;
  std::vector<PrimePowerFactor> per_prime_factors;
  Agreement agreement = Agreement::oracle_skipped;
};

enum class OracleMode { naive, grouped };

// Refusal when an enumeration would exceed the term budget. Deliberately a
// distinct type: callers must be able to tell "too expensive" from "wrong".
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(Natural required_terms, Natural budget);
  Natural required;
  Natural budget;
};

Natural default_cost_budget();  // 10^8 terms

// Number of b-tuples in (Z/p^m)^r whose gcd with p^m is exactly p^k:
// p^{(m-k)r} - p^{(m-k-1)r} for k < m, and 1 for k = m (so for r = 0 only
// k = m contributes, matching the empty-tuple convention gcd() = n).
Natural count_b_tuples_prime_power(const Natural& p, unsigned m, unsigned k, unsigned r);

// Sum over unit s-tuples mod p^m of gcd(a_1-1, ..., a_s-1, p^k) weighted by
// the characters; three closed branches depending on u = max conductor
// exponent: 0 for k < u; phi(p^m) p^{(m-k)(s-1)} sigma_{s-1}(p^{k-u}) for
// k >= u > 0; phi^s - phi p^{m(s-1)} + phi p^{(m-k)(s-1)} sigma_{s-1}(p^k)
// for u = 0. Counters below record which branch fired, for coverage asserts.
Natural local_gcd_character_sum(const Natural& p, unsigned m, unsigned k,
                                std::span<const DirichletCharacter> local_characters);

struct LocalSumBranchHits {
  std::uint64_t below_conductor = 0;      // k < u
  std::uint64_t at_or_above_conductor = 0;  // k >= u > 0
  std::uint64_t all_trivial = 0;          // u = 0
};
LocalSumBranchHits& local_sum_branch_hits();  // thread-local, caller resets

// Local closed form: phi(p^m) sigma_{s+r-1}(p^{m-u}) when u > 0, and
// phi(p^m) (phi(p^m)^{s-1} p^{mr} + sigma_{s+r-1}(p^m) - p^{m(s+r-1)}) when
// u = 0, where u = max of the local conductor exponents t_1..t_s.
Natural closed_form_prime_power(const Natural& p, unsigned m, unsigned r,
                                std::span<const unsigned> conductor_exponents);

struct ClosedFormBranchHits {
  std::uint64_t ramified = 0;    // u > 0
  std::uint64_t unramified = 0;  // u = 0
};
ClosedFormBranchHits& closed_form_branch_hits();  // thread-local, caller resets

// Global closed form, computed two ways that must agree: the factored
// product of closed_form_prime_power over the prime powers of n, and
// phi(n) sigma_{s+r-1}(n0/d) * prod over p^m || n/n0 of the u = 0 factor.
MenonReport closed_form_general(const MenonQuery& q);

// phi(n) sigma_{s+r-1}(n/d) whenever rad(n) = rad(d), else nothing.
std::optional<Natural> corollary_same_radical(const MenonQuery& q);

// Exact term count the cost guard charges for a mode: phi(n)^s * n^r for
// naive, phi(n)^s * tau(n) for grouped.
Natural oracle_cost(const MenonQuery& q, OracleMode mode);

// Direct enumeration of S in Z[zeta_L], L = lcm of the character orders.
// naive walks every (a, b) tuple; grouped replaces the b-loop by a sum over
// divisors e | n with weight J_r(n/e) (r = 0: only e = n, weight 1). The
// cyclotomic total must certify as a rational integer; anything else is a
// hard internal error, not a return value.
Natural brute_force_oracle(const MenonQuery& q, OracleMode mode);
Natural brute_force_oracle(const MenonQuery& q, OracleMode mode, const Natural& budget);

// Closed form always; oracle when some mode fits the budget (the cheaper
// admitted mode wins). Mismatch is reported, never thrown.
MenonReport verify(const MenonQuery& q);
MenonReport verify(const MenonQuery& q, const Natural& budget);

// S factors across a coprime split n1 * n2 = q.n. Splits every character,
// evaluates both factors and the full query by closed form (and by oracle
// when the budget admits), and compares.
bool multiplicativity_check(const Natural& n1, const Natural& n2, const MenonQuery& q);
bool multiplicativity_check(const Natural& n1, const Natural& n2, const MenonQuery& q,
                            const Natural& budget);

const char* to_string(Agreement a);

}  // namespace menon
