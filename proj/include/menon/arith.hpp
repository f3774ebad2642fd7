#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace menon {

// Arbitrary-precision integer used throughout. All quantities handled here are
// nonnegative; signedness exists only so intermediate subtractions are safe.
using Natural = boost::multiprecision::cpp_int;

struct PrimePower {
  Natural prime;
  unsigned exponent = 0;
  Natural value() const;  // prime^exponent
};

// Prime factorization of a positive integer. Pairs are sorted by prime and
// exponents are >= 1; the factorization of 1 has no pairs.
class Factorization {
 public:
  Factorization() : value_(1) {}
  const std::vector<PrimePower>& pairs() const { return pairs_; }
  const Natural& value() const { return value_; }
  Natural radical() const;
  unsigned exponent_of(const Natural& prime) const;  // 0 when prime does not divide

 private:
  friend Factorization factorize(const Natural& n);
  std::vector<PrimePower> pairs_;
  Natural value_{1};
};

// Requires n >= 1 (throws std::domain_error on 0). Deterministic: trial
// division by primes below 10^6, then Miller-Rabin plus Brent's rho.
Factorization factorize(const Natural& n);

// Deterministic for n < 2^64; fixed-base Miller-Rabin above that.
bool is_prime(const Natural& n);

Natural euler_phi(const Factorization& f);
Natural sigma(unsigned r, const Factorization& f);           // sum of r-th powers of divisors
Natural jordan_totient(unsigned r, const Factorization& f);  // requires r >= 1
std::vector<Natural> divisors(const Factorization& f);       // ascending

Natural gcd_many(std::span<const Natural> values);  // requires nonempty; gcd(0, x) = x
Natural lcm_many(std::span<const Natural> values);  // empty product -> 1
Natural pow_natural(const Natural& base, unsigned exp);
unsigned valuation(const Natural& p, const Natural& n);  // largest v with p^v | n; n >= 1

std::uint64_t to_uint64(const Natural& n);  // throws std::overflow_error out of range

// Thread-local counter bumped once per bignum operation inside the functions
// above and inside the closed-form evaluator. Lets benchmarks compare oracle
// term counts against closed-form work without a profiler.
std::uint64_t& arith_op_counter();
inline void tick_ops(std::uint64_t k = 1) { arith_op_counter() += k; }

}  // namespace menon
