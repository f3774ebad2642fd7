#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "menon/arith.hpp"

namespace menon {

// zeta_L^k with the exponent kept reduced: 0 <= numerator < level.
struct RootOfUnityExponent {
  Natural numerator;
  Natural level;
  RootOfUnityExponent(Natural num, Natural lvl);
  bool operator==(const RootOfUnityExponent&) const = default;
};

// Element of Z[zeta_L] in the power basis 1, zeta, ..., zeta^{phi(L)-1},
// i.e. the residue of an integer polynomial modulo the L-th cyclotomic
// polynomial. The basis gives a unique normal form, so equality is a plain
// coefficient comparison and rational integers are exactly the elements
// whose non-constant coefficients vanish.
class CyclotomicInteger {
 public:
  CyclotomicInteger() : level_(1), coeffs_(1) {}
  static CyclotomicInteger zero(std::uint64_t level);
  static CyclotomicInteger from_integer(std::uint64_t level, const Natural& c);

  std::uint64_t level() const { return level_; }
  const std::vector<Natural>& coefficients() const { return coeffs_; }
  bool is_zero() const;
  bool operator==(const CyclotomicInteger&) const = default;

 private:
  CyclotomicInteger(std::uint64_t level, std::vector<Natural> coeffs)
      : level_(level), coeffs_(std::move(coeffs)) {}

  std::uint64_t level_;
  std::vector<Natural> coeffs_;

  friend CyclotomicInteger from_root(const RootOfUnityExponent& e);
  friend CyclotomicInteger add(const CyclotomicInteger&, const CyclotomicInteger&);
  friend CyclotomicInteger mul(const CyclotomicInteger&, const CyclotomicInteger&);
  friend CyclotomicInteger scale(const Natural&, const CyclotomicInteger&);
  friend CyclotomicInteger embed(const CyclotomicInteger&, std::uint64_t);
  friend CyclotomicInteger weighted_root_sum(std::uint64_t, std::span<const Natural>);
};

// Phi_L, monic, ascending coefficients, degree phi(L). Computed by exact
// division of x^L - 1 by the product of Phi_d over proper divisors d; cached
// per level (initialize once, read only afterwards).
const std::vector<Natural>& cyclotomic_polynomial(std::uint64_t level);

CyclotomicInteger from_root(const RootOfUnityExponent& e);
CyclotomicInteger add(const CyclotomicInteger& a, const CyclotomicInteger& b);
CyclotomicInteger mul(const CyclotomicInteger& a, const CyclotomicInteger& b);
CyclotomicInteger scale(const Natural& c, const CyclotomicInteger& a);

// Image of a under zeta_L -> zeta_M^{M/L}; requires a.level | M.
CyclotomicInteger embed(const CyclotomicInteger& a, std::uint64_t target_level);

// The integer value when all non-constant coefficients vanish, else nothing.
std::optional<Natural> as_rational_integer(const CyclotomicInteger& a);

// Sum of weights[k] * zeta_level^k over k; weights.size() <= level. This is
// the one bulk entry point the oracle uses, so that a whole enumeration costs
// a single reduction modulo Phi_L.
CyclotomicInteger weighted_root_sum(std::uint64_t level, std::span<const Natural> weights);

std::ostream& operator<<(std::ostream& os, const CyclotomicInteger& a);

}  // namespace menon
