#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "menon/arith.hpp"
#include "menon/cyclotomic.hpp"

namespace menon {

struct UnitGenerator {
  Natural residue;
  Natural order;
};

// One prime-power block of (Z/nZ)^*. Canonical generators: the smallest
// primitive root of p lifted to p^m (bumped by +p when g^{p-1} = 1 mod p^2)
// for odd p; none for 2^1; (3) for 2^2; (-1, 5) in that order for 2^m, m >= 3.
struct UnitComponent {
  Natural prime;
  unsigned exponent = 0;  // m
  Natural prime_power;    // p^m
  std::vector<UnitGenerator> generators;
  // Discrete-log lookup, built when p^m <= 10^6: entry a holds the exponent
  // vector of residue a packed per component kind; ~0u marks non-units.
  std::vector<std::uint32_t> dlog_table;
};

class UnitGroupStructure {
 public:
  explicit UnitGroupStructure(const Natural& n);

  const Natural& modulus() const { return modulus_; }
  const std::vector<UnitComponent>& components() const { return components_; }
  const Natural& phi() const { return phi_; }
  const Natural& group_exponent() const { return group_exponent_; }  // lcm of generator orders
  std::size_t generator_count() const { return generator_count_; }

  // Exponent vector of a on the component's generators; a must be a unit
  // residue modulo that component's prime power.
  std::vector<Natural> component_dlog(std::size_t index, const Natural& a) const;

 private:
  Natural modulus_;
  std::vector<UnitComponent> components_;
  Natural phi_;
  Natural group_exponent_;
  std::size_t generator_count_ = 0;
};

// Memoized: structures are immutable and shared, so repeated queries against
// one modulus build the dlog tables once.
std::shared_ptr<const UnitGroupStructure> unit_group_structure(const Natural& n);

// A Dirichlet character mod n, named by its exponents on the canonical
// generators: chi(g_i) = zeta_{ord(g_i)}^{e_i}. The exponent vector is a
// unique, serializable name for the character.
class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const UnitGroupStructure> group,
                     std::vector<Natural> exponents);
  static DirichletCharacter trivial(const Natural& modulus);

  const Natural& modulus() const;
  const std::vector<Natural>& exponents() const { return exponents_; }
  const Natural& order() const { return order_; }
  const Natural& conductor() const { return conductor_; }
  unsigned local_conductor_exponent(std::size_t component_index) const;
  bool is_trivial() const;
  DirichletCharacter inverse() const;  // complex conjugate character
  std::string to_string() const;       // mod=<n>;exps=... or trivial@<n>

  const UnitGroupStructure& group() const { return *group_; }
  const std::shared_ptr<const UnitGroupStructure>& group_ptr() const { return group_; }
  bool operator==(const DirichletCharacter& other) const {
    return modulus() == other.modulus() && exponents_ == other.exponents_;
  }

 private:
  std::shared_ptr<const UnitGroupStructure> group_;
  std::vector<Natural> exponents_;
  Natural order_;
  Natural conductor_;
  std::vector<unsigned> local_conductor_exponents_;  // one per component
};

// chi(a) as a root-of-unity exponent at level order(chi), or at a chosen
// ambient level (which order(chi) must divide). Rejects non-units loudly:
// sums here range over units only, so a non-unit argument is a caller bug.
RootOfUnityExponent eval_character(const DirichletCharacter& chi, const Natural& a);
RootOfUnityExponent eval_character(const DirichletCharacter& chi, const Natural& a,
                                   const Natural& ambient_level);

Natural conductor(const DirichletCharacter& chi);

// Split chi mod n1*n2 into (chi1 mod n1, chi2 mod n2) with
// chi(c) = chi1(c)*chi2(c); requires gcd(n1,n2)=1 and n1*n2 = modulus.
std::pair<DirichletCharacter, DirichletCharacter> crt_decompose(const DirichletCharacter& chi,
                                                                const Natural& n1,
                                                                const Natural& n2);

// All phi(n) characters mod n, exponent vectors in lexicographic order
// (trivial character first).
std::vector<DirichletCharacter> enumerate_characters(const Natural& n);

// Lift chi to a multiple of its modulus; the induced character agrees with
// chi on units and keeps the same conductor.
DirichletCharacter induce_character(const DirichletCharacter& chi, const Natural& modulus);

// Direct evaluation of the character sum over U_j = 1 + p^j Z_{p^m};
// requires a prime-power modulus and 0 <= j <= m.
CyclotomicInteger subgroup_sum(const DirichletCharacter& chi, unsigned j);

// The subgroup U_j of (Z/p^m Z)^*: all of the units for j = 0, 1 + p^j Z for
// 1 <= j <= m, empty for j = m+1.
struct FiltrationLevel {
  Natural prime;
  unsigned m = 0;
  unsigned j = 0;
  Natural cardinality() const;
  bool contains(const Natural& a) const;
  std::vector<Natural> members() const;  // ascending residues
};

namespace detail {
// Discrete log in the cyclic group generated by base modulo m (Pohlig-Hellman
// with baby-step giant-step); exposed so the above-table-threshold path is
// directly testable.
Natural dlog_cyclic(const Natural& modulus, const Natural& base, const Natural& order,
                    const Natural& a);
}  // namespace detail

}  // namespace menon
