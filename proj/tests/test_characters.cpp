#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "menon/arith.hpp"
#include "menon/characters.hpp"
#include "menon/cyclotomic.hpp"

using namespace menon;

namespace {

std::vector<std::uint64_t> units_mod(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a = 0; a < n; ++a)
    if (std::gcd(a, n) == 1) out.push_back(a);
  if (n == 1) out = {0};
  return out;
}

// Value table of chi at a fixed ambient level, indexed by the unit list.
std::vector<std::uint64_t> value_table(const DirichletCharacter& chi, std::uint64_t n,
                                       const Natural& level) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a : units_mod(n))
    out.push_back(to_uint64(eval_character(chi, Natural(a), level).numerator));
  return out;
}

}  // namespace

TEST_CASE("unit group structure: frozen examples") {
  const auto g9 = unit_group_structure(Natural(9));
  REQUIRE(g9->components().size() == 1);
  REQUIRE(g9->components()[0].generators.size() == 1);
  CHECK(g9->components()[0].generators[0].residue == 2);
  CHECK(g9->components()[0].generators[0].order == 6);

  const auto g8 = unit_group_structure(Natural(8));
  REQUIRE(g8->components().size() == 1);
  REQUIRE(g8->components()[0].generators.size() == 2);
  CHECK(g8->components()[0].generators[0].residue == 7);
  CHECK(g8->components()[0].generators[0].order == 2);
  CHECK(g8->components()[0].generators[1].residue == 5);
  CHECK(g8->components()[0].generators[1].order == 2);

  const auto g1 = unit_group_structure(Natural(1));
  CHECK(g1->components().empty());
  CHECK(g1->phi() == 1);

  const auto g4 = unit_group_structure(Natural(4));
  REQUIRE(g4->components()[0].generators.size() == 1);
  CHECK(g4->components()[0].generators[0].residue == 3);
  CHECK(g4->components()[0].generators[0].order == 2);

  const auto g2 = unit_group_structure(Natural(2));
  CHECK(g2->components().size() == 1);
  CHECK(g2->components()[0].generators.empty());
}

TEST_CASE("unit group structure: invariants for n up to 400") {
  for (std::uint64_t n = 1; n <= 400; ++n) {
    const auto g = unit_group_structure(Natural(n));
    Natural order_product = 1;
    Natural last_prime = 1;
    for (const auto& comp : g->components()) {
      CHECK(comp.prime > last_prime);
      last_prime = comp.prime;
      for (const auto& gen : comp.generators) {
        order_product *= gen.order;
        // generator really has the claimed order
        CHECK(boost::multiprecision::powm(gen.residue, gen.order, comp.prime_power) == 1);
        for (const Natural& q : divisors(factorize(gen.order)))
          if (q > 1)
            CHECK(boost::multiprecision::powm(gen.residue, gen.order / q, comp.prime_power) != 1);
      }
    }
    CHECK(order_product == g->phi());
    CHECK(g->phi() == euler_phi(factorize(Natural(n))));
    CHECK(g->phi() % g->group_exponent() == 0);
  }
}

TEST_CASE("component dlog reconstructs every unit") {
  for (std::uint64_t n : {9, 8, 16, 25, 49, 81, 12, 360}) {
    const auto g = unit_group_structure(Natural(n));
    for (std::uint64_t a : units_mod(n)) {
      for (std::size_t ci = 0; ci < g->components().size(); ++ci) {
        const auto& comp = g->components()[ci];
        const auto dlog = g->component_dlog(ci, Natural(a));
        REQUIRE(dlog.size() == comp.generators.size());
        Natural rebuilt = 1;
        for (std::size_t gi = 0; gi < dlog.size(); ++gi) {
          CHECK(dlog[gi] < comp.generators[gi].order);
          const Natural gen_power = boost::multiprecision::powm(comp.generators[gi].residue,
                                                                dlog[gi], comp.prime_power);
          rebuilt = rebuilt * gen_power % comp.prime_power;
        }
        CHECK(rebuilt == Natural(a) % comp.prime_power);
      }
    }
  }
}

TEST_CASE("discrete logs above the table threshold use the same convention") {
  // 1000003 is prime and exceeds the lookup-table limit.
  const Natural p(1000003);
  const auto g = unit_group_structure(p);
  REQUIRE(g->components().size() == 1);
  const auto& comp = g->components()[0];
  REQUIRE(comp.dlog_table.empty());
  const Natural gen = comp.generators[0].residue;
  for (std::uint64_t x : {0ULL, 1ULL, 2ULL, 977ULL, 500001ULL, 1000001ULL}) {
    const Natural a = boost::multiprecision::powm(gen, Natural(x), p);
    const auto dlog = g->component_dlog(0, a);
    REQUIRE(dlog.size() == 1);
    CHECK(dlog[0] == x);
  }
  // direct exercise of the cyclic Pohlig-Hellman routine against a table case
  const auto g13 = unit_group_structure(Natural(13));
  const Natural g13gen = g13->components()[0].generators[0].residue;
  for (std::uint64_t x = 0; x < 12; ++x) {
    const Natural a = boost::multiprecision::powm(g13gen, Natural(x), Natural(13));
    CHECK(detail::dlog_cyclic(Natural(13), g13gen, Natural(12), a) == x);
  }
}

TEST_CASE("dlogs for two-power moduli above the table threshold") {
  const Natural n = Natural(1) << 21;
  const auto g = unit_group_structure(n);
  REQUIRE(g->components().size() == 1);
  REQUIRE(g->components()[0].dlog_table.empty());
  for (std::uint64_t k : {0ULL, 1ULL, 5ULL, 524287ULL}) {
    for (unsigned sign : {0u, 1u}) {
      Natural a = boost::multiprecision::powm(Natural(5), Natural(k), n);
      if (sign) a = n - a;
      const auto dlog = g->component_dlog(0, a);
      REQUIRE(dlog.size() == 2);
      CHECK(dlog[0] == sign);
      CHECK(dlog[1] == k);
    }
  }
}

TEST_CASE("eval_character: frozen examples") {
  // mod 5, exponent 1 on generator 2: chi(2) = i, so chi(4) = i^2
  const DirichletCharacter chi5(unit_group_structure(Natural(5)), {Natural(1)});
  const auto v = eval_character(chi5, Natural(4));
  CHECK(v.numerator == 2);
  CHECK(v.level == 4);

  // mod 9, exponent 3: chi(4) = zeta_6^{3*2} = 1
  const DirichletCharacter chi9(unit_group_structure(Natural(9)), {Natural(3)});
  CHECK(eval_character(chi9, Natural(4)).numerator == 0);
  CHECK(chi9.order() == 2);

  const DirichletCharacter triv = DirichletCharacter::trivial(Natural(12));
  for (std::uint64_t a : units_mod(12)) {
    const auto t = eval_character(triv, Natural(a));
    CHECK(t.numerator == 0);
    CHECK(t.level == 1);
  }

  CHECK_THROWS_AS(eval_character(chi9, Natural(3)), std::domain_error);
  CHECK_THROWS_AS(eval_character(chi9, Natural(6)), std::domain_error);
}

TEST_CASE("eval_character is completely multiplicative on units, n up to 100") {
  for (std::uint64_t n = 1; n <= 100; ++n) {
    const auto units = units_mod(n);
    const Natural level = unit_group_structure(Natural(n))->group_exponent();
    const std::uint64_t L = to_uint64(level);
    for (const auto& chi : enumerate_characters(Natural(n))) {
      const auto table = value_table(chi, n, level);
      for (std::size_t i = 0; i < units.size(); ++i)
        for (std::size_t j = 0; j < units.size(); ++j) {
          const std::uint64_t ab = units[i] * units[j] % (n == 1 ? 1 : n);
          const std::size_t ab_idx =
              std::lower_bound(units.begin(), units.end(), ab) - units.begin();
          CHECK(table[ab_idx] == (table[i] + table[j]) % L);
        }
    }
  }
}

TEST_CASE("conductor: examples and exhaustive minimality, n up to 100") {
  CHECK(DirichletCharacter::trivial(Natural(12)).conductor() == 1);
  CHECK(DirichletCharacter(unit_group_structure(Natural(9)), {Natural(3)}).conductor() == 3);
  CHECK(DirichletCharacter(unit_group_structure(Natural(9)), {Natural(1)}).conductor() == 9);

  for (std::uint64_t n = 1; n <= 100; ++n) {
    const auto divs = divisors(factorize(Natural(n)));
    for (const auto& chi : enumerate_characters(Natural(n))) {
      // smallest divisor d such that chi is trivial on units congruent to 1 mod d
      Natural minimal = 0;
      for (const Natural& dv : divs) {
        bool trivial_on_kernel = true;
        for (std::uint64_t a : units_mod(n)) {
          if (Natural(a) % dv != 1 % dv) continue;
          if (eval_character(chi, Natural(a)).numerator != 0) {
            trivial_on_kernel = false;
            break;
          }
        }
        if (trivial_on_kernel) {
          minimal = dv;
          break;
        }
      }
      REQUIRE(minimal != 0);
      CHECK(chi.conductor() == minimal);
      CHECK(Natural(n) % chi.conductor() == 0);
      CHECK((chi.conductor() == 1) == chi.is_trivial());
    }
  }
}

TEST_CASE("enumerate_characters: counts, distinctness, orders") {
  CHECK(enumerate_characters(Natural(1)).size() == 1);
  CHECK(enumerate_characters(Natural(8)).size() == 4);

  const auto chars5 = enumerate_characters(Natural(5));
  REQUIRE(chars5.size() == 4);
  CHECK(chars5[0].is_trivial());
  CHECK(chars5[0].order() == 1);
  CHECK(chars5[1].order() == 4);
  CHECK(chars5[2].order() == 2);
  CHECK(chars5[3].order() == 4);

  for (std::uint64_t n = 1; n <= 100; ++n) {
    const auto chars = enumerate_characters(Natural(n));
    CHECK(Natural(chars.size()) == euler_phi(factorize(Natural(n))));
    CHECK(chars[0].is_trivial());
    const Natural level = unit_group_structure(Natural(n))->group_exponent();
    std::set<std::vector<std::uint64_t>> tables;
    std::vector<std::vector<Natural>> exps;
    for (const auto& chi : chars) {
      tables.insert(value_table(chi, n, level));
      exps.push_back(chi.exponents());
      CHECK(euler_phi(factorize(Natural(n))) % chi.order() == 0);
    }
    CHECK(tables.size() == chars.size());
    CHECK(std::is_sorted(exps.begin(), exps.end()));
  }
}

TEST_CASE("orthogonality: nontrivial characters sum to zero over units") {
  for (std::uint64_t n = 1; n <= 100; ++n) {
    for (const auto& chi : enumerate_characters(Natural(n))) {
      const std::uint64_t L = to_uint64(chi.order());
      std::vector<Natural> buckets(L, Natural(0));
      for (std::uint64_t a : units_mod(n))
        buckets[to_uint64(eval_character(chi, Natural(a)).numerator)] += 1;
      const CyclotomicInteger total = weighted_root_sum(L, buckets);
      if (chi.is_trivial())
        CHECK(as_rational_integer(total) == euler_phi(factorize(Natural(n))));
      else
        CHECK(total.is_zero());
    }
  }
}

TEST_CASE("character order and inverse") {
  for (std::uint64_t n : {5, 7, 8, 9, 12, 15, 16, 36}) {
    const Natural level = unit_group_structure(Natural(n))->group_exponent();
    const std::uint64_t L = to_uint64(level);
    for (const auto& chi : enumerate_characters(Natural(n))) {
      const auto inv = chi.inverse();
      CHECK(inv.order() == chi.order());
      CHECK(inv.conductor() == chi.conductor());
      for (std::uint64_t a : units_mod(n)) {
        const std::uint64_t k1 = to_uint64(eval_character(chi, Natural(a), level).numerator);
        const std::uint64_t k2 = to_uint64(eval_character(inv, Natural(a), level).numerator);
        CHECK((k1 + k2) % L == 0);
      }
    }
  }
}

TEST_CASE("subgroup_sum: frozen examples") {
  const auto g9 = unit_group_structure(Natural(9));
  const DirichletCharacter triv9 = DirichletCharacter::trivial(Natural(9));
  CHECK(as_rational_integer(subgroup_sum(triv9, 0)) == Natural(6));
  const DirichletCharacter quad9(g9, {Natural(3)});
  CHECK(as_rational_integer(subgroup_sum(quad9, 1)) == Natural(3));
  const DirichletCharacter prim9(g9, {Natural(1)});
  CHECK(subgroup_sum(prim9, 1).is_zero());
  CHECK_THROWS_AS(subgroup_sum(DirichletCharacter::trivial(Natural(12)), 0), std::domain_error);
}

TEST_CASE("filtration levels: cardinalities, nesting, membership") {
  for (const auto& [p64, m] :
       std::vector<std::pair<std::uint64_t, unsigned>>{{2, 1}, {2, 3}, {3, 2}, {5, 2}, {7, 1}}) {
    const Natural p(p64);
    const Natural pm = pow_natural(p, m);
    for (unsigned j = 0; j <= m + 1; ++j) {
      const FiltrationLevel level{p, m, j};
      const auto members = level.members();
      CHECK(Natural(members.size()) == level.cardinality());
      if (j == 0) CHECK(level.cardinality() == euler_phi(factorize(pm)));
      if (j >= 1 && j <= m) CHECK(level.cardinality() == pow_natural(p, m - j));
      if (j == m + 1) CHECK(members.empty());
      CHECK(std::is_sorted(members.begin(), members.end()));
      for (const Natural& a : members) {
        CHECK(level.contains(a));
        if (j >= 1) CHECK((a - 1) % pow_natural(p, j) == 0);
      }
      if (j <= m) {
        const FiltrationLevel next{p, m, j + 1};
        for (const Natural& a : next.members()) CHECK(level.contains(a));
      }
    }
  }
}

TEST_CASE("crt_decompose: examples and product identity") {
  const auto [t4, t3] = crt_decompose(DirichletCharacter::trivial(Natural(12)), Natural(4), Natural(3));
  CHECK(t4.is_trivial());
  CHECK(t4.modulus() == 4);
  CHECK(t3.is_trivial());
  CHECK(t3.modulus() == 3);

  // mod 45 = 9*5: local exponents route to the right components
  const DirichletCharacter chi45(unit_group_structure(Natural(45)), {Natural(2), Natural(3)});
  const auto [c9, c5] = crt_decompose(chi45, Natural(9), Natural(5));
  CHECK(c9.exponents() == std::vector<Natural>{Natural(2)});
  CHECK(c5.exponents() == std::vector<Natural>{Natural(3)});

  for (const auto& chi : enumerate_characters(Natural(36))) {
    const auto [c4, c9] = crt_decompose(chi, Natural(4), Natural(9));
    CHECK(chi.conductor() == c4.conductor() * c9.conductor());
    const Natural level = unit_group_structure(Natural(36))->group_exponent();
    const std::uint64_t L = to_uint64(level);
    for (std::uint64_t c : units_mod(36)) {
      const std::uint64_t full = to_uint64(eval_character(chi, Natural(c), level).numerator);
      const std::uint64_t left = to_uint64(eval_character(c4, Natural(c % 4), level).numerator);
      const std::uint64_t right = to_uint64(eval_character(c9, Natural(c % 9), level).numerator);
      CHECK(full == (left + right) % L);
    }
  }
  CHECK_THROWS_AS(crt_decompose(DirichletCharacter::trivial(Natural(12)), Natural(6), Natural(2)),
                  std::domain_error);
}

TEST_CASE("induce_character agrees pointwise and preserves the conductor") {
  for (std::uint64_t n : {12, 24, 36, 40, 45, 60}) {
    for (const Natural& mdiv : divisors(factorize(Natural(n)))) {
      const std::uint64_t m = to_uint64(mdiv);
      for (const auto& chi : enumerate_characters(mdiv)) {
        const DirichletCharacter lifted = induce_character(chi, Natural(n));
        CHECK(lifted.modulus() == n);
        CHECK(lifted.conductor() == chi.conductor());
        CHECK(lifted.order() == chi.order());
        const Natural level =
            boost::multiprecision::lcm(unit_group_structure(Natural(n))->group_exponent(),
                                       unit_group_structure(mdiv)->group_exponent());
        for (std::uint64_t a : units_mod(n)) {
          CHECK(eval_character(lifted, Natural(a), level).numerator ==
                eval_character(chi, Natural(a % (m == 0 ? 1 : m)), level).numerator);
        }
      }
    }
  }
}

TEST_CASE("to_string forms") {
  CHECK(DirichletCharacter::trivial(Natural(12)).to_string() == "trivial@12");
  const DirichletCharacter chi(unit_group_structure(Natural(8)), {Natural(1), Natural(0)});
  CHECK(chi.to_string() == "mod=8;exps=1,0");
}

TEST_CASE("character construction validates exponent counts") {
  CHECK_THROWS_AS(DirichletCharacter(unit_group_structure(Natural(8)), {Natural(1)}),
                  std::domain_error);
  // negative exponents reduce into canonical range
  const DirichletCharacter chi(unit_group_structure(Natural(5)), {Natural(-1)});
  CHECK(chi.exponents() == std::vector<Natural>{Natural(3)});
}
