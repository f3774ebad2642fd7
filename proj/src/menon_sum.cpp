#include "menon/menon_sum.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "menon/cyclotomic.hpp"

namespace menon {

namespace {

using boost::multiprecision::gcd;
using boost::multiprecision::lcm;

// Exact cyclotomic reduction needs Phi_L materialized, so enumeration refuses
// ambient levels past this cap no matter what the term budget says.
constexpr std::uint64_t kLevelCap = 1'000'000;

// sigma_w(p^j) without a factorization detour.
Natural sigma_prime_power(const Natural& p, unsigned j, unsigned w) {
  if (w == 0) return Natural(j + 1);
  Natural term = 1, power = 1;
  const Natural step = pow_natural(p, w);
  for (unsigned i = 0; i < j; ++i) {
    power *= step;
    term += power;
    tick_ops(2);
  }
  return term;
}

Natural phi_prime_power(const Natural& p, unsigned m) {
  tick_ops(2);
  return pow_natural(p, m - 1) * (p - 1);
}

void require_local_family(const Natural& p, unsigned m,
                          std::span<const DirichletCharacter> chars) {
  if (chars.empty())
    throw std::domain_error("local_gcd_character_sum: at least one character required");
  for (const auto& chi : chars) {
    const auto& comps = chi.group().components();
    if (comps.size() != 1 || comps[0].prime != p || comps[0].exponent != m)
      throw std::domain_error("local_gcd_character_sum: characters must all live mod p^m");
  }
}

}  // namespace

MenonQuery::MenonQuery(Natural n, unsigned r, std::vector<DirichletCharacter> characters)
    : n_(std::move(n)), r_(r), characters_(std::move(characters)) {
  if (n_ < 1) throw std::domain_error("MenonQuery: n must be positive");
  if (characters_.empty())
    throw std::domain_error("MenonQuery: s = 0 is rejected, at least one character is required");
  for (auto& chi : characters_) {
    if (chi.modulus() == n_) continue;
    if (n_ % chi.modulus() != 0)
      throw std::domain_error("MenonQuery: character modulus must divide n");
    chi = induce_character(chi, n_);
  }
}

BudgetExceeded::BudgetExceeded(Natural required_terms, Natural limit)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "enumeration refused: " << required_terms << " exceeds the limit " << limit;
        return os.str();
      }()),
      required(std::move(required_terms)),
      budget(std::move(limit)) {}

Natural default_cost_budget() { return Natural(100'000'000); }

Natural count_b_tuples_prime_power(const Natural& p, unsigned m, unsigned k, unsigned r) {
  if (k > m) throw std::domain_error("count_b_tuples_prime_power: k exceeds m");
  if (k == m) return 1;
  return pow_natural(p, (m - k) * r) - pow_natural(p, (m - k - 1) * r);
}

LocalSumBranchHits& local_sum_branch_hits() {
  thread_local LocalSumBranchHits hits;
  return hits;
}

ClosedFormBranchHits& closed_form_branch_hits() {
  thread_local ClosedFormBranchHits hits;
  return hits;
}

Natural local_gcd_character_sum(const Natural& p, unsigned m, unsigned k,
                                std::span<const DirichletCharacter> local_characters) {
  require_local_family(p, m, local_characters);
  if (k > m) throw std::domain_error("local_gcd_character_sum: k exceeds m");
  unsigned u = 0;
  for (const auto& chi : local_characters)
    u = std::max(u, chi.local_conductor_exponent(0));
  const unsigned s = unsigned(local_characters.size());
  if (k < u) {
    ++local_sum_branch_hits().below_conductor;
    return 0;
  }
  const Natural phi = phi_prime_power(p, m);
  if (u > 0) {
    ++local_sum_branch_hits().at_or_above_conductor;
    tick_ops(2);
    return phi * pow_natural(p, std::uint64_t(m - k) * (s - 1)) *
           sigma_prime_power(p, k - u, s - 1);
  }
  ++local_sum_branch_hits().all_trivial;
  tick_ops(5);
  return pow_natural(phi, s) - phi * pow_natural(p, std::uint64_t(m) * (s - 1)) +
         phi * pow_natural(p, std::uint64_t(m - k) * (s - 1)) * sigma_prime_power(p, k, s - 1);
}

Natural closed_form_prime_power(const Natural& p, unsigned m, unsigned r,
                                std::span<const unsigned> conductor_exponents) {
  if (conductor_exponents.empty())
    throw std::domain_error("closed_form_prime_power: at least one character required");
  unsigned u = 0;
  for (unsigned t : conductor_exponents) {
    if (t > m) throw std::domain_error("closed_form_prime_power: conductor exponent exceeds m");
    u = std::max(u, t);
  }
  const unsigned s = unsigned(conductor_exponents.size());
  const unsigned w = s + r - 1;
  const Natural phi = phi_prime_power(p, m);
  if (u > 0) {
    ++closed_form_branch_hits().ramified;
    tick_ops();
    return phi * sigma_prime_power(p, m - u, w);
  }
  ++closed_form_branch_hits().unramified;
  tick_ops(4);
  return phi * (pow_natural(phi, s - 1) * pow_natural(p, std::uint64_t(m) * r) +
                sigma_prime_power(p, m, w) - pow_natural(p, std::uint64_t(m) * w));
}

MenonReport closed_form_general(const MenonQuery& q) {
  MenonReport rep;
  rep.n = q.n();
  rep.r = q.r();
  rep.s = q.s();

  std::vector<Natural> conductors;
  conductors.reserve(q.s());
  for (const auto& chi : q.characters()) conductors.push_back(chi.conductor());
  rep.d = lcm_many(conductors);

  const Factorization nf = factorize(q.n());
  rep.n0 = 1;
  for (const auto& pp : nf.pairs())
    if (rep.d % pp.prime == 0) {
      rep.n0 *= pp.value();
      tick_ops();
    }

  // Factored route: one local closed form per prime power. Every character
  // was lifted to modulus n, so component i of each character is the p_i
  // block and local conductor exponents line up by index.
  Natural factored = 1;
  for (std::size_t i = 0; i < nf.pairs().size(); ++i) {
    const auto& pp = nf.pairs()[i];
    std::vector<unsigned> ts;
    ts.reserve(q.s());
    for (const auto& chi : q.characters()) ts.push_back(chi.local_conductor_exponent(i));
    Natural local = closed_form_prime_power(pp.prime, pp.exponent, q.r(), ts);
    factored *= local;
    tick_ops();
    rep.per_prime_factors.push_back({pp.value(), std::move(local)});
  }

  // Global route: phi(n) sigma_w(n0/d) times the unramified factors.
  const unsigned w = unsigned(q.s()) + q.r() - 1;
  Natural global = euler_phi(nf) * sigma(w, factorize(rep.n0 / rep.d));
  tick_ops(2);
  for (const auto& pp : nf.pairs()) {
    if (rep.d % pp.prime == 0) continue;
    const Natural phi = phi_prime_power(pp.prime, pp.exponent);
    global *= pow_natural(phi, unsigned(q.s()) - 1) *
                  pow_natural(pp.prime, std::uint64_t(pp.exponent) * q.r()) +
              sigma_prime_power(pp.prime, pp.exponent, w) -
              pow_natural(pp.prime, std::uint64_t(pp.exponent) * w);
    tick_ops(5);
  }

  if (factored != global)
    throw std::logic_error("closed_form_general: factored and global routes disagree");
  rep.closed_form = factored;
  rep.agreement = Agreement::oracle_skipped;
  return rep;
}

std::optional<Natural> corollary_same_radical(const MenonQuery& q) {
  std::vector<Natural> conductors;
  for (const auto& chi : q.characters()) conductors.push_back(chi.conductor());
  const Natural d = lcm_many(conductors);
  const Factorization nf = factorize(q.n());
  if (nf.radical() != factorize(d).radical()) return std::nullopt;
  const unsigned w = unsigned(q.s()) + q.r() - 1;
  return euler_phi(nf) * sigma(w, factorize(q.n() / d));
}

Natural oracle_cost(const MenonQuery& q, OracleMode mode) {
  const Factorization nf = factorize(q.n());
  const Natural phi = euler_phi(nf);
  Natural cost = 1;
  for (std::size_t i = 0; i < q.s(); ++i) cost *= phi;
  if (mode == OracleMode::naive)
    for (unsigned i = 0; i < q.r(); ++i) cost *= q.n();
  else
    cost *= sigma(0, nf);
  return cost;
}

namespace {

// Shared enumeration skeleton. W is the bucket weight type: uint64 when the
// total positive mass provably fits, Natural otherwise.
template <typename W>
Natural oracle_impl(const MenonQuery& q, OracleMode mode, std::uint64_t n64, std::uint64_t level) {
  const std::size_t s = q.s();
  const unsigned r = q.r();
  const Natural level_nat(level);
  std::vector<W> bucket(level, W(0));

  // Divisor data for grouped mode. For r = 0 the empty b-tuple contributes
  // gcd(..., n) once, i.e. only e = n with weight 1.
  std::vector<std::uint64_t> divs;
  std::vector<W> weight;
  if (mode == OracleMode::grouped) {
    if (r == 0) {
      divs = {n64};
      weight = {W(1)};
    } else {
      const Factorization nf = factorize(q.n());
      for (const Natural& e : divisors(nf)) {
        divs.push_back(to_uint64(e));
        const Natural j = jordan_totient(r, factorize(q.n() / e));
        if constexpr (std::is_same_v<W, Natural>)
          weight.push_back(j);
        else
          weight.push_back(to_uint64(j));
      }
    }
  }

  // b-recursion for naive mode.
  auto walk_b = [&](auto&& self, unsigned depth, std::uint64_t g, std::uint64_t k) -> void {
    if (depth == r) {
      bucket[k] += W(g);
      return;
    }
    for (std::uint64_t b = 0; b < n64; ++b) self(self, depth + 1, std::gcd(g, b), k);
  };

  auto consume_tuple = [&](std::uint64_t a_gcd, std::uint64_t k) {
    if (mode == OracleMode::naive) {
      walk_b(walk_b, 0, a_gcd, k);
    } else {
      for (std::size_t i = 0; i < divs.size(); ++i)
        bucket[k] += W(std::gcd(a_gcd, divs[i])) * weight[i];
    }
  };

  if (s == 1) {
    // Streamed: no unit table, so memory stays flat even when phi(n) is the
    // whole budget.
    const auto& chi = q.characters()[0];
    for (std::uint64_t a = 0; a < n64; ++a) {
      if (std::gcd(a, n64) != 1) continue;
      const std::uint64_t k = to_uint64(eval_character(chi, Natural(a), level_nat).numerator);
      consume_tuple(std::gcd((a + n64 - 1) % n64, n64), k);
    }
  } else {
    std::vector<std::uint64_t> units;
    for (std::uint64_t a = 0; a < n64; ++a)
      if (std::gcd(a, n64) == 1) units.push_back(a);
    std::vector<std::vector<std::uint64_t>> chi_exp(s);
    for (std::size_t i = 0; i < s; ++i) {
      chi_exp[i].resize(units.size());
      for (std::size_t idx = 0; idx < units.size(); ++idx)
        chi_exp[i][idx] =
            to_uint64(eval_character(q.characters()[i], Natural(units[idx]), level_nat).numerator);
    }
    auto walk_a = [&](auto&& self, std::size_t i, std::uint64_t a_gcd, std::uint64_t k) -> void {
      if (i == s) {
        consume_tuple(a_gcd, k);
        return;
      }
      for (std::size_t idx = 0; idx < units.size(); ++idx) {
        const std::uint64_t am1 = (units[idx] + n64 - 1) % n64;
        std::uint64_t kk = k + chi_exp[i][idx];
        if (kk >= level) kk -= level;
        self(self, i + 1, std::gcd(a_gcd, am1), kk);
      }
    };
    walk_a(walk_a, 0, n64, 0);
  }

  std::vector<Natural> weights(level);
  for (std::uint64_t k = 0; k < level; ++k) weights[k] = Natural(bucket[k]);
  const auto certified = as_rational_integer(weighted_root_sum(level, weights));
  if (!certified)
    throw std::logic_error("brute_force_oracle: cyclotomic total is not a rational integer");
  return *certified;
}

std::optional<Natural> cheapest_oracle(const MenonQuery& q, const Natural& budget) {
  const Natural grouped_cost = oracle_cost(q, OracleMode::grouped);
  const Natural naive_cost = oracle_cost(q, OracleMode::naive);
  OracleMode mode;
  if (grouped_cost <= budget && (grouped_cost <= naive_cost || naive_cost > budget))
    mode = OracleMode::grouped;
  else if (naive_cost <= budget)
    mode = OracleMode::naive;
  else
    return std::nullopt;
  try {
    return brute_force_oracle(q, mode, budget);
  } catch (const BudgetExceeded&) {
    return std::nullopt;
  }
}

}  // namespace

Natural brute_force_oracle(const MenonQuery& q, OracleMode mode, const Natural& budget) {
  const Natural cost = oracle_cost(q, mode);
  if (cost > budget) throw BudgetExceeded(cost, budget);
  if (q.n() > std::numeric_limits<std::uint64_t>::max())
    throw std::domain_error("brute_force_oracle: n exceeds the enumerable range");
  Natural level_nat = 1;
  for (const auto& chi : q.characters()) level_nat = lcm(level_nat, chi.order());
  if (level_nat > kLevelCap) throw BudgetExceeded(level_nat, Natural(kLevelCap));
  const std::uint64_t n64 = to_uint64(q.n());
  const std::uint64_t level = to_uint64(level_nat);

  // All bucket increments are nonnegative, so every partial sum is bounded
  // by the all-trivial total, which is at most (naive term count) * n.
  const Natural mass_bound = oracle_cost(q, OracleMode::naive) * q.n();
  if (mass_bound < (Natural(1) << 62)) return oracle_impl<std::uint64_t>(q, mode, n64, level);
  return oracle_impl<Natural>(q, mode, n64, level);
}

Natural brute_force_oracle(const MenonQuery& q, OracleMode mode) {
  return brute_force_oracle(q, mode, default_cost_budget());
}

MenonReport verify(const MenonQuery& q, const Natural& budget) {
  MenonReport rep = closed_form_general(q);
  if (auto oracle = cheapest_oracle(q, budget)) {
    rep.oracle = *oracle;
    rep.agreement =
        (*oracle == rep.closed_form) ? Agreement::matched : Agreement::mismatched;
  } else {
    rep.agreement = Agreement::oracle_skipped;
  }
  return rep;
}

MenonReport verify(const MenonQuery& q) { return verify(q, default_cost_budget()); }

bool multiplicativity_check(const Natural& n1, const Natural& n2, const MenonQuery& q,
                            const Natural& budget) {
  if (n1 < 1 || n2 < 1 || n1 * n2 != q.n() || gcd(n1, n2) != 1)
    throw std::domain_error("multiplicativity_check: split must be coprime and multiply to n");
  std::vector<DirichletCharacter> left, right;
  for (const auto& chi : q.characters()) {
    auto [c1, c2] = crt_decompose(chi, n1, n2);
    left.push_back(std::move(c1));
    right.push_back(std::move(c2));
  }
  const MenonQuery q1(n1, q.r(), std::move(left));
  const MenonQuery q2(n2, q.r(), std::move(right));
  const Natural full = closed_form_general(q).closed_form;
  const Natural f1 = closed_form_general(q1).closed_form;
  const Natural f2 = closed_form_general(q2).closed_form;
  bool ok = (full == f1 * f2);
  const auto of = cheapest_oracle(q, budget);
  const auto o1 = cheapest_oracle(q1, budget);
  const auto o2 = cheapest_oracle(q2, budget);
  if (of && o1 && o2) ok = ok && (*of == *o1 * *o2);
  return ok;
}

bool multiplicativity_check(const Natural& n1, const Natural& n2, const MenonQuery& q) {
  return multiplicativity_check(n1, n2, q, default_cost_budget());
}

const char* to_string(Agreement a) {
  switch (a) {
    case Agreement::matched:
      return "matched";
    case Agreement::mismatched:
      return "mismatched";
    case Agreement::oracle_skipped:
      return "oracle-skipped";
  }
  return "unknown";
}

}  // namespace menon
