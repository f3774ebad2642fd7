#include "menon/characters.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace menon {

namespace {

using boost::multiprecision::gcd;
using boost::multiprecision::lcm;
using boost::multiprecision::powm;

constexpr std::uint64_t kDlogTableLimit = 1'000'000;
constexpr std::uint32_t kNonUnit = ~std::uint32_t(0);
constexpr std::uint32_t kSignBit = std::uint32_t(1) << 31;

Natural smallest_primitive_root(const Natural& p) {
  const Factorization f = factorize(p - 1);
  for (Natural g = 2; g < p; ++g) {
    bool generates = true;
    for (const auto& q : f.pairs()) {
      if (powm(g, (p - 1) / q.prime, p) == 1) {
        generates = false;
        break;
      }
    }
    if (generates) return g;
  }
  throw std::logic_error("smallest_primitive_root: none found");
}

void build_dlog_table(UnitComponent& comp) {
  if (comp.prime_power > kDlogTableLimit) return;
  const std::uint64_t pm = to_uint64(comp.prime_power);
  comp.dlog_table.assign(pm, kNonUnit);
  if (comp.prime == 2) {
    if (comp.exponent == 1) {
      comp.dlog_table[1] = 0;
    } else if (comp.exponent == 2) {
      comp.dlog_table[1] = 0;
      comp.dlog_table[3] = 1;
    } else {
      const std::uint64_t half = pm >> 2;  // order of 5
      std::uint64_t r = 1;
      for (std::uint64_t k = 0; k < half; ++k) {
        comp.dlog_table[r] = std::uint32_t(k);
        comp.dlog_table[pm - r] = std::uint32_t(k) | kSignBit;
        r = r * 5 % pm;
      }
    }
    return;
  }
  const std::uint64_t g = to_uint64(comp.generators[0].residue);
  const std::uint64_t n_units = to_uint64(comp.generators[0].order);
  std::uint64_t r = 1;
  for (std::uint64_t x = 0; x < n_units; ++x) {
    comp.dlog_table[r] = std::uint32_t(x);
    r = r * g % pm;
  }
}

// Baby-step giant-step in the order-`order` cyclic group generated by base.
Natural bsgs(const Natural& modulus, const Natural& base, const Natural& order,
             const Natural& a) {
  Natural steps = boost::multiprecision::sqrt(order);
  if (steps * steps < order) ++steps;
  std::map<Natural, Natural> baby;
  Natural cur = 1;
  for (Natural j = 0; j < steps; ++j) {
    baby.emplace(cur, j);
    cur = cur * base % modulus;
  }
  // cur = base^steps; its inverse is base^(order - steps mod order)
  const Natural stride = powm(base, order - steps % order, modulus);
  Natural probe = a % modulus;
  for (Natural i = 0; i <= steps; ++i) {
    if (auto it = baby.find(probe); it != baby.end()) return (i * steps + it->second) % order;
    probe = probe * stride % modulus;
  }
  throw std::domain_error("bsgs: argument is outside the generated subgroup");
}

// r mod m from congruences r = r1 (mod m1), r = r2 (mod m2), gcd(m1,m2)=1.
std::pair<Natural, Natural> crt_pair(const Natural& r1, const Natural& m1, const Natural& r2,
                                     const Natural& m2) {
  // Extended gcd for the inverse of m1 modulo m2.
  Natural old_r = m1 % m2, rr = m2, old_s = 1, ss = 0;
  while (rr != 0) {
    const Natural q = old_r / rr;
    old_r -= q * rr;
    std::swap(old_r, rr);
    old_s -= q * ss;
    std::swap(old_s, ss);
  }
  Natural inv = old_s % m2;
  if (inv < 0) inv += m2;
  Natural diff = (r2 - r1) % m2;
  if (diff < 0) diff += m2;
  const Natural m = m1 * m2;
  return {(r1 + m1 * (diff * inv % m2)) % m, m};
}

}  // namespace

namespace detail {

Natural dlog_cyclic(const Natural& modulus, const Natural& base, const Natural& order,
                    const Natural& a) {
  Natural result = 0, result_mod = 1;
  const Factorization order_f = factorize(order);
  for (const auto& pp : order_f.pairs()) {
    const Natural qc = pp.value();
    const Natural cofactor = order / qc;
    const Natural gq = powm(base, cofactor, modulus);  // order q^c
    const Natural aq = powm(a % modulus, cofactor, modulus);
    const Natural gamma = powm(gq, qc / pp.prime, modulus);  // order q
    Natural x = 0, qpow = 1;
    for (unsigned i = 0; i < pp.exponent; ++i) {
      const Natural unwound = powm(gq, qc - x, modulus);
      const Natural shifted = aq * unwound % modulus;
      const Natural h = powm(shifted, qc / (qpow * pp.prime), modulus);
      x += bsgs(modulus, gamma, pp.prime, h) * qpow;
      qpow *= pp.prime;
    }
    std::tie(result, result_mod) = crt_pair(result, result_mod, x, qc);
  }
  return result;
}

}  // namespace detail

UnitGroupStructure::UnitGroupStructure(const Natural& n)
    : modulus_(n), phi_(1), group_exponent_(1) {
  if (n < 1) throw std::domain_error("unit_group_structure: modulus must be positive");
  const Factorization nf = factorize(n);
  for (const auto& pp : nf.pairs()) {
    UnitComponent comp;
    comp.prime = pp.prime;
    comp.exponent = pp.exponent;
    comp.prime_power = pp.value();
    if (pp.prime == 2) {
      if (pp.exponent == 2) {
        comp.generators = {{Natural(3), Natural(2)}};
      } else if (pp.exponent >= 3) {
        comp.generators = {{comp.prime_power - 1, Natural(2)},
                           {Natural(5), pow_natural(Natural(2), pp.exponent - 2)}};
      }
    } else {
      Natural g = smallest_primitive_root(pp.prime);
      if (pp.exponent >= 2 && powm(g, pp.prime - 1, pp.prime * pp.prime) == 1) g += pp.prime;
      comp.generators = {
          {g, pow_natural(pp.prime, pp.exponent - 1) * (pp.prime - 1)}};
    }
    build_dlog_table(comp);
    phi_ *= pow_natural(pp.prime, pp.exponent - 1) * (pp.prime - 1);
    for (const auto& gen : comp.generators) group_exponent_ = lcm(group_exponent_, gen.order);
    generator_count_ += comp.generators.size();
    components_.push_back(std::move(comp));
  }
}

std::vector<Natural> UnitGroupStructure::component_dlog(std::size_t index, const Natural& a) const {
  const UnitComponent& comp = components_.at(index);
  Natural a_red = a % comp.prime_power;
  if (a_red < 0) a_red += comp.prime_power;
  if (a_red % comp.prime == 0)
    throw std::domain_error("component_dlog: argument is not a unit");
  if (comp.generators.empty()) return {};
  if (!comp.dlog_table.empty()) {
    const std::uint32_t packed = comp.dlog_table[to_uint64(a_red)];
    if (packed == kNonUnit) throw std::domain_error("component_dlog: argument is not a unit");
    if (comp.prime == 2 && comp.exponent >= 3)
      return {Natural((packed & kSignBit) ? 1 : 0), Natural(packed & ~kSignBit)};
    return {Natural(packed)};
  }
  if (comp.prime == 2) {
    // 2^m with m >= 3 (smaller powers always sit below the table limit):
    // a = (-1)^e1 * 5^k with e1 read off mod 4.
    const bool negate = a_red % 4 == 3;
    const Natural a2 = negate ? comp.prime_power - a_red : a_red;
    return {Natural(negate ? 1 : 0),
            detail::dlog_cyclic(comp.prime_power, Natural(5), comp.generators[1].order, a2)};
  }
  return {detail::dlog_cyclic(comp.prime_power, comp.generators[0].residue,
                              comp.generators[0].order, a_red)};
}

std::shared_ptr<const UnitGroupStructure> unit_group_structure(const Natural& n) {
  static std::map<Natural, std::shared_ptr<const UnitGroupStructure>> cache;
  static std::mutex mutex;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const UnitGroupStructure>(n);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(n, std::move(built)).first->second;
}

namespace {

// Conductor exponent of the local character with exponent vector e on one
// component. For odd p the subgroup U_t is the unique subgroup of index
// phi(p^t), so triviality on U_t is a p-adic valuation condition on e; for
// 2^m the (-1, 5) coordinates separate conductor 4 from conductor 2^{m-v}.
unsigned local_conductor_exponent_of(const UnitComponent& comp, std::span<const Natural> e) {
  if (comp.prime == 2) {
    if (comp.exponent <= 1) return 0;
    if (comp.exponent == 2) return e[0] == 0 ? 0 : 2;
    if (e[1] != 0) return comp.exponent - valuation(Natural(2), e[1]);
    return e[0] == 0 ? 0 : 2;
  }
  if (e[0] == 0) return 0;
  const unsigned v = valuation(comp.prime, e[0]);
  return comp.exponent - std::min(v, comp.exponent - 1);
}

}  // namespace

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroupStructure> group,
                                       std::vector<Natural> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)), order_(1), conductor_(1) {
  if (!group_) throw std::domain_error("DirichletCharacter: null group");
  if (exponents_.size() != group_->generator_count())
    throw std::domain_error("DirichletCharacter: exponent count does not match generator count");
  std::size_t gi = 0;
  for (const auto& comp : group_->components()) {
    for (const auto& gen : comp.generators) {
      Natural& e = exponents_[gi++];
      e %= gen.order;
      if (e < 0) e += gen.order;
      order_ = lcm(order_, gen.order / gcd(e, gen.order));
    }
  }
  gi = 0;
  for (const auto& comp : group_->components()) {
    const unsigned t = local_conductor_exponent_of(
        comp, std::span<const Natural>(exponents_.data() + gi, comp.generators.size()));
    local_conductor_exponents_.push_back(t);
    conductor_ *= pow_natural(comp.prime, t);
    gi += comp.generators.size();
  }
}

DirichletCharacter DirichletCharacter::trivial(const Natural& modulus) {
  auto group = unit_group_structure(modulus);
  return DirichletCharacter(group, std::vector<Natural>(group->generator_count()));
}

const Natural& DirichletCharacter::modulus() const { return group_->modulus(); }

unsigned DirichletCharacter::local_conductor_exponent(std::size_t component_index) const {
  return local_conductor_exponents_.at(component_index);
}

bool DirichletCharacter::is_trivial() const { return order_ == 1; }

DirichletCharacter DirichletCharacter::inverse() const {
  std::vector<Natural> inv(exponents_.size());
  std::size_t gi = 0;
  for (const auto& comp : group_->components())
    for (const auto& gen : comp.generators) {
      inv[gi] = exponents_[gi] == 0 ? Natural(0) : gen.order - exponents_[gi];
      ++gi;
    }
  return DirichletCharacter(group_, std::move(inv));
}

std::string DirichletCharacter::to_string() const {
  std::ostringstream os;
  if (is_trivial()) {
    os << "trivial@" << modulus();
    return os.str();
  }
  os << "mod=" << modulus() << ";exps=";
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (i) os << ",";
    os << exponents_[i];
  }
  return os.str();
}

RootOfUnityExponent eval_character(const DirichletCharacter& chi, const Natural& a,
                                   const Natural& ambient_level) {
  const UnitGroupStructure& G = chi.group();
  Natural a_red = a % G.modulus();
  if (a_red < 0) a_red += G.modulus();
  if (gcd(a_red, G.modulus()) != 1)
    throw std::domain_error("eval_character: argument is not a unit modulo n");
  if (ambient_level < 1 || ambient_level % chi.order() != 0)
    throw std::domain_error("eval_character: ambient level must be a multiple of the order");
  const Natural& M = G.group_exponent();
  Natural k_at_m = 0;
  std::size_t gi = 0;
  for (std::size_t ci = 0; ci < G.components().size(); ++ci) {
    const auto& comp = G.components()[ci];
    if (comp.generators.empty()) continue;
    const std::vector<Natural> xs = G.component_dlog(ci, a_red);
    for (std::size_t j = 0; j < xs.size(); ++j)
      k_at_m += chi.exponents()[gi + j] * xs[j] * (M / comp.generators[j].order);
    gi += comp.generators.size();
  }
  k_at_m %= M;
  const Natural scaled = k_at_m * ambient_level;
  if (scaled % M != 0)
    throw std::logic_error("eval_character: exponent does not land on the ambient level");
  return RootOfUnityExponent(scaled / M % ambient_level, ambient_level);
}

RootOfUnityExponent eval_character(const DirichletCharacter& chi, const Natural& a) {
  return eval_character(chi, a, chi.order());
}

Natural conductor(const DirichletCharacter& chi) { return chi.conductor(); }

std::pair<DirichletCharacter, DirichletCharacter> crt_decompose(const DirichletCharacter& chi,
                                                                const Natural& n1,
                                                                const Natural& n2) {
  if (n1 < 1 || n2 < 1 || n1 * n2 != chi.modulus() || gcd(n1, n2) != 1)
    throw std::domain_error("crt_decompose: split must be coprime and multiply to the modulus");
  std::vector<Natural> e1, e2;
  std::size_t gi = 0;
  for (const auto& comp : chi.group().components()) {
    auto& target = (n1 % comp.prime == 0) ? e1 : e2;
    for (std::size_t j = 0; j < comp.generators.size(); ++j)
      target.push_back(chi.exponents()[gi + j]);
    gi += comp.generators.size();
  }
  return {DirichletCharacter(unit_group_structure(n1), std::move(e1)),
          DirichletCharacter(unit_group_structure(n2), std::move(e2))};
}

std::vector<DirichletCharacter> enumerate_characters(const Natural& n) {
  auto group = unit_group_structure(n);
  std::vector<Natural> orders;
  for (const auto& comp : group->components())
    for (const auto& gen : comp.generators) orders.push_back(gen.order);
  std::vector<DirichletCharacter> out;
  std::vector<Natural> exps(orders.size());
  while (true) {
    out.emplace_back(group, exps);
    std::size_t pos = exps.size();
    while (pos > 0) {
      --pos;
      if (++exps[pos] < orders[pos]) break;
      exps[pos] = 0;
      if (pos == 0) return out;
    }
    if (exps.empty()) return out;
  }
}

DirichletCharacter induce_character(const DirichletCharacter& chi, const Natural& modulus) {
  const Natural& small = chi.modulus();
  if (modulus % small != 0)
    throw std::domain_error("induce_character: target modulus must be a multiple");
  if (modulus == small) return chi;
  auto group = unit_group_structure(modulus);

  // Exponents of chi's component for a given prime, empty when p does not
  // divide chi's modulus.
  auto local_exponents = [&](const Natural& p) -> std::vector<Natural> {
    std::size_t gi = 0;
    for (const auto& comp : chi.group().components()) {
      if (comp.prime == p)
        return {chi.exponents().begin() + gi,
                chi.exponents().begin() + gi + comp.generators.size()};
      gi += comp.generators.size();
    }
    return {};
  };

  std::vector<Natural> exps;
  for (const auto& comp : group->components()) {
    const unsigned m_small = valuation(comp.prime, small);
    const std::vector<Natural> src = m_small == 0 ? std::vector<Natural>{} : local_exponents(comp.prime);
    if (comp.prime == 2) {
      const unsigned m = comp.exponent;
      if (m_small <= 1) {
        exps.insert(exps.end(), comp.generators.size(), Natural(0));
      } else if (m_small == 2) {
        // chi is defined mod 4; its generator 3 maps to -1 in 2^m.
        if (m == 2) {
          exps.push_back(src[0]);
        } else {
          exps.push_back(src[0]);
          exps.push_back(Natural(0));
        }
      } else {
        // Both moduli use the (-1, 5) generators; the 5-coordinate rescales
        // by the order ratio 2^(m - m_small).
        exps.push_back(src[0]);
        exps.push_back(src[1] * pow_natural(Natural(2), m - m_small));
      }
    } else {
      if (m_small == 0) {
        exps.insert(exps.end(), comp.generators.size(), Natural(0));
      } else {
        // The canonical primitive roots for p^m and p^m_small coincide mod
        // p^m_small, so inducing just rescales by the order ratio.
        exps.push_back(src[0] * pow_natural(comp.prime, comp.exponent - m_small));
      }
    }
  }
  return DirichletCharacter(std::move(group), std::move(exps));
}

CyclotomicInteger subgroup_sum(const DirichletCharacter& chi, unsigned j) {
  const auto& comps = chi.group().components();
  if (comps.size() != 1)
    throw std::domain_error("subgroup_sum: modulus must be a prime power");
  const auto& comp = comps[0];
  if (j > comp.exponent) throw std::domain_error("subgroup_sum: level exceeds the exponent");
  const std::uint64_t level = to_uint64(chi.order());
  std::vector<Natural> weights(level);
  const FiltrationLevel filt{comp.prime, comp.exponent, j};
  for (const Natural& a : filt.members())
    weights[to_uint64(eval_character(chi, a).numerator)] += 1;
  return weighted_root_sum(level, weights);
}

Natural FiltrationLevel::cardinality() const {
  if (j > m + 1) throw std::domain_error("FiltrationLevel: level out of range");
  if (j == m + 1) return 0;
  if (j == 0) return pow_natural(prime, m - 1) * (prime - 1);
  return pow_natural(prime, m - j);
}

bool FiltrationLevel::contains(const Natural& a) const {
  if (j > m + 1) throw std::domain_error("FiltrationLevel: level out of range");
  if (j == m + 1) return false;
  const Natural pm = pow_natural(prime, m);
  Natural a_red = a % pm;
  if (a_red < 0) a_red += pm;
  if (j == 0) return a_red % prime != 0;
  return a_red % pow_natural(prime, j) == 1;
}

std::vector<Natural> FiltrationLevel::members() const {
  if (j > m + 1) throw std::domain_error("FiltrationLevel: level out of range");
  std::vector<Natural> out;
  if (j == m + 1) return out;
  const Natural pm = pow_natural(prime, m);
  if (j == 0) {
    for (Natural a = 1; a < pm; ++a)
      if (a % prime != 0) out.push_back(a);
    if (pm == 1) out.push_back(Natural(0));  // unit group of Z_1
    return out;
  }
  const Natural step = pow_natural(prime, j);
  for (Natural a = 1; a < pm; a += step) out.push_back(a);
  if (pm == 1) out.push_back(Natural(0));
  return out;
}

}  // namespace menon
