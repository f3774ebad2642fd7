#include "menon/cyclotomic.hpp"

#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace menon {

namespace {

// Ascending-coefficient integer polynomials. Divisors are always monic here,
// so division stays in Z[x].

std::size_t degree(const std::vector<Natural>& p) {
  std::size_t d = p.size();
  while (d > 0 && p[d - 1] == 0) --d;
  return d == 0 ? 0 : d - 1;
}

// Quotient of num by monic den; throws if the division leaves a remainder.
std::vector<Natural> poly_div_exact(std::vector<Natural> num, const std::vector<Natural>& den) {
  const std::size_t dd = den.size() - 1;
  if (num.size() < den.size()) throw std::logic_error("poly_div_exact: degree underflow");
  std::vector<Natural> quot(num.size() - dd);
  for (std::size_t qi = quot.size(); qi-- > 0;) {
    Natural c = num[qi + dd];
    if (c == 0) continue;
    quot[qi] = c;
    for (std::size_t j = 0; j <= dd; ++j) num[qi + j] -= c * den[j];
  }
  for (std::size_t j = 0; j < dd; ++j)
    if (num[j] != 0) throw std::logic_error("poly_div_exact: nonzero remainder");
  return quot;
}

// Residue of num modulo monic phi, returned with exactly deg(phi) coefficients.
std::vector<Natural> poly_mod(std::vector<Natural> num, const std::vector<Natural>& phi) {
  const std::size_t dd = phi.size() - 1;
  for (std::size_t i = num.size(); i-- > dd;) {
    if (num[i] == 0) continue;
    const Natural c = std::move(num[i]);
    for (std::size_t j = 0; j < dd; ++j) num[i - dd + j] -= c * phi[j];
  }
  num.resize(dd, Natural(0));
  return num;
}

bool is_constant(const std::vector<Natural>& coeffs) {
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    if (coeffs[i] != 0) return false;
  return true;
}

}  // namespace

RootOfUnityExponent::RootOfUnityExponent(Natural num, Natural lvl)
    : numerator(std::move(num)), level(std::move(lvl)) {
  if (level < 1) throw std::domain_error("RootOfUnityExponent: level must be positive");
  numerator %= level;
  if (numerator < 0) numerator += level;
}

const std::vector<Natural>& cyclotomic_polynomial(std::uint64_t level) {
  if (level == 0) throw std::domain_error("cyclotomic_polynomial: level must be positive");
  static std::map<std::uint64_t, std::vector<Natural>> cache;
  static std::recursive_mutex mutex;
  std::lock_guard<std::recursive_mutex> lock(mutex);
  if (auto it = cache.find(level); it != cache.end()) return it->second;

  std::vector<Natural> poly;
  if (level == 1) {
    poly = {Natural(-1), Natural(1)};  // x - 1
  } else {
    // x^level - 1 divided by Phi_d for every proper divisor d.
    std::vector<Natural> num(level + 1);
    num[0] = -1;
    num[level] = 1;
    for (const Natural& d : divisors(factorize(Natural(level)))) {
      const std::uint64_t dv = to_uint64(d);
      if (dv == level) continue;
      num = poly_div_exact(std::move(num), cyclotomic_polynomial(dv));
    }
    poly = std::move(num);
  }
  poly.resize(degree(poly) + 1);
  return cache.emplace(level, std::move(poly)).first->second;
}

CyclotomicInteger CyclotomicInteger::zero(std::uint64_t level) {
  const std::size_t deg = cyclotomic_polynomial(level).size() - 1;
  return CyclotomicInteger(level, std::vector<Natural>(deg));
}

CyclotomicInteger CyclotomicInteger::from_integer(std::uint64_t level, const Natural& c) {
  CyclotomicInteger out = zero(level);
  out.coeffs_[0] = c;
  return out;
}

bool CyclotomicInteger::is_zero() const {
  for (const Natural& c : coeffs_)
    if (c != 0) return false;
  return true;
}

CyclotomicInteger from_root(const RootOfUnityExponent& e) {
  const std::uint64_t level = to_uint64(e.level);
  const std::uint64_t k = to_uint64(e.numerator);
  const auto& phi = cyclotomic_polynomial(level);
  const std::size_t deg = phi.size() - 1;
  if (k < deg) {
    CyclotomicInteger out = CyclotomicInteger::zero(level);
    out.coeffs_[k] = 1;
    return out;
  }
  std::vector<Natural> poly(k + 1);
  poly[k] = 1;
  return CyclotomicInteger(level, poly_mod(std::move(poly), phi));
}

CyclotomicInteger add(const CyclotomicInteger& a, const CyclotomicInteger& b) {
  if (a.level_ != b.level_) throw std::domain_error("add: level mismatch");
  CyclotomicInteger out = a;
  for (std::size_t i = 0; i < out.coeffs_.size(); ++i) out.coeffs_[i] += b.coeffs_[i];
  return out;
}

CyclotomicInteger mul(const CyclotomicInteger& a, const CyclotomicInteger& b) {
  if (a.level_ != b.level_) throw std::domain_error("mul: level mismatch");
  if (a.is_zero() || b.is_zero()) return CyclotomicInteger::zero(a.level_);
  if (is_constant(a.coeffs_)) return scale(a.coeffs_[0], b);
  if (is_constant(b.coeffs_)) return scale(b.coeffs_[0], a);
  std::vector<Natural> prod(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      if (b.coeffs_[j] == 0) continue;
      prod[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
  }
  return CyclotomicInteger(a.level_, poly_mod(std::move(prod), cyclotomic_polynomial(a.level_)));
}

CyclotomicInteger scale(const Natural& c, const CyclotomicInteger& a) {
  CyclotomicInteger out = a;
  for (Natural& coeff : out.coeffs_) coeff *= c;
  return out;
}

CyclotomicInteger embed(const CyclotomicInteger& a, std::uint64_t target_level) {
  if (target_level == 0 || target_level % a.level_ != 0)
    throw std::domain_error("embed: target level must be a positive multiple of the source level");
  if (target_level == a.level_) return a;
  const std::uint64_t stride = target_level / a.level_;
  std::vector<Natural> poly((a.coeffs_.size() - 1) * stride + 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) poly[i * stride] = a.coeffs_[i];
  return CyclotomicInteger(target_level,
                           poly_mod(std::move(poly), cyclotomic_polynomial(target_level)));
}

std::optional<Natural> as_rational_integer(const CyclotomicInteger& a) {
  if (!is_constant(a.coefficients())) return std::nullopt;
  return a.coefficients()[0];
}

CyclotomicInteger weighted_root_sum(std::uint64_t level, std::span<const Natural> weights) {
  if (level == 0) throw std::domain_error("weighted_root_sum: level must be positive");
  if (weights.size() > level)
    throw std::domain_error("weighted_root_sum: more weights than exponents");
  std::vector<Natural> poly(weights.begin(), weights.end());
  if (poly.empty()) poly.push_back(Natural(0));
  return CyclotomicInteger(level, poly_mod(std::move(poly), cyclotomic_polynomial(level)));
}

std::ostream& operator<<(std::ostream& os, const CyclotomicInteger& a) {
  bool first = true;
  for (std::size_t i = 0; i < a.coefficients().size(); ++i) {
    const Natural& c = a.coefficients()[i];
    if (c == 0) continue;
    if (!first) os << " + ";
    os << c;
    if (i > 0) os << "*z^" << i;
    first = false;
  }
  if (first) os << "0";
  os << " (level " << a.level() << ")";
  return os;
}

}  // namespace menon
