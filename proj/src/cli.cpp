#include "menon/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "menon/cyclotomic.hpp"

namespace menon {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_ms(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

Natural parse_natural_slice(const std::string& text, std::size_t begin, std::size_t end) {
  if (begin >= end) throw SpecParseError("expected digits", begin);
  for (std::size_t i = begin; i < end; ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i])))
      throw SpecParseError("expected a decimal digit", i);
  return Natural(text.substr(begin, end - begin));
}

Natural parse_integer_slice(const std::string& text, std::size_t begin, std::size_t end) {
  if (begin < end && text[begin] == '-') return -parse_natural_slice(text, begin + 1, end);
  return parse_natural_slice(text, begin, end);
}

Natural natural_from_cli(const std::string& text, const char* what) {
  if (text.empty()) throw std::invalid_argument(std::string(what) + ": empty value");
  for (char c : text)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument(std::string(what) + ": expected a decimal integer, got '" +
                                  text + "'");
  return Natural(text);
}

// ---- report serialization ----------------------------------------------

std::string factors_compact(const MenonReport& rep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rep.per_prime_factors.size(); ++i) {
    if (i) os << "|";
    os << rep.per_prime_factors[i].prime_power << ":" << rep.per_prime_factors[i].local_value;
  }
  return os.str();
}

std::string character_list(const MenonQuery& q) {
  std::ostringstream os;
  for (std::size_t i = 0; i < q.characters().size(); ++i) {
    if (i) os << "|";
    os << q.characters()[i].to_string();
  }
  return os.str();
}

ojson report_to_json(const MenonReport& rep, const MenonQuery& q, double elapsed_ms) {
  ojson j;
  j["n"] = rep.n.str();
  j["r"] = rep.r;
  j["s"] = rep.s;
  j["characters"] = ojson::array();
  for (const auto& chi : q.characters()) j["characters"].push_back(chi.to_string());
  j["d"] = rep.d.str();
  j["n0"] = rep.n0.str();
  j["closed_form"] = rep.closed_form.str();
  if (rep.oracle)
    j["oracle"] = rep.oracle->str();
  else
    j["oracle"] = nullptr;
  j["agreement"] = to_string(rep.agreement);
  ojson factors = ojson::array();
  for (const auto& f : rep.per_prime_factors) {
    ojson e;
    e["prime_power"] = f.prime_power.str();
    e["local_value"] = f.local_value.str();
    factors.push_back(std::move(e));
  }
  j["per_prime_factors"] = std::move(factors);
  j["elapsed_ms"] = elapsed_ms;
  return j;
}

constexpr const char* kReportCsvHeader =
    "n,r,s,characters,d,n0,closed_form,oracle,agreement,per_prime_factors,elapsed_ms";

std::string report_to_csv_row(const MenonReport& rep, const MenonQuery& q, double elapsed_ms) {
  std::ostringstream os;
  os << rep.n << "," << rep.r << "," << rep.s << "," << character_list(q) << "," << rep.d << ","
     << rep.n0 << "," << rep.closed_form << ",";
  if (rep.oracle) os << *rep.oracle;
  os << "," << to_string(rep.agreement) << "," << factors_compact(rep) << ","
     << format_ms(elapsed_ms);
  return os.str();
}

void report_plain(std::ostream& os, const MenonReport& rep, const MenonQuery& q,
                  double elapsed_ms) {
  os << "n            = " << rep.n << "\n"
     << "r            = " << rep.r << "\n"
     << "s            = " << rep.s << "\n"
     << "characters   = " << character_list(q) << "\n"
     << "d            = " << rep.d << "\n"
     << "n0           = " << rep.n0 << "\n"
     << "closed form  = " << rep.closed_form << "\n"
     << "oracle       = " << (rep.oracle ? rep.oracle->str() : std::string("(skipped)")) << "\n"
     << "agreement    = " << to_string(rep.agreement) << "\n"
     << "local factors= " << factors_compact(rep) << "\n"
     << "elapsed_ms   = " << format_ms(elapsed_ms) << "\n";
}

void emit_report(std::ostream& os, OutputFormat fmt, const MenonReport& rep, const MenonQuery& q,
                 double elapsed_ms) {
  switch (fmt) {
    case OutputFormat::json:
      os << report_to_json(rep, q, elapsed_ms).dump(2) << "\n";
      break;
    case OutputFormat::csv:
      os << kReportCsvHeader << "\n" << report_to_csv_row(rep, q, elapsed_ms) << "\n";
      break;
    case OutputFormat::plain:
      report_plain(os, rep, q, elapsed_ms);
      break;
  }
}

// ---- query construction --------------------------------------------------

MenonQuery query_from_config(const RunConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("--n must be a positive integer");
  std::vector<DirichletCharacter> chars;
  if (cfg.trivial_count > 0) {
    if (!cfg.character_specs.empty())
      throw std::invalid_argument("--s and --char are mutually exclusive");
    for (unsigned i = 0; i < cfg.trivial_count; ++i)
      chars.push_back(DirichletCharacter::trivial(cfg.n));
  } else {
    if (cfg.character_specs.empty())
      throw std::invalid_argument("need at least one --char spec, or --s <count> for trivials");
    for (const auto& spec : cfg.character_specs) chars.push_back(parse_character_spec(spec));
  }
  return MenonQuery(cfg.n, cfg.r, std::move(chars));
}

// ---- compute / verify -----------------------------------------------------

int do_compute(const RunConfig& cfg, std::ostream& out, bool with_oracle) {
  const MenonQuery q = query_from_config(cfg);
  const auto start = Clock::now();
  const MenonReport rep = with_oracle ? verify(q, cfg.cost_budget) : closed_form_general(q);
  const double elapsed = ms_since(start);
  emit_report(out, cfg.output_format, rep, q, elapsed);
  if (!with_oracle) return 0;
  switch (rep.agreement) {
    case Agreement::matched:
      return 0;
    case Agreement::mismatched:
      return 1;
    case Agreement::oracle_skipped:
      return 3;
  }
  return 0;
}

// ---- sweep ----------------------------------------------------------------

int do_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.max_n < 1) throw std::invalid_argument("--max-n must be a positive integer");
  if (cfg.max_s < 1) throw std::invalid_argument("--max-s must be at least 1");

  // Sampling picks a deterministic subset of the instance index space
  // (n asc, r asc, s asc, character tuple in lexicographic order).
  std::set<std::uint64_t> sampled;
  bool use_sample = cfg.sample.has_value();
  if (use_sample) {
    Natural total = 0;
    for (Natural n = 1; n <= cfg.max_n; ++n) {
      const Natural phi = euler_phi(factorize(n));
      Natural tuples = 1;
      for (unsigned s = 1; s <= cfg.max_s; ++s) {
        tuples *= phi;
        total += tuples * (cfg.max_r + 1);
      }
    }
    if (total > std::numeric_limits<std::int64_t>::max())
      throw std::invalid_argument("sweep: sample space too large to index");
    const std::uint64_t total64 = to_uint64(total);
    const std::uint64_t want = std::min<std::uint64_t>(*cfg.sample, total64);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::uint64_t> dist(0, total64 - 1);
    while (sampled.size() < want) sampled.insert(dist(rng));
  }

  std::uint64_t matched = 0, mismatched = 0, skipped = 0;
  ojson rows = ojson::array();
  if (cfg.output_format == OutputFormat::csv) out << kReportCsvHeader << "\n";

  std::uint64_t cursor = 0;  // global instance index (sampling only)
  for (Natural n = 1; n <= cfg.max_n; ++n) {
    const std::vector<DirichletCharacter> chars = enumerate_characters(n);
    const std::uint64_t phi = chars.size();
    for (unsigned s = 1; s <= cfg.max_s; ++s) {
      // tuple count phi^s, indexed most-significant-digit-first
      for (unsigned r = 0; r <= cfg.max_r; ++r) {
        std::vector<std::size_t> idx(s, 0);
        std::uint64_t tuple_index = 0;
        bool done = false;
        while (!done) {
          const bool wanted = !use_sample || sampled.count(cursor + tuple_index) > 0;
          if (wanted) {
            std::vector<DirichletCharacter> tuple;
            tuple.reserve(s);
            for (std::size_t i = 0; i < s; ++i) tuple.push_back(chars[idx[i]]);
            const MenonQuery q(n, r, std::move(tuple));
            const auto start = Clock::now();
            const MenonReport rep = verify(q, cfg.cost_budget);
            const double elapsed = ms_since(start);
            switch (rep.agreement) {
              case Agreement::matched:
                ++matched;
                break;
              case Agreement::mismatched:
                ++mismatched;
                break;
              case Agreement::oracle_skipped:
                ++skipped;
                break;
            }
            switch (cfg.output_format) {
              case OutputFormat::json:
                rows.push_back(report_to_json(rep, q, elapsed));
                break;
              case OutputFormat::csv:
                out << report_to_csv_row(rep, q, elapsed) << "\n";
                break;
              case OutputFormat::plain:
                report_plain(out, rep, q, elapsed);
                out << "\n";
                break;
            }
          }
          // advance the tuple odometer (rightmost fastest)
          ++tuple_index;
          done = true;
          for (std::size_t pos = s; pos-- > 0;) {
            if (++idx[pos] < phi) {
              done = false;
              break;
            }
            idx[pos] = 0;
          }
        }
        cursor += tuple_index;
      }
    }
  }
  if (cfg.output_format == OutputFormat::json) out << rows.dump(2) << "\n";
  err << "sweep: " << (matched + mismatched + skipped) << " instances, " << matched
      << " matched, " << skipped << " oracle-skipped, " << mismatched << " mismatched\n";
  if (mismatched > 0) return 1;
  if (skipped > 0) return 3;
  return 0;
}

// ---- enum-chars -------------------------------------------------------------

int do_enum_chars(const RunConfig& cfg, std::ostream& out) {
  if (cfg.n < 1) throw std::invalid_argument("--n must be a positive integer");
  const auto chars = enumerate_characters(cfg.n);
  switch (cfg.output_format) {
    case OutputFormat::json: {
      ojson j;
      j["n"] = cfg.n.str();
      j["characters"] = ojson::array();
      for (const auto& chi : chars) {
        ojson e;
        e["character"] = chi.to_string();
        e["order"] = chi.order().str();
        e["conductor"] = chi.conductor().str();
        j["characters"].push_back(std::move(e));
      }
      out << j.dump(2) << "\n";
      break;
    }
    case OutputFormat::csv:
      out << "character,order,conductor\n";
      for (const auto& chi : chars)
        out << chi.to_string() << "," << chi.order() << "," << chi.conductor() << "\n";
      break;
    case OutputFormat::plain:
      out << "characters mod " << cfg.n << " (" << chars.size() << "):\n";
      for (const auto& chi : chars)
        out << "  " << chi.to_string() << "  order=" << chi.order()
            << "  conductor=" << chi.conductor() << "\n";
      break;
  }
  return 0;
}

// ---- lemma property suites ---------------------------------------------------

std::vector<std::pair<Natural, unsigned>> prime_powers_up_to(std::uint64_t bound) {
  std::vector<std::pair<Natural, unsigned>> out;
  for (std::uint64_t p = 2; p <= bound; ++p) {
    if (!is_prime(Natural(p))) continue;
    Natural pm = p;
    unsigned m = 1;
    while (pm <= bound) {
      out.emplace_back(Natural(p), m);
      pm *= p;
      ++m;
    }
  }
  return out;
}

void fail_suite(SuiteResult& res, const std::string& detail) {
  if (res.passed) {
    res.passed = false;
    res.detail = detail;
  }
}

// Every character sum over U_j equals #U_j above the conductor exponent and
// vanishes below it; checked with exact cyclotomic equality.
SuiteResult suite_subgroup_sums(std::uint64_t bound) {
  SuiteResult res{"unit-subgroup character sums", 0, true, ""};
  for (const auto& [p, m] : prime_powers_up_to(bound)) {
    const Natural pm = pow_natural(p, m);
    for (const auto& chi : enumerate_characters(pm)) {
      const unsigned t = chi.local_conductor_exponent(0);
      for (unsigned j = 0; j <= m; ++j) {
        const CyclotomicInteger sum = subgroup_sum(chi, j);
        const Natural expect = j >= t ? FiltrationLevel{p, m, j}.cardinality() : Natural(0);
        if (sum != CyclotomicInteger::from_integer(sum.level(), expect)) {
          std::ostringstream os;
          os << "chi=" << chi.to_string() << " j=" << j << " expected " << expect;
          fail_suite(res, os.str());
        }
        ++res.cases;
      }
    }
  }
  return res;
}

// Sums over s-fold tuples (U_j)^s of products of characters factor into a
// product of single-character sums; the result must be (#U_j)^s above the
// largest conductor exponent and 0 below it. Verified via certified-integer
// products for all pairs and triples, plus a direct double-loop enumeration
// for small moduli.
SuiteResult suite_product_sums(std::uint64_t bound) {
  SuiteResult res{"product character sums over subgroup tuples", 0, true, ""};
  for (const auto& [p, m] : prime_powers_up_to(bound)) {
    const Natural pm = pow_natural(p, m);
    const auto chars = enumerate_characters(pm);
    const std::size_t count = chars.size();

    std::vector<unsigned> ts(count);
    for (std::size_t i = 0; i < count; ++i) ts[i] = chars[i].local_conductor_exponent(0);

    // Per-(character, level) sums with integer certificates. The certified
    // path multiplies plain integers; any uncertified sum (never expected)
    // falls back to full cyclotomic products.
    std::vector<std::vector<CyclotomicInteger>> sums(count);
    std::vector<std::vector<std::optional<Natural>>> cert(count);
    bool all_certified = true;
    for (std::size_t i = 0; i < count; ++i) {
      sums[i].reserve(m + 1);
      for (unsigned j = 0; j <= m; ++j) {
        sums[i].push_back(subgroup_sum(chars[i], j));
        cert[i].push_back(as_rational_integer(sums[i][j]));
        if (!cert[i][j]) all_certified = false;
      }
    }
    std::vector<Natural> card(m + 1);
    for (unsigned j = 0; j <= m; ++j) card[j] = FiltrationLevel{p, m, j}.cardinality();

    auto cyclotomic_product_matches = [&](std::span<const std::size_t> pick, unsigned j,
                                          const Natural& expect) {
      Natural level = 1;
      for (std::size_t ci : pick)
        level = boost::multiprecision::lcm(level, Natural(sums[ci][j].level()));
      const std::uint64_t lv = to_uint64(level);
      CyclotomicInteger prod = CyclotomicInteger::from_integer(lv, 1);
      for (std::size_t ci : pick) prod = mul(prod, embed(sums[ci][j], lv));
      return prod == CyclotomicInteger::from_integer(lv, expect);
    };

    auto check_tuple = [&](std::span<const std::size_t> pick, unsigned j) {
      unsigned u = 0;
      for (std::size_t ci : pick) u = std::max(u, ts[ci]);
      Natural expect = 0;
      if (j >= u) {
        expect = 1;
        for (std::size_t k = 0; k < pick.size(); ++k) expect *= card[j];
      }
      bool ok;
      if (all_certified) {
        Natural prod = 1;
        for (std::size_t ci : pick) prod *= *cert[ci][j];
        ok = prod == expect;
      } else {
        ok = cyclotomic_product_matches(pick, j, expect);
      }
      if (!ok) {
        std::ostringstream os;
        os << "p^m=" << pm << " tuple(";
        for (std::size_t ci : pick) os << chars[ci].to_string() << " ";
        os << ") j=" << j;
        fail_suite(res, os.str());
      }
      ++res.cases;
    };

    std::size_t pick2[2], pick3[3];
    for (std::size_t c1 = 0; c1 < count; ++c1)
      for (std::size_t c2 = 0; c2 < count; ++c2) {
        pick2[0] = c1;
        pick2[1] = c2;
        for (unsigned j = 0; j <= m; ++j) check_tuple(std::span(pick2, 2), j);
      }
    for (std::size_t c1 = 0; c1 < count; ++c1)
      for (std::size_t c2 = 0; c2 < count; ++c2)
        for (std::size_t c3 = 0; c3 < count; ++c3) {
          pick3[0] = c1;
          pick3[1] = c2;
          pick3[2] = c3;
          for (unsigned j = 0; j <= m; ++j) check_tuple(std::span(pick3, 3), j);
        }

    // Direct double-loop route for small moduli: enumerate (U_j)^2 and bucket
    // root-of-unity exponents, then compare against the factored product.
    if (pm <= 27) {
      for (std::size_t c1 = 0; c1 < count; ++c1)
        for (std::size_t c2 = 0; c2 < count; ++c2) {
          const Natural level_nat =
              boost::multiprecision::lcm(chars[c1].order(), chars[c2].order());
          const std::uint64_t lv = to_uint64(level_nat);
          for (unsigned j = 0; j <= m; ++j) {
            std::vector<Natural> weights(lv);
            const auto members = FiltrationLevel{p, m, j}.members();
            for (const Natural& a1 : members)
              for (const Natural& a2 : members) {
                const std::uint64_t k1 =
                    to_uint64(eval_character(chars[c1], a1, level_nat).numerator);
                const std::uint64_t k2 =
                    to_uint64(eval_character(chars[c2], a2, level_nat).numerator);
                weights[(k1 + k2) % lv] += 1;
              }
            const CyclotomicInteger direct = weighted_root_sum(lv, weights);
            const CyclotomicInteger factored =
                mul(embed(sums[c1][j], lv), embed(sums[c2][j], lv));
            if (direct != factored) {
              std::ostringstream os;
              os << "direct route p^m=" << pm << " (" << chars[c1].to_string() << ","
                 << chars[c2].to_string() << ") j=" << j;
              fail_suite(res, os.str());
            }
            ++res.cases;
          }
        }
    }
  }
  return res;
}

// b-tuple gcd class counts against full enumeration.
SuiteResult suite_b_tuple_counts(std::uint64_t bound, unsigned max_r) {
  SuiteResult res{"b-tuple gcd class counts", 0, true, ""};
  const std::uint64_t cap = std::min<std::uint64_t>(bound, 64);
  for (const auto& [p, m] : prime_powers_up_to(cap)) {
    const std::uint64_t pm = to_uint64(pow_natural(p, m));
    const std::uint64_t p64 = to_uint64(p);
    for (unsigned r = 0; r <= max_r; ++r) {
      std::vector<std::uint64_t> byClass(m + 1, 0);
      auto walk = [&](auto&& self, unsigned depth, std::uint64_t g) -> void {
        if (depth == r) {
          unsigned k = 0;
          while (g > 1) {
            g /= p64;
            ++k;
          }
          ++byClass[k];
          return;
        }
        for (std::uint64_t b = 0; b < pm; ++b) self(self, depth + 1, std::gcd(g, b));
      };
      walk(walk, 0, pm);
      for (unsigned k = 0; k <= m; ++k) {
        if (Natural(byClass[k]) != count_b_tuples_prime_power(p, m, k, r)) {
          std::ostringstream os;
          os << "p^m=" << pm << " r=" << r << " k=" << k << " enumerated " << byClass[k];
          fail_suite(res, os.str());
        }
        ++res.cases;
      }
    }
  }
  return res;
}

int do_lemmas(const RunConfig& cfg, std::ostream& out) {
  bool all_pass = true;
  for (const auto& res : run_lemma_suites(cfg.max_prime_power, cfg.lemma_max_r)) {
    out << res.name << ": " << (res.passed ? "PASS" : "FAIL") << " (" << res.cases << " cases)";
    if (!res.passed) out << " first failure: " << res.detail;
    out << "\n";
    all_pass = all_pass && res.passed;
  }
  return all_pass ? 0 : 1;
}

// ---- bench ---------------------------------------------------------------

struct BenchRung {
  const char* label;
  Natural n;
  unsigned r;
  std::vector<std::string> specs;
};

int do_bench(const RunConfig& cfg, std::ostream& out) {
  const Natural big = pow_natural(Natural(2), 10) * pow_natural(Natural(3), 6) *
                      pow_natural(Natural(5), 4) * pow_natural(Natural(7), 3) *
                      pow_natural(Natural(11), 2);
  std::vector<BenchRung> rungs = {
      {"tiny, both trivial", Natural(32), 2, {"trivial@32", "trivial@32"}},
      {"tiny, primitive pair", Natural(32), 2, {"mod=32;exps=1,1", "mod=32;exps=0,1"}},
      {"medium, both trivial", Natural(864), 1, {"trivial@864", "trivial@864"}},
      {"squarefree width 9, both trivial", Natural(9699690), 2,
       {"trivial@9699690", "trivial@9699690"}},
      {"five prime powers, mixed primitive s=4", big, 2,
       {"mod=1024;exps=1,1", "mod=729;exps=1", "mod=625;exps=1", "mod=343;exps=1"}},
  };

  const bool csv = cfg.output_format == OutputFormat::csv;
  if (csv)
    out << "label,n,s,r,closed_us,closed_ops,naive_terms,grouped_terms,oracle_mode,oracle_ms,"
           "terms_per_op\n";
  else
    out << std::left << std::setw(38) << "instance" << std::right << std::setw(12) << "closed_us"
        << " " << std::setw(11) << "closed_ops" << " " << std::setw(21) << "naive_terms" << " "
        << std::setw(14) << "grouped_terms" << " " << std::setw(8) << "oracle" << " "
        << std::setw(11) << "oracle_ms" << " " << std::setw(15) << "terms_per_op"
        << "\n";

  for (const auto& rung : rungs) {
    std::vector<DirichletCharacter> chars;
    for (const auto& spec : rung.specs) chars.push_back(parse_character_spec(spec));
    const MenonQuery q(rung.n, rung.r, std::move(chars));

    closed_form_general(q);  // warm the factorization-independent caches
    arith_op_counter() = 0;
    const MenonReport rep = closed_form_general(q);
    const std::uint64_t ops = arith_op_counter();
    constexpr int kReps = 25;
    const auto t0 = Clock::now();
    for (int i = 0; i < kReps; ++i) closed_form_general(q);
    const double closed_us = ms_since(t0) * 1000.0 / kReps;

    const Natural naive_terms = oracle_cost(q, OracleMode::naive);
    const Natural grouped_terms = oracle_cost(q, OracleMode::grouped);
    std::string mode = "refused";
    std::string oracle_ms = "-";
    if (std::min(naive_terms, grouped_terms) <= cfg.cost_budget) {
      const OracleMode pick =
          naive_terms <= grouped_terms ? OracleMode::naive : OracleMode::grouped;
      const auto t1 = Clock::now();
      const Natural val = brute_force_oracle(q, pick, cfg.cost_budget);
      oracle_ms = format_ms(ms_since(t1));
      mode = pick == OracleMode::naive ? "naive" : "grouped";
      if (val != rep.closed_form) mode += " MISMATCH";
    }
    // Terms-per-op ratio against the naive (definitional) term count.
    const Natural ratio = ops == 0 ? Natural(0) : naive_terms / ops;

    if (csv) {
      out << rung.label << "," << rung.n << "," << q.s() << "," << rung.r << ","
          << format_ms(closed_us) << "," << ops << "," << naive_terms << "," << grouped_terms
          << "," << mode << "," << oracle_ms << "," << ratio << "\n";
    } else {
      out << std::left << std::setw(38) << rung.label << std::right << std::setw(12)
          << format_ms(closed_us) << " " << std::setw(11) << ops << " " << std::setw(21)
          << naive_terms << " " << std::setw(14) << grouped_terms << " " << std::setw(8) << mode
          << " " << std::setw(11) << oracle_ms << " " << std::setw(15) << ratio << "\n";
    }
  }
  return 0;
}

}  // namespace

SpecParseError::SpecParseError(const std::string& message, std::size_t pos)
    : std::runtime_error(message), position(pos) {}

DirichletCharacter parse_character_spec(const std::string& text) {
  constexpr std::string_view kTrivial = "trivial@";
  constexpr std::string_view kMod = "mod=";
  constexpr std::string_view kExps = ";exps=";
  if (text.compare(0, kTrivial.size(), kTrivial) == 0) {
    const Natural n = parse_natural_slice(text, kTrivial.size(), text.size());
    if (n < 1) throw SpecParseError("modulus must be positive", kTrivial.size());
    return DirichletCharacter::trivial(n);
  }
  if (text.compare(0, kMod.size(), kMod) == 0) {
    const std::size_t semi = text.find(';', kMod.size());
    if (semi == std::string::npos)
      throw SpecParseError("expected ';exps=' after the modulus", text.size());
    const Natural n = parse_natural_slice(text, kMod.size(), semi);
    if (n < 1) throw SpecParseError("modulus must be positive", kMod.size());
    if (text.compare(semi, kExps.size(), kExps) != 0)
      throw SpecParseError("expected ';exps='", semi);
    const std::size_t list_start = semi + kExps.size();
    std::vector<Natural> exps;
    if (list_start < text.size()) {
      std::size_t start = list_start;
      while (true) {
        const std::size_t comma = text.find(',', start);
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        exps.push_back(parse_integer_slice(text, start, end));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    auto group = unit_group_structure(n);
    if (exps.size() != group->generator_count()) {
      std::ostringstream os;
      os << "expected " << group->generator_count() << " exponents for modulus " << n << ", got "
         << exps.size();
      throw SpecParseError(os.str(), list_start);
    }
    return DirichletCharacter(std::move(group), std::move(exps));
  }
  throw SpecParseError("expected 'trivial@<n>' or 'mod=<n>;exps=<e1,...>'", 0);
}

std::vector<SuiteResult> run_lemma_suites(std::uint64_t max_prime_power, unsigned max_r) {
  return {suite_subgroup_sums(max_prime_power), suite_product_sums(max_prime_power),
          suite_b_tuple_counts(max_prime_power, max_r)};
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  int code = 2;
  try {
    if (cfg.subcommand == "compute")
      code = do_compute(cfg, buffer, false);
    else if (cfg.subcommand == "verify")
      code = do_compute(cfg, buffer, true);
    else if (cfg.subcommand == "sweep")
      code = do_sweep(cfg, buffer, err);
    else if (cfg.subcommand == "enum-chars")
      code = do_enum_chars(cfg, buffer);
    else if (cfg.subcommand == "lemmas")
      code = do_lemmas(cfg, buffer);
    else if (cfg.subcommand == "bench")
      code = do_bench(cfg, buffer);
    else
      throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
  } catch (const SpecParseError& e) {
    err << "character spec error at position " << e.position << ": " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    err << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (cfg.out_path) {
    std::ofstream file(*cfg.out_path, std::ios::binary);
    if (!file) {
      err << "cannot open output file '" << *cfg.out_path << "'\n";
      return 2;
    }
    file << buffer.str();
  } else {
    out << buffer.str();
  }
  return code;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact evaluation and verification of character-weighted gcd sums over Z/nZ"};
  app.name("menon");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string n_str, budget_str, max_n_str, format_str = "json", out_path;
  bool budget_given = false;

  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format_str, "output format")
        ->check(CLI::IsMember({"json", "csv", "plain"}));
    sub->add_option("--out", out_path, "write the report to this file instead of stdout");
  };
  const auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--budget", budget_str, "max oracle terms (default 10^8)")
        ->each([&](const std::string&) { budget_given = true; });
  };
  const auto add_query = [&](CLI::App* sub) {
    sub->add_option("--n", n_str, "modulus n")->required();
    sub->add_option("--r", cfg.r, "number of unrestricted gcd arguments (default 0)");
    sub->add_option("--char", cfg.character_specs,
                    "character spec, repeatable: trivial@<n> or mod=<n>;exps=<e1,...>");
    sub->add_option("--s", cfg.trivial_count, "use this many trivial characters instead of --char");
  };

  CLI::App* compute = app.add_subcommand("compute", "evaluate the closed form");
  add_query(compute);
  add_format(compute);

  CLI::App* verify_cmd = app.add_subcommand("verify", "closed form plus brute-force oracle");
  add_query(verify_cmd);
  add_format(verify_cmd);
  add_budget(verify_cmd);

  CLI::App* sweep = app.add_subcommand("sweep", "verify across a grid of instances");
  sweep->add_option("--max-n", max_n_str, "largest modulus")->required();
  sweep->add_option("--max-r", cfg.max_r, "largest r (default 1)");
  sweep->add_option("--max-s", cfg.max_s, "largest s (default 1)");
  std::uint64_t sample_count = 0;
  CLI::Option* sample_opt =
      sweep->add_option("--sample", sample_count, "verify only this many sampled instances");
  sweep->add_option("--seed", cfg.seed, "sampling seed (default 0)");
  add_format(sweep);
  add_budget(sweep);

  CLI::App* enum_chars = app.add_subcommand("enum-chars", "list all characters mod n");
  enum_chars->add_option("--n", n_str, "modulus n")->required();
  add_format(enum_chars);

  CLI::App* lemmas = app.add_subcommand("lemmas", "run the prime-power property suites");
  lemmas->add_option("--max-pp", cfg.max_prime_power, "largest prime power (default 128)");
  lemmas->add_option("--max-r", cfg.lemma_max_r, "largest tuple length for counts (default 3)");
  add_format(lemmas);

  CLI::App* bench = app.add_subcommand("bench", "time closed form against the oracle");
  add_format(bench);
  add_budget(bench);

  std::vector<const char*> argv;
  argv.push_back("menon");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (const char* env = std::getenv("MENON_COST_BUDGET"))
      cfg.cost_budget = natural_from_cli(env, "MENON_COST_BUDGET");
    if (budget_given) cfg.cost_budget = natural_from_cli(budget_str, "--budget");
    if (!n_str.empty()) cfg.n = natural_from_cli(n_str, "--n");
    if (!max_n_str.empty()) cfg.max_n = natural_from_cli(max_n_str, "--max-n");
    if (sample_opt->count() > 0) cfg.sample = sample_count;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (format_str == "json")
      cfg.output_format = OutputFormat::json;
    else if (format_str == "csv")
      cfg.output_format = OutputFormat::csv;
    else
      cfg.output_format = OutputFormat::plain;
    if (!out_path.empty()) cfg.out_path = out_path;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace menon
