#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "menon/menon_sum.hpp"

namespace menon {

class SpecParseError : public std::runtime_error {
 public:
  SpecParseError(const std::string& message, std::size_t pos);
  std::size_t position;
};

// Grammar: `trivial@<n>` or `mod=<n>;exps=<e1,...,ek>` with one exponent per
// canonical generator of (Z/nZ)^* (none for n = 1, 2); exponents may be any
// integers and are reduced modulo the generator orders.
DirichletCharacter parse_character_spec(const std::string& text);

enum class OutputFormat { json, csv, plain };

struct RunConfig {
  std::string subcommand;  // compute | verify | sweep | enum-chars | lemmas | bench
  Natural n = 0;
  unsigned r = 0;
  std::vector<std::string> character_specs;
  unsigned trivial_count = 0;  // --s: that many trivial characters instead of specs
  OutputFormat output_format = OutputFormat::json;
  Natural cost_budget = default_cost_budget();
  std::optional<std::uint64_t> sample;  // sweep: random subset of this size
  std::uint64_t seed = 0;               // sweep sampling seed
  Natural max_n = 0;                    // sweep
  unsigned max_r = 1;                   // sweep
  unsigned max_s = 1;                   // sweep
  std::uint64_t max_prime_power = 128;  // lemmas
  unsigned lemma_max_r = 3;             // lemmas: b-tuple enumeration depth
  std::optional<std::string> out_path;  // report target instead of stdout
};

// Exit codes: 0 all matched, 1 mismatch, 2 usage or parse error, 3 budget
// refusal (oracle skipped).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// argv-style front end: parses flags into a RunConfig (honoring the
// MENON_COST_BUDGET environment variable) and dispatches to run().
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SuiteResult {
  std::string name;
  std::uint64_t cases = 0;
  bool passed = true;
  std::string detail;  // first failing case, empty when passed
};

// The property suites behind the `lemmas` subcommand, reused by the
// acceptance tests: unit-subgroup character sums (single and multi
// character) and b-tuple gcd class counts.
std::vector<SuiteResult> run_lemma_suites(std::uint64_t max_prime_power, unsigned max_r);

}  // namespace menon
