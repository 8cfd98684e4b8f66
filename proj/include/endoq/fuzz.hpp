#ifndef ENDOQ_FUZZ_HPP
#define ENDOQ_FUZZ_HPP

#include <random>

#include "endoq/qe.hpp"

namespace endoq {

struct FuzzOptions {
  uint32_t count = 500;
  uint64_t seed = 1;
  uint32_t threads = 0;  // 0: hardware concurrency
  OracleOptions oracle;
};

struct FuzzReport {
  uint32_t total = 0;
  uint32_t agreed = 0;
  uint32_t unknown = 0;
  uint32_t disagreed = 0;
  std::vector<std::string> disagreements;
  std::vector<std::string> unknowns;
};

// Random formula in the campaign class: at most 4 variables, quantifier
// depth at most 3, at most 6 literals, disequation-heavy, coefficient pool
// chosen per configuration to keep the oracle family within budget.
FormulaPtr random_fuzz_formula(std::mt19937_64& rng, const KernelConfig& cfg);

// QE-versus-oracle agreement campaign; any disagreement is a hard failure
// recorded in the report.
FuzzReport fuzz_campaign(const KernelConfig& cfg, const FuzzOptions& opt);

}  // namespace endoq

#endif
