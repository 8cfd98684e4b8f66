#ifndef ENDOQ_EVAL_HPP
#define ENDOQ_EVAL_HPP

#include "endoq/finmodel.hpp"
#include "endoq/formula.hpp"

namespace endoq {

using Assignment = std::map<Var, FpVec>;

struct budget_exceeded : error {
  using error::error;
};

// First-order evaluation by exhaustive enumeration over F_p^dim per
// quantifier. Throws budget_exceeded when the step budget runs out.
bool fm_eval(const FormulaPtr& phi, const FinModel& m, const Assignment& asg,
             uint64_t budget = 20'000'000);

// Truth table over the free variables (enumeration subject to the budget).
std::vector<std::pair<Assignment, bool>> fm_eval_all(const FormulaPtr& phi,
                                                     const FinModel& m,
                                                     uint64_t budget = 20'000'000);

// Exact evaluation of a sentence on a block-built model through the direct
// sum decomposition (per-block enumeration plus product combination).
// Equivalent to fm_eval but feasible on much larger block counts.
bool product_eval(const FormulaPtr& phi, const FinModel& m,
                  uint64_t budget = 50'000'000);

// Pointwise agreement of phi and a quantifier-free psi over all assignments
// of their free variables, evaluated through the product engine.
bool product_equiv(const FormulaPtr& phi, const FormulaPtr& psi, const FinModel& m,
                   uint64_t budget = 50'000'000);

enum class Truth { True, False, Unknown };

struct OracleOptions {
  uint32_t n_max = 6;              // stages tried before giving up
  uint32_t window = 3;             // consecutive agreeing stages required
  uint64_t budget = 80'000'000;    // per-stage work bound
  uint32_t depth_cap = 24;         // largest admissible block dimension
};

struct OracleResult {
  Truth value = Truth::Unknown;
  uint32_t stabilized_at = 0;  // first stage of the agreeing window
  std::string note;            // reason when Unknown
};

// Stabilized-dimension truth of a sentence over the growing model family of
// the configuration (chain-staggered quantifier domains; see README).
OracleResult fm_stabilized_truth(const FormulaPtr& phi, const KernelConfig& cfg,
                                 const OracleOptions& opt = {});

// Stabilized pointwise agreement of phi with a quantifier-free psi on the
// same family; free variables range over the stage-n submodel.
OracleResult fm_stabilized_equiv(const FormulaPtr& phi, const FormulaPtr& psi,
                                 const KernelConfig& cfg,
                                 const OracleOptions& opt = {});

}  // namespace endoq

#endif
