#ifndef ENDOQ_LINEAR_SYSTEM_HPP
#define ENDOQ_LINEAR_SYSTEM_HPP

#include "endoq/formula.hpp"

namespace endoq {

// One R_C-linear literal: sum of coeffs[v](v) = 0, or != 0 when negated.
struct LinLiteral {
  std::map<Var, RcElem> coeffs;
  bool negated = false;
};

struct LinearSystem {
  std::vector<LinLiteral> literals;
  // variable-free literals collapse to fixed truth values
  std::vector<bool> residuals;

  bool residual_false() const {
    for (bool b : residuals)
      if (!b) return true;
    return false;
  }
};

// Conjunction of equational literals -> R_C-linear literal system.
LinearSystem fml_to_linear_system(const FormulaPtr& phi, const KernelConfig& cfg);

FormulaPtr literal_to_formula(const LinLiteral& lit);
FormulaPtr linear_system_to_formula(const LinearSystem& sys);

}  // namespace endoq

#endif
