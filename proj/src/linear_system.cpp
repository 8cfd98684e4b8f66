#include "endoq/linear_system.hpp"

namespace endoq {

namespace {

void collect_literals(const FormulaPtr& f, const KernelConfig& cfg, LinearSystem& out) {
  switch (f->kind) {
    case Formula::Kind::And:
      collect_literals(f->a, cfg, out);
      collect_literals(f->b, cfg, out);
      return;
    case Formula::Kind::Atom:
    case Formula::Kind::Not: {
      bool neg = f->kind == Formula::Kind::Not;
      const FormulaPtr& at = neg ? f->a : f;
      if (at->kind != Formula::Kind::Atom)
        throw error("fml_to_linear_system: conjunction of literals required");
      LinLiteral lit;
      lit.negated = neg;
      for (const auto& [v, c] : at->atom.coeffs()) {
        if (v.power)
          throw error("fml_to_linear_system: placeholder variable " + v.str() +
                      "; expand first");
        RcElem r = coeff_to_rc(c, cfg);
        if (!r.is_zero()) lit.coeffs.emplace(v, std::move(r));
      }
      if (lit.coeffs.empty())
        out.residuals.push_back(!neg);  // 0 = 0 antitone with negation
      else
        out.literals.push_back(std::move(lit));
      return;
    }
    default:
      throw error("fml_to_linear_system: non-conjunctive input");
  }
}

}  // namespace

LinearSystem fml_to_linear_system(const FormulaPtr& phi, const KernelConfig& cfg) {
  LinearSystem sys;
  collect_literals(phi, cfg, sys);
  return sys;
}

FormulaPtr literal_to_formula(const LinLiteral& lit) {
  Term t;
  for (const auto& [v, r] : lit.coeffs) t = t + Term::single(v, r);
  FormulaPtr a = f_atom(t);
  return lit.negated ? f_not(a) : a;
}

FormulaPtr linear_system_to_formula(const LinearSystem& sys) {
  std::vector<FormulaPtr> parts;
  for (bool b : sys.residuals)
    if (!b) return f_false();
  for (const auto& lit : sys.literals) parts.push_back(literal_to_formula(lit));
  return f_and_all(parts);
}

}  // namespace endoq
