#ifndef ENDOQ_QE_HPP
#define ENDOQ_QE_HPP

#include "endoq/eval.hpp"
#include "endoq/linear_system.hpp"

namespace endoq {

struct QeStep {
  std::string var;
  std::string pivot;
  std::vector<std::string> conditions;
  std::vector<std::string> dropped_disequations;
  std::vector<std::string> residual_literals;
};

struct QfResult {
  FormulaPtr formula;
  std::vector<QeStep> trace;
};

// One existential elimination over a literal system collected in x.
// Elimination targets existentially closed models (see the README).
QfResult qe_eliminate_one(const Var& x, const LinearSystem& sys,
                          const KernelConfig& cfg);

// Innermost-first quantifier elimination over the disjunctive normal form;
// the result is quantifier-free and equivalent in every existentially
// closed model.
QfResult qe_full(const FormulaPtr& phi, const KernelConfig& cfg);

// Truth value of a closed formula in the (complete) model companion.
bool qe_decide_sentence(const FormulaPtr& phi, const KernelConfig& cfg);

nlohmann::json qe_trace_json(const QfResult& r);

// ---------------------------------------------------------------------------
// Closure, patterns, exchange.

struct ClosureBasis {
  std::vector<FpVec> generators;
  std::vector<FpVec> basis;          // K-basis of the closure subspace
  std::vector<FpVec> elements;       // explicit list when within the cap
  std::vector<Poly> annihilators;    // minimal monic annihilator per generator
};

// The R_C-submodule generated by the tuple inside the model.
ClosureBasis closure_cl_theta(const std::vector<FpVec>& gens, const FinModel& m,
                              uint64_t element_cap = 1u << 16);

// R_C-module isomorphism test cl(a) -> cl(b) with a |-> b.
bool closure_isomorphic(const std::vector<FpVec>& a, const FinModel& ma,
                        const std::vector<FpVec>& b, const FinModel& mb);

struct PatternEntry {
  RcElem r;
  // each candidate is a linear term over the parameter variables d1,... and
  // the previous pattern outputs y1,...,y_{i-1}
  std::vector<Term> candidates;
};

// Y_d: all tuples obtained by choosing x from the candidates and setting
// y_i = r_i(x), left to right.
std::vector<std::vector<FpVec>> pattern_eval(const std::vector<PatternEntry>& pattern,
                                             const Assignment& params,
                                             const FinModel& m);

struct ExchangeWitness {
  FinModel model;
  FpVec u, v;
};

struct ExchangeVerdict {
  bool has_exchange = false;
  std::optional<ExchangeWitness> witness;  // set when exchange fails
};

// Theorem-level dichotomy: exchange holds exactly when R_C is a field;
// otherwise a finite-model witness (v in <u> \ <0>, u not in <v>) is built.
ExchangeVerdict exchange_diagnose(const KernelConfig& cfg);

}  // namespace endoq

#endif
