#ifndef ENDOQ_SEQSYS_HPP
#define ENDOQ_SEQSYS_HPP

#include "endoq/eval.hpp"
#include "endoq/linear_system.hpp"

namespace endoq {

// R_C-linear term in the parameter variables: sum of r_y(y).
struct ParamTerm {
  std::map<Var, RcElem> coeffs;

  bool is_zero() const { return coeffs.empty(); }
  std::string str() const;
};

ParamTerm pt_add(const ParamTerm& a, const ParamTerm& b);
ParamTerm pt_neg(const ParamTerm& a);
ParamTerm pt_apply(const RcElem& r, const ParamTerm& a);
ParamTerm pt_single(const Var& y, RcElem r);
bool pt_equal(const ParamTerm& a, const ParamTerm& b);
FpVec pt_eval(const ParamTerm& a, const FinModel& m, const Assignment& params);

// One row f^q[theta](var) = param of a parametrized C-sequence-system.
struct SeqRow {
  Var var;
  Poly f;
  uint32_t q = 1;
  Var param;
};

struct SeqSystem {
  KernelConfig cfg;
  std::vector<Var> li_vars;
  std::vector<SeqRow> rows;

  std::vector<Var> all_vars() const;
  std::vector<Var> params() const;
  std::string str() const;
};

// Throws when the Def 2.12 invariants fail.
void ss_validate(const SeqSystem& s);

struct RankDegree {
  uint32_t rank = 0;
  uint64_t degree = 0;
  bool operator==(const RankDegree& o) const {
    return rank == o.rank && degree == o.degree;
  }
  bool operator<(const RankDegree& o) const {  // lexicographic
    return rank != o.rank ? rank < o.rank : degree < o.degree;
  }
  bool operator<=(const RankDegree& o) const { return *this < o || *this == o; }
};
RankDegree ss_rank_degree(const SeqSystem& s);

// Def 2.13 compatibility of concrete parameter values in a model.
bool ss_compatible(const SeqSystem& s, const Assignment& params, const FinModel& m);

// Def 2.15: no placeholder x_ld^i with i >= deg(f^q) occurs.
bool ss_bounded_check(const FormulaPtr& psi, const SeqSystem& s);

// Replace theta^i(x_ld) for i >= deg(f^q) via Euclidean division against the
// system rows (theta-applied input).
FormulaPtr ss_euclid_substitute(const FormulaPtr& phi, const SeqSystem& s);

// Equation sum_v lhs[v](v) = rhs with polynomial coefficients.
struct TransformEq {
  std::map<Var, Poly> lhs;
  ParamTerm rhs;
};
// Conversion from an R_C-linear literal; coefficients must be polynomial
// (Rho-shaped) on the system variables.
TransformEq eq_from_literal(const LinLiteral& lit, const SeqSystem& s);

// Linear substitution map; entries give a variable as a combination of
// variables plus a parameter term, identity on unlisted variables.
struct LinMap {
  struct Expr {
    std::map<Var, RcElem> vars;
    ParamTerm param;
  };
  std::map<Var, Expr> entries;
};

struct TransformWitness {
  LinMap nu;   // new variables from old ones (full R_C coefficients)
  LinMap tau;  // old variables from new ones (polynomial variable parts)
};

struct TransformResult {
  SeqSystem s2;
  std::vector<ParamTerm> conditions;  // each one: term = 0
  std::map<Var, ParamTerm> mu;        // fresh parameter slot -> term in old params
  TransformWitness witness;
  RankDegree before, after;
  bool strict = false;  // lexicographic decrease was strict
};

struct unsupported_transform : error {
  using error::error;
};

// Absorb the equations into the system: S and E transformable into
// conditions and S2 with (rank, degree) lexicographically non-increasing,
// strictly decreasing when some equation is nontrivial in the variables.
TransformResult ss_transform(const SeqSystem& s, std::vector<TransformEq> eqs);

// Check both transformability implications by exhaustive evaluation on the
// model. Throws budget_exceeded when the assignment space exceeds the cap.
bool ss_witness_verify(const SeqSystem& s, const std::vector<TransformEq>& eqs,
                       const TransformResult& r, const FinModel& m,
                       uint64_t cap = 4'000'000);

// Textual syntax: `S: (X^2+X+1)^1 [x1] = y1; li: x2, x3`.
SeqSystem ss_parse(const std::string& src, const KernelConfig& cfg);
nlohmann::json ss_to_json(const SeqSystem& s);
SeqSystem ss_from_json(const nlohmann::json& j, const KernelConfig& cfg);

}  // namespace endoq

#endif
