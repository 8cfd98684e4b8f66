#include "endoq/qe.hpp"

namespace endoq {

namespace {

using TermMap = std::map<Var, RcElem>;  // linear combination over variables

TermMap tm_add(const TermMap& a, const TermMap& b) {
  TermMap r = a;
  for (const auto& [v, e] : b) {
    auto it = r.find(v);
    if (it == r.end()) {
      if (!e.is_zero()) r.emplace(v, e);
      continue;
    }
    RcElem sum = rc_add(it->second, e);
    if (sum.is_zero())
      r.erase(it);
    else
      it->second = sum;
  }
  return r;
}

TermMap tm_neg(const TermMap& a) {
  TermMap r;
  for (const auto& [v, e] : a) r.emplace(v, rc_neg(e));
  return r;
}

TermMap tm_apply(const RcElem& r, const TermMap& a) {
  TermMap out;
  if (r.is_zero()) return out;
  for (const auto& [v, e] : a) {
    RcElem m = rc_mul(r, e);
    if (!m.is_zero()) out.emplace(v, m);
  }
  return out;
}

LinLiteral tm_literal(const TermMap& t, bool negated) {
  LinLiteral lit;
  lit.coeffs = t;
  lit.negated = negated;
  return lit;
}

std::string tm_str(const TermMap& t) {
  if (t.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [v, e] : t) {
    if (!first) out += " + ";
    first = false;
    out += "(" + e.str() + ")(" + v.str() + ")";
  }
  return out;
}

// componentwise gcd of the coefficients, with Bezout combiners
struct PivotData {
  RcElem pivot;
  std::vector<RcElem> combiners;  // sum combiners[i] * a_i = pivot
};

PivotData combine_pivot(const KernelConfig& cfg, const std::vector<RcElem>& as) {
  PivotData out;
  const FieldSpec& fs = cfg.field;
  if (as.size() == 1) {
    out.pivot = as[0];
    out.combiners = {rc_one(cfg)};
    return out;
  }
  // global part: gcd of the numerators (denominators are units in the
  // localization); track Bezout coefficients times the denominators
  std::vector<Poly> nums;
  for (const RcElem& a : as) nums.push_back(a.num());
  Poly g = nums[0];
  std::vector<Poly> bez(as.size(), Poly::zero(fs));
  bez[0] = Poly::one(fs);
  for (size_t i = 1; i < as.size(); ++i) {
    if (nums[i].is_zero()) continue;
    if (g.is_zero()) {
      g = nums[i];
      bez[i] = Poly::one(fs);
      continue;
    }
    Bezout bz = poly_gcd_bezout(g, nums[i]);
    for (size_t j = 0; j < i; ++j) bez[j] = bez[j] * bz.u;
    bez[i] = bz.v;
    g = bz.g;
  }
  if (cfg.is_algebraic()) {
    Poly mipo = kc_mipo(cfg);
    Poly g2 = poly_gcd(g, mipo);
    if (!(g2 == g)) {
      // reduce the pivot to gcd(g, MiPo); the Bezout identity survives mod MiPo
      Poly q = euclid_div(g, g2).first;
      RcElem qinv = rc_inverse(rc_rho(cfg, q));  // q coprime to MiPo/g2...
      for (auto& b : bez) b = poly_mod(b, mipo);
      out.pivot = rc_rho(cfg, g2);
      out.combiners.clear();
      for (size_t i = 0; i < as.size(); ++i)
        out.combiners.push_back(rc_mul(qinv, rc_rho(cfg, bez[i])));
      // verify
      RcElem acc = rc_zero(cfg);
      for (size_t i = 0; i < as.size(); ++i)
        acc = rc_add(acc, rc_mul(out.combiners[i], as[i]));
      if (!(acc == out.pivot)) throw error("qe: pivot combination failed");
      return out;
    }
    out.pivot = rc_rho(cfg, g);
    out.combiners.clear();
    for (size_t i = 0; i < as.size(); ++i) out.combiners.push_back(rc_rho(cfg, bez[i]));
    RcElem acc = rc_zero(cfg);
    for (size_t i = 0; i < as.size(); ++i)
      acc = rc_add(acc, rc_mul(out.combiners[i], as[i]));
    if (!(acc == out.pivot)) throw error("qe: pivot combination failed");
    return out;
  }

  // transcendental: assemble the pivot componentwise
  std::set<Poly, PolyLess> touched;
  for (const RcElem& a : as)
    for (const Poly& f : rc_touched_factors(a)) touched.insert(f);
  std::map<Poly, Poly, PolyLess> pivot_corr;
  // combiners start from the global Bezout adjusted by denominators
  std::vector<RcElem> combs;
  for (size_t i = 0; i < as.size(); ++i)
    combs.push_back(rc_rho(cfg, bez[i] * as[i].den()));
  for (const Poly& f : touched) {
    ExtNat c = kc_classify(cfg, f);
    Poly mod = poly_pow(f, c.v);
    // local valuations
    uint32_t smin = c.v;
    size_t imin = 0;
    std::vector<Poly> locs;
    for (size_t i = 0; i < as.size(); ++i) {
      Poly loc = rc_local(as[i], f);
      locs.push_back(loc);
      uint32_t s = loc.is_zero() ? c.v : std::min(*poly_valuation(loc, f), c.v);
      if (s < smin) {
        smin = s;
        imin = i;
      }
    }
    pivot_corr[f] = poly_mod(poly_pow(f, smin), mod);
    // local combiner: pick the minimal-valuation component, invert its unit
    for (size_t i = 0; i < as.size(); ++i) {
      std::map<Poly, Poly, PolyLess> cc = combs[i].corrections();
      Poly want = Poly::zero(cfg.field);
      if (i == imin && smin < c.v) {
        Poly u = locs[i];
        for (uint32_t k = 0; k < smin; ++k) u = euclid_div(u, f).first;
        want = poly_invmod(poly_mod(u, mod), mod);
      } else if (i == imin && smin == c.v) {
        want = Poly::zero(cfg.field);
      }
      cc[f] = want;
      combs[i] = rc_raw(cfg, combs[i].num(), combs[i].den(), std::move(cc));
    }
  }
  out.pivot = rc_raw(cfg, g, Poly::one(fs), std::move(pivot_corr));
  out.combiners = combs;
  RcElem acc = rc_zero(cfg);
  for (size_t i = 0; i < as.size(); ++i)
    acc = rc_add(acc, rc_mul(out.combiners[i], as[i]));
  if (!(acc == out.pivot)) throw error("qe: pivot combination failed");
  return out;
}

// does c annihilate Ker(pivot)?
bool annihilates_kernel(const RcElem& c, const RcElem& pivot,
                        const KernelDescriptor& ker) {
  const KernelConfig& cfg = c.cfg();
  for (const auto& [f, s] : ker.local_exponents) {
    if (s == 0) continue;
    Poly loc = rc_local(c, f);
    uint32_t sc = loc.is_zero() ? kc_classify(cfg, f).v
                                : std::min(*poly_valuation(loc, f), kc_classify(cfg, f).v);
    if (sc < s) return false;
  }
  for (const Poly& g : ker.infinite_type) {
    uint32_t ep = *poly_valuation(pivot.num(), g);
    if (c.num().is_zero()) continue;
    uint32_t ec = poly_valuation(c.num(), g).value_or(0);
    if (ec < ep) return false;
  }
  if (ker.generic_zero && !c.num().is_zero()) return false;
  return true;
}

}  // namespace

QfResult qe_eliminate_one(const Var& x, const LinearSystem& sys,
                          const KernelConfig& cfg) {
  QfResult out;
  QeStep step;
  step.var = x.str();
  std::vector<FormulaPtr> lits;

  if (sys.residual_false()) {
    out.formula = f_false();
    out.trace.push_back(std::move(step));
    return out;
  }

  std::vector<RcElem> eq_coeffs;
  std::vector<TermMap> eq_rhs;
  std::vector<std::pair<RcElem, TermMap>> diseqs;  // c_j, d_j
  for (const LinLiteral& lit : sys.literals) {
    auto it = lit.coeffs.find(x);
    if (it == lit.coeffs.end()) {
      lits.push_back(literal_to_formula(lit));
      continue;
    }
    TermMap rest;
    for (const auto& [v, e] : lit.coeffs)
      if (!(v == x)) rest.emplace(v, e);
    if (lit.negated)
      diseqs.emplace_back(it->second, tm_neg(rest));
    else {
      eq_coeffs.push_back(it->second);
      eq_rhs.push_back(tm_neg(rest));
    }
  }

  if (eq_coeffs.empty()) {
    // no equations: the variable ranges over the whole space and escapes
    // finitely many proper cosets (kernel-infinite dichotomy)
    for (const auto& [c, d] : diseqs)
      step.dropped_disequations.push_back("(" + c.str() + ")(" + x.str() + ") != " + tm_str(d));
    out.formula = f_and_all(lits);
    out.trace.push_back(std::move(step));
    return out;
  }

  PivotData pd = combine_pivot(cfg, eq_coeffs);
  step.pivot = pd.pivot.str();

  // b := sum of combiners applied to the right-hand sides
  TermMap b;
  for (size_t i = 0; i < eq_coeffs.size(); ++i)
    b = tm_add(b, tm_apply(pd.combiners[i], eq_rhs[i]));

  // (a) cross-consistency: a_i(x) = b_i follows from pivot(x) = b via the
  // exact quotients d_i = a_i / pivot
  for (size_t i = 0; i < eq_coeffs.size(); ++i) {
    if (eq_coeffs.size() == 1) break;
    RcElem di = rc_div_exact(eq_coeffs[i], pd.pivot);
    TermMap cond = tm_add(tm_apply(di, b), tm_neg(eq_rhs[i]));
    if (!cond.empty()) {
      lits.push_back(literal_to_formula(tm_literal(cond, false)));
      step.conditions.push_back(tm_str(cond) + " = 0");
    }
  }

  // (b) solvability conditions from the finite local blocks
  KernelDescriptor ker = rc_kernel_descriptor(pd.pivot);
  for (const auto& [f, s] : ker.local_exponents) {
    if (s == 0) continue;
    ExtNat c = kc_classify(cfg, f);
    RcElem cond = rc_mul(rc_rho(cfg, poly_pow(f, c.v - s)), rc_projker(cfg, {f}));
    TermMap ct = tm_apply(cond, b);
    if (ct.empty()) continue;
    lits.push_back(literal_to_formula(tm_literal(ct, false)));
    step.conditions.push_back(tm_str(ct) + " = 0");
  }

  // (c) disequations on the solution coset
  for (const auto& [c, d] : diseqs) {
    bool ann = annihilates_kernel(c, pd.pivot, ker);
    RcElem quot = rc_zero(cfg);
    if (ann) {
      try {
        quot = rc_div_exact(c, pd.pivot);
      } catch (const error&) {
        ann = false;  // the generic part of the kernel is not annihilated
      }
    }
    if (!ann) {
      step.dropped_disequations.push_back("(" + c.str() + ")(" + x.str() + ") != " + tm_str(d));
      continue;
    }
    TermMap lit = tm_add(tm_apply(quot, b), tm_neg(d));
    lits.push_back(literal_to_formula(tm_literal(lit, true)));
    step.residual_literals.push_back(tm_str(lit) + " != 0");
  }

  out.formula = f_and_all(lits);
  out.trace.push_back(std::move(step));
  return out;
}

namespace {

// light boolean simplification: constant folding over variable-free atoms
FormulaPtr simplify(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return f;
    case Formula::Kind::Not: {
      FormulaPtr a = simplify(f->a);
      if (f_is_true(a)) return f_false();
      if (f_is_false(a)) return f_true();
      return f_not(a);
    }
    case Formula::Kind::And: {
      FormulaPtr a = simplify(f->a), b = simplify(f->b);
      if (f_is_false(a) || f_is_false(b)) return f_false();
      if (f_is_true(a)) return b;
      if (f_is_true(b)) return a;
      return f_and(a, b);
    }
    case Formula::Kind::Or: {
      FormulaPtr a = simplify(f->a), b = simplify(f->b);
      if (f_is_true(a) || f_is_true(b)) return f_true();
      if (f_is_false(a)) return b;
      if (f_is_false(b)) return a;
      return f_or(a, b);
    }
    default:
      throw error("qe: simplify on quantified formula");
  }
}

FormulaPtr eliminate(const FormulaPtr& f, const KernelConfig& cfg,
                     std::vector<QeStep>& trace) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return f;
    case Formula::Kind::Not:
      return f_not(eliminate(f->a, cfg, trace));
    case Formula::Kind::And:
      return f_and(eliminate(f->a, cfg, trace), eliminate(f->b, cfg, trace));
    case Formula::Kind::Or:
      return f_or(eliminate(f->a, cfg, trace), eliminate(f->b, cfg, trace));
    case Formula::Kind::Forall: {
      FormulaPtr inner = f_not(eliminate(f->a, cfg, trace));
      FormulaPtr ex = eliminate(f_exists(f->qvar, inner), cfg, trace);
      return f_not(ex);
    }
    case Formula::Kind::Exists: {
      FormulaPtr body = simplify(eliminate(f->a, cfg, trace));
      if (f_is_true(body) || f_is_false(body)) return body;
      std::vector<FormulaPtr> clauses;
      for (const auto& clause : to_dnf(body)) {
        FormulaPtr conj = f_and_all(clause);
        LinearSystem sys = fml_to_linear_system(conj, cfg);
        if (sys.residual_false()) {
          clauses.push_back(f_false());
          continue;
        }
        bool uses_x = false;
        for (const LinLiteral& lit : sys.literals)
          if (lit.coeffs.count(f->qvar)) uses_x = true;
        if (!uses_x) {
          clauses.push_back(simplify(linear_system_to_formula(sys)));
          continue;
        }
        QfResult frag = qe_eliminate_one(f->qvar, sys, cfg);
        for (QeStep& st : frag.trace) trace.push_back(std::move(st));
        clauses.push_back(simplify(frag.formula));
      }
      return simplify(f_or_all(clauses));
    }
  }
  return f;
}

}  // namespace

namespace {

// canonical literal form: every coefficient an R_C normal form, zero
// coefficients dropped
FormulaPtr normalize_literals(const FormulaPtr& f, const KernelConfig& cfg) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      Term t;
      for (const auto& [v, c] : f->atom.coeffs()) {
        RcElem r = coeff_to_rc(c, cfg);
        if (!r.is_zero()) t = t + Term::single(v, r);
      }
      return f_atom(t);
    }
    case Formula::Kind::Not:
      return f_not(normalize_literals(f->a, cfg));
    case Formula::Kind::And:
      return f_and(normalize_literals(f->a, cfg), normalize_literals(f->b, cfg));
    case Formula::Kind::Or:
      return f_or(normalize_literals(f->a, cfg), normalize_literals(f->b, cfg));
    default:
      throw error("qe: normalize_literals on quantified formula");
  }
}

}  // namespace

QfResult qe_full(const FormulaPtr& phi, const KernelConfig& cfg) {
  QfResult out;
  FormulaPtr r = eliminate(phi, cfg, out.trace);
  out.formula = simplify(normalize_literals(r, cfg));
  return out;
}

bool qe_decide_sentence(const FormulaPtr& phi, const KernelConfig& cfg) {
  if (!free_vars(phi).empty()) throw error("qe_decide_sentence: closed formula required");
  QfResult r = qe_full(phi, cfg);
  // ground evaluation: the only constant is 0, so an atom holds iff its
  // collected term is empty
  std::function<bool(const FormulaPtr&)> ev = [&](const FormulaPtr& f) -> bool {
    switch (f->kind) {
      case Formula::Kind::Atom:
        return f->atom.is_zero();
      case Formula::Kind::Not:
        return !ev(f->a);
      case Formula::Kind::And:
        return ev(f->a) && ev(f->b);
      case Formula::Kind::Or:
        return ev(f->a) || ev(f->b);
      default:
        throw error("qe_decide_sentence: quantifier survived elimination");
    }
  };
  return ev(r.formula);
}

nlohmann::json qe_trace_json(const QfResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const QeStep& s : r.trace) {
    nlohmann::json j;
    j["var"] = s.var;
    j["pivot"] = s.pivot;
    j["conditions"] = s.conditions;
    j["dropped_disequations"] = s.dropped_disequations;
    j["residual_literals"] = s.residual_literals;
    steps.push_back(std::move(j));
  }
  return steps;
}

}  // namespace endoq
