#include <deque>

#include "endoq/seqsys.hpp"

namespace endoq {

namespace {

// Absorption state. Variables are either rowless (the li part) or carry a
// row f^q(var) = param-term; every move rewrites the system together with
// the two witness maps. Pending equations all live in the queue so that
// variable changes reach them.
struct Work {
  KernelConfig cfg;
  FieldSpec field;

  struct WRow {
    Poly f;
    uint32_t q = 1;
    ParamTerm param;
  };

  std::vector<Var> rowless;                // insertion-ordered
  std::vector<std::pair<Var, WRow>> rows;  // insertion-ordered
  std::deque<TransformEq> queue;
  std::vector<ParamTerm> conditions;

  // nu: current variables in terms of the original ones;
  // tau: original variables in terms of the current ones.
  LinMap nu, tau;

  int fresh_counter = 0;
  uint64_t steps = 0;

  Var fresh(const char* base) {
    return Var(std::string(base) + "w" + std::to_string(++fresh_counter));
  }

  void tick() {
    if (++steps > 100000)
      throw unsupported_transform("ss_transform: rewriting chain failed to settle");
  }

  WRow* find_row(const Var& v) {
    for (auto& [w, r] : rows)
      if (w == v) return &r;
    return nullptr;
  }

  void drop_row(const Var& v) {
    for (auto it = rows.begin(); it != rows.end(); ++it)
      if (it->first == v) {
        rows.erase(it);
        return;
      }
  }

  void drop_rowless(const Var& v) {
    for (auto it = rowless.begin(); it != rowless.end(); ++it)
      if (*it == v) {
        rowless.erase(it);
        return;
      }
  }

  RcElem rho(const Poly& p) const { return rc_rho(cfg, p); }
  RcElem one() const { return rc_one(cfg); }

  LinMap::Expr expr_of(const LinMap& m, const Var& v) const {
    auto it = m.entries.find(v);
    if (it != m.entries.end()) return it->second;
    LinMap::Expr id;
    id.vars.emplace(v, rc_one(cfg));
    return id;
  }

  void substitute_in_map(LinMap& m, const Var& v, const LinMap::Expr& repl) {
    for (auto& [key, e] : m.entries) {
      auto it = e.vars.find(v);
      if (it == e.vars.end()) continue;
      RcElem c = it->second;
      e.vars.erase(it);
      for (const auto& [w, rw] : repl.vars) {
        RcElem add = rc_mul(c, rw);
        auto jt = e.vars.find(w);
        if (jt == e.vars.end()) {
          if (!add.is_zero()) e.vars.emplace(w, add);
        } else {
          RcElem sum = rc_add(jt->second, add);
          if (sum.is_zero())
            e.vars.erase(jt);
          else
            jt->second = sum;
        }
      }
      e.param = pt_add(e.param, pt_apply(c, repl.param));
    }
  }

  static void subst_in_eq(TransformEq& eq, const Var& v,
                          const std::map<Var, Poly>& vars, const ParamTerm& param,
                          const KernelConfig& cfg) {
    auto it = eq.lhs.find(v);
    if (it == eq.lhs.end()) return;
    Poly lambda = it->second;
    eq.lhs.erase(it);
    for (const auto& [w, p] : vars) {
      Poly add = lambda * p;
      auto jt = eq.lhs.find(w);
      if (jt == eq.lhs.end()) {
        if (!add.is_zero()) eq.lhs.emplace(w, add);
      } else {
        Poly sum = jt->second + add;
        if (sum.is_zero())
          eq.lhs.erase(jt);
        else
          jt->second = sum;
      }
    }
    eq.rhs = pt_add(eq.rhs, pt_neg(pt_apply(rc_rho(cfg, lambda), param)));
  }

  // register the recovery `old current var v := expr over new current vars`
  // (polynomial variable parts); rewrites the queue and the live equation
  void apply_tau_step(const Var& v, const std::map<Var, Poly>& vars,
                      const ParamTerm& param, TransformEq* live = nullptr) {
    LinMap::Expr repl;
    for (const auto& [w, p] : vars)
      if (!p.is_zero()) repl.vars.emplace(w, rho(p));
    repl.param = param;
    if (!tau.entries.count(v)) tau.entries.emplace(v, expr_of(tau, v));
    substitute_in_map(tau, v, repl);
    for (TransformEq& eq : queue) subst_in_eq(eq, v, vars, param, cfg);
    if (live) subst_in_eq(*live, v, vars, param, cfg);
  }

  // register the definition `new var w := expr over current vars`
  void apply_nu_step(const Var& w, const std::map<Var, RcElem>& vars,
                     const ParamTerm& param) {
    LinMap::Expr def;
    def.param = param;
    for (const auto& [v, r] : vars) {
      LinMap::Expr ve = expr_of(nu, v);
      for (const auto& [ov, rc] : ve.vars) {
        RcElem add = rc_mul(r, rc);
        auto jt = def.vars.find(ov);
        if (jt == def.vars.end()) {
          if (!add.is_zero()) def.vars.emplace(ov, add);
        } else {
          RcElem sum = rc_add(jt->second, add);
          if (sum.is_zero())
            def.vars.erase(jt);
          else
            jt->second = sum;
        }
      }
      def.param = pt_add(def.param, pt_apply(r, ve.param));
    }
    nu.entries[w] = std::move(def);
  }

  void remove_nu(const Var& v) { nu.entries.erase(v); }
};

void normalize_eq(TransformEq& eq) {
  for (auto it = eq.lhs.begin(); it != eq.lhs.end();)
    it = it->second.is_zero() ? eq.lhs.erase(it) : std::next(it);
}

// bound all coefficients against the current rows (Euclidean substitution)
void bound_eq(Work& w, TransformEq& eq) {
  for (auto& [v, row] : w.rows) {
    auto it = eq.lhs.find(v);
    if (it == eq.lhs.end()) continue;
    Poly fq = poly_pow(row.f, row.q);
    if (it->second.deg() < fq.deg()) continue;
    auto [chi, rem] = euclid_div(it->second, fq);
    it->second = rem;
    eq.rhs = pt_add(eq.rhs, pt_neg(pt_apply(w.rho(chi), row.param)));
  }
  normalize_eq(eq);
}

struct GenericSplit {
  Poly g_def;                                  // C < infinity part of g
  std::vector<std::pair<Poly, uint32_t>> inf;  // (h, e_h) with C(h) = infinity
};

GenericSplit split_generic(const KernelConfig& cfg, const Poly& g) {
  GenericSplit out;
  out.g_def = g;
  for (const auto& [f, m] : poly_factor(g).factors) {
    if (!kc_classify(cfg, f).is_inf()) continue;
    out.inf.emplace_back(f, m);
    for (uint32_t i = 0; i < m; ++i) out.g_def = euclid_div(out.g_def, f).first;
  }
  return out;
}

// coefficients c_i with sum c_i * (G / h_i^{e_i}) = 1
std::vector<Poly> crt_coefficients(const FieldSpec& field,
                                   const std::vector<std::pair<Poly, uint32_t>>& inf) {
  std::vector<Poly> cof;
  Poly G = Poly::one(field);
  for (const auto& [h, e] : inf) G = G * poly_pow(h, e);
  for (const auto& [h, e] : inf) cof.push_back(euclid_div(G, poly_pow(h, e)).first);
  std::vector<Poly> cs(cof.size(), Poly::zero(field));
  Poly g = cof[0];
  cs[0] = Poly::one(field);
  for (size_t i = 1; i < cof.size(); ++i) {
    Bezout bz = poly_gcd_bezout(g, cof[i]);
    for (size_t j = 0; j < i; ++j) cs[j] = cs[j] * bz.u;
    cs[i] = bz.v;
    g = bz.g;
  }
  if (!g.is_one()) throw error("ss_transform: cofactors not coprime");
  return cs;
}

// Fold the unit part of a rowed variable's coefficient into the variable:
// afterwards the (renamed) variable carries a pure power of its row prime.
// Returns the current name of the variable.
Var normalize_ld(Work& w, TransformEq& eq, Var z) {
  Work::WRow* row = w.find_row(z);
  Poly beta = eq.lhs.at(z);
  uint32_t v = poly_valuation(beta, row->f).value();
  Poly bhat = beta;
  for (uint32_t i = 0; i < v; ++i) bhat = euclid_div(bhat, row->f).first;
  if (bhat.is_one()) return z;
  Poly fq = poly_pow(row->f, row->q);
  Poly rho = poly_invmod(poly_mod(bhat, fq), fq);
  Poly h = euclid_div(Poly::one(w.field) - rho * bhat, fq).first;  // 1 - rho*bhat = f^q h
  Var z2 = w.fresh("n");
  Work::WRow newrow{row->f, row->q, pt_apply(w.rho(bhat), row->param)};
  ParamTerm hy = pt_apply(w.rho(h), row->param);
  w.apply_nu_step(z2, {{z, w.rho(bhat)}}, {});
  w.drop_row(z);
  w.remove_nu(z);
  w.apply_tau_step(z, {{z2, rho}}, hy, &eq);
  w.rows.emplace_back(z2, newrow);
  bound_eq(w, eq);  // the substituted coefficient reduces to the pure power
  return z2;
}

// Confine a rowed variable with finite C to its kernel block; returns the
// current name.
Var localize_ld(Work& w, TransformEq* eq, Var z) {
  Work::WRow* row = w.find_row(z);
  ExtNat c = kc_classify(w.cfg, row->f);
  if (c.is_inf())
    throw unsupported_transform("ss_transform: cannot localize a C = infinity row");
  RcElem invfq = rc_inv(w.cfg, poly_pow(row->f, row->q));
  ParamTerm shift = pt_apply(invfq, row->param);
  if (shift.is_zero()) return z;
  Var z2 = w.fresh("l");
  Work::WRow newrow{row->f, row->q, pt_apply(rc_projker(w.cfg, {row->f}), row->param)};
  w.apply_nu_step(z2, {{z, w.one()}}, pt_neg(shift));
  w.drop_row(z);
  w.remove_nu(z);
  w.apply_tau_step(z, {{z2, Poly::one(w.field)}}, shift, eq);
  w.rows.emplace_back(z2, newrow);
  return z2;
}

// A rowed variable whose normalized coefficient is the constant 1 dissolves:
// the equation solves for it and its row spawns as a fresh equation.
void eliminate_unit_ld(Work& w, TransformEq& eq, const Var& z) {
  Work::WRow saved = *w.find_row(z);
  std::map<Var, Poly> zvars;
  for (const auto& [u, lam] : eq.lhs)
    if (!(u == z)) zvars.emplace(u, -lam);
  ParamTerm zparam = eq.rhs;
  w.drop_row(z);
  w.remove_nu(z);
  w.apply_tau_step(z, zvars, zparam, &eq);
  normalize_eq(eq);
  TransformEq spawn;
  Poly fq = poly_pow(saved.f, saved.q);
  for (const auto& [u, lam] : zvars) {
    Poly c = fq * lam;
    if (!c.is_zero()) spawn.lhs.emplace(u, c);
  }
  spawn.rhs = pt_add(saved.param, pt_neg(pt_apply(w.rho(fq), zparam)));
  w.queue.push_front(std::move(spawn));
}

// pivot is rowless with monic coefficient g; the right side is a parameter
// term except for the corner variables (block-confined, same prime as a
// g-factor, undercutting valuation)
void absorb_li_pivot(Work& w, const Var& pivot, const Poly& g, TransformEq& eq,
                     const std::vector<Var>& corner) {
  const KernelConfig& cfg = w.cfg;
  for (const auto& [v, lam] : eq.lhs) {
    if (v == pivot) continue;
    bool in_corner = false;
    for (const Var& cv : corner)
      if (cv == v) in_corner = true;
    if (!in_corner)
      throw error("ss_transform: pivot absorption with an unresolved variable " + v.str());
  }
  ParamTerm T = eq.rhs;
  GenericSplit gs = split_generic(cfg, g);
  std::map<Var, Poly> recovery;
  ParamTerm recovery_param;

  std::set<Poly, PolyLess> corner_primes;
  for (const Var& z : corner) corner_primes.insert(w.find_row(z)->f);

  std::vector<Poly> ffin;
  for (const auto& [f, mult] : poly_factor(gs.g_def).factors) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf() || c.v == 0) continue;
    if (corner_primes.count(f)) {
      ffin.push_back(f);
      continue;  // handled by the corner reduction below
    }
    ffin.push_back(f);
    uint32_t vf = mult;
    uint32_t b = std::min(vf, c.v);
    RcElem cond = rc_mul(rc_rho(cfg, poly_pow(f, c.v - b)), rc_projker(cfg, {f}));
    ParamTerm ct = pt_apply(cond, T);
    if (!ct.is_zero()) w.conditions.push_back(ct);
    Var wf = w.fresh("k");
    if (vf <= c.v) {
      Poly fc = poly_pow(f, c.v);
      Poly cof = g;
      for (uint32_t i = 0; i < vf; ++i) cof = euclid_div(cof, f).first;
      Poly uf = poly_mod(cof, fc);
      Poly rhof = poly_invmod(uf, fc);
      w.apply_nu_step(wf, {{pivot, rc_mul(rc_rho(cfg, uf), rc_projker(cfg, {f}))}}, {});
      w.rows.emplace_back(wf, Work::WRow{f, b, pt_apply(rc_projker(cfg, {f}), T)});
      recovery.emplace(wf, rhof);
    } else {
      // g vanishes on the whole block; the component is free
      w.apply_nu_step(wf, {{pivot, rc_projker(cfg, {f})}}, {});
      w.rows.emplace_back(wf, Work::WRow{f, c.v, ParamTerm{}});
      recovery.emplace(wf, Poly::one(w.field));
    }
  }

  // corner reduction: chain-ring elimination of (block part of pivot, z)
  for (const Var& z : corner) {
    Work::WRow zrow = *w.find_row(z);
    const Poly& f = zrow.f;
    ExtNat c = kc_classify(cfg, f);
    uint32_t v = poly_valuation(eq.lhs.at(z), f).value();
    uint32_t wexp = poly_valuation(g, f).value();  // > v by construction
    Poly fc = poly_pow(f, c.v);
    Poly cof = g;
    for (uint32_t i = 0; i < wexp; ++i) cof = euclid_div(cof, f).first;
    Poly ug = poly_mod(cof, fc);
    Poly rhog = poly_invmod(ug, fc);
    RcElem projf = rc_projker(cfg, {f});
    Var wt = w.fresh("c");
    Var zt = w.fresh("c");
    w.apply_nu_step(wt, {{pivot, rc_mul(rc_rho(cfg, ug), projf)}}, {});
    w.apply_nu_step(
        zt, {{z, w.one()},
             {pivot, rc_mul(rc_rho(cfg, poly_pow(f, wexp - v) * ug), projf)}},
        {});
    w.drop_row(z);
    w.remove_nu(z);
    w.apply_tau_step(z, {{zt, Poly::one(w.field)}, {wt, -poly_pow(f, wexp - v)}}, {},
                     &eq);
    recovery.emplace(wt, rhog);
    ParamTerm mu_zt = pt_apply(projf, T);
    w.rows.emplace_back(zt, Work::WRow{f, v, mu_zt});
    ParamTerm cz = pt_apply(rc_rho(cfg, poly_pow(f, c.v - v)), mu_zt);
    if (!cz.is_zero()) w.conditions.push_back(cz);
    uint32_t e = zrow.q + wexp - v;
    ParamTerm mu_wt =
        pt_add(pt_apply(rc_mul(rc_rho(cfg, poly_pow(f, zrow.q - v)), projf), T),
               pt_neg(zrow.param));
    if (e < c.v) {
      w.rows.emplace_back(wt, Work::WRow{f, e, mu_wt});
      ParamTerm cw = pt_apply(rc_rho(cfg, poly_pow(f, c.v - e)), mu_wt);
      if (!cw.is_zero()) w.conditions.push_back(cw);
    } else {
      w.rows.emplace_back(wt, Work::WRow{f, c.v, ParamTerm{}});
      if (!mu_wt.is_zero()) w.conditions.push_back(mu_wt);
    }
  }

  // generic part
  if (gs.inf.empty()) {
    recovery_param = pt_apply(rc_inv(cfg, gs.g_def), T);
  } else {
    ParamTerm v0 = pt_apply(rc_inv(cfg, gs.g_def), T);
    std::vector<Poly> cs = crt_coefficients(w.field, gs.inf);
    Poly G = Poly::one(w.field);
    for (const auto& [h, e] : gs.inf) G = G * poly_pow(h, e);
    RcElem proj_im = ffin.empty() ? w.one() : rc_projim(cfg, ffin);
    for (size_t i = 0; i < gs.inf.size(); ++i) {
      const auto& [h, e] = gs.inf[i];
      Var uh = w.fresh("g");
      Poly cofactor = euclid_div(G, poly_pow(h, e)).first;
      w.apply_nu_step(uh, {{pivot, rc_mul(rc_rho(cfg, cofactor), proj_im)}}, {});
      w.rows.emplace_back(uh, Work::WRow{h, e, v0});
      recovery.emplace(uh, cs[i]);
    }
  }

  w.drop_rowless(pivot);
  w.remove_nu(pivot);
  w.apply_tau_step(pivot, recovery, recovery_param, nullptr);
}

void absorb(Work& w, TransformEq eq) {
  w.tick();
  bound_eq(w, eq);
  if (eq.lhs.empty()) {
    if (!eq.rhs.is_zero()) w.conditions.push_back(eq.rhs);
    return;
  }

  // rowless pivot branch
  const Var* pivot0 = nullptr;
  for (const Var& v : w.rowless)
    if (eq.lhs.count(v)) {
      pivot0 = &v;
      break;
    }
  if (pivot0) {
    Var p = *pivot0;
    // coalesce every other rowless coefficient into the pivot
    while (true) {
      const Var* other = nullptr;
      for (const Var& v : w.rowless)
        if (!(v == p) && eq.lhs.count(v)) {
          other = &v;
          break;
        }
      if (!other) break;
      Var j = *other;
      Poly lp = eq.lhs.at(p), lj = eq.lhs.at(j);
      Bezout bz = poly_gcd_bezout(lp, lj);
      Poly lpg = euclid_div(lp, bz.g).first;
      Poly ljg = euclid_div(lj, bz.g).first;
      Var a = w.fresh("m"), b = w.fresh("m");
      w.apply_nu_step(a, {{p, w.rho(lpg)}, {j, w.rho(ljg)}}, {});
      w.apply_nu_step(b, {{p, rc_neg(w.rho(bz.v))}, {j, w.rho(bz.u)}}, {});
      w.drop_rowless(p);
      w.drop_rowless(j);
      w.remove_nu(p);
      w.remove_nu(j);
      w.apply_tau_step(p, {{a, bz.u}, {b, -ljg}}, {}, &eq);
      w.apply_tau_step(j, {{a, bz.v}, {b, lpg}}, {}, &eq);
      w.rowless.push_back(a);
      w.rowless.push_back(b);
      normalize_eq(eq);
      p = a;
    }
    // monic pivot coefficient
    {
      Scalar lc = eq.lhs.at(p).lead();
      if (!lc.is_one()) {
        Scalar inv = lc.inv();
        for (auto& [v, cpoly] : eq.lhs) cpoly = cpoly.scaled(inv);
        eq.rhs = pt_apply(rc_scalar(w.cfg, inv), eq.rhs);
      }
    }
    // strip rowed variables
    std::vector<Var> corner;
    while (true) {
      Var z;
      bool found = false;
      for (const auto& [v, row] : w.rows) {
        if (!eq.lhs.count(v)) continue;
        bool is_corner = false;
        for (const Var& cv : corner)
          if (cv == v) is_corner = true;
        if (is_corner) continue;
        z = v;
        found = true;
        break;
      }
      if (!found) break;
      z = normalize_ld(w, eq, z);
      Work::WRow* row = w.find_row(z);
      Poly g = eq.lhs.at(p);
      uint32_t v = poly_valuation(eq.lhs.at(z), row->f).value();
      if (v == 0) {
        // globally unit coefficient after normalization: dissolve and restart
        eliminate_unit_ld(w, eq, z);
        if (!eq.lhs.empty() || !eq.rhs.is_zero()) w.queue.push_front(std::move(eq));
        return;
      }
      uint32_t vg = poly_valuation(g, row->f).value_or(0);
      uint32_t dmin = std::min(vg, row->q);
      if (v >= dmin) {
        // fold: f^v(z) = g(shift(z)) + bhat*b(f^q(z)) with d = gcd(g, f^q)
        Poly fq = poly_pow(row->f, row->q);
        Bezout bz = poly_gcd_bezout(g, fq);
        Poly bhat = poly_pow(row->f, v - dmin);
        Poly shift = bhat * bz.u;
        Var p2 = w.fresh("m");
        w.apply_nu_step(p2, {{p, w.one()}, {z, w.rho(shift)}}, {});
        w.drop_rowless(p);
        w.remove_nu(p);
        w.apply_tau_step(p, {{p2, Poly::one(w.field)}, {z, -shift}}, {}, &eq);
        w.rowless.push_back(p2);
        bound_eq(w, eq);  // clears the remaining f^q-multiple on z
        if (eq.lhs.count(z))
          throw error("ss_transform: fold left a residual coefficient");
        p = p2;
      } else {
        ExtNat c = kc_classify(w.cfg, row->f);
        if (c.is_inf())
          throw unsupported_transform(
              "ss_transform: C = infinity row variable undercuts the pivot");
        z = localize_ld(w, &eq, z);
        corner.push_back(z);
      }
    }
    Poly g = eq.lhs.at(p);
    absorb_li_pivot(w, p, g, eq, corner);
    return;
  }

  // rowed variables only
  std::map<Poly, std::vector<Var>, PolyLess> groups;
  for (const auto& [v, row] : w.rows)
    if (eq.lhs.count(v)) groups[row.f].push_back(v);
  if (groups.empty())
    throw error("ss_transform: unclassified variable in equation");

  // a unit-coefficient variable dissolves directly; its row spawns
  for (auto& [f, vars] : groups)
    for (const Var& z0 : vars) {
      Work::WRow* row0 = w.find_row(z0);
      uint32_t v = poly_valuation(eq.lhs.at(z0), row0->f).value();
      if (v > 0) continue;
      Var z = normalize_ld(w, eq, z0);
      eliminate_unit_ld(w, eq, z);
      return;
    }

  if (groups.size() > 1) {
    // non-unit coefficients across distinct primes: split along the blocks
    std::vector<Poly> primes;
    for (const auto& [f, vars] : groups) {
      if (kc_classify(w.cfg, f).is_inf())
        throw unsupported_transform(
            "ss_transform: entangled C = infinity rows across distinct primes");
      primes.push_back(f);
    }
    for (auto& [f, vars] : groups)
      for (Var& z : vars) z = localize_ld(w, &eq, z);
    std::map<Poly, TransformEq, PolyLess> parts;
    for (const auto& [v, row] : w.rows) {
      auto it = eq.lhs.find(v);
      if (it == eq.lhs.end()) continue;
      parts[row.f].lhs.emplace(v, it->second);
    }
    for (const auto& [v, lam] : eq.lhs) {
      bool rowed = w.find_row(v) != nullptr;
      if (!rowed) throw error("ss_transform: stray variable after localization");
    }
    for (auto& [f, part] : parts) {
      part.rhs = pt_apply(rc_projker(w.cfg, {f}), eq.rhs);
      w.queue.push_front(std::move(part));
    }
    ParamTerm off = pt_apply(rc_projim(w.cfg, primes), eq.rhs);
    if (!off.is_zero()) w.conditions.push_back(off);
    return;
  }

  // single prime group
  auto& group = *groups.begin();
  const Poly f = group.first;
  std::vector<Var>& vars = group.second;
  if (vars.size() > 1) {
    // fold the higher valuation into the lower; the donor row spawns
    Var z1 = normalize_ld(w, eq, vars[0]);
    Var z2 = normalize_ld(w, eq, vars[1]);
    uint32_t v1 = poly_valuation(eq.lhs.at(z1), f).value();
    uint32_t v2 = poly_valuation(eq.lhs.at(z2), f).value();
    if (v1 > v2) {
      std::swap(z1, z2);
      std::swap(v1, v2);
    }
    Work::WRow r1 = *w.find_row(z1);
    Poly delta = poly_pow(f, v2 - v1);
    Var zt = w.fresh("s");
    w.apply_nu_step(zt, {{z1, w.one()}, {z2, w.rho(delta)}}, {});
    w.drop_row(z1);
    w.remove_nu(z1);
    w.apply_tau_step(z1, {{zt, Poly::one(w.field)}, {z2, -delta}}, {}, &eq);
    w.rowless.push_back(zt);
    normalize_eq(eq);
    TransformEq spawn;
    Poly fq = poly_pow(r1.f, r1.q);
    spawn.lhs.emplace(zt, fq);
    Poly c2 = -(fq * delta);
    if (!c2.is_zero()) spawn.lhs.emplace(z2, c2);
    spawn.rhs = r1.param;
    w.queue.push_front(std::move(spawn));
    w.queue.push_front(std::move(eq));
    return;
  }

  // single rowed variable with a non-unit pure power coefficient: the row
  // tightens to the smaller exponent and the difference becomes a condition
  Var z = normalize_ld(w, eq, vars[0]);
  Work::WRow* row = w.find_row(z);
  uint32_t v = poly_valuation(eq.lhs.at(z), row->f).value();
  ExtNat c = kc_classify(w.cfg, row->f);
  ParamTerm rhs = eq.rhs;
  w.conditions.push_back(
      pt_add(pt_apply(w.rho(poly_pow(row->f, row->q - v)), rhs), pt_neg(row->param)));
  if (!c.is_inf()) {
    ParamTerm compat = pt_apply(w.rho(poly_pow(row->f, c.v - v)), rhs);
    if (!compat.is_zero()) w.conditions.push_back(compat);
  }
  row->q = v;
  row->param = rhs;
}

}  // namespace

TransformResult ss_transform(const SeqSystem& s, std::vector<TransformEq> eqs) {
  ss_validate(s);
  Work w;
  w.cfg = s.cfg;
  w.field = s.cfg.field;
  w.rowless = s.li_vars;
  for (const SeqRow& r : s.rows)
    w.rows.emplace_back(r.var, Work::WRow{r.f, r.q, pt_single(r.param, rc_one(s.cfg))});
  for (const Var& v : s.all_vars()) {
    LinMap::Expr id;
    id.vars.emplace(v, rc_one(s.cfg));
    w.nu.entries.emplace(v, id);
    w.tau.entries.emplace(v, id);
  }

  bool nontrivial = false;
  for (const TransformEq& eq : eqs) {
    TransformEq b = eq;
    bound_eq(w, b);
    if (!b.lhs.empty()) nontrivial = true;
  }

  TransformResult res;
  res.before = ss_rank_degree(s);
  w.queue.assign(eqs.begin(), eqs.end());
  while (!w.queue.empty()) {
    TransformEq eq = std::move(w.queue.front());
    w.queue.pop_front();
    absorb(w, std::move(eq));
  }

  res.s2.cfg = s.cfg;
  res.s2.li_vars = w.rowless;
  int pc = 0;
  for (const auto& [v, row] : w.rows) {
    Var slot = Var("u" + std::to_string(++pc));
    res.s2.rows.push_back(SeqRow{v, row.f, row.q, slot});
    res.mu.emplace(slot, row.param);
  }
  ss_validate(res.s2);
  res.conditions = w.conditions;
  for (const Var& v : res.s2.all_vars())
    res.witness.nu.entries.emplace(v, w.expr_of(w.nu, v));
  for (const Var& v : s.all_vars()) {
    LinMap::Expr e = w.expr_of(w.tau, v);
    for (const auto& [u, r] : e.vars)
      if (!r.den().is_one() || !r.corrections().empty())
        throw error("ss_transform: recovery map left a non-polynomial coefficient");
    res.witness.tau.entries.emplace(v, std::move(e));
  }
  res.after = ss_rank_degree(res.s2);
  if (!(res.after <= res.before))
    throw unsupported_transform("ss_transform: measure failed to decrease");
  res.strict = res.after < res.before;
  if (nontrivial && !res.strict)
    throw unsupported_transform("ss_transform: expected strict decrease");
  return res;
}

// ---------------------------------------------------------------------------
// Witness verification by exhaustive evaluation.

namespace {

struct EvalCtx {
  const FinModel& m;
  std::map<std::string, FpMat> cache;

  const FpMat& mat(const RcElem& r) {
    std::string key = r.str();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, rc_eval_matrix(r, m)).first->second;
  }

  FpVec param_term(const ParamTerm& t, const Assignment& asg) {
    FpVec acc(m.dim, 0);
    for (const auto& [y, r] : t.coeffs) {
      FpVec part = mat(r).mul(asg.at(y));
      for (uint32_t i = 0; i < m.dim; ++i) acc[i] = (acc[i] + part[i]) % m.field.p;
    }
    return acc;
  }

  FpVec expr(const LinMap::Expr& e, const Assignment& vars, const Assignment& params) {
    FpVec acc = param_term(e.param, params);
    for (const auto& [v, r] : e.vars) {
      FpVec part = mat(r).mul(vars.at(v));
      for (uint32_t i = 0; i < m.dim; ++i) acc[i] = (acc[i] + part[i]) % m.field.p;
    }
    return acc;
  }
};

bool is_zero_vec(const FpVec& v) {
  for (uint32_t x : v)
    if (x) return false;
  return true;
}

template <typename Fn>
void enumerate(const std::vector<Var>& vars, const FinModel& m, uint64_t* budget,
               Fn fn) {
  Assignment asg;
  for (const Var& v : vars) asg[v] = FpVec(m.dim, 0);
  while (true) {
    if (*budget == 0) throw budget_exceeded("ss_witness_verify: cap exceeded");
    --*budget;
    fn(asg);
    size_t k = 0;
    for (; k < vars.size(); ++k) {
      FpVec& val = asg[vars[k]];
      bool carried = true;
      for (uint32_t i = 0; i < m.dim; ++i) {
        if (++val[i] < m.field.p) {
          carried = false;
          break;
        }
        val[i] = 0;
      }
      if (!carried) break;
    }
    if (k == vars.size()) break;
  }
}

}  // namespace

bool ss_witness_verify(const SeqSystem& s, const std::vector<TransformEq>& eqs,
                       const TransformResult& r, const FinModel& m, uint64_t cap) {
  EvalCtx ctx{m, {}};
  std::vector<Var> old_vars = s.all_vars();
  std::vector<Var> new_vars = r.s2.all_vars();
  std::set<Var> pset;
  for (const SeqRow& row : s.rows) pset.insert(row.param);
  for (const TransformEq& eq : eqs)
    for (const auto& [y, c] : eq.rhs.coeffs) pset.insert(y);
  std::vector<Var> params(pset.begin(), pset.end());

  // total assignment count, checked against the cap
  {
    long double total = 1;
    size_t k = params.size() + std::max(old_vars.size(), new_vars.size());
    for (size_t i = 0; i < k * m.dim; ++i) total *= m.field.p;
    if (total > static_cast<long double>(cap))
      throw budget_exceeded("ss_witness_verify: cap exceeded");
  }
  uint64_t budget = cap;

  auto old_system_holds = [&](const Assignment& vars, const Assignment& ps) {
    for (const SeqRow& row : s.rows) {
      FpVec lhs = poly_apply(poly_pow(row.f, row.q), m.theta).mul(vars.at(row.var));
      if (lhs != ps.at(row.param)) return false;
    }
    for (const TransformEq& eq : eqs) {
      FpVec acc = ctx.param_term(pt_neg(eq.rhs), ps);
      for (const auto& [v, lam] : eq.lhs) {
        FpVec part = poly_apply(lam, m.theta).mul(vars.at(v));
        for (uint32_t i = 0; i < m.dim; ++i) acc[i] = (acc[i] + part[i]) % m.field.p;
      }
      if (!is_zero_vec(acc)) return false;
    }
    return true;
  };

  auto new_system_holds = [&](const Assignment& vars, const Assignment& ps) {
    for (const ParamTerm& c : r.conditions)
      if (!is_zero_vec(ctx.param_term(c, ps))) return false;
    for (const SeqRow& row : r.s2.rows) {
      FpVec lhs = poly_apply(poly_pow(row.f, row.q), m.theta).mul(vars.at(row.var));
      if (lhs != ctx.param_term(r.mu.at(row.param), ps)) return false;
    }
    return true;
  };

  bool ok = true;
  enumerate(params, m, &budget, [&](const Assignment& ps) {
    if (!ok) return;
    enumerate(old_vars, m, &budget, [&](const Assignment& xs) {
      if (!ok || !old_system_holds(xs, ps)) return;
      Assignment xs2;
      for (const Var& v : new_vars)
        xs2[v] = ctx.expr(r.witness.nu.entries.at(v), xs, ps);
      if (!new_system_holds(xs2, ps)) {
        ok = false;
        return;
      }
      for (const Var& v : old_vars)
        if (ctx.expr(r.witness.tau.entries.at(v), xs2, ps) != xs.at(v)) {
          ok = false;
          return;
        }
    });
    if (!ok) return;
    enumerate(new_vars, m, &budget, [&](const Assignment& xs2) {
      if (!ok || !new_system_holds(xs2, ps)) return;
      Assignment xs;
      for (const Var& v : old_vars)
        xs[v] = ctx.expr(r.witness.tau.entries.at(v), xs2, ps);
      if (!old_system_holds(xs, ps)) {
        ok = false;
        return;
      }
      for (const Var& v : new_vars)
        if (ctx.expr(r.witness.nu.entries.at(v), xs, ps) != xs2.at(v)) {
          ok = false;
          return;
        }
    });
  });
  return ok;
}

}  // namespace endoq
