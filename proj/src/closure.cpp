#include "endoq/qe.hpp"

namespace endoq {

namespace {

// Matrices generating the R_C-action on the model: theta together with the
// kernel projectors of the finite positive factors of its minimal
// polynomial. Polynomial maps, image projectors and pseudo-inverses all lie
// in the algebra these generate.
std::vector<FpMat> action_generators(const FinModel& m) {
  std::vector<FpMat> gens = {m.theta};
  if (m.cfg.is_algebraic()) return gens;  // projectors are polynomials in theta
  Poly mp = matrix_min_poly(m.theta, m.field);
  for (const auto& [f, mult] : poly_factor(mp).factors) {
    ExtNat c = kc_classify(m.cfg, f);
    if (c.is_inf() || c.v == 0) continue;
    Decomposition d = fm_decompose(m, {f});
    gens.push_back(d.proj_ker.at(f));
  }
  return gens;
}

uint32_t span_append(std::vector<FpVec>& basis, FpMat& mat, const FpVec& v,
                     uint32_t p, uint32_t dim) {
  // returns the new rank if v extends the span, otherwise the old rank
  std::vector<FpVec> cols = basis;
  cols.push_back(v);
  FpMat cand = mat_from_columns(p, dim, cols);
  uint32_t r = mat_rank(cand);
  if (r > basis.size()) {
    basis.push_back(v);
    mat = std::move(cand);
  }
  return r;
}

}  // namespace

ClosureBasis closure_cl_theta(const std::vector<FpVec>& gens, const FinModel& m,
                              uint64_t element_cap) {
  ClosureBasis out;
  out.generators = gens;
  uint32_t p = m.field.p;
  std::vector<FpMat> action = action_generators(m);

  std::vector<FpVec> basis;
  FpMat bm(p, m.dim, 0);
  std::deque<FpVec> work;
  for (const FpVec& g : gens) {
    if (span_append(basis, bm, g, p, m.dim) == basis.size()) work.push_back(g);
  }
  // rebuild the worklist from the accepted basis (span_append may reject)
  work.assign(basis.begin(), basis.end());
  while (!work.empty()) {
    FpVec v = work.front();
    work.pop_front();
    for (const FpMat& a : action) {
      FpVec img = a.mul(v);
      size_t before = basis.size();
      span_append(basis, bm, img, p, m.dim);
      if (basis.size() > before) work.push_back(img);
    }
  }
  out.basis = basis;

  // explicit element list at desk scale
  uint64_t count = 1;
  bool small = true;
  for (size_t i = 0; i < basis.size(); ++i) {
    count *= p;
    if (count > element_cap) {
      small = false;
      break;
    }
  }
  if (small) {
    std::vector<uint32_t> digits(basis.size(), 0);
    FpVec cur(m.dim, 0);
    out.elements.push_back(cur);
    if (!basis.empty()) {
      while (true) {
        size_t k = 0;
        for (; k < digits.size(); ++k) {
          if (++digits[k] < p) {
            for (uint32_t i = 0; i < m.dim; ++i)
              cur[i] = (cur[i] + basis[k][i]) % p;
            break;
          }
          digits[k] = 0;
          for (uint32_t i = 0; i < m.dim; ++i)
            cur[i] = (cur[i] + (p - 1) * basis[k][i] % p) % p;
        }
        if (k == digits.size()) break;
        out.elements.push_back(cur);
      }
    }
  }

  for (const FpVec& g : gens) {
    // minimal monic annihilator of the generator under theta
    std::vector<FpVec> krylov = {g};
    Poly ann = Poly::one(m.field);
    while (true) {
      FpVec next = m.theta.mul(krylov.back());
      FpMat kmat = mat_from_columns(p, m.dim, krylov);
      auto x = mat_solve(kmat, next);
      if (x) {
        std::vector<Scalar> c(krylov.size() + 1, Scalar::zero(m.field));
        for (size_t i = 0; i < x->size(); ++i) c[i] = -Scalar::of_residue(p, (*x)[i]);
        c[krylov.size()] = Scalar::one(m.field);
        ann = Poly(m.field, std::move(c));
        break;
      }
      krylov.push_back(std::move(next));
    }
    out.annihilators.push_back(ann);
  }
  return out;
}

namespace {

// spanning monomials of the action algebra applied to the tuple: theta^i and
// theta^i * projker_f for the relevant factors
std::vector<FpMat> action_monomials(const FinModel& m, uint32_t powers) {
  std::vector<FpMat> mats;
  FpMat cur = FpMat::identity(m.field.p, m.dim);
  std::vector<FpMat> thetas;
  for (uint32_t i = 0; i < powers; ++i) {
    thetas.push_back(cur);
    cur = cur * m.theta;
  }
  std::vector<FpMat> projs;
  if (!m.cfg.is_algebraic()) {
    Poly mp = matrix_min_poly(m.theta, m.field);
    for (const auto& [f, mult] : poly_factor(mp).factors) {
      ExtNat c = kc_classify(m.cfg, f);
      if (c.is_inf() || c.v == 0) continue;
      Decomposition d = fm_decompose(m, {f});
      projs.push_back(d.proj_ker.at(f));
    }
  }
  for (const FpMat& t : thetas) {
    mats.push_back(t);
    for (const FpMat& pk : projs) mats.push_back(t * pk);
  }
  return mats;
}

}  // namespace

bool closure_isomorphic(const std::vector<FpVec>& a, const FinModel& ma,
                        const std::vector<FpVec>& b, const FinModel& mb) {
  if (!(ma.cfg == mb.cfg)) throw error("closure_isomorphic: configuration mismatch");
  if (a.size() != b.size()) return false;
  uint32_t powers = std::max(ma.dim, mb.dim) + 1;
  std::vector<FpMat> mons_a = action_monomials(ma, powers);
  std::vector<FpMat> mons_b = action_monomials(mb, powers);
  if (mons_a.size() != mons_b.size()) {
    // differing projector sets: compare through the union shape by treating
    // missing projectors as absent relations; sizes differ only when the
    // minimal polynomials have different finite-C support
    return false;
  }
  // relation spaces: kernels of (monomial, generator) -> vector maps
  auto relation_kernel = [&](const std::vector<FpVec>& tup, const FinModel& m,
                             const std::vector<FpMat>& mons) {
    uint32_t cols = static_cast<uint32_t>(mons.size() * tup.size());
    FpMat mat(m.field.p, m.dim, cols);
    uint32_t j = 0;
    for (size_t g = 0; g < tup.size(); ++g)
      for (const FpMat& mo : mons) {
        FpVec img = mo.mul(tup[g]);
        for (uint32_t i = 0; i < m.dim; ++i) mat.at(i, j) = img[i];
        ++j;
      }
    return mat_kernel(mat);
  };
  std::vector<FpVec> ka = relation_kernel(a, ma, mons_a);
  std::vector<FpVec> kb = relation_kernel(b, mb, mons_b);
  if (ka.size() != kb.size()) return false;
  // same span test
  std::vector<FpVec> all = ka;
  for (const FpVec& v : kb) all.push_back(v);
  uint32_t cols = static_cast<uint32_t>(mons_a.size() * a.size());
  FpMat ma_ = mat_from_columns(ma.field.p, cols, ka);
  FpMat mall = mat_from_columns(ma.field.p, cols, all);
  return mat_rank(ma_) == mat_rank(mall);
}

std::vector<std::vector<FpVec>> pattern_eval(const std::vector<PatternEntry>& pattern,
                                             const Assignment& params,
                                             const FinModel& m) {
  std::vector<std::vector<FpVec>> tuples = {{}};
  for (size_t i = 0; i < pattern.size(); ++i) {
    const PatternEntry& ent = pattern[i];
    FpMat rmat = rc_eval_matrix(ent.r, m);
    std::vector<std::vector<FpVec>> next;
    for (const auto& tup : tuples) {
      Assignment env = params;
      for (size_t k = 0; k < tup.size(); ++k)
        env[Var("y" + std::to_string(k + 1))] = tup[k];
      for (const Term& cand : ent.candidates) {
        FpVec x(m.dim, 0);
        for (const auto& [v, c] : cand.coeffs()) {
          auto it = env.find(v);
          if (it == env.end()) throw error("pattern_eval: unbound candidate variable " + v.str());
          FpMat cm = std::holds_alternative<Poly>(c)
                         ? poly_apply(std::get<Poly>(c), m.theta)
                         : rc_eval_matrix(std::get<RcElem>(c), m);
          FpVec part = cm.mul(it->second);
          for (uint32_t d = 0; d < m.dim; ++d) x[d] = (x[d] + part[d]) % m.field.p;
        }
        std::vector<FpVec> ext = tup;
        ext.push_back(rmat.mul(x));
        next.push_back(std::move(ext));
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    tuples = std::move(next);
  }
  return tuples;
}

namespace {

bool in_closure(const FpVec& v, const ClosureBasis& cb, const FinModel& m) {
  if (cb.basis.empty()) {
    for (uint32_t x : v)
      if (x) return false;
    return true;
  }
  FpMat bm = mat_from_columns(m.field.p, m.dim, cb.basis);
  return mat_solve(bm, v).has_value();
}

}  // namespace

ExchangeVerdict exchange_diagnose(const KernelConfig& cfg) {
  ExchangeVerdict out;
  if (rc_is_field(cfg)) {
    out.has_exchange = true;
    return out;
  }
  if (!cfg.field.is_fp())
    throw error("exchange_diagnose: finite-model witnesses need a prime field");
  out.has_exchange = false;

  FinModel m;
  FpVec u, v;
  if (cfg.is_algebraic()) {
    // composite MiPo: either a repeated factor or two distinct factors
    const Poly* rep = nullptr;
    for (const auto& [f, c] : cfg.entries)
      if (c.v >= 2) rep = &f;
    if (rep) {
      m = fm_build(cfg, {Block{*rep, 2}}, {});
      u = FpVec(m.dim, 0);
      u[0] = 1;
      v = poly_apply(*rep, m.theta).mul(u);
    } else {
      auto it = cfg.entries.begin();
      Poly f1 = it->first;
      ++it;
      Poly f2 = it->first;
      m = fm_build(cfg, {Block{f1, 1}, Block{f2, 1}}, {});
      u = FpVec(m.dim, 0);
      u[0] = 1;
      u[f1.deg()] = 1;  // one generator in each block
      v = poly_apply(f2, m.theta).mul(u);
    }
  } else {
    // some factor with C(f) > 0 exists (otherwise C = C_0, a field)
    Poly f = Poly::zero(cfg.field);
    bool found = false;
    for (const auto& [g, c] : cfg.entries)
      if (!found && (c.is_inf() || c.v > 0)) {
        f = g;
        found = true;
      }
    if (!found) {
      if (cfg.def != KernelConfig::Default::Infinity)
        throw error("exchange_diagnose: no factor with positive C");
      f = parse_poly("X", cfg.field);
      ExtNat c = kc_classify(cfg, f);
      if (!(c.is_inf() || c.v > 0)) {
        // X is an exception with C = 0; scan for another irreducible
        for (uint32_t d = 1; !found && d <= 6; ++d)
          for (size_t skip = 0; !found; ++skip) {
            std::vector<Poly> cand;
            try {
              cand = monic_irreducibles_fp(cfg.field, d, 1, skip);
            } catch (const error&) {
              break;
            }
            ExtNat cc = kc_classify(cfg, cand[0]);
            if (cc.is_inf() || cc.v > 0) {
              f = cand[0];
              found = true;
            }
          }
      }
    }
    // filler: an irreducible distinct from f and from every C = 0 exception
    Poly filler = Poly::zero(cfg.field);
    for (uint32_t d = 1; filler.is_zero() && d <= 6; ++d) {
      for (size_t skip = 0; filler.is_zero(); ++skip) {
        std::vector<Poly> cand;
        try {
          cand = monic_irreducibles_fp(cfg.field, d, 1, skip);
        } catch (const error&) {
          break;
        }
        if (cand[0] == f) continue;
        ExtNat cc = kc_classify(cfg, cand[0]);
        if (!cc.is_inf() && cc.v == 0) continue;
        filler = cand[0];
      }
    }
    std::vector<Poly> support;
    for (const auto& [g, c] : cfg.entries)
      if (!c.is_inf() && c.v == 0) support.push_back(g);
    m = fm_build(cfg, {Block{f, 1}, Block{filler, 1}}, support);
    // u = kernel generator + filler generator; v = f(theta)(u) lives in the
    // filler block only
    u = FpVec(m.dim, 0);
    u[0] = 1;
    u[f.deg()] = 1;
    v = poly_apply(f, m.theta).mul(u);
  }

  // certify: v in <u> \ {0}, u not in <v>
  ClosureBasis cu = closure_cl_theta({u}, m);
  ClosureBasis cv = closure_cl_theta({v}, m);
  bool v_nonzero = false;
  for (uint32_t x : v) v_nonzero |= x != 0;
  if (!v_nonzero || !in_closure(v, cu, m) || in_closure(u, cv, m))
    throw error("exchange_diagnose: witness construction failed its own check");
  out.witness = ExchangeWitness{m, u, v};
  return out;
}

}  // namespace endoq
