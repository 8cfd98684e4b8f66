#include "endoq/eval.hpp"

#include <algorithm>
#include <unordered_map>
#include <functional>

#include "endoq/rc.hpp"

namespace endoq {

namespace {

// ---------------------------------------------------------------------------
// Shared atom machinery.

struct AtomTable {
  std::vector<Term> atoms;
  std::map<std::string, size_t> index;

  size_t intern(const Term& t) {
    std::string key = t.str();
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    size_t id = atoms.size();
    atoms.push_back(t);
    index.emplace(std::move(key), id);
    return id;
  }
};

struct BExpr {
  enum class K { AtomRef, Not, And, Or, Const } k = K::Const;
  size_t atom = 0;
  bool cval = true;
  std::shared_ptr<BExpr> a, b;
};
using BExprPtr = std::shared_ptr<BExpr>;

BExprPtr bexpr_of(const FormulaPtr& f, AtomTable& table) {
  auto n = std::make_shared<BExpr>();
  switch (f->kind) {
    case Formula::Kind::Atom:
      if (f->atom.is_zero()) {
        n->k = BExpr::K::Const;
        n->cval = true;
      } else {
        n->k = BExpr::K::AtomRef;
        n->atom = table.intern(f->atom);
      }
      return n;
    case Formula::Kind::Not:
      n->k = BExpr::K::Not;
      n->a = bexpr_of(f->a, table);
      return n;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      n->k = f->kind == Formula::Kind::And ? BExpr::K::And : BExpr::K::Or;
      n->a = bexpr_of(f->a, table);
      n->b = bexpr_of(f->b, table);
      return n;
    default:
      throw error("eval: quantifier inside matrix");
  }
}

bool bexpr_eval(const BExpr* e, const std::vector<bool>& bits) {
  switch (e->k) {
    case BExpr::K::Const:
      return e->cval;
    case BExpr::K::AtomRef:
      return bits[e->atom];
    case BExpr::K::Not:
      return !bexpr_eval(e->a.get(), bits);
    case BExpr::K::And:
      return bexpr_eval(e->a.get(), bits) && bexpr_eval(e->b.get(), bits);
    case BExpr::K::Or:
      return bexpr_eval(e->a.get(), bits) || bexpr_eval(e->b.get(), bits);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Naive engine: plain enumeration over F_p^dim.

struct NaiveEval {
  const FinModel& m;
  uint64_t budget;
  uint64_t steps = 0;
  // coefficient matrix cache per (var-agnostic) coefficient
  std::map<std::string, FpMat> coeff_mats;

  NaiveEval(const FinModel& model, uint64_t b) : m(model), budget(b) {}

  void tick() {
    if (++steps > budget) throw budget_exceeded("fm_eval: enumeration cap exceeded");
  }

  const FpMat& coeff_matrix(const Coeff& c) {
    std::string key = coeff_str(c);
    auto it = coeff_mats.find(key);
    if (it != coeff_mats.end()) return it->second;
    FpMat mat = std::holds_alternative<Poly>(c)
                    ? poly_apply(std::get<Poly>(c), m.theta)
                    : rc_eval_matrix(std::get<RcElem>(c), m);
    return coeff_mats.emplace(std::move(key), std::move(mat)).first->second;
  }

  bool atom_true(const Term& t, const Assignment& asg) {
    FpVec acc(m.dim, 0);
    for (const auto& [v, c] : t.coeffs()) {
      auto it = asg.find(v);
      if (it == asg.end()) throw error("fm_eval: unbound variable " + v.str());
      FpVec part = coeff_matrix(c).mul(it->second);
      for (uint32_t i = 0; i < m.dim; ++i) acc[i] = (acc[i] + part[i]) % m.field.p;
    }
    return std::all_of(acc.begin(), acc.end(), [](uint32_t x) { return x == 0; });
  }

  bool eval(const FormulaPtr& f, Assignment& asg) {
    switch (f->kind) {
      case Formula::Kind::Atom:
        tick();
        return atom_true(f->atom, asg);
      case Formula::Kind::Not:
        return !eval(f->a, asg);
      case Formula::Kind::And:
        return eval(f->a, asg) && eval(f->b, asg);
      case Formula::Kind::Or:
        return eval(f->a, asg) || eval(f->b, asg);
      case Formula::Kind::Exists:
      case Formula::Kind::Forall: {
        bool exists = f->kind == Formula::Kind::Exists;
        // restore any shadowed binding of the same name on the way out
        std::optional<FpVec> saved;
        if (auto it = asg.find(f->qvar); it != asg.end()) saved = it->second;
        auto restore = [&]() {
          if (saved)
            asg[f->qvar] = *saved;
          else
            asg.erase(f->qvar);
        };
        FpVec v(m.dim, 0);
        bool result = !exists;
        while (true) {
          tick();
          asg[f->qvar] = v;
          bool r = eval(f->a, asg);
          if (exists == r) {
            result = r;
            break;
          }
          // increment base-p counter
          uint32_t i = 0;
          for (; i < m.dim; ++i) {
            if (++v[i] < m.field.p) break;
            v[i] = 0;
          }
          if (i == m.dim) break;
        }
        restore();
        return result;
      }
    }
    return false;
  }
};

}  // namespace

bool fm_eval(const FormulaPtr& phi, const FinModel& m, const Assignment& asg,
             uint64_t budget) {
  NaiveEval ev(m, budget);
  Assignment a = asg;
  return ev.eval(phi, a);
}

std::vector<std::pair<Assignment, bool>> fm_eval_all(const FormulaPtr& phi,
                                                     const FinModel& m,
                                                     uint64_t budget) {
  std::set<Var> fvset = free_vars(phi);
  std::vector<Var> fv(fvset.begin(), fvset.end());
  std::vector<std::pair<Assignment, bool>> out;
  NaiveEval ev(m, budget);
  Assignment asg;
  std::vector<FpVec> vals(fv.size(), FpVec(m.dim, 0));
  while (true) {
    for (size_t i = 0; i < fv.size(); ++i) asg[fv[i]] = vals[i];
    out.emplace_back(asg, ev.eval(phi, asg));
    // increment the whole tuple
    size_t k = 0;
    for (; k < fv.size(); ++k) {
      bool carried = true;
      for (uint32_t i = 0; i < m.dim; ++i) {
        if (++vals[k][i] < m.field.p) {
          carried = false;
          break;
        }
        vals[k][i] = 0;
      }
      if (!carried) break;
    }
    if (k == fv.size()) break;
    if (fv.empty()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Product engine: evaluation through the block decomposition.

namespace {

struct Bits {
  std::vector<uint64_t> w;
  bool operator==(const Bits& o) const { return w == o.w; }
};

struct BitsHash {
  size_t operator()(const Bits& b) const {
    size_t h = 1469598103934665603ull;
    for (uint64_t x : b.w) h = (h ^ x) * 1099511628211ull;
    return h;
  }
};

// Hash-consed nested set objects, one arena per level.
struct TypeArena {
  size_t natoms = 0;
  size_t nlevels = 0;
  // leaves
  std::vector<Bits> leaves;
  std::unordered_map<Bits, uint32_t, BitsHash> leaf_ids;
  // level objects (per level < nlevels): sorted child id vectors
  std::vector<std::vector<std::vector<uint32_t>>> sets;
  std::vector<std::map<std::vector<uint32_t>, uint32_t>> set_ids;
  // combine memo per level: (a, b) -> id
  std::vector<std::map<std::pair<uint32_t, uint32_t>, uint32_t>> combine_memo;
  uint64_t steps = 0;
  uint64_t budget = 0;

  TypeArena(size_t atoms, size_t levels, uint64_t b)
      : natoms(atoms), nlevels(levels), sets(levels), set_ids(levels),
        combine_memo(levels + 1), budget(b) {}

  void tick(uint64_t n = 1) {
    steps += n;
    if (steps > budget) throw budget_exceeded("product engine: work budget exceeded");
  }

  uint32_t intern_leaf(const Bits& b) {
    auto it = leaf_ids.find(b);
    if (it != leaf_ids.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(leaves.size());
    leaves.push_back(b);
    leaf_ids.emplace(b, id);
    return id;
  }

  uint32_t intern_set(size_t level, std::vector<uint32_t> children) {
    std::sort(children.begin(), children.end());
    children.erase(std::unique(children.begin(), children.end()), children.end());
    auto& ids = set_ids[level];
    auto it = ids.find(children);
    if (it != ids.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(sets[level].size());
    sets[level].push_back(children);
    ids.emplace(std::move(children), id);
    return id;
  }

  // direct-sum combination: leaf = AND, set = elementwise product
  uint32_t combine(size_t level, uint32_t a, uint32_t b) {
    if (a > b) std::swap(a, b);
    auto& memo = combine_memo[level];
    auto it = memo.find({a, b});
    if (it != memo.end()) return it->second;
    uint32_t id;
    if (level == nlevels) {
      Bits r = leaves[a];
      for (size_t i = 0; i < r.w.size(); ++i) r.w[i] &= leaves[b].w[i];
      id = intern_leaf(r);
    } else {
      std::vector<uint32_t> prod;
      prod.reserve(sets[level][a].size() * sets[level][b].size());
      for (uint32_t x : sets[level][a])
        for (uint32_t y : sets[level][b]) {
          tick();
          prod.push_back(combine(level + 1, x, y));
        }
      id = intern_set(level, std::move(prod));
    }
    memo.emplace(std::make_pair(a, b), id);
    return id;
  }

  // base ** mult under the level-0 combine, mult >= 1
  uint32_t power(uint32_t base, uint64_t mult) {
    uint32_t result = 0;
    bool have = false;
    uint32_t cur = base;
    while (mult) {
      if (mult & 1) {
        result = have ? combine(0, result, cur) : cur;
        have = true;
      }
      mult >>= 1;
      if (mult) cur = combine(0, cur, cur);
    }
    return result;
  }
};

struct LevelSpec {
  Var var;
  enum class K { Free, Exists, Forall } kind = K::Exists;
};

// One block shape with its per-level enumeration domains.
struct ShapeSpec {
  FpMat theta;
  std::vector<std::vector<FpVec>> domains;  // per level, explicit vectors
  uint64_t multiplicity = 1;
};

struct ProductEngine {
  uint32_t p;
  std::vector<LevelSpec> levels;
  AtomTable atoms;
  BExprPtr matrix_phi;            // over the shared atom table
  BExprPtr matrix_psi;            // optional second matrix (equivalence mode)
  size_t nfree = 0;               // leading Free levels
  TypeArena arena;

  ProductEngine(uint32_t prime, std::vector<LevelSpec> lv, size_t natoms_hint,
                uint64_t budget)
      : p(prime), levels(std::move(lv)), arena(natoms_hint, 0, budget) {}

  void finalize_atoms() {
    arena.natoms = atoms.atoms.size();
    arena.nlevels = levels.size();
    arena.sets.resize(levels.size());
    arena.set_ids.resize(levels.size());
    arena.combine_memo.resize(levels.size() + 1);
  }

  // per-block coefficient action of an atom coefficient
  FpMat block_coeff(const Coeff& c, const FpMat& btheta, const KernelConfig& cfg,
                    ExtNat block_cvalue, const Poly& block_f) {
    if (std::holds_alternative<Poly>(c)) return poly_apply(std::get<Poly>(c), btheta);
    const RcElem& r = std::get<RcElem>(c);
    if (cfg.is_algebraic()) return poly_apply(r.num(), btheta);
    if (!block_cvalue.is_inf() && block_cvalue.v > 0)
      return poly_apply(rc_local(r, block_f), btheta);
    FpMat dm = poly_apply(r.den(), btheta);
    return poly_apply(r.num(), btheta) * mat_inverse(dm);
  }

  // type of one block: nested set object id at level 0
  uint32_t block_type(const ShapeSpec& shape, const KernelConfig& cfg,
                      const Poly& block_f, ExtNat block_cvalue) {
    uint32_t bdim = shape.theta.rows();
    size_t na = atoms.atoms.size();
    // coefficient matrices per (level, atom): action of the atom coefficient
    // of the level variable on this block
    std::vector<std::vector<std::optional<FpMat>>> act(levels.size());
    for (size_t l = 0; l < levels.size(); ++l) {
      act[l].resize(na);
      for (size_t ai = 0; ai < na; ++ai) {
        auto it = atoms.atoms[ai].coeffs().find(levels[l].var);
        if (it == atoms.atoms[ai].coeffs().end()) continue;
        act[l][ai] = block_coeff(it->second, shape.theta, cfg, block_cvalue, block_f);
      }
    }
    // precompute contributions per level and domain vector
    std::vector<std::vector<std::vector<FpVec>>> contrib(levels.size());
    for (size_t l = 0; l < levels.size(); ++l) {
      contrib[l].resize(shape.domains[l].size());
      for (size_t vi = 0; vi < shape.domains[l].size(); ++vi) {
        contrib[l][vi].resize(na);
        for (size_t ai = 0; ai < na; ++ai)
          if (act[l][ai])
            contrib[l][vi][ai] = act[l][ai]->mul(shape.domains[l][vi]);
        arena.tick();
      }
    }
    std::vector<FpVec> partial(na, FpVec(bdim, 0));
    // memo on the packed partial-sum state per level
    std::vector<std::unordered_map<std::string, uint32_t>> memo(levels.size());

    std::function<uint32_t(size_t)> rec = [&](size_t level) -> uint32_t {
      if (level == levels.size()) {
        Bits b;
        b.w.assign((na + 63) / 64, 0);
        for (size_t ai = 0; ai < na; ++ai) {
          bool zero = std::all_of(partial[ai].begin(), partial[ai].end(),
                                  [](uint32_t x) { return x == 0; });
          if (zero) b.w[ai / 64] |= 1ull << (ai % 64);
        }
        return arena.intern_leaf(b);
      }
      std::string key;
      key.reserve(na * bdim);
      for (size_t ai = 0; ai < na; ++ai)
        for (uint32_t i = 0; i < bdim; ++i)
          key.push_back(static_cast<char>(partial[ai][i]));
      auto it = memo[level].find(key);
      if (it != memo[level].end()) return it->second;
      std::vector<uint32_t> children;
      children.reserve(shape.domains[level].size());
      for (size_t vi = 0; vi < shape.domains[level].size(); ++vi) {
        arena.tick();
        // apply contribution
        for (size_t ai = 0; ai < na; ++ai)
          if (!contrib[level][vi][ai].empty())
            for (uint32_t i = 0; i < bdim; ++i)
              partial[ai][i] = (partial[ai][i] + contrib[level][vi][ai][i]) % p;
        children.push_back(rec(level + 1));
        for (size_t ai = 0; ai < na; ++ai)
          if (!contrib[level][vi][ai].empty())
            for (uint32_t i = 0; i < bdim; ++i)
              partial[ai][i] = (partial[ai][i] + (p - 1) * contrib[level][vi][ai][i]) % p;
      }
      uint32_t id = arena.intern_set(level, std::move(children));
      memo[level].emplace(std::move(key), id);
      return id;
    };
    return rec(0);
  }

  // quantifier evaluation of the full-model object below the free levels
  bool eval_quant(size_t level, uint32_t id, const BExprPtr& matrix) {
    if (level == levels.size()) {
      std::vector<bool> bits(atoms.atoms.size());
      const Bits& b = arena.leaves[id];
      for (size_t ai = 0; ai < bits.size(); ++ai)
        bits[ai] = (b.w[ai / 64] >> (ai % 64)) & 1;
      return bexpr_eval(matrix.get(), bits);
    }
    bool exists = levels[level].kind == LevelSpec::K::Exists;
    for (uint32_t child : arena.sets[level][id]) {
      bool r = eval_quant(level + 1, child, matrix);
      if (exists && r) return true;
      if (!exists && !r) return false;
    }
    return !exists;
  }

  uint32_t leftmost_leaf(size_t level, uint32_t id) {
    while (level < levels.size()) {
      id = arena.sets[level][id].front();
      ++level;
    }
    return id;
  }

  // walk the free levels; check phi/psi agreement at every reachable point
  bool equiv_walk(size_t level, uint32_t id) {
    if (level == nfree) {
      bool tphi = eval_quant(level, id, matrix_phi);
      uint32_t leaf = leftmost_leaf(level, id);
      std::vector<bool> bits(atoms.atoms.size());
      const Bits& b = arena.leaves[leaf];
      for (size_t ai = 0; ai < bits.size(); ++ai)
        bits[ai] = (b.w[ai / 64] >> (ai % 64)) & 1;
      bool tpsi = bexpr_eval(matrix_psi.get(), bits);
      return tphi == tpsi;
    }
    for (uint32_t child : arena.sets[level][id])
      if (!equiv_walk(level + 1, child)) return false;
    return true;
  }
};

// full-domain vectors of F_p^dim spanned by a basis (all combinations)
std::vector<FpVec> span_vectors(uint32_t p, uint32_t dim, const std::vector<FpVec>& basis,
                                uint64_t cap) {
  uint64_t total = 1;
  for (size_t i = 0; i < basis.size(); ++i) {
    total *= p;
    if (total > cap) throw budget_exceeded("product engine: block domain too large");
  }
  std::vector<FpVec> out;
  out.reserve(total);
  std::vector<uint32_t> digits(basis.size(), 0);
  FpVec cur(dim, 0);
  out.push_back(cur);
  if (basis.empty()) return out;
  while (true) {
    size_t k = 0;
    for (; k < digits.size(); ++k) {
      if (++digits[k] < p) {
        for (uint32_t i = 0; i < dim; ++i)
          cur[i] = (cur[i] + basis[k][i]) % p;
        break;
      }
      digits[k] = 0;
      // subtract (p-1) * basis[k]
      for (uint32_t i = 0; i < dim; ++i)
        cur[i] = (cur[i] + (p - 1) * basis[k][i] % p) % p;
    }
    if (k == digits.size()) break;
    out.push_back(cur);
  }
  return out;
}

std::vector<FpVec> standard_basis(uint32_t dim) {
  std::vector<FpVec> b;
  for (uint32_t i = 0; i < dim; ++i) {
    FpVec v(dim, 0);
    v[i] = 1;
    b.push_back(v);
  }
  return b;
}

// run the engine on an explicit shape list; returns per-model object id
uint32_t run_shapes(ProductEngine& eng, const KernelConfig& cfg,
                    const std::vector<std::tuple<ShapeSpec, Poly, ExtNat>>& shapes) {
  bool first = true;
  uint32_t acc = 0;
  for (const auto& [shape, f, cv] : shapes) {
    uint32_t t = eng.block_type(shape, cfg, f, cv);
    if (shape.multiplicity > 1) t = eng.arena.power(t, shape.multiplicity);
    acc = first ? t : eng.arena.combine(0, acc, t);
    first = false;
  }
  if (first) throw error("product engine: empty model");
  return acc;
}

std::vector<std::tuple<ShapeSpec, Poly, ExtNat>> shapes_of_model(
    const FinModel& m, const std::vector<LevelSpec>& levels, uint64_t cap) {
  if (m.blocks.empty()) throw error("product engine: model lacks block metadata");
  std::vector<std::tuple<ShapeSpec, Poly, ExtNat>> out;
  std::map<std::string, size_t> seen;  // shape key -> index into out
  for (const Block& b : m.blocks) {
    std::string key = b.f.str() + "^" + std::to_string(b.exp);
    auto it = seen.find(key);
    if (it != seen.end()) {
      std::get<0>(out[it->second]).multiplicity += 1;
      continue;
    }
    ShapeSpec shape;
    shape.theta = companion_matrix(poly_pow(b.f, b.exp), m.field);
    uint32_t bdim = shape.theta.rows();
    auto full = span_vectors(m.field.p, bdim, standard_basis(bdim), cap);
    shape.domains.assign(levels.size(), full);
    shape.multiplicity = 1;
    seen.emplace(std::move(key), out.size());
    out.emplace_back(std::move(shape), b.f, kc_classify(m.cfg, b.f));
  }
  return out;
}

}  // namespace

bool product_eval(const FormulaPtr& phi, const FinModel& m, uint64_t budget) {
  Prenex pre = to_prenex(phi);
  if (!free_vars(phi).empty()) throw error("product_eval: sentence required");
  std::vector<LevelSpec> levels;
  for (const auto& l : pre.levels)
    levels.push_back({l.var, l.exists ? LevelSpec::K::Exists : LevelSpec::K::Forall});
  ProductEngine eng(m.field.p, levels, 0, budget);
  eng.matrix_phi = bexpr_of(pre.matrix, eng.atoms);
  eng.finalize_atoms();
  auto shapes = shapes_of_model(m, eng.levels, 1u << 20);
  uint32_t id = run_shapes(eng, m.cfg, shapes);
  return eng.eval_quant(0, id, eng.matrix_phi);
}

bool product_equiv(const FormulaPtr& phi, const FormulaPtr& psi, const FinModel& m,
                   uint64_t budget) {
  if (!is_quantifier_free(psi)) throw error("product_equiv: psi must be quantifier free");
  Prenex pre = to_prenex(phi);
  std::set<Var> fv = free_vars(phi);
  for (const Var& v : free_vars(psi)) fv.insert(v);
  std::vector<LevelSpec> levels;
  for (const Var& v : fv) levels.push_back({v, LevelSpec::K::Free});
  size_t nfree = levels.size();
  for (const auto& l : pre.levels)
    levels.push_back({l.var, l.exists ? LevelSpec::K::Exists : LevelSpec::K::Forall});
  ProductEngine eng(m.field.p, levels, 0, budget);
  eng.nfree = nfree;
  eng.matrix_phi = bexpr_of(pre.matrix, eng.atoms);
  eng.matrix_psi = bexpr_of(psi, eng.atoms);
  eng.finalize_atoms();
  auto shapes = shapes_of_model(m, eng.levels, 1u << 20);
  uint32_t id = run_shapes(eng, m.cfg, shapes);
  if (nfree == 0) {
    bool tphi = eng.eval_quant(0, id, eng.matrix_phi);
    uint32_t leaf = eng.leftmost_leaf(0, id);
    std::vector<bool> bits(eng.atoms.atoms.size());
    for (size_t ai = 0; ai < bits.size(); ++ai)
      bits[ai] = (eng.arena.leaves[leaf].w[ai / 64] >> (ai % 64)) & 1;
    return tphi == bexpr_eval(eng.matrix_psi.get(), bits);
  }
  return eng.equiv_walk(0, id);
}

// ---------------------------------------------------------------------------
// Stabilized oracle over the growing staged family.

namespace {

struct StagedFamily {
  KernelConfig cfg;
  std::vector<Poly> support;       // positive-C support factors of the formula
  std::vector<Poly> inf_support;   // the C = infinity ones among them
  Poly filler;                     // transcendental configurations only
  bool has_filler = false;
  uint32_t B = 1;
  uint32_t step = 1;  // depth growth per stage for C = infinity factors
};

StagedFamily make_family(const FormulaPtr& phi, const KernelConfig& cfg,
                         uint32_t extra_depth, size_t filler_choice,
                         uint32_t depth_cap) {
  StagedFamily fam;
  fam.cfg = cfg;
  uint32_t qd = quantifier_depth(phi) + extra_depth;
  uint32_t me = max_theta_exponent(phi);
  fam.B = qd + me + 1;
  fam.step = std::max<uint32_t>(1, me);
  std::vector<Poly> support = formula_support(phi, cfg);
  if (cfg.is_algebraic()) {
    for (const auto& [f, v] : cfg.entries) fam.support.push_back(f);
    return fam;
  }
  for (const Poly& f : support) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf()) {
      fam.support.push_back(f);
      fam.inf_support.push_back(f);
    } else if (c.v > 0) {
      fam.support.push_back(f);
    }
  }
  // filler: deterministic irreducible of degree >= B avoiding the support;
  // walk degrees upward until enough candidates exist
  uint32_t deg = std::max<uint32_t>(1, fam.B);
  size_t wanted = filler_choice;
  while (deg <= depth_cap) {
    size_t skip = 0;
    while (true) {
      std::vector<Poly> cands;
      try {
        cands = monic_irreducibles_fp(cfg.field, deg, 1, skip);
      } catch (const error&) {
        break;  // degree exhausted
      }
      bool clash = false;
      for (const Poly& f : support)
        if (f == cands[0]) clash = true;
      if (!clash) {
        if (wanted == 0) {
          fam.filler = cands[0];
          fam.has_filler = true;
          return fam;
        }
        --wanted;
      }
      ++skip;
    }
    ++deg;
  }
  throw budget_exceeded("oracle: no admissible filler below the depth cap");
}

// stage at which each evaluation level lives: free levels at n, the j-th
// quantifier level at n + j (witnesses may come from later stages)
std::vector<uint32_t> level_stages(const std::vector<LevelSpec>& levels, uint32_t n) {
  std::vector<uint32_t> st(levels.size(), n);
  uint32_t q = 0;
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].kind != LevelSpec::K::Free) ++q;
    st[i] = (levels[i].kind == LevelSpec::K::Free) ? n : n + q;
  }
  return st;
}

// Block shapes of the stage-n family. Multiplicity grows with the stage;
// block depth is fixed by the formula: base depth B plus one preimage step
// per quantifier level for C = infinity factors. Quantifier level j draws
// witnesses from stage n + j: blocks born later are visible only to inner
// levels, and elements of earlier stages sit inside deeper blocks as
// f-multiples.
std::vector<std::tuple<ShapeSpec, Poly, ExtNat>> staged_shapes(
    const StagedFamily& fam, const std::vector<LevelSpec>& levels, uint32_t n,
    uint32_t depth_cap, uint64_t cap) {
  const KernelConfig& cfg = fam.cfg;
  uint32_t p = cfg.field.p;
  std::vector<uint32_t> st = level_stages(levels, n);
  uint32_t top = n;
  for (uint32_t s : st) top = std::max(top, s);
  uint32_t nquant = 0;
  for (const auto& l : levels)
    if (l.kind != LevelSpec::K::Free) ++nquant;
  // per-level preimage allowance for C = infinity blocks
  std::vector<uint32_t> qidx(levels.size(), 0);
  {
    uint32_t q = 0;
    for (size_t i = 0; i < levels.size(); ++i) {
      if (levels[i].kind != LevelSpec::K::Free) ++q;
      qidx[i] = (levels[i].kind == LevelSpec::K::Free) ? 0 : q;
    }
  }

  std::vector<std::tuple<ShapeSpec, Poly, ExtNat>> out;
  auto add_blocks = [&](const Poly& f, ExtNat c, bool is_filler) {
    uint32_t dtop;
    if (is_filler)
      dtop = 1;  // the filler polynomial itself
    else if (!c.is_inf())
      dtop = std::min(c.v, fam.B);
    else
      dtop = fam.B + nquant * fam.step;
    uint32_t bdim = static_cast<uint32_t>(f.deg()) * dtop;
    if (bdim > depth_cap)
      throw budget_exceeded("oracle: block dimension " + std::to_string(bdim) +
                            " beyond the depth cap");
    // copies born at stages 1..n share one full profile (multiplicity n);
    // copies born at n+1..top are singletons invisible to earlier levels
    for (uint32_t birth = n; birth <= top; birth += 1) {
      uint64_t mult = birth == n ? n : 1;
      ShapeSpec shape;
      shape.theta = companion_matrix(is_filler ? f : poly_pow(f, dtop), cfg.field);
      shape.multiplicity = mult;
      shape.domains.resize(levels.size());
      for (size_t l = 0; l < levels.size(); ++l) {
        if (st[l] < birth) {
          shape.domains[l] = {FpVec(bdim, 0)};  // not yet born
          continue;
        }
        if (is_filler || !c.is_inf()) {
          shape.domains[l] = span_vectors(p, bdim, standard_basis(bdim), cap);
          continue;
        }
        // stage image inside the depth-dtop block: f^(remaining steps) * V
        uint32_t shift = (nquant - qidx[l]) * fam.step;
        FpMat sh = poly_apply(poly_pow(f, shift), shape.theta);
        shape.domains[l] = span_vectors(p, bdim, mat_column_space(sh), cap);
      }
      out.emplace_back(std::move(shape), f, c);
      if (birth == n && top == n) break;
    }
  };
  for (const Poly& f : fam.support) add_blocks(f, kc_classify(cfg, f), false);
  if (fam.has_filler) add_blocks(fam.filler, kc_classify(cfg, fam.filler), true);
  if (out.empty()) throw error("oracle: empty model family");
  return out;
}

struct StageOutcome {
  bool ok = false;
  bool value = false;
  std::string note;
};

template <typename RunFn>
OracleResult stabilize(const FormulaPtr& phi, const KernelConfig& cfg,
                       const OracleOptions& opt, uint32_t extra_depth, RunFn run) {
  size_t nfam = cfg.is_algebraic() ? 1 : 2;
  std::vector<std::vector<std::optional<bool>>> hist(nfam);
  OracleResult res;
  for (uint32_t n = 1; n <= opt.n_max; ++n) {
    for (size_t fc = 0; fc < nfam; ++fc) {
      StageOutcome so;
      try {
        StagedFamily fam = make_family(phi, cfg, extra_depth, fc, opt.depth_cap);
        so = run(fam, n);
      } catch (const budget_exceeded& e) {
        so.ok = false;
        so.note = e.what();
      }
      hist[fc].push_back(so.ok ? std::optional<bool>(so.value) : std::nullopt);
      if (!so.ok && res.note.empty()) res.note = so.note;
    }
    // stabilized: the last `window` stages agree across all families
    if (n >= opt.window) {
      bool all_same = true;
      std::optional<bool> v;
      for (size_t fc = 0; fc < nfam && all_same; ++fc)
        for (uint32_t k = n - opt.window; k < n; ++k) {
          const auto& h = hist[fc][k];
          if (!h.has_value()) {
            all_same = false;
            break;
          }
          if (!v.has_value()) v = *h;
          if (*v != *h) all_same = false;
        }
      if (all_same && v.has_value()) {
        res.value = *v ? Truth::True : Truth::False;
        res.stabilized_at = n - opt.window + 1;
        res.note.clear();
        return res;
      }
    }
  }
  res.value = Truth::Unknown;
  if (res.note.empty()) res.note = "no stabilization within the stage cap";
  return res;
}

}  // namespace

OracleResult fm_stabilized_truth(const FormulaPtr& phi, const KernelConfig& cfg,
                                 const OracleOptions& opt) {
  if (!cfg.field.is_fp())
    return {Truth::Unknown, 0, "oracle: prime field required"};
  if (!free_vars(phi).empty())
    return {Truth::Unknown, 0, "oracle: sentence required"};
  Prenex pre = to_prenex(phi);
  return stabilize(phi, cfg, opt, 0, [&](const StagedFamily& fam, uint32_t n) {
    StageOutcome so;
    std::vector<LevelSpec> levels;
    for (const auto& l : pre.levels)
      levels.push_back({l.var, l.exists ? LevelSpec::K::Exists : LevelSpec::K::Forall});
    ProductEngine eng(cfg.field.p, levels, 0, opt.budget);
    eng.matrix_phi = bexpr_of(pre.matrix, eng.atoms);
    eng.finalize_atoms();
    auto shapes = staged_shapes(fam, eng.levels, n, opt.depth_cap, 1u << 20);
    uint32_t id = run_shapes(eng, cfg, shapes);
    so.ok = true;
    so.value = eng.eval_quant(0, id, eng.matrix_phi);
    return so;
  });
}

OracleResult fm_stabilized_equiv(const FormulaPtr& phi, const FormulaPtr& psi,
                                 const KernelConfig& cfg, const OracleOptions& opt) {
  if (!cfg.field.is_fp())
    return {Truth::Unknown, 0, "oracle: prime field required"};
  if (!is_quantifier_free(psi))
    return {Truth::Unknown, 0, "oracle: quantifier-free comparand required"};
  Prenex pre = to_prenex(phi);
  std::set<Var> fv = free_vars(phi);
  for (const Var& v : free_vars(psi)) fv.insert(v);
  FormulaPtr both = f_and(phi, psi);  // for joint support/exponent data
  return stabilize(both, cfg, opt, static_cast<uint32_t>(fv.size()),
                   [&](const StagedFamily& fam, uint32_t n) {
    StageOutcome so;
    std::vector<LevelSpec> levels;
    for (const Var& v : fv) levels.push_back({v, LevelSpec::K::Free});
    size_t nfree = levels.size();
    for (const auto& l : pre.levels)
      levels.push_back({l.var, l.exists ? LevelSpec::K::Exists : LevelSpec::K::Forall});
    ProductEngine eng(cfg.field.p, levels, 0, opt.budget);
    eng.nfree = nfree;
    eng.matrix_phi = bexpr_of(pre.matrix, eng.atoms);
    eng.matrix_psi = bexpr_of(psi, eng.atoms);
    eng.finalize_atoms();
    auto shapes = staged_shapes(fam, eng.levels, n, opt.depth_cap, 1u << 20);
    uint32_t id = run_shapes(eng, cfg, shapes);
    if (nfree == 0) {
      bool tphi = eng.eval_quant(0, id, eng.matrix_phi);
      uint32_t leaf = eng.leftmost_leaf(0, id);
      std::vector<bool> bits(eng.atoms.atoms.size());
      for (size_t ai = 0; ai < bits.size(); ++ai)
        bits[ai] = (eng.arena.leaves[leaf].w[ai / 64] >> (ai % 64)) & 1;
      so.value = tphi == bexpr_eval(eng.matrix_psi.get(), bits);
    } else {
      so.value = eng.equiv_walk(0, id);
    }
    so.ok = true;
    return so;
  });
}

}  // namespace endoq
