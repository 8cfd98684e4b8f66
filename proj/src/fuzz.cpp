#include "endoq/fuzz.hpp"

#include <future>
#include <thread>

namespace endoq {

namespace {

// coefficient pool: polynomials whose irreducible factors keep the oracle's
// block dimensions small for this configuration
std::vector<Poly> coefficient_pool(const KernelConfig& cfg) {
  const FieldSpec& fs = cfg.field;
  std::vector<std::string> base = {"1", "X", "X+1", "X^2", "X^2+X"};
  bool heavy_inf = false;  // some degree-2 irreducible has C = infinity
  Poly quad = parse_poly("X^2+X+1", fs);
  if (kc_classify(cfg, quad).is_inf()) heavy_inf = true;
  if (!heavy_inf) base.push_back("X^2+X+1");
  if (fs.p == 2 && !heavy_inf) base.push_back("X^2+1");  // (X+1)^2 over F_2
  if (fs.p == 2 && heavy_inf) base.push_back("X^2+1");
  std::vector<Poly> out;
  for (const auto& s : base) out.push_back(parse_poly(s, fs));
  return out;
}

struct ShapeBudget {
  int max_vars = 4;
  int max_depth = 3;
  int max_literals = 6;
};

}  // namespace

FormulaPtr random_fuzz_formula(std::mt19937_64& rng, const KernelConfig& cfg) {
  const FieldSpec& fs = cfg.field;
  std::vector<Poly> pool = coefficient_pool(cfg);
  ShapeBudget budget;

  // weighted quantifier depth; deeper shapes keep fewer variables so the
  // staged oracle family stays within its work budget
  uint32_t roll = rng() % 100;
  int depth = roll < 15 ? 0 : roll < 55 ? 1 : roll < 90 ? 2 : 3;
  int nvars = 1 + static_cast<int>(rng() % static_cast<uint32_t>(budget.max_vars));
  if (depth == 3) nvars = std::min(nvars, 3);
  if (depth >= 2) nvars = std::min(nvars, 3 + (rng() % 2 == 0 ? 0 : 1));
  nvars = std::max(nvars, depth > 0 ? 1 : 1);
  int literals_left = 1 + static_cast<int>(rng() % static_cast<uint32_t>(budget.max_literals));

  std::vector<Var> vars;
  for (int i = 0; i < nvars; ++i) vars.push_back(Var("w" + std::to_string(i + 1)));

  auto rand_term = [&](const std::vector<Var>& scope) {
    Term t;
    int parts = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < parts; ++i) {
      const Poly& c = pool[rng() % pool.size()];
      t = t + Term::single(scope[rng() % scope.size()], c);
    }
    return t;
  };

  std::function<FormulaPtr(int, std::vector<Var>)> go =
      [&](int d, std::vector<Var> scope) -> FormulaPtr {
    if (d == 0 || literals_left <= 1 || rng() % 4 == 0) {
      --literals_left;
      FormulaPtr a = f_atom(rand_term(scope));
      // disequation heavy: rule (c) is the risky elimination step
      return rng() % 3 != 0 ? f_not(a) : a;
    }
    switch (rng() % 5) {
      case 0:
        return f_and(go(d - 1, scope), go(d - 1, scope));
      case 1:
        return f_or(go(d - 1, scope), go(d - 1, scope));
      case 2:
        return f_and(go(d - 1, scope), go(d - 1, scope));
      default: {
        Var v = vars[rng() % vars.size()];
        std::vector<Var> inner = scope;
        inner.push_back(v);
        FormulaPtr body = go(d - 1, inner);
        return rng() % 2 ? f_exists(v, body) : f_forall(v, body);
      }
    }
  };

  // at least one variable in scope for the leaves: outermost variables act
  // as free parameters
  std::vector<Var> scope;
  int nfree = 1 + static_cast<int>(rng() % 2);
  for (int i = 0; i < nfree && i < nvars; ++i) scope.push_back(vars[i]);
  FormulaPtr f = go(depth, scope);
  (void)fs;
  return f;
}

FuzzReport fuzz_campaign(const KernelConfig& cfg, const FuzzOptions& opt) {
  FuzzReport rep;
  rep.total = opt.count;

  // pre-generate the corpus deterministically from the seed
  std::mt19937_64 rng(opt.seed);
  std::vector<FormulaPtr> corpus;
  for (uint32_t i = 0; i < opt.count; ++i) corpus.push_back(random_fuzz_formula(rng, cfg));

  uint32_t nthreads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<uint32_t>(nthreads, 16);

  struct Slot {
    int verdict = 0;  // 1 agree, 0 unknown, -1 disagree
    std::string note;
  };
  std::vector<Slot> slots(corpus.size());

  auto worker = [&](uint32_t begin, uint32_t end) {
    for (uint32_t i = begin; i < end; ++i) {
      const FormulaPtr& phi = corpus[i];
      try {
        QfResult qf = qe_full(phi, cfg);
        OracleResult chk = fm_stabilized_equiv(phi, qf.formula, cfg, opt.oracle);
        if (chk.value == Truth::True) {
          slots[i].verdict = 1;
        } else if (chk.value == Truth::Unknown) {
          slots[i].verdict = 0;
          slots[i].note = fml_print(phi) + "  [" + chk.note + "]";
        } else {
          slots[i].verdict = -1;
          slots[i].note = fml_print(phi) + "  !=  " + fml_print(qf.formula);
        }
      } catch (const budget_exceeded& e) {
        slots[i].verdict = 0;
        slots[i].note = fml_print(phi) + "  [" + e.what() + "]";
      }
    }
  };

  if (nthreads <= 1 || corpus.size() < 8) {
    worker(0, static_cast<uint32_t>(corpus.size()));
  } else {
    std::vector<std::future<void>> futs;
    uint32_t chunk = static_cast<uint32_t>((corpus.size() + nthreads - 1) / nthreads);
    for (uint32_t t = 0; t < nthreads; ++t) {
      uint32_t b = t * chunk;
      uint32_t e = std::min<uint32_t>(b + chunk, static_cast<uint32_t>(corpus.size()));
      if (b >= e) break;
      futs.push_back(std::async(std::launch::async, worker, b, e));
    }
    for (auto& f : futs) f.get();
  }

  for (const Slot& s : slots) {
    if (s.verdict == 1)
      ++rep.agreed;
    else if (s.verdict == 0) {
      ++rep.unknown;
      rep.unknowns.push_back(s.note);
    } else {
      ++rep.disagreed;
      rep.disagreements.push_back(s.note);
    }
  }
  return rep;
}

}  // namespace endoq
