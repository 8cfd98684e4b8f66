#include <functional>
#include <random>

#include "doctest.h"
#include "endoq/eval.hpp"

using namespace endoq;

namespace {
const FieldSpec F2 = FieldSpec::fp(2);
Poly p2(const std::string& s) { return parse_poly(s, F2); }
FormulaPtr parse2(const std::string& s) { return fml_parse(s, F2); }

KernelConfig cfg_mix() {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(1);
  e[p2("X+1")] = ExtNat::fin(0);
  return KernelConfig::transcendental(F2, e, KernelConfig::Default::Infinity);
}

FormulaPtr random_sentence(std::mt19937_64& rng, int nvars, int depth, int maxdeg) {
  std::vector<Var> vars;
  for (int i = 0; i < nvars; ++i) vars.push_back(Var("v" + std::to_string(i)));
  auto rand_term = [&](const std::vector<Var>& scope) {
    Term t;
    int parts = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < parts; ++i) {
      std::vector<Scalar> c;
      uint32_t d = rng() % (maxdeg + 1);
      for (uint32_t k = 0; k <= d; ++k) c.push_back(Scalar::of_residue(2, rng() % 2));
      t = t + Term::single(scope[rng() % scope.size()], Poly(F2, std::move(c)));
    }
    return t;
  };
  std::function<FormulaPtr(int, std::vector<Var>)> go = [&](int d, std::vector<Var> scope) {
    if (d == 0 || (rng() % 4 == 0 && !scope.empty())) {
      FormulaPtr a = f_atom(rand_term(scope));
      return rng() % 2 ? f_not(a) : a;
    }
    switch (rng() % 4) {
      case 0:
        return f_and(go(d - 1, scope), go(d - 1, scope));
      case 1:
        return f_or(go(d - 1, scope), go(d - 1, scope));
      default: {
        Var v = vars[rng() % vars.size()];
        std::vector<Var> inner = scope;
        inner.push_back(v);
        FormulaPtr body = go(d - 1, inner);
        return rng() % 2 ? f_exists(v, body) : f_forall(v, body);
      }
    }
  };
  Var v0 = vars[0];
  FormulaPtr body = go(depth, {v0});
  return rng() % 2 ? f_exists(v0, body) : f_forall(v0, body);
}

}  // namespace

TEST_CASE("fm_eval basics") {
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2+X+1"));
  FinModel m = fm_build(alg, {Block{p2("X^2+X+1"), 1}}, {});

  CHECK(fm_eval(parse2("E x. x != 0"), m, {}));
  CHECK(!fm_eval(parse2("A x. x = 0"), m, {}));

  KernelConfig algx = KernelConfig::from_mipo(p2("X"));
  FinModel z = fm_build(algx, {Block{p2("X"), 1}, Block{p2("X"), 1}}, {});
  CHECK(fm_eval(parse2("A x. T(x) = 0"), z, {}));

  // Def 2.4(i) sentence on a MiPo-built model
  CHECK(fm_eval(parse2("A x. T^2(x) + T(x) + x = 0"), m, {}));

  // assignments
  Assignment asg;
  asg[Var("y")] = FpVec{1, 0};
  CHECK(fm_eval(parse2("E x. T(x) = y"), m, asg));
  CHECK(fm_eval(parse2("y != 0"), m, asg));

  // a tautological universal forces the full scan
  CHECK_THROWS_AS(
      fm_eval(parse2("A x. A y. A z. T(x+y+z) - T(x) - T(y) - T(z) = 0"), z, {}, 50),
      budget_exceeded);
}

TEST_CASE("fm_eval_all") {
  KernelConfig alg = KernelConfig::from_mipo(p2("X"));
  FinModel m = fm_build(alg, {Block{p2("X"), 1}, Block{p2("X"), 1}}, {});
  auto table = fm_eval_all(parse2("y != 0"), m);
  CHECK(table.size() == 4);
  int truths = 0;
  for (const auto& [asg, v] : table) truths += v;
  CHECK(truths == 3);
}

TEST_CASE("product engine agrees with naive evaluation") {
  std::mt19937_64 rng(4040);
  KernelConfig mix = cfg_mix();
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2"));
  KernelConfig cinf = KernelConfig::c_infinity(F2);

  std::vector<FinModel> models;
  models.push_back(fm_build(mix, {Block{p2("X"), 1}, Block{p2("X^2+X+1"), 1}},
                            {p2("X"), p2("X+1")}));
  models.push_back(fm_build(alg, {Block{p2("X"), 1}, Block{p2("X"), 2}}, {}));
  models.push_back(fm_build(cinf, {Block{p2("X"), 2}, Block{p2("X+1"), 1}}, {}));
  models.push_back(
      fm_build(cinf, {Block{p2("X"), 1}, Block{p2("X"), 1}, Block{p2("X+1"), 2}}, {}));

  int done = 0;
  for (int it = 0; it < 300; ++it) {
    const FinModel& m = models[rng() % models.size()];
    FormulaPtr phi = random_sentence(rng, 3, 1 + static_cast<int>(rng() % 3), 2);
    bool naive, prod;
    try {
      naive = fm_eval(phi, m, {});
      prod = product_eval(phi, m);
    } catch (const budget_exceeded&) {
      continue;
    }
    CHECK(naive == prod);
    ++done;
  }
  CHECK(done > 200);
}

TEST_CASE("product_equiv agrees with pointwise naive comparison") {
  std::mt19937_64 rng(5050);
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2"));
  FinModel m = fm_build(alg, {Block{p2("X"), 1}, Block{p2("X"), 2}}, {});

  int done = 0;
  for (int it = 0; it < 120; ++it) {
    FormulaPtr phi =
        rng() % 2 ? parse2("E x. T(x) = y") : parse2("E x. (T(x) = y & x != 0)");
    FormulaPtr psi;
    switch (rng() % 3) {
      case 0: psi = parse2("T(y) = 0"); break;
      case 1: psi = parse2("y = 0"); break;
      default: psi = parse2("0 = 0"); break;
    }
    bool agree_naive = true;
    for (const auto& [asg, v] : fm_eval_all(phi, m)) {
      bool w = fm_eval(psi, m, asg);
      if (v != w) {
        agree_naive = false;
        break;
      }
    }
    bool agree_prod = product_equiv(phi, psi, m);
    CHECK(agree_naive == agree_prod);
    ++done;
  }
  CHECK(done == 120);
}

TEST_CASE("stabilized truth spec cases") {
  // exists x (theta x = 0 and x != 0): true when C(X) >= 1
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(1);
  KernelConfig cx1 = KernelConfig::transcendental(F2, e, KernelConfig::Default::Infinity);
  FormulaPtr phi = parse2("E x. (T(x) = 0 & x != 0)");

  OracleResult r1 = fm_stabilized_truth(phi, cx1);
  CHECK(r1.value == Truth::True);
  CHECK(r1.stabilized_at <= 2);

  // same sentence under C_0 is false for every stage
  OracleResult r2 = fm_stabilized_truth(phi, KernelConfig::c_zero(F2));
  CHECK(r2.value == Truth::False);

  OracleResult r3 = fm_stabilized_truth(parse2("E x. x != 0"), KernelConfig::c_zero(F2));
  CHECK(r3.value == Truth::True);

  // algebraic: MiPo sentence holds
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2+X+1"));
  OracleResult r4 = fm_stabilized_truth(parse2("A x. T^2(x) + T(x) + x = 0"), alg);
  CHECK(r4.value == Truth::True);

  // theta surjective in existentially closed models of C_infinity
  OracleResult r5 =
      fm_stabilized_truth(parse2("A y. E x. T(x) = y"), KernelConfig::c_infinity(F2));
  CHECK(r5.value == Truth::True);

  // but not once a kernel appears: C(X) = 1 keeps kernel vectors out of reach
  OracleResult r6 = fm_stabilized_truth(parse2("A y. E x. T(x) = y"), cx1);
  CHECK(r6.value == Truth::False);
}

TEST_CASE("stabilized equivalence") {
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2"));
  // exists x (theta x = b)  <->  theta b = 0 over MiPo = X^2
  OracleResult r = fm_stabilized_equiv(parse2("E x. T(x) = b"), parse2("T(b) = 0"), alg);
  CHECK(r.value == Truth::True);

  OracleResult r2 = fm_stabilized_equiv(parse2("E x. T(x) = b"), parse2("0 = 0"), alg);
  CHECK(r2.value == Truth::False);

  // C_infinity: theta surjective, so the condition is trivial
  OracleResult r3 = fm_stabilized_equiv(parse2("E x. T(x) = b"), parse2("0 = 0"),
                                        KernelConfig::c_infinity(F2));
  CHECK(r3.value == Truth::True);

  // C_0: rho[theta] injective: T(x) = 0 & x != 0 is unsatisfiable
  OracleResult r4 = fm_stabilized_equiv(parse2("E x. (T(x) = 0 & x != 0)"),
                                        parse2("0 != 0"), KernelConfig::c_zero(F2));
  CHECK(r4.value == Truth::True);
}
