#include <algorithm>
#include <random>

#include "doctest.h"
#include "endoq/seqsys.hpp"

using namespace endoq;

namespace {
const FieldSpec F2 = FieldSpec::fp(2);
Poly p2(const std::string& s) { return parse_poly(s, F2); }

KernelConfig cfg_cinf() { return KernelConfig::c_infinity(F2); }
KernelConfig cfg_x2() {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(2);
  return KernelConfig::transcendental(F2, e, KernelConfig::Default::Infinity);
}
KernelConfig cfg_mix() {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(1);
  e[p2("X+1")] = ExtNat::fin(0);
  return KernelConfig::transcendental(F2, e, KernelConfig::Default::Infinity);
}

SeqSystem sys(const KernelConfig& cfg, std::vector<Var> li, std::vector<SeqRow> rows) {
  SeqSystem s;
  s.cfg = cfg;
  s.li_vars = std::move(li);
  s.rows = std::move(rows);
  ss_validate(s);
  return s;
}

}  // namespace

TEST_CASE("rank and degree") {
  KernelConfig cinf = cfg_cinf();
  SeqSystem s1 = sys(cinf, {}, {SeqRow{Var("x1"), p2("X^2+X+1"), 1, Var("y1")}});
  CHECK(ss_rank_degree(s1) == RankDegree{0, 2});

  SeqSystem s2 = sys(cinf, {Var("x1"), Var("x2")}, {});
  CHECK(ss_rank_degree(s2) == RankDegree{2, 0});

  SeqSystem s3 = sys(cinf, {Var("x1")},
                     {SeqRow{Var("z1"), p2("X"), 2, Var("y1")},
                      SeqRow{Var("z2"), p2("X+1"), 1, Var("y2")}});
  CHECK(ss_rank_degree(s3) == RankDegree{1, 3});

  CHECK(RankDegree{0, 5} < RankDegree{1, 0});  // lexicographic
  CHECK(RankDegree{1, 2} < RankDegree{1, 3});
}

TEST_CASE("validation") {
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2"));
  CHECK_THROWS_AS(sys(alg, {Var("x")}, {}), error);  // li under algebraic C
  CHECK_THROWS_AS(sys(cfg_x2(), {}, {SeqRow{Var("z"), p2("X"), 3, Var("y")}}), error);
  CHECK_THROWS_AS(sys(cfg_mix(), {}, {SeqRow{Var("z"), p2("X+1"), 1, Var("y")}}), error);
  CHECK_NOTHROW(sys(alg, {}, {SeqRow{Var("z"), p2("X"), 2, Var("y")}}));
}

TEST_CASE("compatibility") {
  KernelConfig c2 = cfg_x2();
  SeqSystem s = sys(c2, {}, {SeqRow{Var("z"), p2("X"), 1, Var("y")}});
  FinModel m = fm_build(c2, {Block{p2("X"), 2}, Block{p2("X"), 2}}, {p2("X")});

  // zero is compatible with any system
  Assignment zero;
  zero[Var("y")] = FpVec(m.dim, 0);
  CHECK(ss_compatible(s, zero, m));

  // q = 1, C = 2: y must lie in Ker(X): a vector outside fails
  Assignment bad;
  bad[Var("y")] = FpVec{1, 0, 0, 0};
  FpVec img = poly_apply(p2("X"), m.theta).mul(bad[Var("y")]);
  bool in_ker = std::all_of(img.begin(), img.end(), [](uint32_t v) { return v == 0; });
  CHECK(!in_ker);
  CHECK(!ss_compatible(s, bad, m));

  // C(f) = infinity rows impose no condition
  KernelConfig cinf = cfg_cinf();
  SeqSystem sinf = sys(cinf, {}, {SeqRow{Var("z"), p2("X"), 1, Var("y")}});
  FinModel minf = fm_build(cinf, {Block{p2("X"), 2}}, {});
  Assignment any;
  any[Var("y")] = FpVec{1, 1};
  CHECK(ss_compatible(sinf, any, minf));
}

TEST_CASE("bounded check and euclid substitution") {
  KernelConfig cinf = cfg_cinf();
  SeqSystem s = sys(cinf, {}, {SeqRow{Var("x"), p2("X^2+X+1"), 1, Var("y")}});

  CHECK(!ss_bounded_check(fml_parse("x^2 = 0", F2), s));  // i = 2 >= deg 2
  CHECK(ss_bounded_check(fml_parse("x^0 + x^1 = 0", F2), s));
  CHECK(ss_bounded_check(fml_parse("w^5 = 0", F2), s));  // no ld placeholder

  // theta^2(x) -> y + theta(x) + x over F_2
  FormulaPtr sub = ss_euclid_substitute(fml_parse("T^2(x) = 0", F2), s);
  CHECK(f_equal(sub, fml_parse("y + T(x) + x = 0", F2)));
  CHECK(ss_bounded_check(placeholder_abstract(sub), s));

  // already bounded terms stay put
  FormulaPtr same = ss_euclid_substitute(fml_parse("T(x) = 0", F2), s);
  CHECK(f_equal(same, fml_parse("T(x) = 0", F2)));

  // row (X, 1): theta^3(x) becomes theta^2(y)
  SeqSystem sx = sys(cinf, {}, {SeqRow{Var("x"), p2("X"), 1, Var("y")}});
  FormulaPtr cube = ss_euclid_substitute(fml_parse("T^3(x) = 0", F2), sx);
  CHECK(f_equal(cube, fml_parse("T^2(y) = 0", F2)));
}

TEST_CASE("transform: empty equation list") {
  KernelConfig cinf = cfg_cinf();
  SeqSystem s = sys(cinf, {Var("x")}, {SeqRow{Var("z"), p2("X"), 1, Var("y")}});
  TransformResult r = ss_transform(s, {});
  CHECK(r.before == r.after);
  CHECK(!r.strict);
  CHECK(r.s2.rows.size() == 1);
  CHECK(r.s2.li_vars.size() == 1);
  CHECK(r.conditions.empty());

  FinModel m = fm_build(cinf, {Block{p2("X"), 2}, Block{p2("X+1"), 1}}, {});
  CHECK(ss_witness_verify(s, {}, r, m));
}

TEST_CASE("transform: li variable constrained, rank drops") {
  // S with one li var x; E = { theta(x) = 0 }; C_infinity
  KernelConfig cinf = cfg_cinf();
  SeqSystem s = sys(cinf, {Var("x")}, {});
  TransformEq eq;
  eq.lhs.emplace(Var("x"), p2("X"));
  TransformResult r = ss_transform(s, {eq});
  CHECK(r.before == RankDegree{1, 0});
  CHECK(r.after == RankDegree{0, 1});
  CHECK(r.strict);
  REQUIRE(r.s2.rows.size() == 1);
  CHECK(r.s2.rows[0].f == p2("X"));
  CHECK(r.s2.rows[0].q == 1);
  CHECK(r.mu.at(r.s2.rows[0].param).is_zero());

  for (int i = 0; i < 4; ++i) {
    std::vector<Block> blocks;
    blocks.push_back(Block{p2("X"), static_cast<uint32_t>(1 + i % 3)});
    if (i % 2) blocks.push_back(Block{p2("X+1"), 1});
    FinModel m = fm_build(cinf, blocks, {});
    CHECK(ss_witness_verify(s, {eq}, r, m));
  }
}

TEST_CASE("transform: row degree drops") {
  // S = row (X, 2) with param y; E = { X(z) = 0 }
  KernelConfig c2 = cfg_x2();
  SeqSystem s = sys(c2, {}, {SeqRow{Var("z"), p2("X"), 2, Var("y")}});
  TransformEq eq;
  eq.lhs.emplace(Var("z"), p2("X"));
  TransformResult r = ss_transform(s, {eq});
  CHECK(r.before == RankDegree{0, 2});
  CHECK(r.after == RankDegree{0, 1});
  CHECK(r.strict);
  REQUIRE(r.s2.rows.size() == 1);
  CHECK(r.s2.rows[0].q == 1);

  FinModel m = fm_build(c2, {Block{p2("X"), 2}, Block{p2("X"), 1}, Block{p2("X+1"), 1}},
                        {p2("X")});
  CHECK(ss_witness_verify(s, {eq}, r, m));
}

TEST_CASE("transform: corrupted witness fails verification") {
  KernelConfig cinf = cfg_cinf();
  SeqSystem s = sys(cinf, {Var("x")}, {});
  TransformEq eq;
  eq.lhs.emplace(Var("x"), p2("X"));
  TransformResult r = ss_transform(s, {eq});
  FinModel m = fm_build(cinf, {Block{p2("X"), 2}}, {});
  REQUIRE(ss_witness_verify(s, {eq}, r, m));
  TransformResult bad = r;
  for (auto& [v, e] : bad.witness.tau.entries) {
    e.vars.clear();
    e.param = ParamTerm{};
  }
  CHECK(!ss_witness_verify(s, {eq}, bad, m));
}

TEST_CASE("transform: parameterized equation over an algebraic configuration") {
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2"));
  SeqSystem s = sys(alg, {}, {SeqRow{Var("z"), p2("X"), 2, Var("y")}});
  TransformEq eq;  // X(z) = y2
  eq.lhs.emplace(Var("z"), p2("X"));
  eq.rhs = pt_single(Var("y2"), rc_one(alg));
  TransformResult r = ss_transform(s, {eq});
  CHECK(r.after < r.before);
  FinModel m = fm_build(alg, {Block{p2("X"), 2}, Block{p2("X"), 1}}, {});
  CHECK(ss_witness_verify(s, {eq}, r, m));
}

TEST_CASE("textual and json round trips") {
  KernelConfig cinf = cfg_cinf();
  SeqSystem s = ss_parse("S: (X^2+X+1)^1 [x1] = y1; li: x2, x3", cinf);
  CHECK(s.rows.size() == 1);
  CHECK(s.rows[0].f == p2("X^2+X+1"));
  CHECK(s.li_vars.size() == 2);
  SeqSystem back = ss_parse(s.str(), cinf);
  CHECK(back.rows.size() == s.rows.size());
  CHECK(back.li_vars == s.li_vars);

  SeqSystem j = ss_from_json(ss_to_json(s), cinf);
  CHECK(j.rows.size() == 1);
  CHECK(j.li_vars.size() == 2);
}

namespace {

struct RandomCase {
  SeqSystem s;
  std::vector<TransformEq> eqs;
};

RandomCase random_case(std::mt19937_64& rng) {
  std::vector<KernelConfig> cfgs = {cfg_cinf(), cfg_x2(), cfg_mix(),
                                    KernelConfig::from_mipo(p2("X^2")),
                                    KernelConfig::from_mipo(p2("X^2+X+1"))};
  KernelConfig cfg = cfgs[rng() % cfgs.size()];
  RandomCase rc;
  rc.s.cfg = cfg;
  int vc = 0;
  if (!cfg.is_algebraic()) {
    int nli = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < nli; ++i) rc.s.li_vars.push_back(Var("x" + std::to_string(++vc)));
  }
  std::vector<std::pair<Poly, uint32_t>> pool;
  auto add_pool = [&](const Poly& f) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf()) {
      pool.emplace_back(f, 1);
      pool.emplace_back(f, 2);
    } else if (c.v > 0) {
      for (uint32_t q = 1; q <= c.v; ++q) pool.emplace_back(f, q);
    }
  };
  add_pool(p2("X"));
  add_pool(p2("X+1"));
  add_pool(p2("X^2+X+1"));
  int nrows = static_cast<int>(rng() % 3);
  if (rc.s.li_vars.empty() && nrows == 0) nrows = 1;
  int pc = 0;
  for (int i = 0; i < nrows; ++i) {
    auto [f, q] = pool[rng() % pool.size()];
    rc.s.rows.push_back(
        SeqRow{Var("x" + std::to_string(++vc)), f, q, Var("y" + std::to_string(++pc))});
  }
  ss_validate(rc.s);

  auto rand_poly_bounded = [&](int maxdeg) {
    std::vector<Scalar> c;
    int d = static_cast<int>(rng() % (maxdeg + 1));
    for (int k = 0; k <= d; ++k) c.push_back(Scalar::of_residue(2, rng() % 2));
    return Poly(F2, std::move(c));
  };

  int neq = 1 + static_cast<int>(rng() % 2);
  for (int e = 0; e < neq; ++e) {
    TransformEq eq;
    std::vector<Var> chosen;
    for (const Var& v : rc.s.li_vars)
      if (rng() % 2) chosen.push_back(v);
    std::vector<const SeqRow*> chosen_rows;
    for (const SeqRow& row : rc.s.rows)
      if (rng() % 2) chosen_rows.push_back(&row);
    for (const Var& v : chosen) {
      Poly c = rand_poly_bounded(2);
      if (!c.is_zero()) eq.lhs.emplace(v, c);
    }
    for (const SeqRow* row : chosen_rows) {
      ExtNat c = kc_classify(rc.s.cfg, row->f);
      int bound = row->f.deg() * static_cast<int>(row->q) - 1;
      Poly cf = rand_poly_bounded(std::max(0, bound));
      if (cf.is_zero()) continue;
      bool alone = eq.lhs.empty() && chosen_rows.size() == 1;
      if (c.is_inf() && !alone) {
        uint32_t v = poly_valuation(cf, row->f).value();
        if (v > 0) continue;  // keep only unit coefficients when entangled
      }
      eq.lhs.emplace(row->var, cf);
    }
    if (rng() % 2 && !rc.s.rows.empty()) {
      const SeqRow& row = rc.s.rows[rng() % rc.s.rows.size()];
      eq.rhs = pt_single(row.param, rc_rho(rc.s.cfg, rand_poly_bounded(1)));
    }
    rc.eqs.push_back(std::move(eq));
  }
  return rc;
}

FinModel random_model(std::mt19937_64& rng, const KernelConfig& cfg) {
  std::vector<Block> blocks;
  std::vector<Poly> support;
  if (cfg.is_algebraic()) {
    for (const auto& [f, v] : cfg.entries)
      for (uint32_t q = 1; q <= v.v; ++q)
        if (rng() % 2 || blocks.empty()) blocks.push_back(Block{f, q});
    if (blocks.empty()) blocks.push_back(Block{cfg.entries.begin()->first, 1});
  } else {
    for (const auto& f : {p2("X"), p2("X+1")}) {
      ExtNat c = kc_classify(cfg, f);
      if (c.is_inf()) {
        if (rng() % 2) blocks.push_back(Block{f, 1 + static_cast<uint32_t>(rng() % 2)});
      } else if (c.v > 0) {
        support.push_back(f);
        blocks.push_back(Block{f, 1 + static_cast<uint32_t>(rng() % c.v)});
      } else {
        support.push_back(f);
      }
    }
    blocks.push_back(Block{p2("X^2+X+1"), 1});  // keeps an image part around
  }
  return fm_build(cfg, blocks, support);
}

}  // namespace

TEST_CASE("transform on random systems: lex decrease and verified witnesses") {
  std::mt19937_64 rng(60606);
  int done = 0, nontrivial_strict = 0;
  for (int it = 0; it < 120; ++it) {
    RandomCase rc = random_case(rng);
    TransformResult r;
    try {
      r = ss_transform(rc.s, rc.eqs);
    } catch (const unsupported_transform&) {
      continue;  // outside the documented class; kept rare by the generator
    }
    CHECK(r.after <= r.before);
    if (r.strict) ++nontrivial_strict;
    for (int k = 0; k < 2; ++k) {
      FinModel m = random_model(rng, rc.s.cfg);
      size_t nv = rc.s.all_vars().size();
      size_t nv2 = r.s2.all_vars().size();
      size_t np = 0;
      {
        std::set<Var> ps;
        for (const SeqRow& row : rc.s.rows) ps.insert(row.param);
        for (const TransformEq& eq : rc.eqs)
          for (const auto& [y, c] : eq.rhs.coeffs) ps.insert(y);
        np = ps.size();
      }
      long double total = 1;
      for (size_t i = 0; i < (np + std::max(nv, nv2)) * m.dim; ++i) total *= 2;
      if (total > 300000.0L) continue;  // keep the scan exhaustive but fast
      CHECK(ss_witness_verify(rc.s, rc.eqs, r, m));
    }
    ++done;
  }
  CHECK(done >= 100);
  CHECK(nontrivial_strict > 20);
}
