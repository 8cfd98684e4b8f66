#include <random>

#include "doctest.h"
#include "endoq/finmodel.hpp"
#include "endoq/kernel_config.hpp"

using namespace endoq;

namespace {
const FieldSpec F2 = FieldSpec::fp(2);
Poly p2(const std::string& s) { return parse_poly(s, F2); }

KernelConstraint kc(const std::string& lhs, const std::string& rhs) {
  return KernelConstraint{{{p2(lhs)}}, {{p2(rhs)}}};
}
}  // namespace

TEST_CASE("kc_classify") {
  KernelConfig c0 = KernelConfig::c_zero(F2);
  CHECK(kc_classify(c0, p2("X")) == ExtNat::fin(0));
  KernelConfig cinf = KernelConfig::c_infinity(F2);
  CHECK(kc_classify(cinf, p2("X+1")).is_inf());
  KernelConfig alg = KernelConfig::from_mipo(p2("X^2+X+1"));
  CHECK(kc_classify(alg, p2("X")) == ExtNat::fin(0));
  CHECK(kc_classify(alg, p2("X^2+X+1")) == ExtNat::fin(1));
  CHECK_THROWS_AS(kc_classify(alg, p2("X^2+1")), error);  // reducible
}

TEST_CASE("kc_validate") {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X^2+X+1")] = ExtNat::fin(1);
  KernelConfig good{F2, e, KernelConfig::Default::Zero, ExtNat::fin(2)};
  CHECK(kc_validate(good).ok);
  CHECK(kc_validate(good).algebraic);

  std::map<Poly, ExtNat, PolyLess> e2;
  e2[p2("X")] = ExtNat::fin(1);
  KernelConfig bad{F2, e2, KernelConfig::Default::Zero, ExtNat::fin(3)};
  KcReport rep = kc_validate(bad);
  CHECK(!rep.ok);
  CHECK(rep.violations.front().find("degree equation") != std::string::npos);

  std::map<Poly, ExtNat, PolyLess> e3;
  e3[p2("X")] = ExtNat::fin(2);
  KernelConfig tr{F2, e3, KernelConfig::Default::Infinity, ExtNat::inf()};
  KcReport rep3 = kc_validate(tr);
  CHECK(rep3.ok);
  CHECK(!rep3.algebraic);
}

TEST_CASE("kc_mipo") {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(2);
  CHECK(kc_mipo(KernelConfig::algebraic(F2, e)) == p2("X^2"));

  std::map<Poly, ExtNat, PolyLess> e2;
  e2[p2("X")] = ExtNat::fin(1);
  e2[p2("X+1")] = ExtNat::fin(1);
  CHECK(kc_mipo(KernelConfig::algebraic(F2, e2)) == p2("X^2+X"));

  FieldSpec Q = FieldSpec::rationals();
  KernelConfig triv = KernelConfig::from_mipo(parse_poly("X-3", Q));
  CHECK(kc_is_trivial(triv));
  CHECK(kc_mipo(triv) == parse_poly("X-3", Q));

  CHECK_THROWS_AS(kc_mipo(KernelConfig::c_zero(F2)), error);
}

TEST_CASE("constraints_reduce spec cases") {
  // {Ker(X^2) = Ker(X^3)} -> transcendental, C(X) = 2, default inf
  ReduceResult r1 = constraints_reduce({kc("X^2", "X^3")}, F2);
  REQUIRE(!r1.inconsistent);
  CHECK(!r1.config.is_algebraic());
  CHECK(kc_classify(r1.config, p2("X")) == ExtNat::fin(2));
  CHECK(kc_classify(r1.config, p2("X+1")).is_inf());

  // {Ker(0) = Ker(X^2+X+1)} -> algebraic, MiPo = X^2+X+1
  ReduceResult r2 = constraints_reduce({kc("0", "X^2+X+1")}, F2);
  REQUIRE(!r2.inconsistent);
  CHECK(r2.config.is_algebraic());
  CHECK(kc_mipo(r2.config) == p2("X^2+X+1"));

  // {Ker(0) = Ker(1)} -> inconsistent
  ReduceResult r3 = constraints_reduce({kc("0", "1")}, F2);
  CHECK(r3.inconsistent);

  // empty -> C_infinity
  ReduceResult r4 = constraints_reduce({}, F2);
  CHECK(r4.config == KernelConfig::c_infinity(F2));
}

TEST_CASE("constraints_reduce composite cases") {
  // sum/intersection nesting: Ker(X)+Ker(X+1) = Ker(X^2+X); no info
  KernelConstraint c;
  c.lhs = {{p2("X")}, {p2("X+1")}};
  c.rhs = {{p2("X^2+X")}};
  ReduceResult r = constraints_reduce({c}, F2);
  CHECK(r.config == KernelConfig::c_infinity(F2));

  // intersection: Ker(X^2) ∩ Ker(X^3) = Ker(X^3) gives C(X) <= 2
  KernelConstraint c2;
  c2.lhs = {{p2("X^2"), p2("X^3")}};
  c2.rhs = {{p2("X^3")}};
  ReduceResult r2 = constraints_reduce({c2}, F2);
  CHECK(kc_classify(r2.config, p2("X")) == ExtNat::fin(2));

  // zero side with extra bound: MiPo shrinks to X
  ReduceResult r3 = constraints_reduce({kc("0", "X^2"), kc("X", "X^2")}, F2);
  REQUIRE(!r3.inconsistent);
  CHECK(r3.config.is_algebraic());
  CHECK(kc_mipo(r3.config) == p2("X"));

  // bound to zero + algebraic force -> inconsistent
  ReduceResult r4 = constraints_reduce({kc("0", "X"), kc("X", "1")}, F2);
  CHECK(r4.inconsistent);

  // C(f) = 0 bound stays as an entry under default infinity
  ReduceResult r5 = constraints_reduce({kc("X", "1")}, F2);
  CHECK(!r5.config.is_algebraic());
  CHECK(kc_classify(r5.config, p2("X")) == ExtNat::fin(0));
  CHECK(kc_classify(r5.config, p2("X+1")).is_inf());
}

TEST_CASE("constraints_reduce idempotence on random constraint sets") {
  std::mt19937_64 rng(31337);
  std::vector<Poly> pool = {p2("X"),       p2("X+1"),     p2("X^2"),
                            p2("X^2+X"),   p2("X^2+1"),   p2("X^2+X+1"),
                            p2("X^3+X"),   p2("X^3"),     p2("1"),
                            Poly::zero(F2)};
  int done = 0;
  for (int iter = 0; done < 120; ++iter) {
    std::vector<KernelConstraint> cs;
    std::uniform_int_distribution<int> nc(0, 3), np(0, 9), nk(1, 2), nl(1, 2);
    int n = nc(rng);
    for (int i = 0; i < n; ++i) {
      KernelConstraint c;
      for (int side = 0; side < 2; ++side) {
        std::vector<std::vector<Poly>> s;
        int ks = nk(rng);
        for (int k = 0; k < ks; ++k) {
          std::vector<Poly> inter;
          int ls = nl(rng);
          for (int l = 0; l < ls; ++l) inter.push_back(pool[np(rng)]);
          s.push_back(std::move(inter));
        }
        (side == 0 ? c.lhs : c.rhs) = std::move(s);
      }
      cs.push_back(std::move(c));
    }
    ReduceResult r = constraints_reduce(cs, F2);
    if (r.inconsistent) continue;
    ++done;
    ReduceResult again = constraints_reduce(kc_defining_constraints(r.config), F2);
    REQUIRE(!again.inconsistent);
    CHECK(again.config == r.config);
  }
}

namespace {

// literal subspace semantics of a constraint on a concrete matrix
std::vector<FpVec> subspace_sum(uint32_t p, uint32_t dim,
                                const std::vector<std::vector<FpVec>>& parts) {
  std::vector<FpVec> all;
  for (const auto& ps : parts)
    for (const auto& v : ps) all.push_back(v);
  if (all.empty()) return {};
  FpMat m = mat_from_columns(p, dim, all);
  return mat_column_space(m);
}

bool same_space(uint32_t p, uint32_t dim, std::vector<FpVec> a, std::vector<FpVec> b) {
  FpMat ma = mat_from_columns(p, dim, a);
  FpMat mb = mat_from_columns(p, dim, b);
  uint32_t ra = mat_rank(ma), rb = mat_rank(mb);
  std::vector<FpVec> both = a;
  for (auto& v : b) both.push_back(v);
  return ra == rb && mat_rank(mat_from_columns(p, dim, both)) == ra;
}

std::vector<FpVec> constraint_side_space(const std::vector<std::vector<Poly>>& side,
                                         const FpMat& theta) {
  uint32_t p = theta.p(), dim = theta.rows();
  std::vector<std::vector<FpVec>> summands;
  for (const auto& inter : side) {
    // intersection of kernels: kernel of stacked matrix
    FpMat stacked(p, dim * static_cast<uint32_t>(inter.size()), dim);
    for (size_t k = 0; k < inter.size(); ++k) {
      FpMat a = poly_apply(inter[k], theta);
      for (uint32_t i = 0; i < dim; ++i)
        for (uint32_t j = 0; j < dim; ++j)
          stacked.at(static_cast<uint32_t>(k) * dim + i, j) = a.at(i, j);
    }
    summands.push_back(mat_kernel(stacked));
  }
  return subspace_sum(p, dim, summands);
}

bool matrix_satisfies_constraints(const std::vector<KernelConstraint>& cs,
                                  const FpMat& theta) {
  for (const auto& c : cs) {
    auto l = constraint_side_space(c.lhs, theta);
    auto r = constraint_side_space(c.rhs, theta);
    if (!same_space(theta.p(), theta.rows(), l, r)) return false;
  }
  return true;
}

bool matrix_is_c_endo(const KernelConfig& cfg, const FpMat& theta) {
  FinModel m;
  m.field = cfg.field;
  m.cfg = cfg;
  m.dim = theta.rows();
  m.theta = theta;
  return fm_check(m).is_C_endo;
}

}  // namespace

TEST_CASE("reduced configuration matches the literal matrix class") {
  // property at dimension <= 5 over F_2: a matrix satisfies the constraints
  // (literal subspace semantics) iff it is a C-endomorphism of the reduction
  std::mt19937_64 rng(777);
  std::vector<std::vector<KernelConstraint>> cases = {
      {kc("X^2", "X^3")},
      {kc("0", "X^2+X+1")},
      {kc("0", "X^2")},
      {kc("X", "X^2")},
      {kc("X", "1")},
      {kc("X^2+X", "X^3+X^2")},
      {kc("X^2", "X^3"), kc("X+1", "X^2+1")},
  };
  for (const auto& cs : cases) {
    ReduceResult r = constraints_reduce(cs, F2);
    REQUIRE(!r.inconsistent);
    int checked = 0;
    for (int it = 0; it < 400; ++it) {
      uint32_t dim = 2 + static_cast<uint32_t>(rng() % 4);
      FpMat theta(2, dim, dim);
      for (uint32_t i = 0; i < dim; ++i)
        for (uint32_t j = 0; j < dim; ++j) theta.at(i, j) = rng() % 2;
      bool lhs = matrix_satisfies_constraints(cs, theta);
      bool rhs = matrix_is_c_endo(r.config, theta);
      CHECK(lhs == rhs);
      ++checked;
    }
    CHECK(checked == 400);
  }
}

TEST_CASE("kernel config json round trip") {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X^2+X+1")] = ExtNat::fin(1);
  KernelConfig cfg = KernelConfig::algebraic(F2, e);
  CHECK(kc_from_json(kc_to_json(cfg)) == cfg);

  std::map<Poly, ExtNat, PolyLess> e2;
  e2[p2("X")] = ExtNat::fin(1);
  KernelConfig mix = KernelConfig::transcendental(F2, e2, KernelConfig::Default::Infinity);
  CHECK(kc_from_json(kc_to_json(mix)) == mix);
  CHECK(kc_from_json(kc_to_json(KernelConfig::c_zero(F2))) == KernelConfig::c_zero(F2));

  auto cs = std::vector<KernelConstraint>{kc("X^2", "X^3")};
  auto cs2 = constraints_from_json(constraints_to_json(cs), F2);
  REQUIRE(cs2.size() == 1);
  CHECK(cs2[0].lhs[0][0] == p2("X^2"));
}
