#include <random>

#include "doctest.h"
#include "endoq/rc.hpp"

using namespace endoq;

namespace {
const FieldSpec F2 = FieldSpec::fp(2);
Poly p2(const std::string& s) { return parse_poly(s, F2); }

KernelConfig cfg_mipo(const std::string& m) { return KernelConfig::from_mipo(p2(m)); }

KernelConfig cfg_mix() {
  std::map<Poly, ExtNat, PolyLess> e;
  e[p2("X")] = ExtNat::fin(1);
  e[p2("X+1")] = ExtNat::fin(0);
  return KernelConfig::transcendental(F2, e, KernelConfig::Default::Infinity);
}

// random element built from the generators by ring operations
RcElem random_rc(std::mt19937_64& rng, const KernelConfig& cfg,
                 const std::vector<Poly>& proj_pool,
                 const std::vector<Poly>& inv_pool, int depth = 3) {
  auto poly_rand = [&]() {
    std::vector<Scalar> c;
    uint32_t d = rng() % 3;
    for (uint32_t i = 0; i <= d; ++i) c.push_back(Scalar::of_residue(F2.p, rng() % 2));
    return Poly(F2, std::move(c));
  };
  if (depth == 0 || rng() % 3 == 0) {
    switch (rng() % 4) {
      case 0:
        return rc_rho(cfg, poly_rand());
      case 1:
        if (!proj_pool.empty()) return rc_projim(cfg, {proj_pool[rng() % proj_pool.size()]});
        return rc_rho(cfg, poly_rand());
      case 2:
        if (!proj_pool.empty()) return rc_projker(cfg, {proj_pool[rng() % proj_pool.size()]});
        return rc_rho(cfg, poly_rand());
      default:
        if (!inv_pool.empty()) return rc_inv(cfg, inv_pool[rng() % inv_pool.size()]);
        return rc_one(cfg);
    }
  }
  RcElem a = random_rc(rng, cfg, proj_pool, inv_pool, depth - 1);
  RcElem b = random_rc(rng, cfg, proj_pool, inv_pool, depth - 1);
  return rng() % 2 ? rc_add(a, b) : rc_mul(a, b);
}

struct ConfigFixture {
  KernelConfig cfg;
  std::vector<Poly> proj_pool, inv_pool;
};

std::vector<ConfigFixture> fixtures() {
  std::vector<ConfigFixture> out;
  out.push_back({KernelConfig::c_zero(F2), {}, {p2("X"), p2("X+1"), p2("X^2+X")}});
  out.push_back({KernelConfig::c_infinity(F2), {}, {}});
  out.push_back({cfg_mipo("X^2+X+1"), {p2("X^2+X+1")}, {p2("X"), p2("X^2+X+1")}});
  out.push_back({cfg_mipo("X^2"), {p2("X")}, {p2("X"), p2("X+1")}});
  out.push_back({cfg_mix(), {p2("X")}, {p2("X"), p2("X+1"), p2("X^2+X")}});
  return out;
}

}  // namespace

TEST_CASE("generators normalize per the ring laws") {
  // Rho(X^2) reduces mod MiPo
  KernelConfig alg = cfg_mipo("X^2+X+1");
  CHECK(rc_rho(alg, p2("X^2")) == rc_rho(alg, p2("X+1")));

  // C_0: Inv(X) * Rho(X) = Id
  KernelConfig c0 = KernelConfig::c_zero(F2);
  CHECK(rc_mul(rc_inv(c0, p2("X")), rc_rho(c0, p2("X"))) == rc_one(c0));

  // C_mix: Rho(X) * Inv(X) = ProjIm({X})
  KernelConfig mix = cfg_mix();
  CHECK(rc_mul(rc_rho(mix, p2("X")), rc_inv(mix, p2("X"))) == rc_projim(mix, {p2("X")}));

  // errors
  KernelConfig cinf = KernelConfig::c_infinity(F2);
  CHECK_THROWS_AS(rc_inv(cinf, p2("X")), error);
  CHECK_THROWS_AS(rc_projim(mix, {p2("X+1")}), error);  // C = 0 factor
}

TEST_CASE("rc arithmetic spec cases") {
  KernelConfig alg = cfg_mipo("X^2+X+1");
  RcElem theta = rc_rho(alg, p2("X"));
  CHECK(rc_add(theta, rc_zero(alg)) == theta);
  CHECK(rc_mul(theta, theta) == rc_rho(alg, p2("X+1")));

  KernelConfig mix = cfg_mix();
  RcElem rx = rc_rho(mix, p2("X"));
  CHECK(rc_mul(rx, rc_projim(mix, {p2("X")})) == rx);  // F^C | rho collapses the projector
}

TEST_CASE("rc_eq spec cases") {
  KernelConfig mix = cfg_mix();
  CHECK(rc_add(rc_projim(mix, {p2("X")}), rc_projker(mix, {p2("X")})) == rc_one(mix));

  KernelConfig c0 = KernelConfig::c_zero(F2);
  CHECK(rc_mul(rc_rho(c0, p2("X")), rc_inv(c0, p2("X"))) == rc_one(c0));

  // C(X) = 1: Rho(X) * Inv(X) is the image projector, not the identity
  CHECK(rc_mul(rc_rho(mix, p2("X")), rc_inv(mix, p2("X"))) != rc_one(mix));
}

TEST_CASE("units and field test") {
  CHECK(rc_is_field(KernelConfig::c_zero(F2)));
  CHECK(!rc_is_field(KernelConfig::c_infinity(F2)));
  CHECK(!rc_is_field(cfg_mipo("X^2")));
  CHECK(rc_is_field(cfg_mipo("X^2+X+1")));
  CHECK(!rc_is_field(cfg_mix()));

  KernelConfig alg = cfg_mipo("X^2+X+1");
  RcElem theta = rc_rho(alg, p2("X"));
  CHECK(rc_is_unit(theta));
  CHECK(rc_mul(theta, rc_inverse(theta)) == rc_one(alg));

  KernelConfig m2 = cfg_mipo("X^2");
  CHECK(!rc_is_unit(rc_rho(m2, p2("X"))));

  KernelConfig mix = cfg_mix();
  CHECK(!rc_is_unit(rc_rho(mix, p2("X"))));      // kernel at X
  CHECK(rc_is_unit(rc_rho(mix, p2("X+1"))));     // C(X+1) = 0
  CHECK(!rc_is_unit(rc_rho(mix, p2("X^2+X+1"))));  // C = infinity factor
  RcElem u = rc_add(rc_projim(mix, {p2("X")}), rc_projker(mix, {p2("X")}));
  CHECK(rc_is_unit(u));
}

TEST_CASE("unit implies explicit inverse on random elements") {
  std::mt19937_64 rng(505);
  for (const auto& fx : fixtures()) {
    for (int i = 0; i < 120; ++i) {
      RcElem a = random_rc(rng, fx.cfg, fx.proj_pool, fx.inv_pool);
      if (!rc_is_unit(a)) continue;
      RcElem inv = rc_inverse(a);
      CHECK(rc_mul(a, inv) == rc_one(fx.cfg));
      CHECK(rc_mul(inv, a) == rc_one(fx.cfg));
    }
  }
}

TEST_CASE("ring axioms on random triples") {
  std::mt19937_64 rng(606);
  for (const auto& fx : fixtures()) {
    for (int i = 0; i < 80; ++i) {
      RcElem a = random_rc(rng, fx.cfg, fx.proj_pool, fx.inv_pool);
      RcElem b = random_rc(rng, fx.cfg, fx.proj_pool, fx.inv_pool);
      RcElem c = random_rc(rng, fx.cfg, fx.proj_pool, fx.inv_pool);
      CHECK(rc_add(a, b) == rc_add(b, a));
      CHECK(rc_mul(a, b) == rc_mul(b, a));
      CHECK(rc_add(rc_add(a, b), c) == rc_add(a, rc_add(b, c)));
      CHECK(rc_mul(rc_mul(a, b), c) == rc_mul(a, rc_mul(b, c)));
      CHECK(rc_mul(a, rc_add(b, c)) == rc_add(rc_mul(a, b), rc_mul(a, c)));
      CHECK(rc_mul(a, rc_one(fx.cfg)) == a);
      CHECK(rc_add(a, rc_neg(a)) == rc_zero(fx.cfg));
    }
  }
}

TEST_CASE("kernel descriptors") {
  KernelConfig mix = cfg_mix();
  KernelDescriptor did = rc_kernel_descriptor(rc_one(mix));
  CHECK(did.injective_on_ec);
  CHECK(!did.kernel_infinite_on_ec);

  KernelConfig m2 = cfg_mipo("X^2");
  KernelDescriptor dth = rc_kernel_descriptor(rc_rho(m2, p2("X")));
  CHECK(dth.local_exponents.at(p2("X")) == 1);
  CHECK(dth.kernel_infinite_on_ec);

  KernelConfig cinf = KernelConfig::c_infinity(F2);
  KernelDescriptor dx = rc_kernel_descriptor(rc_rho(cinf, p2("X")));
  CHECK(dx.infinite_type.count(p2("X")) == 1);
  CHECK(dx.kernel_infinite_on_ec);

  KernelDescriptor dz = rc_kernel_descriptor(rc_zero(cinf));
  CHECK(dz.generic_zero);
  CHECK(dz.kernel_infinite_on_ec);
}

TEST_CASE("rc_div_exact") {
  KernelConfig mix = cfg_mix();
  RcElem a = rc_rho(mix, p2("X"));
  RcElem c = rc_rho(mix, p2("X^2+X"));
  RcElem q = rc_div_exact(c, a);
  CHECK(rc_mul(q, a) == c);
  CHECK_THROWS_AS(rc_div_exact(rc_one(mix), a), error);

  KernelConfig alg = cfg_mipo("X^2");
  CHECK_THROWS_AS(rc_div_exact(rc_one(alg), rc_rho(alg, p2("X"))), error);
  RcElem q2 = rc_div_exact(rc_rho(alg, p2("X")), rc_rho(alg, p2("X")));
  CHECK(rc_mul(q2, rc_rho(alg, p2("X"))) == rc_rho(alg, p2("X")));
}

TEST_CASE("evaluation on finite models") {
  KernelConfig mix = cfg_mix();
  FinModel m = fm_build(mix, {Block{p2("X"), 1}, Block{p2("X^2+X+1"), 1}, Block{p2("X^2+X+1"), 2}},
                        {p2("X"), p2("X+1")});
  CHECK(rc_eval_matrix(rc_one(mix), m) == FpMat::identity(2, m.dim));

  // projector: image Im(X^C), idempotent, complementary
  FpMat pim = rc_eval_matrix(rc_projim(mix, {p2("X")}), m);
  CHECK(pim * pim == pim);
  FpMat pker = rc_eval_matrix(rc_projker(mix, {p2("X")}), m);
  CHECK(pim + pker == FpMat::identity(2, m.dim));
  Decomposition d = fm_decompose(m, {p2("X")});
  CHECK(pim == d.proj_im);

  // Inv(eta)*Rho(eta) = ProjIm(Fac(eta) in 0<C<inf)
  RcElem comp = rc_mul(rc_inv(mix, p2("X^2+X")), rc_rho(mix, p2("X^2+X")));
  CHECK(rc_eval_matrix(comp, m) == pim);
  CHECK(comp == rc_projim(mix, {p2("X")}));
}

TEST_CASE("evaluation is a ring homomorphism") {
  std::mt19937_64 rng(707);
  KernelConfig mix = cfg_mix();
  FinModel m = fm_build(mix, {Block{p2("X"), 1}, Block{p2("X"), 1}, Block{p2("X^2+X+1"), 1}},
                        {p2("X"), p2("X+1")});
  KernelConfig alg = cfg_mipo("X^2");
  FinModel malg = fm_build(alg, {Block{p2("X"), 1}, Block{p2("X"), 2}}, {});
  std::vector<ConfigFixture> fxs = {{mix, {p2("X")}, {p2("X"), p2("X+1")}},
                                    {alg, {p2("X")}, {p2("X"), p2("X+1")}}};
  std::vector<FinModel> models = {m, malg};
  for (size_t k = 0; k < fxs.size(); ++k) {
    for (int i = 0; i < 60; ++i) {
      RcElem a = random_rc(rng, fxs[k].cfg, fxs[k].proj_pool, fxs[k].inv_pool);
      RcElem b = random_rc(rng, fxs[k].cfg, fxs[k].proj_pool, fxs[k].inv_pool);
      FpMat ma = rc_eval_matrix(a, models[k]);
      FpMat mb = rc_eval_matrix(b, models[k]);
      CHECK(rc_eval_matrix(rc_add(a, b), models[k]) == ma + mb);
      CHECK(rc_eval_matrix(rc_mul(a, b), models[k]) == ma * mb);
    }
  }
}

TEST_CASE("structural isomorphisms for the three easy configurations") {
  std::mt19937_64 rng(808);
  auto rand_poly = [&](int maxdeg) {
    std::vector<Scalar> c;
    int d = static_cast<int>(rng() % (maxdeg + 1));
    for (int i = 0; i <= d; ++i) c.push_back(Scalar::of_residue(2, rng() % 2));
    return Poly(F2, std::move(c));
  };
  // C_infinity: R_C = K[X]
  KernelConfig cinf = KernelConfig::c_infinity(F2);
  for (int i = 0; i < 100; ++i) {
    Poly a = rand_poly(4), b = rand_poly(4);
    CHECK(rc_rho(cinf, a * b) == rc_mul(rc_rho(cinf, a), rc_rho(cinf, b)));
    CHECK(rc_rho(cinf, a + b) == rc_add(rc_rho(cinf, a), rc_rho(cinf, b)));
    CHECK(rc_rho(cinf, a).num() == a);  // faithful embedding
  }
  // C_0: R_C = K(X); fractions map to global parts in lowest terms
  KernelConfig c0 = KernelConfig::c_zero(F2);
  for (int i = 0; i < 100; ++i) {
    Poly a = rand_poly(3);
    Poly b = rand_poly(3), d1 = rand_poly(2), d2 = rand_poly(2);
    if (d1.is_zero() || d2.is_zero()) continue;
    RcElem x = rc_mul(rc_rho(c0, a), rc_inv(c0, d1));
    RcElem y = rc_mul(rc_rho(c0, b), rc_inv(c0, d2));
    RcElem sum = rc_add(x, y);
    // compare against exact fraction arithmetic
    Poly n = a * d2 + b * d1, den = d1 * d2;
    if (n.is_zero()) {
      CHECK(sum == rc_zero(c0));
    } else {
      Poly g = poly_gcd(n, den);
      Poly nn = euclid_div(n, g).first, dd = euclid_div(den, g).first;
      Scalar lc = dd.lead();
      CHECK(sum.num() == nn.scaled(lc.inv()));
      CHECK(sum.den() == dd.monic());
    }
  }
  // algebraic: R_C = K[X]/(MiPo)
  KernelConfig alg = cfg_mipo("X^2+X+1");
  Poly mipo = p2("X^2+X+1");
  for (int i = 0; i < 100; ++i) {
    Poly a = rand_poly(4), b = rand_poly(4);
    CHECK(rc_mul(rc_rho(alg, a), rc_rho(alg, b)).num() == poly_mod(a * b, mipo));
    CHECK(rc_add(rc_rho(alg, a), rc_rho(alg, b)).num() == poly_mod(a + b, mipo));
  }
}

TEST_CASE("rc print/parse round trip") {
  std::mt19937_64 rng(909);
  for (const auto& fx : fixtures()) {
    for (int i = 0; i < 60; ++i) {
      RcElem a = random_rc(rng, fx.cfg, fx.proj_pool, fx.inv_pool);
      CHECK(rc_parse(a.str(), fx.cfg) == a);
    }
  }
  KernelConfig mix = cfg_mix();
  CHECK(rc_parse("projim{X}", mix) == rc_projim(mix, {p2("X")}));
  // (X^2+1)/(X+1) reduces to X+1 and the two local parts at X cancel
  CHECK(rc_parse("poly(X^2+1)*inv(X+1) + poly(1)*projker{X}", mix).str() ==
        "poly(X+1)*projim{X}");
  CHECK(rc_parse("poly(X^2+1)*inv(X+1)", mix) == rc_rho(mix, p2("X+1")));
}
