#include <random>

#include "doctest.h"
#include "endoq/factor.hpp"

using namespace endoq;

namespace {
const FieldSpec F2 = FieldSpec::fp(2);
const FieldSpec Q = FieldSpec::rationals();
Poly p2(const std::string& s) { return parse_poly(s, F2); }
Poly pq(const std::string& s) { return parse_poly(s, Q); }

// trial division by all monic polynomials of degree <= d/2
bool irreducible_by_trial(const Poly& a) {
  const FieldSpec& f = a.field();
  if (a.deg() < 1) return false;
  for (int d = 1; 2 * d <= a.deg(); ++d) {
    uint64_t total = 1;
    for (int i = 0; i < d; ++i) total *= f.p;
    for (uint64_t n = 0; n < total; ++n) {
      std::vector<Scalar> c(d + 1, Scalar::zero(f));
      uint64_t k = n;
      for (int i = 0; i < d; ++i) {
        c[i] = Scalar::of_residue(f.p, k % f.p);
        k /= f.p;
      }
      c[d] = Scalar::one(f);
      if (divides(Poly(f, std::move(c)), a)) return false;
    }
  }
  return true;
}
}  // namespace

TEST_CASE("factor over F_2 matches the spec examples") {
  Factorization fac = poly_factor(p2("X^4+X"));
  CHECK(fac.unit.is_one());
  REQUIRE(fac.factors.size() == 3);
  CHECK(fac.factors.at(p2("X")) == 1);
  CHECK(fac.factors.at(p2("X+1")) == 1);
  CHECK(fac.factors.at(p2("X^2+X+1")) == 1);
  CHECK(fac.reassemble(F2) == p2("X^4+X"));

  Factorization sq = poly_factor(p2("X^2"));
  REQUIRE(sq.factors.size() == 1);
  CHECK(sq.factors.at(p2("X")) == 2);
}

TEST_CASE("factor over Q") {
  Factorization lin = poly_factor(pq("X-3"));
  CHECK(lin.unit.is_one());
  REQUIRE(lin.factors.size() == 1);
  CHECK(lin.factors.begin()->first == pq("X-3"));

  Factorization f2 = poly_factor(pq("X^2-1"));
  CHECK(f2.factors.size() == 2);

  Factorization f3 = poly_factor(pq("X^2+1"));
  REQUIRE(f3.factors.size() == 1);
  CHECK(f3.factors.begin()->second == 1);

  // product of two irreducible quadratics, found without rational roots
  Factorization f4 = poly_factor(pq("X^4+3*X^2+2"));  // (X^2+1)(X^2+2)
  REQUIRE(f4.factors.size() == 2);
  CHECK(f4.reassemble(Q) == pq("X^4+3*X^2+2"));

  Factorization f5 = poly_factor(pq("X^4+1"));  // irreducible over Q
  REQUIRE(f5.factors.size() == 1);
  CHECK(f5.factors.begin()->second == 1);

  Factorization f6 = poly_factor(pq("2*X^2-2"));
  CHECK(f6.unit == Scalar::of_int(Q, 2));
  CHECK(f6.reassemble(Q) == pq("2*X^2-2"));

  CHECK_THROWS_AS(poly_factor(pq("X^5+X+1")), error);  // beyond the Q bound
  CHECK_THROWS_AS(poly_factor(Poly::zero(Q)), error);
}

TEST_CASE("factorization reassembles and factors are irreducible") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 150; ++i) {
    FieldSpec f = (i % 2) ? FieldSpec::fp(3) : F2;
    std::uniform_int_distribution<int> dd(1, 8);
    int d = dd(rng);
    std::vector<Scalar> c(d + 1, Scalar::zero(f));
    for (int j = 0; j <= d; ++j) c[j] = Scalar::of_residue(f.p, rng() % f.p);
    Poly a(f, std::move(c));
    if (a.deg() < 1) continue;
    Factorization fac = poly_factor(a);
    CHECK(fac.reassemble(f) == a);
    for (const auto& [g, m] : fac.factors) {
      CHECK(m >= 1);
      CHECK(g.is_monic());
      CHECK(irreducible_by_trial(g));
      CHECK(is_irreducible(g));
    }
  }
}

TEST_CASE("deterministic irreducible enumeration") {
  auto v = monic_irreducibles_fp(F2, 2, 1);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == p2("X^2+X+1"));
  auto w = monic_irreducibles_fp(F2, 3, 2);
  CHECK(w[0] == p2("X^3+X+1"));
  CHECK(w[1] == p2("X^3+X^2+1"));
  auto s = monic_irreducibles_fp(F2, 3, 1, 1);
  CHECK(s[0] == p2("X^3+X^2+1"));
}
