#include <random>

#include "doctest.h"
#include "endoq/poly.hpp"

using namespace endoq;

namespace {

const FieldSpec F2 = FieldSpec::fp(2);
const FieldSpec Q = FieldSpec::rationals();

Poly p2(const std::string& s) { return parse_poly(s, F2); }
Poly pq(const std::string& s) { return parse_poly(s, Q); }

Poly random_poly(std::mt19937_64& rng, const FieldSpec& f, int maxdeg) {
  std::uniform_int_distribution<int> dd(0, maxdeg);
  int d = dd(rng);
  std::vector<Scalar> c;
  for (int i = 0; i <= d; ++i) {
    if (f.is_fp()) {
      c.push_back(Scalar::of_residue(f.p, rng() % f.p));
    } else {
      std::uniform_int_distribution<int> dn(-5, 5);
      std::uniform_int_distribution<int> dm(1, 4);
      c.push_back(Scalar::of_rational(Rational(dn(rng), dm(rng))));
    }
  }
  return Poly(f, std::move(c));
}

}  // namespace

TEST_CASE("poly arithmetic basics") {
  // characteristic-2 cancellation
  CHECK((p2("X+1") + p2("X+1")).is_zero());
  // product over F_2
  CHECK(p2("X") * p2("X+1") == p2("X^2+X"));
  // inverse scalars over Q
  CHECK(pq("1/2*X") * pq("2") == pq("X"));
  CHECK_THROWS_AS(p2("X") + pq("X"), error);
}

TEST_CASE("poly product check against pointwise evaluation in F_4 style table") {
  // verify (X)(X+1) = X^2+X by evaluating both sides at all points of F_2
  // and on the ring F_2[Y]/(Y^2+Y+1) via symbolic reduction
  Poly prod = p2("X") * p2("X+1");
  for (uint64_t v = 0; v < 2; ++v) {
    Scalar x = Scalar::of_residue(2, v);
    CHECK(prod.eval(x) == p2("X").eval(x) * p2("X+1").eval(x));
  }
  Poly m = p2("X^2+X+1");
  Poly y = p2("X");
  // in F_4 = F_2[X]/(X^2+X+1): check y*(y+1) == y^2+y mod m for y, y+1, y^2...
  for (const char* elt : {"X", "X+1", "X^2"}) {
    Poly e = p2(elt);
    Poly lhs = poly_mod(e * (e + Poly::one(F2)), m);
    Poly rhs = poly_mod(e * e + e, m);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("euclidean division") {
  auto [q, r] = euclid_div(p2("X^3"), p2("X^2+X+1"));
  CHECK(q == p2("X+1"));
  CHECK(r == p2("1"));
  // re-multiply
  CHECK(q * p2("X^2+X+1") + r == p2("X^3"));

  auto [q2, r2] = euclid_div(p2("X^2"), p2("X^2"));
  CHECK(q2 == p2("1"));
  CHECK(r2.is_zero());

  auto [q3, r3] = euclid_div(p2("1"), p2("X"));
  CHECK(q3.is_zero());
  CHECK(r3 == p2("1"));

  CHECK_THROWS_AS(euclid_div(p2("X"), Poly::zero(F2)), error);
}

TEST_CASE("euclidean division uniqueness on random pairs") {
  std::mt19937_64 rng(12345);
  int done = 0;
  while (done < 1000) {
    FieldSpec f = (done % 3 == 2) ? Q : ((done % 3 == 1) ? FieldSpec::fp(5) : F2);
    Poly a = random_poly(rng, f, 7);
    Poly b = random_poly(rng, f, 4);
    if (b.is_zero()) continue;
    auto [q, r] = euclid_div(a, b);
    CHECK(q * b + r == a);
    CHECK(r.deg() < b.deg());
    ++done;
  }
}

TEST_CASE("gcd and bezout") {
  auto bz = poly_gcd_bezout(p2("X"), p2("X+1"));
  CHECK(bz.g == p2("1"));
  CHECK(bz.u * p2("X") + bz.v * p2("X+1") == bz.g);

  CHECK(poly_gcd(p2("X^2+X"), p2("X^2+1")) == p2("X+1"));
  CHECK(poly_gcd(Poly::zero(F2), p2("X^2")) == p2("X^2"));
  CHECK_THROWS_AS(poly_gcd_bezout(Poly::zero(F2), Poly::zero(F2)), error);
}

TEST_CASE("gcd over F_2 agrees with exhaustive divisor search at low degree") {
  // gcd(X^2+X, X^2+1) over F_2 by scanning all monic polys of degree <= 2
  Poly a = p2("X^2+X"), b = p2("X^2+1");
  Poly best = p2("1");
  for (const char* s : {"1", "X", "X+1", "X^2", "X^2+1", "X^2+X", "X^2+X+1"}) {
    Poly d = p2(s);
    if (divides(d, a) && divides(d, b) && d.deg() > best.deg()) best = d;
  }
  CHECK(best == poly_gcd(a, b));
}

TEST_CASE("bezout identity on random pairs") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    FieldSpec f = (i % 2) ? FieldSpec::fp(3) : F2;
    Poly a = random_poly(rng, f, 6);
    Poly b = random_poly(rng, f, 6);
    if (a.is_zero() && b.is_zero()) continue;
    auto bz = poly_gcd_bezout(a, b);
    CHECK(bz.u * a + bz.v * b == bz.g);
    if (!a.is_zero()) CHECK(divides(bz.g, a));
    if (!b.is_zero()) CHECK(divides(bz.g, b));
  }
}

TEST_CASE("valuation") {
  CHECK(poly_valuation(p2("X^2+X"), p2("X")) == 1u);
  CHECK(!poly_valuation(Poly::zero(F2), p2("X")).has_value());  // infinity
  CHECK(poly_valuation(p2("X^2"), p2("X+1")) == 0u);
  CHECK_THROWS_AS(poly_valuation(p2("X"), p2("X^2")), error);  // reducible modulus

  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Poly a = random_poly(rng, F2, 5);
    Poly b = random_poly(rng, F2, 5);
    if (a.is_zero() || b.is_zero()) continue;
    Poly f = p2("X+1");
    CHECK(*poly_valuation(a * b, f) == *poly_valuation(a, f) + *poly_valuation(b, f));
  }
}

TEST_CASE("poly print/parse round trip") {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 500; ++i) {
    FieldSpec f = (i % 3 == 0) ? Q : ((i % 3 == 1) ? F2 : FieldSpec::fp(7));
    Poly a = random_poly(rng, f, 6);
    CHECK(parse_poly(a.str(), f) == a);
  }
  CHECK(pq("1/2*X^3-2").str() == "1/2*X^3-2");
  CHECK(p2("X^2+X+1").str() == "X^2+X+1");
  CHECK(Poly::zero(F2).str() == "0");
}
