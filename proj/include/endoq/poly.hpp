#ifndef ENDOQ_POLY_HPP
#define ENDOQ_POLY_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "endoq/field.hpp"

namespace endoq {

// Exact univariate polynomial over K, coefficients lowest degree first.
// Canonical form: no trailing zero coefficients (zero polynomial = empty).
class Poly {
 public:
  Poly() = default;
  explicit Poly(FieldSpec f) : field_(f) {}
  Poly(FieldSpec f, std::vector<Scalar> coeffs);

  static Poly zero(const FieldSpec& f) { return Poly(f); }
  static Poly one(const FieldSpec& f) { return constant(Scalar::one(f)); }
  static Poly x(const FieldSpec& f);
  static Poly constant(Scalar s);
  // X^k with coefficient c.
  static Poly monomial(Scalar c, uint32_t k);

  const FieldSpec& field() const { return field_; }
  const std::vector<Scalar>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  bool is_one() const;
  bool is_constant() const { return c_.size() <= 1; }
  // Degree of the zero polynomial is -1 here and printed as "0"; the
  // mathematical convention deg 0 = -inf is honored by guarding call sites.
  int deg() const { return static_cast<int>(c_.size()) - 1; }
  Scalar lead() const;                 // nonzero polynomial
  Scalar at(size_t i) const;           // coefficient of X^i (0 beyond degree)
  bool is_monic() const { return !is_zero() && lead().is_one(); }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  Poly scaled(const Scalar& s) const;
  Poly shifted(uint32_t k) const;  // * X^k
  Poly monic() const;              // nonzero
  bool operator==(const Poly& o) const;
  bool operator!=(const Poly& o) const { return !(*this == o); }

  Scalar eval(const Scalar& x) const;
  Poly derivative() const;

  std::string str() const;

 private:
  void trim();
  FieldSpec field_ = FieldSpec::rationals();
  std::vector<Scalar> c_;
};

// Total order for canonical map keys: degree first, then coefficients from
// the leading one down.
int poly_cmp(const Poly& a, const Poly& b);
struct PolyLess {
  bool operator()(const Poly& a, const Poly& b) const {
    return poly_cmp(a, b) < 0;
  }
};

// num = quot*den + rem, deg rem < deg den. Throws on zero divisor.
std::pair<Poly, Poly> euclid_div(const Poly& num, const Poly& den);
Poly poly_mod(const Poly& a, const Poly& m);
bool divides(const Poly& d, const Poly& a);
Poly poly_pow(const Poly& base, uint32_t e);
Poly poly_pow_mod(const Poly& base, const BigInt& e, const Poly& m);

struct Bezout {
  Poly g, u, v;  // g monic, g = u*a + v*b
};
// Monic gcd with Bezout coefficients. Throws if both inputs are zero.
Bezout poly_gcd_bezout(const Poly& a, const Poly& b);
Poly poly_gcd(const Poly& a, const Poly& b);
Poly poly_lcm(const Poly& a, const Poly& b);
// Inverse of a modulo m, gcd(a, m) = 1.
Poly poly_invmod(const Poly& a, const Poly& m);

// Largest e with f^e | a; nullopt encodes v_f(0) = infinity.
// f must be monic irreducible.
std::optional<uint32_t> poly_valuation(const Poly& a, const Poly& f);

// Textual syntax: integer or a/b coefficients, X variable, ^ powers.
Poly parse_poly(const std::string& src, const FieldSpec& f);

}  // namespace endoq

#endif
