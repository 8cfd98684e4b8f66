#include "endoq/poly.hpp"

#include <cctype>
#include <sstream>

namespace endoq {

Poly::Poly(FieldSpec f, std::vector<Scalar> coeffs) : field_(f), c_(std::move(coeffs)) {
  for (const auto& s : c_)
    if (s.field() != field_) throw error("Poly: coefficient field mismatch");
  trim();
}

void Poly::trim() {
  while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

Poly Poly::x(const FieldSpec& f) {
  return Poly(f, {Scalar::zero(f), Scalar::one(f)});
}

Poly Poly::constant(Scalar s) {
  FieldSpec f = s.field();
  return Poly(f, {std::move(s)});
}

Poly Poly::monomial(Scalar c, uint32_t k) {
  FieldSpec f = c.field();
  std::vector<Scalar> v(k + 1, Scalar::zero(f));
  v[k] = std::move(c);
  return Poly(f, std::move(v));
}

bool Poly::is_one() const { return c_.size() == 1 && c_[0].is_one(); }

Scalar Poly::lead() const {
  if (is_zero()) throw error("Poly: leading coefficient of zero polynomial");
  return c_.back();
}

Scalar Poly::at(size_t i) const {
  return i < c_.size() ? c_[i] : Scalar::zero(field_);
}

Poly Poly::operator+(const Poly& o) const {
  if (field_ != o.field_) throw error("Poly: field mismatch");
  std::vector<Scalar> v;
  size_t n = std::max(c_.size(), o.c_.size());
  v.reserve(n);
  for (size_t i = 0; i < n; ++i) v.push_back(at(i) + o.at(i));
  return Poly(field_, std::move(v));
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator-() const {
  std::vector<Scalar> v;
  v.reserve(c_.size());
  for (const auto& s : c_) v.push_back(-s);
  return Poly(field_, std::move(v));
}

Poly Poly::operator*(const Poly& o) const {
  if (field_ != o.field_) throw error("Poly: field mismatch");
  if (is_zero() || o.is_zero()) return Poly(field_);
  std::vector<Scalar> v(c_.size() + o.c_.size() - 1, Scalar::zero(field_));
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) v[i + j] = v[i + j] + c_[i] * o.c_[j];
  return Poly(field_, std::move(v));
}

Poly Poly::scaled(const Scalar& s) const {
  std::vector<Scalar> v;
  v.reserve(c_.size());
  for (const auto& ci : c_) v.push_back(ci * s);
  return Poly(field_, std::move(v));
}

Poly Poly::shifted(uint32_t k) const {
  if (is_zero()) return *this;
  std::vector<Scalar> v(k, Scalar::zero(field_));
  v.insert(v.end(), c_.begin(), c_.end());
  return Poly(field_, std::move(v));
}

Poly Poly::monic() const { return scaled(lead().inv()); }

bool Poly::operator==(const Poly& o) const {
  if (field_ != o.field_ || c_.size() != o.c_.size()) return false;
  for (size_t i = 0; i < c_.size(); ++i)
    if (c_[i] != o.c_[i]) return false;
  return true;
}

Scalar Poly::eval(const Scalar& x) const {
  Scalar acc = Scalar::zero(field_);
  for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

Poly Poly::derivative() const {
  std::vector<Scalar> v;
  for (size_t i = 1; i < c_.size(); ++i)
    v.push_back(c_[i] * Scalar::of_int(field_, static_cast<int64_t>(i)));
  return Poly(field_, std::move(v));
}

int poly_cmp(const Poly& a, const Poly& b) {
  if (a.deg() != b.deg()) return a.deg() < b.deg() ? -1 : 1;
  for (int i = a.deg(); i >= 0; --i) {
    int c = a.at(i).cmp(b.at(i));
    if (c != 0) return c;
  }
  return 0;
}

std::pair<Poly, Poly> euclid_div(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw error("euclid_div: division by zero polynomial");
  if (num.field() != den.field()) throw error("euclid_div: field mismatch");
  const FieldSpec& f = num.field();
  Poly rem = num;
  Poly quot = Poly::zero(f);
  Scalar lc_inv = den.lead().inv();
  while (!rem.is_zero() && rem.deg() >= den.deg()) {
    uint32_t k = static_cast<uint32_t>(rem.deg() - den.deg());
    Scalar c = rem.lead() * lc_inv;
    Poly t = Poly::monomial(c, k);
    quot = quot + t;
    rem = rem - den * t;
  }
  return {quot, rem};
}

Poly poly_mod(const Poly& a, const Poly& m) { return euclid_div(a, m).second; }

bool divides(const Poly& d, const Poly& a) {
  if (d.is_zero()) return a.is_zero();
  return euclid_div(a, d).second.is_zero();
}

Poly poly_pow(const Poly& base, uint32_t e) {
  Poly r = Poly::one(base.field());
  Poly b = base;
  while (e) {
    if (e & 1) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return r;
}

Poly poly_pow_mod(const Poly& base, const BigInt& e, const Poly& m) {
  Poly r = poly_mod(Poly::one(base.field()), m);
  Poly b = poly_mod(base, m);
  BigInt k = e;
  while (k > 0) {
    if ((k & 1) != 0) r = poly_mod(r * b, m);
    b = poly_mod(b * b, m);
    k >>= 1;
  }
  return r;
}

Bezout poly_gcd_bezout(const Poly& a, const Poly& b) {
  if (a.is_zero() && b.is_zero()) throw error("poly_gcd_bezout: both inputs zero");
  const FieldSpec& f = a.field();
  // Extended Euclid: r0 = u0*a + v0*b invariant throughout.
  Poly r0 = a, r1 = b;
  Poly u0 = Poly::one(f), u1 = Poly::zero(f);
  Poly v0 = Poly::zero(f), v1 = Poly::one(f);
  while (!r1.is_zero()) {
    auto [q, r] = euclid_div(r0, r1);
    Poly u2 = u0 - q * u1;
    Poly v2 = v0 - q * v1;
    r0 = r1; r1 = r;
    u0 = u1; u1 = u2;
    v0 = v1; v1 = v2;
  }
  Scalar lc = r0.lead();
  return Bezout{r0.monic(), u0.scaled(lc.inv()), v0.scaled(lc.inv())};
}

Poly poly_gcd(const Poly& a, const Poly& b) {
  if (a.is_zero() && b.is_zero()) return a;
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  return poly_gcd_bezout(a, b).g;
}

Poly poly_lcm(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly::zero(a.field());
  Poly g = poly_gcd(a, b);
  return euclid_div(a * b, g).first.monic();
}

Poly poly_invmod(const Poly& a, const Poly& m) {
  Bezout bz = poly_gcd_bezout(a, m);
  if (!bz.g.is_one()) throw error("poly_invmod: inputs not coprime");
  return poly_mod(bz.u, m);
}

// poly_valuation lives in factor.cpp (it validates irreducibility of f).

// ---------------------------------------------------------------------------
// Printing. Highest degree first; round-trips through parse_poly bit-exactly.

std::string Poly::str() const {
  if (is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (int i = deg(); i >= 0; --i) {
    Scalar c = at(static_cast<size_t>(i));
    if (c.is_zero()) continue;
    std::string cs = c.str();
    bool neg = !cs.empty() && cs[0] == '-';
    if (neg) cs = cs.substr(1);
    if (first) {
      if (neg) out << "-";
      first = false;
    } else {
      out << (neg ? "-" : "+");
    }
    bool unit_coeff = (cs == "1");
    if (i == 0) {
      out << cs;
    } else {
      if (!unit_coeff) out << cs << "*";
      out << "X";
      if (i > 1) out << "^" << i;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Parsing.

namespace {

struct PolyParser {
  const std::string& s;
  size_t pos = 0;
  const FieldSpec& f;

  explicit PolyParser(const std::string& src, const FieldSpec& fs) : s(src), f(fs) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw error("parse_poly: " + msg + " at offset " + std::to_string(pos));
  }

  BigInt integer() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected integer");
    return BigInt(s.substr(start, pos - start));
  }

  Scalar coefficient() {
    BigInt num = integer();
    if (eat('/')) {
      BigInt den = integer();
      if (den == 0) fail("zero denominator");
      if (f.is_fp()) {
        uint64_t n = static_cast<uint64_t>(num % f.p);
        uint64_t d = static_cast<uint64_t>(den % f.p);
        return Scalar::of_residue(f.p, (n * invmod_u64(d, f.p)) % f.p);
      }
      return Scalar::of_rational(Rational(num, den));
    }
    if (f.is_fp()) return Scalar::of_residue(f.p, static_cast<uint64_t>(num % f.p));
    return Scalar::of_rational(Rational(num));
  }

  uint32_t power() {
    if (eat('^')) {
      BigInt e = integer();
      if (e < 0 || e > 1000000) fail("exponent out of range");
      return static_cast<uint32_t>(e);
    }
    return 1;
  }

  // term := coeff ['*' X [^ k]] | X [^ k]
  Poly term() {
    skip_ws();
    if (pos < s.size() && s[pos] == 'X') {
      ++pos;
      return Poly::monomial(Scalar::one(f), power());
    }
    Scalar c = coefficient();
    skip_ws();
    if (eat('*')) {
      skip_ws();
      if (pos >= s.size() || s[pos] != 'X') fail("expected X after *");
      ++pos;
      return Poly::monomial(c, power());
    }
    return Poly::constant(c);
  }

  Poly parse() {
    skip_ws();
    bool neg = false;
    if (eat('-')) neg = true;
    else eat('+');
    Poly acc = term();
    if (neg) acc = -acc;
    while (true) {
      skip_ws();
      if (pos >= s.size()) break;
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else fail("unexpected character '" + std::string(1, s[pos]) + "'");
    }
    return acc;
  }
};

}  // namespace

Poly parse_poly(const std::string& src, const FieldSpec& f) {
  PolyParser p(src, f);
  return p.parse();
}

}  // namespace endoq
