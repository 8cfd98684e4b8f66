#include "endoq/field.hpp"

namespace endoq {

bool is_prime_u32(uint32_t n) {
  if (n < 2) return false;
  for (uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

FieldSpec FieldSpec::fp(uint32_t p) {
  if (!is_prime_u32(p)) throw error("FieldSpec: p = " + std::to_string(p) + " is not prime");
  return FieldSpec{Kind::PrimeField, p};
}

uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = (r * b) % m;
    b = (b * b) % m;
    e >>= 1;
  }
  return r;
}

uint64_t invmod_u64(uint64_t a, uint64_t p) {
  if (a % p == 0) throw error("Scalar: division by zero in F_p");
  return powmod_u64(a % p, p - 2, p);
}

Scalar Scalar::of_int(const FieldSpec& f, int64_t n) {
  Scalar s;
  s.field_ = f;
  if (f.is_fp()) {
    int64_t m = n % static_cast<int64_t>(f.p);
    if (m < 0) m += f.p;
    s.r_ = static_cast<uint64_t>(m);
  } else {
    s.q_ = Rational(n);
  }
  return s;
}

Scalar Scalar::of_rational(Rational q) {
  Scalar s;
  s.field_ = FieldSpec::rationals();
  s.q_ = std::move(q);
  return s;
}

Scalar Scalar::of_residue(uint32_t p, uint64_t r) {
  Scalar s;
  s.field_ = FieldSpec::fp(p);
  s.r_ = r % p;
  return s;
}

bool Scalar::is_zero() const {
  return field_.is_fp() ? r_ == 0 : q_.is_zero();
}

bool Scalar::is_one() const {
  return field_.is_fp() ? r_ == 1 : q_ == 1;
}

void Scalar::check_same(const Scalar& o) const {
  if (field_ != o.field_)
    throw error("Scalar: field mismatch (" + field_.str() + " vs " + o.field_.str() + ")");
}

Scalar Scalar::operator+(const Scalar& o) const {
  check_same(o);
  Scalar s = *this;
  if (field_.is_fp())
    s.r_ = (r_ + o.r_) % field_.p;
  else
    s.q_ = Rational(q_ + o.q_);
  return s;
}

Scalar Scalar::operator-(const Scalar& o) const { return *this + (-o); }

Scalar Scalar::operator*(const Scalar& o) const {
  check_same(o);
  Scalar s = *this;
  if (field_.is_fp())
    s.r_ = (r_ * o.r_) % field_.p;
  else
    s.q_ = Rational(q_ * o.q_);
  return s;
}

Scalar Scalar::operator/(const Scalar& o) const { return *this * o.inv(); }

Scalar Scalar::operator-() const {
  Scalar s = *this;
  if (field_.is_fp())
    s.r_ = r_ == 0 ? 0 : field_.p - r_;
  else
    s.q_ = Rational(-q_);
  return s;
}

Scalar Scalar::inv() const {
  if (is_zero()) throw error("Scalar: inverse of zero");
  Scalar s = *this;
  if (field_.is_fp())
    s.r_ = invmod_u64(r_, field_.p);
  else
    s.q_ = Rational(1 / q_);
  return s;
}

bool Scalar::operator==(const Scalar& o) const {
  if (field_ != o.field_) return false;
  return field_.is_fp() ? r_ == o.r_ : q_ == o.q_;
}

int Scalar::cmp(const Scalar& o) const {
  check_same(o);
  if (field_.is_fp()) return r_ < o.r_ ? -1 : (r_ == o.r_ ? 0 : 1);
  return q_ < o.q_ ? -1 : (q_ == o.q_ ? 0 : 1);
}

std::string Scalar::str() const {
  if (field_.is_fp()) return std::to_string(r_);
  if (denominator(q_) == 1) return numerator(q_).str();
  return numerator(q_).str() + "/" + denominator(q_).str();
}

}  // namespace endoq
