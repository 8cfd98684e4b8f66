#ifndef ENDOQ_FIELD_HPP
#define ENDOQ_FIELD_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "endoq/common.hpp"

namespace endoq {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// The coefficient field K: the rationals or a prime field F_p.
struct FieldSpec {
  enum class Kind { Rationals, PrimeField };
  Kind kind = Kind::Rationals;
  uint32_t p = 0;  // prime, meaningful only for PrimeField

  static FieldSpec rationals() { return FieldSpec{Kind::Rationals, 0}; }
  static FieldSpec fp(uint32_t p);

  bool is_fp() const { return kind == Kind::PrimeField; }
  bool operator==(const FieldSpec& o) const {
    return kind == o.kind && p == o.p;
  }
  bool operator!=(const FieldSpec& o) const { return !(*this == o); }
  std::string str() const { return is_fp() ? "F" + std::to_string(p) : "Q"; }
};

bool is_prime_u32(uint32_t n);

// Exact scalar in the configured field, always in canonical form
// (lowest terms over Q, reduced residue 0..p-1 over F_p).
class Scalar {
 public:
  Scalar() = default;  // zero of Q; prefer the factory functions
  static Scalar zero(const FieldSpec& f) { return of_int(f, 0); }
  static Scalar one(const FieldSpec& f) { return of_int(f, 1); }
  static Scalar of_int(const FieldSpec& f, int64_t n);
  static Scalar of_rational(Rational q);           // Q only
  static Scalar of_residue(uint32_t p, uint64_t r);  // F_p

  const FieldSpec& field() const { return field_; }
  bool is_zero() const;
  bool is_one() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator/(const Scalar& o) const;  // o nonzero
  Scalar operator-() const;
  Scalar inv() const;  // nonzero
  bool operator==(const Scalar& o) const;
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  // Total order used only to canonicalize printing and map keys.
  int cmp(const Scalar& o) const;

  // F_p residue / rational value accessors.
  uint64_t residue() const { return r_; }
  const Rational& rational() const { return q_; }

  std::string str() const;

 private:
  void check_same(const Scalar& o) const;
  FieldSpec field_ = FieldSpec::rationals();
  Rational q_;      // Rationals payload
  uint64_t r_ = 0;  // PrimeField payload, reduced mod p
};

uint64_t powmod_u64(uint64_t b, uint64_t e, uint64_t m);
uint64_t invmod_u64(uint64_t a, uint64_t p);

}  // namespace endoq

#endif
