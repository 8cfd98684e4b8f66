#ifndef ENDOQ_FACTOR_HPP
#define ENDOQ_FACTOR_HPP

#include <cstdint>
#include <map>

#include "endoq/poly.hpp"

namespace endoq {

// Complete factorization: unit * prod(factors^multiplicity) == input,
// every key monic irreducible.
struct Factorization {
  Scalar unit;
  std::map<Poly, uint32_t, PolyLess> factors;

  Poly reassemble(const FieldSpec& f) const;
};

// Factorization over F_p (any degree; distinct/equal-degree splitting with
// exhaustive trial division at low degree) and over Q up to a configured
// degree bound. Unsupported inputs are reported, never silently partial.
Factorization poly_factor(const Poly& a, uint32_t q_degree_bound = 4);

bool is_irreducible(const Poly& a);

// Deterministic enumeration of monic irreducibles over F_p of exact degree d
// (ordered by coefficient vector); used for filler block construction.
std::vector<Poly> monic_irreducibles_fp(const FieldSpec& f, uint32_t d,
                                        size_t count, size_t skip = 0);

}  // namespace endoq

#endif
