#ifndef ENDOQ_RC_HPP
#define ENDOQ_RC_HPP

#include <map>
#include <set>
#include <string>

#include "endoq/finmodel.hpp"
#include "endoq/kernel_config.hpp"

namespace endoq {

// Normal-form element of the ring R_C of definable endomorphisms.
//
// Algebraic configuration: a residue num mod MiPo(C) with den = 1 and no
// corrections (R_C is K[X]/(MiPo(C))).
//
// Transcendental configuration: a localized global part num/den whose
// denominator factors all have C(f) < infinity, plus finitely many local
// corrections f -> residue mod f^C(f) for f with 0 < C(f) < infinity.
// A correction is stored only when it differs from the residue of the
// global part (if v_f(den) > 0 the correction is mandatory).
class RcElem {
 public:
  RcElem() = default;

  const KernelConfig& cfg() const { return cfg_; }
  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  const std::map<Poly, Poly, PolyLess>& corrections() const { return corr_; }

  bool is_zero() const;
  bool is_identity() const;
  bool operator==(const RcElem& o) const;
  bool operator!=(const RcElem& o) const { return !(*this == o); }
  // Deterministic total order (for canonical containers).
  int cmp(const RcElem& o) const;

  std::string str() const;

 private:
  friend RcElem rc_raw(const KernelConfig&, Poly, Poly, std::map<Poly, Poly, PolyLess>);
  KernelConfig cfg_;
  Poly num_, den_;
  std::map<Poly, Poly, PolyLess> corr_;
};

// Generators (Fact 2.9 / 2.10 shapes).
RcElem rc_zero(const KernelConfig& cfg);
RcElem rc_one(const KernelConfig& cfg);
RcElem rc_scalar(const KernelConfig& cfg, const Scalar& q);
RcElem rc_rho(const KernelConfig& cfg, const Poly& rho);
// Projection onto Im(F^C); every f in F must satisfy 0 < C(f) < infinity.
RcElem rc_projim(const KernelConfig& cfg, const std::vector<Poly>& F);
RcElem rc_projker(const KernelConfig& cfg, const std::vector<Poly>& F);
// Pseudo-inverse of eta[theta]; Fac(eta) must avoid C = infinity.
RcElem rc_inv(const KernelConfig& cfg, const Poly& eta);

// Normalizing constructor from raw components.
RcElem rc_raw(const KernelConfig& cfg, Poly num, Poly den,
              std::map<Poly, Poly, PolyLess> corr);

RcElem rc_add(const RcElem& a, const RcElem& b);
RcElem rc_sub(const RcElem& a, const RcElem& b);
RcElem rc_mul(const RcElem& a, const RcElem& b);
RcElem rc_neg(const RcElem& a);

// Local residue of a at f (0 < C(f) < infinity): stored correction or the
// residue of the global part.
Poly rc_local(const RcElem& a, const Poly& f);

bool rc_is_unit(const RcElem& a);
RcElem rc_inverse(const RcElem& a);  // rc_is_unit(a) required
// Fact 2.11: R_C is a field iff C = C_0 or C algebraic with MiPo irreducible.
bool rc_is_field(const KernelConfig& cfg);

struct KernelDescriptor {
  // f in 0 < C < infinity touched by the element -> local kernel exponent
  // s_f in {0, ..., C(f)}.
  std::map<Poly, uint32_t, PolyLess> local_exponents;
  // irreducibles with C = infinity dividing the global numerator
  std::set<Poly, PolyLess> infinite_type;
  bool generic_zero = false;  // the global part is the zero map
  bool injective_on_ec = false;
  bool kernel_infinite_on_ec = false;
};
KernelDescriptor rc_kernel_descriptor(const RcElem& a);

// Exact division r with r * a == c; requires componentwise divisibility
// (in particular v_f(c) >= v_f(a) locally and the infinite-type part of a
// dividing c's). Throws when no exact quotient exists.
RcElem rc_div_exact(const RcElem& c, const RcElem& a);

// The matrix computing a on the model; requires image-completeness for the
// touched factors. Evaluation is a ring homomorphism.
FpMat rc_eval_matrix(const RcElem& a, const FinModel& m);

// Finite-C factors with positive C touched by the element (corrections plus
// factors of num and den).
std::vector<Poly> rc_touched_factors(const RcElem& a);

// Textual element syntax: poly(...), projim{...}, projker{...}, inv(...),
// combined with + and *. The printer emits the normal form.
RcElem rc_parse(const std::string& src, const KernelConfig& cfg);

}  // namespace endoq

#endif
