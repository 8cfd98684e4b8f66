#ifndef ENDOQ_KERNEL_CONFIG_HPP
#define ENDOQ_KERNEL_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "endoq/factor.hpp"
#include "endoq/poly.hpp"

#include "json.hpp"

namespace endoq {

// Kernel configuration (c, d): finite exception map over monic irreducibles
// plus a default applied to everything else, and a degree tag.
struct KernelConfig {
  enum class Default { Zero, Infinity };

  FieldSpec field;
  std::map<Poly, ExtNat, PolyLess> entries;  // canonical: never the default
  Default def = Default::Infinity;
  ExtNat degree = ExtNat::inf();

  static KernelConfig c_infinity(const FieldSpec& f);
  static KernelConfig c_zero(const FieldSpec& f);
  // Algebraic configuration; degree computed from the entries.
  static KernelConfig algebraic(const FieldSpec& f,
                                std::map<Poly, ExtNat, PolyLess> entries);
  static KernelConfig transcendental(const FieldSpec& f,
                                     std::map<Poly, ExtNat, PolyLess> entries,
                                     Default def);
  // Algebraic configuration with MiPo(C) = mipo.
  static KernelConfig from_mipo(const Poly& mipo);

  bool is_algebraic() const { return degree.finite; }
  ExtNat default_value() const {
    return def == Default::Zero ? ExtNat::fin(0) : ExtNat::inf();
  }

  bool operator==(const KernelConfig& o) const;
  std::string str() const;
};

// C(f) for monic irreducible f.
ExtNat kc_classify(const KernelConfig& cfg, const Poly& f);

struct KcReport {
  bool ok = true;
  bool algebraic = false;
  std::vector<std::string> violations;
};
KcReport kc_validate(const KernelConfig& cfg);

// MiPo(C) = prod f^C(f); algebraic configurations only.
Poly kc_mipo(const KernelConfig& cfg);
// Fact 2.5: MiPo of degree 1 makes theta definably scalar.
bool kc_is_trivial(const KernelConfig& cfg);

// One kernel equality constraint, sum-of-intersections on both sides.
struct KernelConstraint {
  std::vector<std::vector<Poly>> lhs, rhs;
};

struct ReduceResult {
  bool inconsistent = false;
  std::string reason;  // set when inconsistent
  KernelConfig config;
};

// Normalize a constraint set to the canonical kernel configuration with
// existentially-closed solvability semantics, or report inconsistency.
ReduceResult constraints_reduce(const std::vector<KernelConstraint>& cs,
                                const FieldSpec& field);

// Finite Def 2.4-style constraint set describing cfg; exists for algebraic
// configurations and for transcendental ones with default Infinity.
std::vector<KernelConstraint> kc_defining_constraints(const KernelConfig& cfg);

// JSON: {"field":{"kind":"Fp","p":2}, "default":"infinity"|"zero",
//        "entries":[{"f":"X^2+X+1","c":1}], "degree":"inf"|n}
KernelConfig kc_from_json(const nlohmann::json& j);
nlohmann::json kc_to_json(const KernelConfig& cfg);

// Constraint files: [{"lhs":[["X^2"]],"rhs":[["X^3"]]}, ...]
std::vector<KernelConstraint> constraints_from_json(const nlohmann::json& j,
                                                    const FieldSpec& field);
nlohmann::json constraints_to_json(const std::vector<KernelConstraint>& cs);

FieldSpec field_from_json(const nlohmann::json& j);
nlohmann::json field_to_json(const FieldSpec& f);

}  // namespace endoq

#endif
