#ifndef ENDOQ_FORMULA_HPP
#define ENDOQ_FORMULA_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "endoq/rc.hpp"

namespace endoq {

// Vector-space variable; `power` marks a placeholder x^i standing for
// theta^i(x).
struct Var {
  std::string name;
  std::optional<uint32_t> power;

  Var() = default;
  explicit Var(std::string n) : name(std::move(n)) {}
  Var(std::string n, uint32_t i) : name(std::move(n)), power(i) {}

  bool operator==(const Var& o) const { return name == o.name && power == o.power; }
  bool operator<(const Var& o) const {
    if (name != o.name) return name < o.name;
    if (power.has_value() != o.power.has_value()) return !power.has_value();
    return power < o.power;
  }
  std::string str() const {
    return power ? name + "^" + std::to_string(*power) : name;
  }
};

// Coefficient on a variable: a polynomial in theta, or a ring element.
using Coeff = std::variant<Poly, RcElem>;

bool coeff_is_zero(const Coeff& c);
Coeff coeff_add(const Coeff& a, const Coeff& b);
Coeff coeff_mul(const Coeff& a, const Coeff& b);
Coeff coeff_neg(const Coeff& c);
RcElem coeff_to_rc(const Coeff& c, const KernelConfig& cfg);
std::string coeff_str(const Coeff& c);

// Collected linear term: at most one coefficient per variable, zero
// coefficients dropped; the empty term is the constant 0.
class Term {
 public:
  Term() = default;

  const std::map<Var, Coeff>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  static Term var(const Var& v, const FieldSpec& f);
  static Term single(const Var& v, Coeff c);

  Term operator+(const Term& o) const;
  Term operator-(const Term& o) const;
  Term operator-() const;
  Term scaled(const Coeff& c) const;  // coefficient composed on the left
  bool operator==(const Term& o) const;

  std::string str() const;

 private:
  void put(const Var& v, const Coeff& c);
  std::map<Var, Coeff> c_;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { Atom, Not, And, Or, Exists, Forall };
  Kind kind = Kind::Atom;
  Term atom;  // Atom: atom = 0
  FormulaPtr a, b;
  Var qvar;
};

FormulaPtr f_atom(Term t);
FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr x, FormulaPtr y);
FormulaPtr f_or(FormulaPtr x, FormulaPtr y);
FormulaPtr f_exists(Var v, FormulaPtr f);
FormulaPtr f_forall(Var v, FormulaPtr f);
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);
FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs);

bool f_equal(const FormulaPtr& x, const FormulaPtr& y);
bool f_is_true(const FormulaPtr& x);
bool f_is_false(const FormulaPtr& x);

std::set<Var> free_vars(const FormulaPtr& f);
std::set<Var> all_vars(const FormulaPtr& f);
uint32_t quantifier_depth(const FormulaPtr& f);
bool is_quantifier_free(const FormulaPtr& f);
// Largest theta power appearing in any coefficient.
uint32_t max_theta_exponent(const FormulaPtr& f);
// Monic irreducible factors of all coefficient polynomials.
std::vector<Poly> formula_support(const FormulaPtr& f, const KernelConfig& cfg);

// Substitute a variable by a term everywhere (capture is the caller's
// concern; used with fresh variables only).
FormulaPtr substitute(const FormulaPtr& f, const Var& v, const Term& t);

// Negation normal form and disjunctive normal form of quantifier-free input.
FormulaPtr to_nnf(const FormulaPtr& f, bool negate = false);
// Each inner vector is a conjunction of literals (Atom or Not(Atom)).
std::vector<std::vector<FormulaPtr>> to_dnf(const FormulaPtr& f);

struct PrenexLevel {
  Var var;
  bool exists = true;
};
struct Prenex {
  std::vector<PrenexLevel> levels;  // outermost first
  FormulaPtr matrix;                // quantifier free
};
// Prenex normal form with bound variables renamed apart.
Prenex to_prenex(const FormulaPtr& f);

// Def 2.14: x_k^i placeholders <-> theta^i(x_k).
FormulaPtr placeholder_expand(const FormulaPtr& psi);
FormulaPtr placeholder_abstract(const FormulaPtr& phi);

// Text syntax; R_C coefficients require a configuration.
FormulaPtr fml_parse(const std::string& src, const FieldSpec& field,
                     const KernelConfig* cfg = nullptr);
std::string fml_print(const FormulaPtr& f);

}  // namespace endoq

#endif
