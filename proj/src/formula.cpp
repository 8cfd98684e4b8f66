#include "endoq/formula.hpp"

#include <cctype>
#include <sstream>
#include <functional>

namespace endoq {

// ---------------------------------------------------------------------------
// Coefficients.

bool coeff_is_zero(const Coeff& c) {
  if (std::holds_alternative<Poly>(c)) return std::get<Poly>(c).is_zero();
  return std::get<RcElem>(c).is_zero();
}

Coeff coeff_add(const Coeff& a, const Coeff& b) {
  if (std::holds_alternative<Poly>(a) && std::holds_alternative<Poly>(b))
    return std::get<Poly>(a) + std::get<Poly>(b);
  if (std::holds_alternative<RcElem>(a)) {
    const RcElem& ra = std::get<RcElem>(a);
    return rc_add(ra, coeff_to_rc(b, ra.cfg()));
  }
  const RcElem& rb = std::get<RcElem>(b);
  return rc_add(coeff_to_rc(a, rb.cfg()), rb);
}

Coeff coeff_mul(const Coeff& a, const Coeff& b) {
  if (std::holds_alternative<Poly>(a) && std::holds_alternative<Poly>(b))
    return std::get<Poly>(a) * std::get<Poly>(b);
  if (std::holds_alternative<RcElem>(a)) {
    const RcElem& ra = std::get<RcElem>(a);
    return rc_mul(ra, coeff_to_rc(b, ra.cfg()));
  }
  const RcElem& rb = std::get<RcElem>(b);
  return rc_mul(coeff_to_rc(a, rb.cfg()), rb);
}

Coeff coeff_neg(const Coeff& c) {
  if (std::holds_alternative<Poly>(c)) return -std::get<Poly>(c);
  return rc_neg(std::get<RcElem>(c));
}

RcElem coeff_to_rc(const Coeff& c, const KernelConfig& cfg) {
  if (std::holds_alternative<RcElem>(c)) return std::get<RcElem>(c);
  return rc_rho(cfg, std::get<Poly>(c));
}

std::string coeff_str(const Coeff& c) {
  if (std::holds_alternative<Poly>(c)) return std::get<Poly>(c).str();
  return std::get<RcElem>(c).str();
}

// ---------------------------------------------------------------------------
// Terms.

void Term::put(const Var& v, const Coeff& c) {
  auto it = c_.find(v);
  if (it == c_.end()) {
    if (!coeff_is_zero(c)) c_.emplace(v, c);
    return;
  }
  Coeff sum = coeff_add(it->second, c);
  if (coeff_is_zero(sum))
    c_.erase(it);
  else
    it->second = sum;
}

Term Term::var(const Var& v, const FieldSpec& f) {
  Term t;
  t.c_.emplace(v, Poly::one(f));
  return t;
}

Term Term::single(const Var& v, Coeff c) {
  Term t;
  if (!coeff_is_zero(c)) t.c_.emplace(v, std::move(c));
  return t;
}

Term Term::operator+(const Term& o) const {
  Term t = *this;
  for (const auto& [v, c] : o.c_) t.put(v, c);
  return t;
}

Term Term::operator-() const {
  Term t;
  for (const auto& [v, c] : c_) t.c_.emplace(v, coeff_neg(c));
  return t;
}

Term Term::operator-(const Term& o) const { return *this + (-o); }

Term Term::scaled(const Coeff& s) const {
  Term t;
  if (coeff_is_zero(s)) return t;
  for (const auto& [v, c] : c_) {
    Coeff m = coeff_mul(s, c);
    if (!coeff_is_zero(m)) t.c_.emplace(v, m);
  }
  return t;
}

bool Term::operator==(const Term& o) const {
  if (c_.size() != o.c_.size()) return false;
  auto it = c_.begin();
  auto jt = o.c_.begin();
  for (; it != c_.end(); ++it, ++jt) {
    if (!(it->first == jt->first)) return false;
    if (std::holds_alternative<Poly>(it->second) !=
        std::holds_alternative<Poly>(jt->second))
      return false;
    if (std::holds_alternative<Poly>(it->second)) {
      if (std::get<Poly>(it->second) != std::get<Poly>(jt->second)) return false;
    } else if (!(std::get<RcElem>(it->second) == std::get<RcElem>(jt->second))) {
      return false;
    }
  }
  return true;
}

namespace {

// one printed summand per theta power: c*T^i(x)
void print_poly_coeff(std::ostringstream& out, bool& first, const Poly& c, const Var& v) {
  for (int i = 0; i <= c.deg(); ++i) {
    Scalar q = c.at(static_cast<size_t>(i));
    if (q.is_zero()) continue;
    std::string qs = q.str();
    bool neg = !qs.empty() && qs[0] == '-';
    if (neg) qs = qs.substr(1);
    if (first) {
      if (neg) out << "-";
      first = false;
    } else {
      out << (neg ? " - " : " + ");
    }
    if (qs != "1") out << qs << "*";
    if (i == 0)
      out << v.str();
    else if (i == 1)
      out << "T(" << v.str() << ")";
    else
      out << "T^" << i << "(" << v.str() << ")";
  }
}

void print_rc_coeff(std::ostringstream& out, bool& first, const RcElem& r, const Var& v) {
  // the ring printer emits keyword-led summands; apply each to the variable
  std::string s = r.str();
  size_t start = 0;
  while (start < s.size()) {
    size_t plus = s.find(" + ", start);
    std::string piece =
        plus == std::string::npos ? s.substr(start) : s.substr(start, plus - start);
    if (!first) out << " + ";
    first = false;
    out << piece << "(" << v.str() << ")";
    if (plus == std::string::npos) break;
    start = plus + 3;
  }
}

}  // namespace

std::string Term::str() const {
  if (c_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [v, c] : c_) {
    if (std::holds_alternative<Poly>(c))
      print_poly_coeff(out, first, std::get<Poly>(c), v);
    else
      print_rc_coeff(out, first, std::get<RcElem>(c), v);
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Formula constructors.

FormulaPtr f_atom(Term t) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->atom = std::move(t);
  return f;
}

FormulaPtr f_true() { return f_atom(Term()); }

FormulaPtr f_false() { return f_not(f_true()); }

FormulaPtr f_not(FormulaPtr x) {
  if (x->kind == Formula::Kind::Not) return x->a;  // involution
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->a = std::move(x);
  return f;
}

FormulaPtr f_and(FormulaPtr x, FormulaPtr y) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::And;
  f->a = std::move(x);
  f->b = std::move(y);
  return f;
}

FormulaPtr f_or(FormulaPtr x, FormulaPtr y) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Or;
  f->a = std::move(x);
  f->b = std::move(y);
  return f;
}

FormulaPtr f_exists(Var v, FormulaPtr x) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Exists;
  f->qvar = std::move(v);
  f->a = std::move(x);
  return f;
}

FormulaPtr f_forall(Var v, FormulaPtr x) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Forall;
  f->qvar = std::move(v);
  f->a = std::move(x);
  return f;
}

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_true();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_false();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
  return acc;
}

bool f_equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Formula::Kind::Atom:
      return x->atom == y->atom;
    case Formula::Kind::Not:
      return f_equal(x->a, y->a);
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return f_equal(x->a, y->a) && f_equal(x->b, y->b);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return x->qvar == y->qvar && f_equal(x->a, y->a);
  }
  return false;
}

bool f_is_true(const FormulaPtr& x) {
  return x->kind == Formula::Kind::Atom && x->atom.is_zero();
}

bool f_is_false(const FormulaPtr& x) {
  return x->kind == Formula::Kind::Not && f_is_true(x->a);
}

// ---------------------------------------------------------------------------
// Structure queries.

namespace {

void vars_walk(const FormulaPtr& f, std::set<Var>& bound, std::set<Var>& free,
               std::set<Var>& all) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      for (const auto& [v, c] : f->atom.coeffs()) {
        all.insert(v);
        if (!bound.count(v)) free.insert(v);
      }
      return;
    case Formula::Kind::Not:
      vars_walk(f->a, bound, free, all);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      vars_walk(f->a, bound, free, all);
      vars_walk(f->b, bound, free, all);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      all.insert(f->qvar);
      bool fresh = bound.insert(f->qvar).second;
      vars_walk(f->a, bound, free, all);
      if (fresh) bound.erase(f->qvar);
      return;
    }
  }
}

}  // namespace

std::set<Var> free_vars(const FormulaPtr& f) {
  std::set<Var> bound, free, all;
  vars_walk(f, bound, free, all);
  return free;
}

std::set<Var> all_vars(const FormulaPtr& f) {
  std::set<Var> bound, free, all;
  vars_walk(f, bound, free, all);
  return all;
}

uint32_t quantifier_depth(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return 0;
    case Formula::Kind::Not:
      return quantifier_depth(f->a);
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return std::max(quantifier_depth(f->a), quantifier_depth(f->b));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return 1 + quantifier_depth(f->a);
  }
  return 0;
}

bool is_quantifier_free(const FormulaPtr& f) { return quantifier_depth(f) == 0; }

namespace {

uint32_t coeff_exponent(const Coeff& c) {
  if (std::holds_alternative<Poly>(c)) {
    const Poly& p = std::get<Poly>(c);
    return p.deg() < 0 ? 0 : static_cast<uint32_t>(p.deg());
  }
  const RcElem& r = std::get<RcElem>(c);
  int d = std::max(r.num().deg(), r.den().deg());
  for (const auto& [f, loc] : r.corrections()) d = std::max(d, loc.deg());
  return d < 0 ? 0 : static_cast<uint32_t>(d);
}

void coeff_support(const Coeff& c, const KernelConfig& cfg,
                   std::set<Poly, PolyLess>& out) {
  auto add = [&](const Poly& p) {
    if (p.deg() < 1) return;
    for (const auto& [f, m] : poly_factor(p).factors) out.insert(f);
  };
  if (std::holds_alternative<Poly>(c)) {
    add(std::get<Poly>(c));
    return;
  }
  const RcElem& r = std::get<RcElem>(c);
  add(r.num());
  add(r.den());
  for (const auto& [f, loc] : r.corrections()) {
    out.insert(f);
    add(loc);
  }
  (void)cfg;
}

void walk_atoms(const FormulaPtr& f, const std::function<void(const Term&)>& fn) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      fn(f->atom);
      return;
    case Formula::Kind::Not:
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      walk_atoms(f->a, fn);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      walk_atoms(f->a, fn);
      walk_atoms(f->b, fn);
      return;
  }
}

}  // namespace

uint32_t max_theta_exponent(const FormulaPtr& f) {
  uint32_t m = 0;
  walk_atoms(f, [&](const Term& t) {
    for (const auto& [v, c] : t.coeffs()) m = std::max(m, coeff_exponent(c));
  });
  return m;
}

std::vector<Poly> formula_support(const FormulaPtr& f, const KernelConfig& cfg) {
  std::set<Poly, PolyLess> s;
  walk_atoms(f, [&](const Term& t) {
    for (const auto& [v, c] : t.coeffs()) coeff_support(c, cfg, s);
  });
  return {s.begin(), s.end()};
}

FormulaPtr substitute(const FormulaPtr& f, const Var& v, const Term& t) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      auto it = f->atom.coeffs().find(v);
      if (it == f->atom.coeffs().end()) return f;
      Term rest;
      for (const auto& [w, c] : f->atom.coeffs())
        if (!(w == v)) rest = rest + Term::single(w, c);
      return f_atom(rest + t.scaled(it->second));
    }
    case Formula::Kind::Not:
      return f_not(substitute(f->a, v, t));
    case Formula::Kind::And:
      return f_and(substitute(f->a, v, t), substitute(f->b, v, t));
    case Formula::Kind::Or:
      return f_or(substitute(f->a, v, t), substitute(f->b, v, t));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      if (f->qvar == v) return f;  // shadowed
      FormulaPtr body = substitute(f->a, v, t);
      return f->kind == Formula::Kind::Exists ? f_exists(f->qvar, body)
                                              : f_forall(f->qvar, body);
    }
  }
  return f;
}

FormulaPtr to_nnf(const FormulaPtr& f, bool negate) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return negate ? f_not(f) : f;
    case Formula::Kind::Not:
      return to_nnf(f->a, !negate);
    case Formula::Kind::And: {
      FormulaPtr a = to_nnf(f->a, negate), b = to_nnf(f->b, negate);
      return negate ? f_or(a, b) : f_and(a, b);
    }
    case Formula::Kind::Or: {
      FormulaPtr a = to_nnf(f->a, negate), b = to_nnf(f->b, negate);
      return negate ? f_and(a, b) : f_or(a, b);
    }
    case Formula::Kind::Exists: {
      FormulaPtr a = to_nnf(f->a, negate);
      return negate ? f_forall(f->qvar, a) : f_exists(f->qvar, a);
    }
    case Formula::Kind::Forall: {
      FormulaPtr a = to_nnf(f->a, negate);
      return negate ? f_exists(f->qvar, a) : f_forall(f->qvar, a);
    }
  }
  return f;
}

std::vector<std::vector<FormulaPtr>> to_dnf(const FormulaPtr& f0) {
  FormulaPtr f = to_nnf(f0);
  std::vector<std::vector<FormulaPtr>> out;
  switch (f->kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Not:
      out.push_back({f});
      return out;
    case Formula::Kind::Or: {
      auto l = to_dnf(f->a);
      auto r = to_dnf(f->b);
      for (auto& d : l) out.push_back(std::move(d));
      for (auto& d : r) out.push_back(std::move(d));
      return out;
    }
    case Formula::Kind::And: {
      auto l = to_dnf(f->a);
      auto r = to_dnf(f->b);
      for (const auto& dl : l)
        for (const auto& dr : r) {
          std::vector<FormulaPtr> both = dl;
          both.insert(both.end(), dr.begin(), dr.end());
          out.push_back(std::move(both));
        }
      return out;
    }
    default:
      throw error("to_dnf: quantifier-free input required");
  }
}

namespace {

FormulaPtr rename_apart(const FormulaPtr& f, std::map<std::string, int>& used,
                        std::map<Var, Var> renaming) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      Term t;
      for (const auto& [v, c] : f->atom.coeffs()) {
        auto it = renaming.find(v);
        t = t + Term::single(it == renaming.end() ? v : it->second, c);
      }
      return f_atom(t);
    }
    case Formula::Kind::Not:
      return f_not(rename_apart(f->a, used, renaming));
    case Formula::Kind::And:
      return f_and(rename_apart(f->a, used, renaming), rename_apart(f->b, used, renaming));
    case Formula::Kind::Or:
      return f_or(rename_apart(f->a, used, renaming), rename_apart(f->b, used, renaming));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      Var fresh = f->qvar;
      int& n = used[f->qvar.name];
      if (n > 0) fresh = Var(f->qvar.name + "r" + std::to_string(n));
      ++n;
      renaming[f->qvar] = fresh;
      FormulaPtr body = rename_apart(f->a, used, renaming);
      return f->kind == Formula::Kind::Exists ? f_exists(fresh, body)
                                              : f_forall(fresh, body);
    }
  }
  return f;
}

void prenex_walk(const FormulaPtr& f, bool negate, std::vector<PrenexLevel>& levels,
                 FormulaPtr& matrix) {
  // pull quantifiers in syntactic order; boolean structure stays in the matrix
  switch (f->kind) {
    case Formula::Kind::Atom:
      matrix = negate ? f_not(f) : f;
      return;
    case Formula::Kind::Not:
      prenex_walk(f->a, !negate, levels, matrix);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      FormulaPtr ma, mb;
      prenex_walk(f->a, negate, levels, ma);
      prenex_walk(f->b, negate, levels, mb);
      bool conj = (f->kind == Formula::Kind::And) != negate;
      matrix = conj ? f_and(ma, mb) : f_or(ma, mb);
      return;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool ex = (f->kind == Formula::Kind::Exists) != negate;
      levels.push_back(PrenexLevel{f->qvar, ex});
      prenex_walk(f->a, negate, levels, matrix);
      return;
    }
  }
}

}  // namespace

Prenex to_prenex(const FormulaPtr& f) {
  std::map<std::string, int> used;
  for (const Var& v : free_vars(f)) used[v.name] = 1;
  std::map<std::string, int> counts = used;
  FormulaPtr renamed = rename_apart(f, counts, {});
  Prenex p;
  prenex_walk(renamed, false, p.levels, p.matrix);
  return p;
}

// ---------------------------------------------------------------------------
// Placeholders.

FormulaPtr placeholder_expand(const FormulaPtr& psi) {
  switch (psi->kind) {
    case Formula::Kind::Atom: {
      Term t;
      for (const auto& [v, c] : psi->atom.coeffs()) {
        if (!v.power) {
          t = t + Term::single(v, c);
          continue;
        }
        FieldSpec fs = std::holds_alternative<Poly>(c) ? std::get<Poly>(c).field()
                                                        : std::get<RcElem>(c).cfg().field;
        Coeff shifted = coeff_mul(Poly::monomial(Scalar::one(fs), *v.power), c);
        t = t + Term::single(Var(v.name), shifted);
      }
      return f_atom(t);
    }
    case Formula::Kind::Not:
      return f_not(placeholder_expand(psi->a));
    case Formula::Kind::And:
      return f_and(placeholder_expand(psi->a), placeholder_expand(psi->b));
    case Formula::Kind::Or:
      return f_or(placeholder_expand(psi->a), placeholder_expand(psi->b));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      if (psi->qvar.power)
        throw error("placeholder_expand: quantified placeholder variable " + psi->qvar.str());
      FormulaPtr body = placeholder_expand(psi->a);
      return psi->kind == Formula::Kind::Exists ? f_exists(psi->qvar, body)
                                                : f_forall(psi->qvar, body);
    }
  }
  return psi;
}

FormulaPtr placeholder_abstract(const FormulaPtr& phi) {
  switch (phi->kind) {
    case Formula::Kind::Atom: {
      Term t;
      for (const auto& [v, c] : phi->atom.coeffs()) {
        if (v.power) throw error("placeholder_abstract: input already has placeholders");
        if (!std::holds_alternative<Poly>(c))
          throw error("placeholder_abstract: ring coefficients have no placeholder form");
        const Poly& p = std::get<Poly>(c);
        for (int i = 0; i <= p.deg(); ++i) {
          Scalar q = p.at(static_cast<size_t>(i));
          if (q.is_zero()) continue;
          t = t + Term::single(Var(v.name, static_cast<uint32_t>(i)),
                               Poly::constant(q));
        }
      }
      return f_atom(t);
    }
    case Formula::Kind::Not:
      return f_not(placeholder_abstract(phi->a));
    case Formula::Kind::And:
      return f_and(placeholder_abstract(phi->a), placeholder_abstract(phi->b));
    case Formula::Kind::Or:
      return f_or(placeholder_abstract(phi->a), placeholder_abstract(phi->b));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      FormulaPtr body = placeholder_abstract(phi->a);
      return phi->kind == Formula::Kind::Exists ? f_exists(phi->qvar, body)
                                                : f_forall(phi->qvar, body);
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

bool is_reserved(const std::string& w) {
  return w == "poly" || w == "projim" || w == "projker" || w == "inv";
}

struct FmlParser {
  const std::string& s;
  size_t pos = 0;
  FieldSpec field;
  const KernelConfig* cfg;

  FmlParser(const std::string& src, const FieldSpec& f, const KernelConfig* c)
      : s(src), field(f), cfg(c) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool lookahead_word(const std::string& w) {
    skip_ws();
    if (s.compare(pos, w.size(), w) != 0) return false;
    size_t end = pos + w.size();
    if (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])))) return false;
    return true;
  }
  [[noreturn]] void fail(const std::string& m) {
    throw error("fml_parse: " + m + " at offset " + std::to_string(pos));
  }

  std::string balanced(char open, char close) {
    if (!eat(open)) fail(std::string("expected ") + open);
    size_t start = pos;
    int depth = 0;
    while (pos < s.size()) {
      char c = s[pos];
      if (c == open || c == '(' || c == '{') ++depth;
      if (c == close && depth == 0) {
        std::string r = s.substr(start, pos - start);
        ++pos;
        return r;
      }
      if (c == ')' || c == '}') --depth;
      ++pos;
    }
    fail("unterminated bracket");
  }

  uint32_t natural() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected number");
    return static_cast<uint32_t>(std::stoul(s.substr(start, pos - start)));
  }

  Var variable() {
    skip_ws();
    size_t start = pos;
    if (pos >= s.size() || !std::islower(static_cast<unsigned char>(s[pos])))
      fail("expected variable");
    ++pos;
    while (pos < s.size() && (std::islower(static_cast<unsigned char>(s[pos])) ||
                              std::isdigit(static_cast<unsigned char>(s[pos]))))
      ++pos;
    std::string name = s.substr(start, pos - start);
    if (is_reserved(name)) fail("reserved word '" + name + "' used as variable");
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      return Var(name, natural());
    }
    return Var(name);
  }

  Scalar scalar() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) fail("expected scalar");
    std::string numtxt = s.substr(start, pos - start);
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      size_t dstart = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      std::string dentxt = s.substr(dstart, pos - dstart);
      Poly q = parse_poly(numtxt + "/" + dentxt, field);
      return q.is_zero() ? Scalar::zero(field) : q.at(0);
    }
    Poly q = parse_poly(numtxt, field);
    return q.is_zero() ? Scalar::zero(field) : q.at(0);
  }

  RcElem rc_chain() {
    if (!cfg)
      fail("ring coefficient syntax requires a kernel configuration");
    // keyword-led product of ring generators
    RcElem acc = rc_one(*cfg);
    bool first = true;
    while (true) {
      skip_ws();
      RcElem piece = rc_zero(*cfg);
      if (lookahead_word("poly")) {
        pos += 4;
        piece = rc_rho(*cfg, parse_poly(balanced('(', ')'), field));
      } else if (lookahead_word("projim")) {
        pos += 6;
        piece = rc_projim(*cfg, poly_list(balanced('{', '}')));
      } else if (lookahead_word("projker")) {
        pos += 7;
        piece = rc_projker(*cfg, poly_list(balanced('{', '}')));
      } else if (lookahead_word("inv")) {
        pos += 3;
        piece = rc_inv(*cfg, parse_poly(balanced('(', ')'), field));
      } else {
        if (first) fail("expected ring generator");
        break;
      }
      acc = first ? piece : rc_mul(acc, piece);
      first = false;
      size_t save = pos;
      if (!eat('*')) break;
      skip_ws();
      if (!(lookahead_word("poly") || lookahead_word("projim") ||
            lookahead_word("projker") || lookahead_word("inv"))) {
        pos = save;  // the * belongs to something else
        break;
      }
    }
    return acc;
  }

  std::vector<Poly> poly_list(const std::string& body) {
    std::vector<Poly> out;
    size_t start = 0;
    while (start <= body.size()) {
      size_t comma = body.find(',', start);
      std::string piece = comma == std::string::npos ? body.substr(start)
                                                     : body.substr(start, comma - start);
      if (piece.find_first_not_of(" \t") != std::string::npos)
        out.push_back(parse_poly(piece, field));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  Term primary() {
    skip_ws();
    if (pos < s.size() && s[pos] == 'T') {
      ++pos;
      uint32_t power = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        power = natural();
      }
      if (!eat('(')) fail("expected ( after T");
      Term inner = term();
      if (!eat(')')) fail("expected )");
      Poly xp = Poly::monomial(Scalar::one(field), power);
      return inner.scaled(xp);
    }
    if (pos < s.size() && s[pos] == '0' &&
        (pos + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos + 1])))) {
      ++pos;
      return Term();
    }
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      Term inner = term();
      if (!eat(')')) fail("expected )");
      return inner;
    }
    return Term::var(variable(), field);
  }

  Term addend() {
    skip_ws();
    if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      Scalar q = scalar();
      if (eat('*')) {
        Term t = addend_tail();
        return t.scaled(Poly::constant(q));
      }
      // bare scalar only makes sense as coefficient of nothing; require 0
      if (q.is_zero()) return Term();
      fail("bare nonzero scalar is not a vector term");
    }
    return addend_tail();
  }

  Term addend_tail() {
    skip_ws();
    if (lookahead_word("poly") || lookahead_word("projim") || lookahead_word("projker") ||
        lookahead_word("inv")) {
      RcElem r = rc_chain();
      if (!eat('(')) fail("expected ( after ring coefficient");
      Term inner = term();
      if (!eat(')')) fail("expected )");
      return inner.scaled(r);
    }
    return primary();
  }

  Term term() {
    skip_ws();
    bool neg = false;
    if (eat('-')) neg = true;
    Term acc = addend();
    if (neg) acc = -acc;
    while (true) {
      skip_ws();
      if (eat('+'))
        acc = acc + addend();
      else if (eat('-'))
        acc = acc - addend();
      else
        break;
    }
    return acc;
  }

  FormulaPtr atom() {
    Term lhs = term();
    skip_ws();
    bool neq = false;
    if (eat('!')) {
      if (!eat('=')) fail("expected = after !");
      neq = true;
    } else if (!eat('=')) {
      fail("expected = or != in atom");
    }
    Term rhs = term();
    FormulaPtr a = f_atom(lhs - rhs);
    return neq ? f_not(a) : a;
  }

  FormulaPtr unary() {
    skip_ws();
    if (eat('!')) return f_not(unary());
    if (peek() == '(') {
      // parenthesized formula or a term paren: try formula first
      size_t save = pos;
      ++pos;
      try {
        FormulaPtr f = formula();
        if (!eat(')')) fail("expected )");
        skip_ws();
        // an atom operator after the paren means it was a term paren
        if (pos < s.size() && (s[pos] == '=' || s[pos] == '!' || s[pos] == '+' ||
                               s[pos] == '-')) {
          pos = save;
          return atom();
        }
        return f;
      } catch (const error&) {
        pos = save;
        return atom();
      }
    }
    if (lookahead_word("E") || lookahead_word("A")) return formula();
    return atom();
  }

  FormulaPtr conj() {
    FormulaPtr f = unary();
    while (eat('&')) f = f_and(f, unary());
    return f;
  }

  FormulaPtr disj() {
    FormulaPtr f = conj();
    while (eat('|')) f = f_or(f, conj());
    return f;
  }

  FormulaPtr formula() {
    skip_ws();
    if (lookahead_word("E")) {
      pos += 1;
      Var v = variable();
      if (!eat('.')) fail("expected . after quantifier");
      return f_exists(v, formula());
    }
    if (lookahead_word("A")) {
      pos += 1;
      Var v = variable();
      if (!eat('.')) fail("expected . after quantifier");
      return f_forall(v, formula());
    }
    return disj();
  }
};

}  // namespace

FormulaPtr fml_parse(const std::string& src, const FieldSpec& field,
                     const KernelConfig* cfg) {
  FmlParser p(src, field, cfg);
  FormulaPtr f = p.formula();
  p.skip_ws();
  if (p.pos != src.size())
    throw error("fml_parse: trailing input at offset " + std::to_string(p.pos));
  return f;
}

// ---------------------------------------------------------------------------
// Printer.

namespace {

void print_formula(std::ostringstream& out, const FormulaPtr& f, int parent_prec);

// precedence: or = 1, and = 2, not = 3
void print_binary(std::ostringstream& out, const FormulaPtr& f, int prec, const char* op,
                  int parent_prec) {
  bool paren = prec < parent_prec;
  if (paren) out << "(";
  print_formula(out, f->a, prec);
  out << " " << op << " ";
  // parenthesize right-nested same-operator children: parsing is
  // left-associative and must rebuild the exact tree
  print_formula(out, f->b, prec + 1);
  if (paren) out << ")";
}

void print_formula(std::ostringstream& out, const FormulaPtr& f, int parent_prec) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      out << f->atom.str() << " = 0";
      return;
    case Formula::Kind::Not:
      if (f->a->kind == Formula::Kind::Atom) {
        out << f->a->atom.str() << " != 0";
        return;
      }
      out << "!";
      print_formula(out, f->a, 3);
      return;
    case Formula::Kind::And:
      print_binary(out, f, 2, "&", parent_prec);
      return;
    case Formula::Kind::Or:
      print_binary(out, f, 1, "|", parent_prec);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool paren = parent_prec > 0;
      if (paren) out << "(";
      out << (f->kind == Formula::Kind::Exists ? "E " : "A ") << f->qvar.str() << ". ";
      print_formula(out, f->a, 0);
      if (paren) out << ")";
      return;
    }
  }
}

}  // namespace

std::string fml_print(const FormulaPtr& f) {
  std::ostringstream out;
  print_formula(out, f, 0);
  return out.str();
}

}  // namespace endoq
