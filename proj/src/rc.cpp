#include "endoq/rc.hpp"

#include <cctype>
#include <sstream>

namespace endoq {

namespace {

Poly fpow(const Poly& f, ExtNat c, const char* who) {
  if (c.is_inf()) throw error(std::string(who) + ": infinite exponent");
  return poly_pow(f, c.v);
}

// residue of num/den mod f^C(f); requires v_f(den) = 0
Poly global_residue(const KernelConfig& cfg, const Poly& num, const Poly& den,
                    const Poly& f) {
  ExtNat c = kc_classify(cfg, f);
  Poly mod = fpow(f, c, "global_residue");
  Poly n = poly_mod(num, mod);
  Poly d = poly_mod(den, mod);
  return poly_mod(n * poly_invmod(d, mod), mod);
}

bool den_factors_ok(const KernelConfig& cfg, const Poly& den) {
  if (den.is_one()) return true;
  for (const auto& [f, m] : poly_factor(den).factors)
    if (kc_classify(cfg, f).is_inf()) return false;
  return true;
}

}  // namespace

RcElem rc_raw(const KernelConfig& cfg, Poly num, Poly den,
              std::map<Poly, Poly, PolyLess> corr) {
  if (den.is_zero()) throw error("RcElem: zero denominator");
  RcElem e;
  e.cfg_ = cfg;

  if (cfg.is_algebraic()) {
    if (!corr.empty()) throw error("RcElem: corrections not allowed for algebraic C");
    Poly mipo = kc_mipo(cfg);
    Poly d = poly_mod(den, mipo);
    // denominators must act invertibly mod MiPo
    Bezout bz = poly_gcd_bezout(d, mipo);
    if (!bz.g.is_one())
      throw error("RcElem: denominator " + den.str() + " not invertible mod MiPo");
    e.num_ = poly_mod(num * poly_mod(bz.u, mipo), mipo);
    e.den_ = Poly::one(cfg.field);
    return e;
  }

  // reduce the fraction to lowest terms with monic denominator
  if (num.is_zero()) {
    den = Poly::one(cfg.field);
  } else {
    Poly g = poly_gcd(num, den);
    if (g.deg() > 0) {
      num = euclid_div(num, g).first;
      den = euclid_div(den, g).first;
    }
    Scalar lc = den.lead();
    den = den.monic();
    num = num.scaled(lc.inv());
  }
  if (!den_factors_ok(cfg, den))
    throw error("RcElem: denominator " + den.str() + " has a factor with C = infinity");

  // normalize corrections: reduce mod f^C, drop ones equal to the global residue
  std::map<Poly, Poly, PolyLess> kept;
  for (auto& [f, r] : corr) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf() || c.v == 0)
      throw error("RcElem: correction at " + f.str() + " outside 0 < C < infinity");
    Poly mod = poly_pow(f, c.v);
    Poly rr = poly_mod(r, mod);
    std::optional<uint32_t> vden = poly_valuation(den, f);
    if (vden.has_value() && *vden == 0) {
      if (global_residue(cfg, num, den, f) == rr) continue;
    }
    kept[f] = rr;
  }
  // a correction is mandatory wherever the denominator vanishes locally
  if (!den.is_one())
    for (const auto& [f, m] : poly_factor(den).factors) {
      ExtNat c = kc_classify(cfg, f);
      if (!c.is_inf() && c.v > 0 && !kept.count(f))
        throw error("RcElem: missing correction at " + f.str() +
                    " where the denominator vanishes");
    }
  e.num_ = std::move(num);
  e.den_ = std::move(den);
  e.corr_ = std::move(kept);
  return e;
}

bool RcElem::is_zero() const { return num_.is_zero() && corr_.empty(); }

bool RcElem::is_identity() const {
  return num_.is_one() && den_.is_one() && corr_.empty();
}

bool RcElem::operator==(const RcElem& o) const {
  return cfg_ == o.cfg_ && num_ == o.num_ && den_ == o.den_ && corr_ == o.corr_;
}

int RcElem::cmp(const RcElem& o) const {
  if (int c = poly_cmp(num_, o.num_)) return c;
  if (int c = poly_cmp(den_, o.den_)) return c;
  auto it = corr_.begin();
  auto jt = o.corr_.begin();
  for (; it != corr_.end() && jt != o.corr_.end(); ++it, ++jt) {
    if (int c = poly_cmp(it->first, jt->first)) return c;
    if (int c = poly_cmp(it->second, jt->second)) return c;
  }
  if (it != corr_.end()) return 1;
  if (jt != o.corr_.end()) return -1;
  return 0;
}

RcElem rc_zero(const KernelConfig& cfg) {
  return rc_raw(cfg, Poly::zero(cfg.field), Poly::one(cfg.field), {});
}

RcElem rc_one(const KernelConfig& cfg) {
  return rc_raw(cfg, Poly::one(cfg.field), Poly::one(cfg.field), {});
}

RcElem rc_scalar(const KernelConfig& cfg, const Scalar& q) {
  return rc_raw(cfg, Poly::constant(q), Poly::one(cfg.field), {});
}

RcElem rc_rho(const KernelConfig& cfg, const Poly& rho) {
  return rc_raw(cfg, rho, Poly::one(cfg.field), {});
}

RcElem rc_projim(const KernelConfig& cfg, const std::vector<Poly>& F) {
  for (const Poly& f : F) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf() || c.v == 0)
      throw error("rc_projim: factor " + f.str() + " not in 0 < C < infinity");
  }
  if (F.empty()) return rc_one(cfg);
  if (cfg.is_algebraic()) {
    // CRT idempotent: 0 on the F-components, 1 elsewhere
    Poly mipo = kc_mipo(cfg);
    Poly prod = Poly::one(cfg.field);
    for (const Poly& f : F) prod = prod * fpow(f, kc_classify(cfg, f), "rc_projim");
    Poly rest = euclid_div(mipo, prod).first;
    if (rest.is_one()) return rc_zero(cfg);
    Bezout bz = poly_gcd_bezout(prod, rest);  // u*prod + v*rest = 1
    Poly r = poly_mod(bz.u * prod, mipo);     // 0 mod prod, 1 mod rest
    return rc_raw(cfg, r, Poly::one(cfg.field), {});
  }
  std::map<Poly, Poly, PolyLess> corr;
  for (const Poly& f : F) corr[f] = Poly::zero(cfg.field);
  return rc_raw(cfg, Poly::one(cfg.field), Poly::one(cfg.field), std::move(corr));
}

RcElem rc_projker(const KernelConfig& cfg, const std::vector<Poly>& F) {
  return rc_sub(rc_one(cfg), rc_projim(cfg, F));
}

RcElem rc_inv(const KernelConfig& cfg, const Poly& eta) {
  if (eta.is_zero()) throw error("rc_inv: zero polynomial");
  Scalar lc = eta.lead();
  Poly e = eta.monic();
  if (e.is_one()) return rc_scalar(cfg, lc.inv());
  Factorization fac = poly_factor(e);
  std::vector<Poly> finite_pos;
  for (const auto& [f, m] : fac.factors) {
    ExtNat c = kc_classify(cfg, f);
    if (c.is_inf())
      throw error("rc_inv: factor " + f.str() + " of " + eta.str() + " has C = infinity");
    if (c.v > 0) finite_pos.push_back(f);
  }
  if (cfg.is_algebraic()) {
    Poly mipo = kc_mipo(cfg);
    Poly prod = Poly::one(cfg.field);
    for (const Poly& f : finite_pos) prod = prod * fpow(f, kc_classify(cfg, f), "rc_inv");
    prod = poly_gcd(prod, mipo);
    Poly rest = euclid_div(mipo, prod).first;  // eta invertible mod rest
    if (rest.is_one()) return rc_zero(cfg);
    Poly einv = poly_invmod(poly_mod(e, rest), rest);
    if (prod.is_one())
      return rc_raw(cfg, einv.scaled(lc.inv()), Poly::one(cfg.field), {});
    Bezout bz = poly_gcd_bezout(prod, rest);  // u*prod + v*rest = 1
    Poly r = poly_mod(bz.u * prod * einv, mipo);
    return rc_raw(cfg, r.scaled(lc.inv()), Poly::one(cfg.field), {});
  }
  std::map<Poly, Poly, PolyLess> corr;
  for (const Poly& f : finite_pos) corr[f] = Poly::zero(cfg.field);
  return rc_raw(cfg, Poly::constant(lc.inv()), e, std::move(corr));
}

Poly rc_local(const RcElem& a, const Poly& f) {
  const KernelConfig& cfg = a.cfg();
  ExtNat c = kc_classify(cfg, f);
  if (c.is_inf() || c.v == 0)
    throw error("rc_local: factor " + f.str() + " not in 0 < C < infinity");
  if (cfg.is_algebraic()) return poly_mod(a.num(), poly_pow(f, c.v));
  auto it = a.corrections().find(f);
  if (it != a.corrections().end()) return it->second;
  return global_residue(cfg, a.num(), a.den(), f);
}

namespace {

void check_cfg(const RcElem& a, const RcElem& b, const char* who) {
  if (!(a.cfg() == b.cfg())) throw error(std::string(who) + ": configuration mismatch");
}

std::set<Poly, PolyLess> corr_support(const RcElem& a, const RcElem& b) {
  std::set<Poly, PolyLess> s;
  for (const auto& [f, r] : a.corrections()) s.insert(f);
  for (const auto& [f, r] : b.corrections()) s.insert(f);
  return s;
}

}  // namespace

RcElem rc_add(const RcElem& a, const RcElem& b) {
  check_cfg(a, b, "rc_add");
  const KernelConfig& cfg = a.cfg();
  Poly num = a.num() * b.den() + b.num() * a.den();
  Poly den = a.den() * b.den();
  std::map<Poly, Poly, PolyLess> corr;
  if (!cfg.is_algebraic())
    for (const Poly& f : corr_support(a, b)) {
      Poly mod = fpow(f, kc_classify(cfg, f), "rc_add");
      corr[f] = poly_mod(rc_local(a, f) + rc_local(b, f), mod);
    }
  return rc_raw(cfg, std::move(num), std::move(den), std::move(corr));
}

RcElem rc_neg(const RcElem& a) {
  std::map<Poly, Poly, PolyLess> corr;
  for (const auto& [f, r] : a.corrections()) corr[f] = -r;
  return rc_raw(a.cfg(), -a.num(), a.den(), std::move(corr));
}

RcElem rc_sub(const RcElem& a, const RcElem& b) { return rc_add(a, rc_neg(b)); }

RcElem rc_mul(const RcElem& a, const RcElem& b) {
  check_cfg(a, b, "rc_mul");
  const KernelConfig& cfg = a.cfg();
  Poly num = a.num() * b.num();
  Poly den = a.den() * b.den();
  std::map<Poly, Poly, PolyLess> corr;
  if (!cfg.is_algebraic())
    for (const Poly& f : corr_support(a, b)) {
      Poly mod = fpow(f, kc_classify(cfg, f), "rc_mul");
      corr[f] = poly_mod(rc_local(a, f) * rc_local(b, f), mod);
    }
  return rc_raw(cfg, std::move(num), std::move(den), std::move(corr));
}

bool rc_is_field(const KernelConfig& cfg) {
  if (cfg.is_algebraic())
    return cfg.entries.size() == 1 && cfg.entries.begin()->second == ExtNat::fin(1);
  return cfg.def == KernelConfig::Default::Zero && cfg.entries.empty();
}

std::vector<Poly> rc_touched_factors(const RcElem& a) {
  const KernelConfig& cfg = a.cfg();
  std::set<Poly, PolyLess> s;
  for (const auto& [f, r] : a.corrections()) s.insert(f);
  auto add_factors = [&](const Poly& p) {
    if (p.deg() < 1) return;
    for (const auto& [f, m] : poly_factor(p).factors) {
      ExtNat c = kc_classify(cfg, f);
      if (!c.is_inf() && c.v > 0) s.insert(f);
    }
  };
  if (cfg.is_algebraic()) {
    for (const auto& [f, v] : cfg.entries) s.insert(f);
  } else {
    add_factors(a.num());
    add_factors(a.den());
  }
  return {s.begin(), s.end()};
}

bool rc_is_unit(const RcElem& a) {
  const KernelConfig& cfg = a.cfg();
  if (cfg.is_algebraic())
    return !a.num().is_zero() && poly_gcd(a.num(), kc_mipo(cfg)).is_one();
  if (a.num().is_zero()) return false;
  for (const auto& [f, m] : poly_factor(a.num()).factors)
    if (kc_classify(cfg, f).is_inf()) return false;
  for (const Poly& f : rc_touched_factors(a)) {
    Poly loc = rc_local(a, f);
    if (loc.is_zero() || poly_valuation(loc, f).value_or(1) > 0) return false;
  }
  return true;
}

RcElem rc_inverse(const RcElem& a) {
  if (!rc_is_unit(a)) throw error("rc_inverse: not a unit");
  const KernelConfig& cfg = a.cfg();
  if (cfg.is_algebraic())
    return rc_raw(cfg, poly_invmod(a.num(), kc_mipo(cfg)), Poly::one(cfg.field), {});
  std::map<Poly, Poly, PolyLess> corr;
  for (const Poly& f : rc_touched_factors(a)) {
    Poly mod = fpow(f, kc_classify(cfg, f), "rc_inverse");
    corr[f] = poly_invmod(rc_local(a, f), mod);
  }
  return rc_raw(cfg, a.den(), a.num(), std::move(corr));
}

KernelDescriptor rc_kernel_descriptor(const RcElem& a) {
  const KernelConfig& cfg = a.cfg();
  KernelDescriptor d;
  for (const Poly& f : rc_touched_factors(a)) {
    ExtNat c = kc_classify(cfg, f);
    Poly loc = rc_local(a, f);
    uint32_t s = loc.is_zero() ? c.v : std::min(poly_valuation(loc, f).value_or(c.v), c.v);
    d.local_exponents[f] = s;
  }
  if (!cfg.is_algebraic()) {
    if (a.num().is_zero()) {
      d.generic_zero = true;
    } else {
      for (const auto& [g, m] : poly_factor(a.num()).factors)
        if (kc_classify(cfg, g).is_inf()) d.infinite_type.insert(g);
    }
  }
  bool inj = !d.generic_zero && d.infinite_type.empty();
  for (const auto& [f, s] : d.local_exponents)
    if (s > 0) inj = false;
  d.injective_on_ec = inj;
  d.kernel_infinite_on_ec = !inj;
  return d;
}

RcElem rc_div_exact(const RcElem& c, const RcElem& a) {
  check_cfg(c, a, "rc_div_exact");
  const KernelConfig& cfg = c.cfg();
  if (cfg.is_algebraic()) {
    Poly mipo = kc_mipo(cfg);
    Poly g = poly_gcd(a.num().is_zero() ? mipo : a.num(), mipo);
    if (!divides(g, c.num().is_zero() ? mipo : c.num()) && !c.num().is_zero())
      throw error("rc_div_exact: no exact quotient");
    if (a.num().is_zero()) {
      if (!c.num().is_zero()) throw error("rc_div_exact: division by the zero map");
      return rc_zero(cfg);
    }
    Poly a1 = euclid_div(a.num(), g).first;
    Poly c1 = c.num().is_zero() ? Poly::zero(cfg.field) : euclid_div(c.num(), g).first;
    Poly m1 = euclid_div(mipo, g).first;
    Poly x = m1.is_one() ? Poly::zero(cfg.field)
                         : poly_mod(c1 * poly_invmod(poly_mod(a1, m1), m1), m1);
    RcElem r = rc_rho(cfg, x);
    if (!(rc_mul(r, a) == c)) throw error("rc_div_exact: no exact quotient");
    return r;
  }
  if (a.num().is_zero()) throw error("rc_div_exact: zero global divisor");
  Poly num = c.num() * a.den();
  Poly den = c.den() * a.num();
  Poly g = poly_gcd(num, den);
  if (g.deg() > 0 && !num.is_zero()) {
    num = euclid_div(num, g).first;
    den = euclid_div(den, g).first;
  }
  if (num.is_zero()) den = Poly::one(cfg.field);
  if (!den_factors_ok(cfg, den)) throw error("rc_div_exact: no exact quotient");
  std::set<Poly, PolyLess> touched;
  for (const Poly& f : rc_touched_factors(a)) touched.insert(f);
  for (const Poly& f : rc_touched_factors(c)) touched.insert(f);
  std::map<Poly, Poly, PolyLess> corr;
  for (const Poly& f : touched) {
    ExtNat cv = kc_classify(cfg, f);
    Poly mod = poly_pow(f, cv.v);
    Poly la = rc_local(a, f), lc = rc_local(c, f);
    uint32_t sa = la.is_zero() ? cv.v : std::min(*poly_valuation(la, f), cv.v);
    uint32_t sc = lc.is_zero() ? cv.v : std::min(*poly_valuation(lc, f), cv.v);
    if (sc < sa) throw error("rc_div_exact: no exact quotient at " + f.str());
    if (lc.is_zero()) {
      corr[f] = Poly::zero(cfg.field);
      continue;
    }
    // la = f^sa * u, lc = f^sc * w  =>  x = f^(sc-sa) * w * u^{-1}
    Poly u = la;
    for (uint32_t i = 0; i < sa; ++i) u = euclid_div(u, f).first;
    Poly w = lc;
    for (uint32_t i = 0; i < sc; ++i) w = euclid_div(w, f).first;
    Poly x =
        poly_mod(poly_pow(f, sc - sa) * w * poly_invmod(poly_mod(u, mod), mod), mod);
    corr[f] = x;
  }
  RcElem r = rc_raw(cfg, std::move(num), std::move(den), std::move(corr));
  if (!(rc_mul(r, a) == c)) throw error("rc_div_exact: no exact quotient");
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation on finite models.

FpMat rc_eval_matrix(const RcElem& a, const FinModel& m) {
  const KernelConfig& cfg = a.cfg();
  if (!(cfg == m.cfg)) throw error("rc_eval_matrix: configuration mismatch");
  const FieldSpec& fs = cfg.field;
  if (cfg.is_algebraic()) return poly_apply(a.num(), m.theta);

  std::vector<Poly> F = rc_touched_factors(a);
  Decomposition d = fm_decompose(m, F);  // checks image-completeness
  // change of basis P = [im | kernels]; theta is block diagonal there
  std::vector<FpVec> cols = d.im_basis;
  std::vector<std::pair<Poly, size_t>> ranges;
  for (const Poly& f : F) {
    ranges.emplace_back(f, d.ker_bases.at(f).size());
    for (const auto& v : d.ker_bases.at(f)) cols.push_back(v);
  }
  FpMat P = mat_from_columns(fs.p, m.dim, cols);
  FpMat Pinv = mat_inverse(P);
  FpMat theta_t = Pinv * m.theta * P;
  uint32_t nim = static_cast<uint32_t>(d.im_basis.size());
  FpMat result_t(fs.p, m.dim, m.dim);
  {
    FpMat tim(fs.p, nim, nim);
    for (uint32_t i = 0; i < nim; ++i)
      for (uint32_t j = 0; j < nim; ++j) tim.at(i, j) = theta_t.at(i, j);
    FpMat dm = poly_apply(a.den(), tim);
    FpMat gen = poly_apply(a.num(), tim) * mat_inverse(dm);
    for (uint32_t i = 0; i < nim; ++i)
      for (uint32_t j = 0; j < nim; ++j) result_t.at(i, j) = gen.at(i, j);
  }
  uint32_t off = nim;
  for (const auto& [f, sz] : ranges) {
    uint32_t n = static_cast<uint32_t>(sz);
    FpMat tf(fs.p, n, n);
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t j = 0; j < n; ++j) tf.at(i, j) = theta_t.at(off + i, off + j);
    FpMat loc = poly_apply(rc_local(a, f), tf);
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t j = 0; j < n; ++j) result_t.at(off + i, off + j) = loc.at(i, j);
    off += n;
  }
  return P * result_t * Pinv;
}

// ---------------------------------------------------------------------------
// Printing and parsing.

std::string RcElem::str() const {
  if (cfg_.is_algebraic()) return "poly(" + num_.str() + ")";
  std::ostringstream out;
  bool printed = false;
  if (!num_.is_zero()) {
    out << "poly(" << num_.str() << ")";
    if (!den_.is_one()) out << "*inv(" << den_.str() << ")";
    if (!corr_.empty()) {
      out << "*projim{";
      bool first = true;
      for (const auto& [f, r] : corr_) {
        if (!first) out << ", ";
        first = false;
        out << f.str();
      }
      out << "}";
    }
    printed = true;
  }
  for (const auto& [f, r] : corr_) {
    if (r.is_zero()) continue;
    if (printed) out << " + ";
    out << "poly(" << r.str() << ")*projker{" << f.str() << "}";
    printed = true;
  }
  if (!printed) return "poly(0)";
  return out.str();
}

namespace {

struct RcParser {
  const std::string& s;
  size_t pos = 0;
  const KernelConfig& cfg;

  RcParser(const std::string& src, const KernelConfig& c) : s(src), cfg(c) {}

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
  bool eat_word(const std::string& w) {
    skip_ws();
    if (s.compare(pos, w.size(), w) == 0) {
      pos += w.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& m) {
    throw error("rc_parse: " + m + " at offset " + std::to_string(pos));
  }

  std::string until(char close) {
    size_t start = pos;
    int depth = 0;
    while (pos < s.size()) {
      char c = s[pos];
      if (c == '(' || c == '{') ++depth;
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

  std::vector<Poly> poly_list(const std::string& body) {
    std::vector<Poly> out;
    size_t start = 0;
    while (start <= body.size()) {
      size_t comma = body.find(',', start);
      std::string piece = comma == std::string::npos ? body.substr(start)
                                                     : body.substr(start, comma - start);
      bool blank = piece.find_first_not_of(" \t") == std::string::npos;
      if (!blank) out.push_back(parse_poly(piece, cfg.field));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  RcElem factor() {
    skip_ws();
    if (eat_word("poly")) {
      if (!eat('(')) fail("expected ( after poly");
      return rc_rho(cfg, parse_poly(until(')'), cfg.field));
    }
    if (eat_word("projim")) {
      if (!eat('{')) fail("expected { after projim");
      return rc_projim(cfg, poly_list(until('}')));
    }
    if (eat_word("projker")) {
      if (!eat('{')) fail("expected { after projker");
      return rc_projker(cfg, poly_list(until('}')));
    }
    if (eat_word("inv")) {
      if (!eat('(')) fail("expected ( after inv");
      return rc_inv(cfg, parse_poly(until(')'), cfg.field));
    }
    if (eat('(')) {
      RcElem e = expr();
      if (!eat(')')) fail("expected )");
      return e;
    }
    fail("expected poly/projim/projker/inv");
  }

  RcElem term() {
    RcElem e = factor();
    while (eat('*')) e = rc_mul(e, factor());
    return e;
  }

  RcElem expr() {
    skip_ws();
    bool neg = eat('-');
    RcElem e = term();
    if (neg) e = rc_neg(e);
    while (true) {
      skip_ws();
      if (eat('+'))
        e = rc_add(e, term());
      else if (eat('-'))
        e = rc_sub(e, term());
      else
        break;
    }
    return e;
  }
};

}  // namespace

RcElem rc_parse(const std::string& src, const KernelConfig& cfg) {
  RcParser p(src, cfg);
  RcElem e = p.expr();
  p.skip_ws();
  if (p.pos != src.size())
    throw error("rc_parse: trailing input at offset " + std::to_string(p.pos));
  return e;
}

}  // namespace endoq
