#include "endoq/seqsys.hpp"

#include <sstream>

namespace endoq {

std::string ParamTerm::str() const {
  if (coeffs.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [y, r] : coeffs) {
    if (!first) out << " + ";
    first = false;
    out << "(" << r.str() << ")(" << y.str() << ")";
  }
  return out.str();
}

ParamTerm pt_add(const ParamTerm& a, const ParamTerm& b) {
  ParamTerm r = a;
  for (const auto& [y, e] : b.coeffs) {
    auto it = r.coeffs.find(y);
    if (it == r.coeffs.end()) {
      if (!e.is_zero()) r.coeffs.emplace(y, e);
      continue;
    }
    RcElem sum = rc_add(it->second, e);
    if (sum.is_zero())
      r.coeffs.erase(it);
    else
      it->second = sum;
  }
  return r;
}

ParamTerm pt_neg(const ParamTerm& a) {
  ParamTerm r;
  for (const auto& [y, e] : a.coeffs) r.coeffs.emplace(y, rc_neg(e));
  return r;
}

ParamTerm pt_apply(const RcElem& r, const ParamTerm& a) {
  ParamTerm out;
  if (r.is_zero()) return out;
  for (const auto& [y, e] : a.coeffs) {
    RcElem m = rc_mul(r, e);
    if (!m.is_zero()) out.coeffs.emplace(y, m);
  }
  return out;
}

ParamTerm pt_single(const Var& y, RcElem r) {
  ParamTerm out;
  if (!r.is_zero()) out.coeffs.emplace(y, std::move(r));
  return out;
}

bool pt_equal(const ParamTerm& a, const ParamTerm& b) {
  if (a.coeffs.size() != b.coeffs.size()) return false;
  auto it = a.coeffs.begin();
  auto jt = b.coeffs.begin();
  for (; it != a.coeffs.end(); ++it, ++jt)
    if (!(it->first == jt->first) || !(it->second == jt->second)) return false;
  return true;
}

FpVec pt_eval(const ParamTerm& a, const FinModel& m, const Assignment& params) {
  FpVec acc(m.dim, 0);
  for (const auto& [y, r] : a.coeffs) {
    auto it = params.find(y);
    if (it == params.end()) throw error("pt_eval: unbound parameter " + y.str());
    FpVec part = rc_eval_matrix(r, m).mul(it->second);
    for (uint32_t i = 0; i < m.dim; ++i) acc[i] = (acc[i] + part[i]) % m.field.p;
  }
  return acc;
}

std::vector<Var> SeqSystem::all_vars() const {
  std::vector<Var> out = li_vars;
  for (const SeqRow& r : rows) out.push_back(r.var);
  return out;
}

std::vector<Var> SeqSystem::params() const {
  std::vector<Var> out;
  for (const SeqRow& r : rows) out.push_back(r.param);
  return out;
}

std::string SeqSystem::str() const {
  std::ostringstream out;
  out << "S:";
  bool first = true;
  for (const SeqRow& r : rows) {
    if (!first) out << ";";
    first = false;
    out << " (" << r.f.str() << ")^" << r.q << " [" << r.var.str() << "] = "
        << r.param.str();
  }
  if (!li_vars.empty()) {
    if (!rows.empty()) out << ";";
    out << " li:";
    for (size_t i = 0; i < li_vars.size(); ++i)
      out << (i ? ", " : " ") << li_vars[i].str();
  }
  if (rows.empty() && li_vars.empty()) out << " (empty)";
  return out.str();
}

void ss_validate(const SeqSystem& s) {
  if (s.cfg.is_algebraic() && !s.li_vars.empty())
    throw error("SeqSystem: algebraic configurations admit no li variables");
  std::set<Var> seen;
  for (const Var& v : s.li_vars)
    if (!seen.insert(v).second) throw error("SeqSystem: duplicate variable " + v.str());
  std::set<Var> pseen;
  for (const SeqRow& r : s.rows) {
    if (!seen.insert(r.var).second)
      throw error("SeqSystem: duplicate variable " + r.var.str());
    if (!pseen.insert(r.param).second)
      throw error("SeqSystem: duplicate parameter " + r.param.str());
    ExtNat c = kc_classify(s.cfg, r.f);
    if (!c.is_inf() && c.v == 0)
      throw error("SeqSystem: row factor " + r.f.str() + " has C = 0");
    if (r.q == 0 || (!c.is_inf() && r.q > c.v))
      throw error("SeqSystem: row exponent " + std::to_string(r.q) +
                  " outside 1 <= q <= C(f) for f = " + r.f.str());
  }
}

RankDegree ss_rank_degree(const SeqSystem& s) {
  RankDegree rd;
  rd.rank = static_cast<uint32_t>(s.li_vars.size());
  for (const SeqRow& r : s.rows)
    rd.degree += static_cast<uint64_t>(r.f.deg()) * r.q;
  return rd;
}

bool ss_compatible(const SeqSystem& s, const Assignment& params, const FinModel& m) {
  for (const SeqRow& r : s.rows) {
    ExtNat c = kc_classify(s.cfg, r.f);
    if (c.is_inf()) continue;  // Def 2.13 restricts only 0 < C < infinity
    auto it = params.find(r.param);
    if (it == params.end())
      throw error("ss_compatible: missing parameter " + r.param.str());
    FpMat a = poly_apply(poly_pow(r.f, c.v - r.q), m.theta);
    FpVec img = a.mul(it->second);
    for (uint32_t i = 0; i < m.dim; ++i)
      if (img[i] != 0) return false;
  }
  return true;
}

bool ss_bounded_check(const FormulaPtr& psi, const SeqSystem& s) {
  std::map<std::string, uint32_t> bound;  // var name -> deg(f^q)
  for (const SeqRow& r : s.rows)
    bound[r.var.name] = static_cast<uint32_t>(r.f.deg()) * r.q;
  for (const Var& v : all_vars(psi)) {
    if (!v.power) continue;
    auto it = bound.find(v.name);
    if (it != bound.end() && *v.power >= it->second) return false;
  }
  return true;
}

FormulaPtr ss_euclid_substitute(const FormulaPtr& phi, const SeqSystem& s) {
  switch (phi->kind) {
    case Formula::Kind::Atom: {
      Term t;
      ParamTerm unused;
      Term extra;
      for (const auto& [v, c] : phi->atom.coeffs()) {
        const SeqRow* row = nullptr;
        for (const SeqRow& r : s.rows)
          if (r.var == v) row = &r;
        if (!row || !std::holds_alternative<Poly>(c)) {
          t = t + Term::single(v, c);
          continue;
        }
        Poly fq = poly_pow(row->f, row->q);
        const Poly& lambda = std::get<Poly>(c);
        if (lambda.deg() < fq.deg()) {
          t = t + Term::single(v, c);
          continue;
        }
        auto [chi, rem] = euclid_div(lambda, fq);
        if (!rem.is_zero()) t = t + Term::single(v, rem);
        t = t + Term::single(row->param, chi);
      }
      return f_atom(t + extra);
    }
    case Formula::Kind::Not:
      return f_not(ss_euclid_substitute(phi->a, s));
    case Formula::Kind::And:
      return f_and(ss_euclid_substitute(phi->a, s), ss_euclid_substitute(phi->b, s));
    case Formula::Kind::Or:
      return f_or(ss_euclid_substitute(phi->a, s), ss_euclid_substitute(phi->b, s));
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      FormulaPtr body = ss_euclid_substitute(phi->a, s);
      return phi->kind == Formula::Kind::Exists ? f_exists(phi->qvar, body)
                                                : f_forall(phi->qvar, body);
    }
  }
  return phi;
}

TransformEq eq_from_literal(const LinLiteral& lit, const SeqSystem& s) {
  if (lit.negated) throw error("eq_from_literal: equations only");
  TransformEq eq;
  std::set<Var> sysvars;
  for (const Var& v : s.all_vars()) sysvars.insert(v);
  for (const auto& [v, r] : lit.coeffs) {
    if (sysvars.count(v)) {
      if (!r.den().is_one() || !r.corrections().empty())
        throw unsupported_transform(
            "eq_from_literal: non-polynomial coefficient on a system variable");
      eq.lhs.emplace(v, r.num());
    } else {
      // anything else is a parameter; move to the right-hand side
      eq.rhs = pt_add(eq.rhs, pt_single(v, rc_neg(r)));
    }
  }
  return eq;
}

// ---------------------------------------------------------------------------
// Parsing and serialization.

SeqSystem ss_parse(const std::string& src, const KernelConfig& cfg) {
  SeqSystem s;
  s.cfg = cfg;
  size_t pos = 0;
  auto skip_ws = [&]() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  };
  auto fail = [&](const std::string& m) -> void {
    throw error("ss_parse: " + m + " at offset " + std::to_string(pos));
  };
  skip_ws();
  if (src.compare(pos, 2, "S:") != 0) fail("expected S:");
  pos += 2;
  auto parse_var = [&]() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() && (std::islower(static_cast<unsigned char>(src[pos])) ||
                                std::isdigit(static_cast<unsigned char>(src[pos]))))
      ++pos;
    if (pos == start) fail("expected variable");
    return Var(src.substr(start, pos - start));
  };
  while (true) {
    skip_ws();
    if (pos >= src.size()) break;
    if (src.compare(pos, 3, "li:") == 0) {
      pos += 3;
      while (true) {
        s.li_vars.push_back(parse_var());
        skip_ws();
        if (pos < src.size() && src[pos] == ',') {
          ++pos;
          continue;
        }
        break;
      }
      break;
    }
    // row: (poly)^q [var] = param
    skip_ws();
    if (pos >= src.size() || src[pos] != '(') fail("expected (");
    size_t close = src.find(')', pos);
    if (close == std::string::npos) fail("unterminated (");
    Poly f = parse_poly(src.substr(pos + 1, close - pos - 1), cfg.field);
    pos = close + 1;
    uint32_t q = 1;
    skip_ws();
    if (pos < src.size() && src[pos] == '^') {
      ++pos;
      size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      q = static_cast<uint32_t>(std::stoul(src.substr(start, pos - start)));
    }
    skip_ws();
    if (pos >= src.size() || src[pos] != '[') fail("expected [");
    ++pos;
    Var v = parse_var();
    skip_ws();
    if (pos >= src.size() || src[pos] != ']') fail("expected ]");
    ++pos;
    skip_ws();
    if (pos >= src.size() || src[pos] != '=') fail("expected =");
    ++pos;
    Var y = parse_var();
    s.rows.push_back(SeqRow{v, f, q, y});
    skip_ws();
    if (pos < src.size() && src[pos] == ';') {
      ++pos;
      continue;
    }
    break;
  }
  ss_validate(s);
  return s;
}

nlohmann::json ss_to_json(const SeqSystem& s) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const SeqRow& r : s.rows)
    rows.push_back({{"var", r.var.str()},
                    {"f", r.f.str()},
                    {"q", r.q},
                    {"param", r.param.str()}});
  j["rows"] = rows;
  nlohmann::json li = nlohmann::json::array();
  for (const Var& v : s.li_vars) li.push_back(v.str());
  j["li"] = li;
  return j;
}

SeqSystem ss_from_json(const nlohmann::json& j, const KernelConfig& cfg) {
  SeqSystem s;
  s.cfg = cfg;
  for (const auto& rj : j.at("rows"))
    s.rows.push_back(SeqRow{Var(rj.at("var").get<std::string>()),
                            parse_poly(rj.at("f").get<std::string>(), cfg.field),
                            rj.at("q").get<uint32_t>(),
                            Var(rj.at("param").get<std::string>())});
  if (j.contains("li"))
    for (const auto& v : j.at("li")) s.li_vars.push_back(Var(v.get<std::string>()));
  ss_validate(s);
  return s;
}

}  // namespace endoq
