#include "endoq/kernel_config.hpp"

#include <sstream>

namespace endoq {

KernelConfig KernelConfig::c_infinity(const FieldSpec& f) {
  return KernelConfig{f, {}, Default::Infinity, ExtNat::inf()};
}

KernelConfig KernelConfig::c_zero(const FieldSpec& f) {
  return KernelConfig{f, {}, Default::Zero, ExtNat::inf()};
}

KernelConfig KernelConfig::algebraic(const FieldSpec& f,
                                     std::map<Poly, ExtNat, PolyLess> entries) {
  uint32_t d = 0;
  for (auto it = entries.begin(); it != entries.end();) {
    if (it->second.is_inf()) throw error("KernelConfig: algebraic entries must be finite");
    if (it->second.v == 0) {
      it = entries.erase(it);  // the default for algebraic configurations
      continue;
    }
    d += static_cast<uint32_t>(it->first.deg()) * it->second.v;
    ++it;
  }
  return KernelConfig{f, std::move(entries), Default::Zero, ExtNat::fin(d)};
}

KernelConfig KernelConfig::transcendental(const FieldSpec& f,
                                          std::map<Poly, ExtNat, PolyLess> entries,
                                          Default def) {
  ExtNat dv = def == Default::Zero ? ExtNat::fin(0) : ExtNat::inf();
  for (auto it = entries.begin(); it != entries.end();) {
    if (it->second == dv)
      it = entries.erase(it);
    else
      ++it;
  }
  return KernelConfig{f, std::move(entries), def, ExtNat::inf()};
}

KernelConfig KernelConfig::from_mipo(const Poly& mipo) {
  if (mipo.deg() < 1) throw error("KernelConfig: MiPo must have positive degree");
  Factorization fac = poly_factor(mipo.monic());
  std::map<Poly, ExtNat, PolyLess> e;
  for (const auto& [g, m] : fac.factors) e[g] = ExtNat::fin(m);
  return algebraic(mipo.field(), std::move(e));
}

bool KernelConfig::operator==(const KernelConfig& o) const {
  return field == o.field && def == o.def && degree == o.degree && entries == o.entries;
}

std::string KernelConfig::str() const {
  std::ostringstream out;
  if (is_algebraic()) {
    out << "algebraic over " << field.str() << ", MiPo = " << kc_mipo(*this).str();
    if (kc_is_trivial(*this)) out << " (trivial)";
  } else {
    out << "transcendental over " << field.str() << ", default "
        << (def == Default::Zero ? "0" : "inf");
    if (!entries.empty()) {
      out << ", {";
      bool first = true;
      for (const auto& [f, v] : entries) {
        if (!first) out << ", ";
        first = false;
        out << f.str() << " -> " << v.str();
      }
      out << "}";
    }
  }
  return out.str();
}

ExtNat kc_classify(const KernelConfig& cfg, const Poly& f) {
  if (f.field() != cfg.field) throw error("kc_classify: field mismatch");
  if (!f.is_monic() || !is_irreducible(f))
    throw error("kc_classify: argument must be monic irreducible");
  auto it = cfg.entries.find(f);
  if (it != cfg.entries.end()) return it->second;
  return cfg.default_value();
}

KcReport kc_validate(const KernelConfig& cfg) {
  KcReport rep;
  rep.algebraic = cfg.is_algebraic();
  auto fail = [&](const std::string& m) {
    rep.ok = false;
    rep.violations.push_back(m);
  };
  ExtNat dv = cfg.default_value();
  for (const auto& [f, v] : cfg.entries) {
    if (f.field() != cfg.field)
      fail("entry " + f.str() + ": field mismatch");
    else if (!f.is_monic() || !is_irreducible(f))
      fail("entry " + f.str() + ": not monic irreducible");
    if (v == dv) fail("entry " + f.str() + ": stores the default value");
  }
  if (cfg.is_algebraic()) {
    if (cfg.def != KernelConfig::Default::Zero)
      fail("algebraic configuration must default to 0");
    uint64_t d = 0;
    for (const auto& [f, v] : cfg.entries) {
      if (v.is_inf()) {
        fail("algebraic entry " + f.str() + " is infinite");
        continue;
      }
      d += static_cast<uint64_t>(f.deg()) * v.v;
    }
    if (rep.ok && d != cfg.degree.v)
      fail("degree equation violated: sum deg(f)*C(f) = " + std::to_string(d) +
           " but degree = " + std::to_string(cfg.degree.v));
    if (rep.ok && d == 0) fail("algebraic degree must be positive");
  }
  return rep;
}

Poly kc_mipo(const KernelConfig& cfg) {
  if (!cfg.is_algebraic()) throw error("kc_mipo: transcendental configuration");
  Poly m = Poly::one(cfg.field);
  for (const auto& [f, v] : cfg.entries) m = m * poly_pow(f, v.v);
  return m;
}

bool kc_is_trivial(const KernelConfig& cfg) {
  return cfg.is_algebraic() && cfg.degree == ExtNat::fin(1);
}

// ---------------------------------------------------------------------------
// Constraint reduction.

namespace {

// Sum-of-intersections normal form: one polynomial whose kernel equals the
// described subspace in every model (intersection -> gcd, sum -> lcm).
Poly normalize_side(const std::vector<std::vector<Poly>>& side, const FieldSpec& field) {
  if (side.empty()) throw error("constraints_reduce: empty sum");
  Poly acc = Poly::one(field);  // lcm identity, Ker(1) = {0}
  for (const auto& inter : side) {
    if (inter.empty()) throw error("constraints_reduce: empty intersection");
    Poly g = Poly::zero(field);  // gcd identity, Ker(0) = V
    for (const Poly& p : inter) {
      if (p.field() != field) throw error("constraints_reduce: field mismatch");
      g = poly_gcd(g, p);
    }
    acc = poly_lcm(acc, g);
  }
  return acc;  // zero encodes the whole space
}

}  // namespace

ReduceResult constraints_reduce(const std::vector<KernelConstraint>& cs,
                                const FieldSpec& field) {
  std::map<Poly, uint32_t, PolyLess> bound;  // recorded upper bounds per irreducible
  bool forced_algebraic = false;
  Poly zeroside_gcd = Poly::zero(field);  // gcd of all alpha with Ker(alpha) = V

  for (const KernelConstraint& c : cs) {
    Poly alpha = normalize_side(c.lhs, field);
    Poly beta = normalize_side(c.rhs, field);
    if (alpha.is_zero() && beta.is_zero()) continue;
    if (alpha.is_zero() || beta.is_zero()) {
      const Poly& nz = alpha.is_zero() ? beta : alpha;
      forced_algebraic = true;
      zeroside_gcd = poly_gcd(zeroside_gcd, nz);
      continue;
    }
    if (alpha == beta) continue;
    Factorization fa = poly_factor(alpha);
    Factorization fb = poly_factor(beta);
    auto record = [&](const Poly& f, uint32_t a, uint32_t b) {
      if (a == b) return;
      uint32_t m = std::min(a, b);
      auto it = bound.find(f);
      if (it == bound.end() || m < it->second) bound[f] = m;
    };
    for (const auto& [f, m] : fa.factors)
      record(f, m, fb.factors.count(f) ? fb.factors.at(f) : 0);
    for (const auto& [f, m] : fb.factors)
      if (!fa.factors.count(f)) record(f, 0, m);
  }

  ReduceResult res;
  if (forced_algebraic) {
    std::map<Poly, ExtNat, PolyLess> entries;
    Factorization fac = poly_factor(zeroside_gcd);
    uint32_t total = 0;
    for (const auto& [f, m] : fac.factors) {
      uint32_t v = m;
      auto it = bound.find(f);
      if (it != bound.end()) v = std::min(v, it->second);
      if (v > 0) {
        entries[f] = ExtNat::fin(v);
        total += v * static_cast<uint32_t>(f.deg());
      }
    }
    if (total == 0) {
      res.inconsistent = true;
      res.reason =
          "constraints force MiPo(C) = 1, i.e. V = {0}, contradicting an "
          "infinite vector space";
      return res;
    }
    res.config = KernelConfig::algebraic(field, std::move(entries));
    return res;
  }

  std::map<Poly, ExtNat, PolyLess> entries;
  for (const auto& [f, v] : bound) entries[f] = ExtNat::fin(v);
  res.config = KernelConfig::transcendental(field, std::move(entries),
                                            KernelConfig::Default::Infinity);
  return res;
}

std::vector<KernelConstraint> kc_defining_constraints(const KernelConfig& cfg) {
  std::vector<KernelConstraint> out;
  if (cfg.is_algebraic()) {
    KernelConstraint c;
    c.lhs = {{Poly::zero(cfg.field)}};
    c.rhs = {{kc_mipo(cfg)}};
    out.push_back(std::move(c));
    return out;
  }
  if (cfg.def == KernelConfig::Default::Zero)
    throw error(
        "kc_defining_constraints: no finite constraint set for default-zero "
        "configurations");
  for (const auto& [f, v] : cfg.entries) {
    if (v.is_inf()) continue;
    KernelConstraint c;
    c.lhs = {{poly_pow(f, v.v)}};
    c.rhs = {{poly_pow(f, v.v + 1)}};
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON.

FieldSpec field_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "Q" || kind == "Rationals" || kind == "rationals")
    return FieldSpec::rationals();
  if (kind == "Fp" || kind == "fp") return FieldSpec::fp(j.at("p").get<uint32_t>());
  throw error("field_from_json: unknown kind '" + kind + "'");
}

nlohmann::json field_to_json(const FieldSpec& f) {
  if (f.is_fp()) return {{"kind", "Fp"}, {"p", f.p}};
  return {{"kind", "Q"}};
}

KernelConfig kc_from_json(const nlohmann::json& j) {
  FieldSpec field = field_from_json(j.at("field"));
  std::string defs = j.value("default", "infinity");
  KernelConfig::Default def =
      defs == "zero" ? KernelConfig::Default::Zero : KernelConfig::Default::Infinity;
  std::map<Poly, ExtNat, PolyLess> entries;
  if (j.contains("entries")) {
    for (const auto& e : j.at("entries")) {
      Poly f = parse_poly(e.at("f").get<std::string>(), field);
      ExtNat v = e.at("c").is_string() ? ExtNat::inf()
                                       : ExtNat::fin(e.at("c").get<uint32_t>());
      entries[f] = v;
    }
  }
  ExtNat degree = ExtNat::inf();
  if (j.contains("degree") && !j.at("degree").is_string())
    degree = ExtNat::fin(j.at("degree").get<uint32_t>());
  if (degree.finite && def == KernelConfig::Default::Infinity)
    throw error("kc_from_json: finite degree requires default zero");
  KernelConfig cfg{field, std::move(entries), def, degree};
  KcReport rep = kc_validate(cfg);
  if (!rep.ok) throw error("kc_from_json: invalid configuration: " + rep.violations.front());
  return cfg;
}

nlohmann::json kc_to_json(const KernelConfig& cfg) {
  nlohmann::json j;
  j["field"] = field_to_json(cfg.field);
  j["default"] = cfg.def == KernelConfig::Default::Zero ? "zero" : "infinity";
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [f, v] : cfg.entries) {
    nlohmann::json e;
    e["f"] = f.str();
    if (v.is_inf())
      e["c"] = "inf";
    else
      e["c"] = v.v;
    entries.push_back(e);
  }
  j["entries"] = entries;
  if (cfg.degree.finite)
    j["degree"] = cfg.degree.v;
  else
    j["degree"] = "inf";
  return j;
}

std::vector<KernelConstraint> constraints_from_json(const nlohmann::json& j,
                                                    const FieldSpec& field) {
  std::vector<KernelConstraint> out;
  for (const auto& cj : j) {
    KernelConstraint c;
    auto side = [&](const nlohmann::json& s) {
      std::vector<std::vector<Poly>> v;
      for (const auto& inter : s) {
        std::vector<Poly> ps;
        for (const auto& p : inter) ps.push_back(parse_poly(p.get<std::string>(), field));
        v.push_back(std::move(ps));
      }
      return v;
    };
    c.lhs = side(cj.at("lhs"));
    c.rhs = side(cj.at("rhs"));
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json constraints_to_json(const std::vector<KernelConstraint>& cs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cs) {
    auto side = [&](const std::vector<std::vector<Poly>>& v) {
      nlohmann::json s = nlohmann::json::array();
      for (const auto& inter : v) {
        nlohmann::json i = nlohmann::json::array();
        for (const Poly& p : inter) i.push_back(p.str());
        s.push_back(i);
      }
      return s;
    };
    j.push_back({{"lhs", side(c.lhs)}, {"rhs", side(c.rhs)}});
  }
  return j;
}

}  // namespace endoq
