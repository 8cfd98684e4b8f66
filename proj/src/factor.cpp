#include "endoq/factor.hpp"

#include <algorithm>

namespace endoq {

Poly Factorization::reassemble(const FieldSpec& f) const {
  Poly r = Poly::constant(unit);
  for (const auto& [g, m] : factors) r = r * poly_pow(g, m);
  (void)f;
  return r;
}

namespace {

void merge_factor(Factorization& out, const Poly& f, uint32_t mult) {
  out.factors[f] += mult;
}

// f(X) = g(X^p) over F_p implies f = (g~)^p with the same coefficient values.
Poly pth_root_fp(const Poly& f) {
  const FieldSpec& fs = f.field();
  uint32_t p = fs.p;
  std::vector<Scalar> v;
  for (size_t i = 0; i <= static_cast<size_t>(f.deg()); i += p) v.push_back(f.at(i));
  return Poly(fs, std::move(v));
}

// Squarefree decomposition of a monic polynomial over F_p.
std::vector<std::pair<Poly, uint32_t>> squarefree_fp(const Poly& a) {
  std::vector<std::pair<Poly, uint32_t>> parts;
  const FieldSpec& fs = a.field();
  Poly f = a;
  uint32_t outer = 1;  // multiplicity scale from p-th root recursion
  while (f.deg() > 0) {
    Poly d = f.derivative();
    if (d.is_zero()) {
      f = pth_root_fp(f);
      outer *= fs.p;
      continue;
    }
    Poly c = poly_gcd(f, d);
    Poly w = euclid_div(f, c).first;
    uint32_t i = 1;
    while (w.deg() > 0) {
      Poly y = poly_gcd(w, c);
      Poly z = euclid_div(w, y).first;
      if (z.deg() > 0) parts.emplace_back(z.monic(), i * outer);
      w = y;
      c = euclid_div(c, y).first;
      ++i;
    }
    if (c.deg() == 0) break;
    f = c;  // remaining part is a p-th power
  }
  return parts;
}

// Distinct-degree splitting of a monic squarefree polynomial.
std::vector<std::pair<Poly, uint32_t>> ddf_fp(const Poly& a) {
  std::vector<std::pair<Poly, uint32_t>> out;  // (product of irreducibles, degree)
  const FieldSpec& fs = a.field();
  Poly f = a;
  Poly h = poly_mod(Poly::x(fs), f);  // X^(p^d) mod f, iterated
  uint32_t d = 0;
  while (f.deg() > 0 && f.deg() >= static_cast<int>(2 * (d + 1))) {
    ++d;
    h = poly_pow_mod(h, BigInt(fs.p), f);
    Poly g = poly_gcd(h - Poly::x(fs), f);
    if (g.deg() > 0) {
      out.emplace_back(g, d);
      f = euclid_div(f, g).first;
      h = poly_mod(h, f);
    }
  }
  if (f.deg() > 0) out.emplace_back(f, static_cast<uint32_t>(f.deg()));
  return out;
}

// Deterministic candidate sequence for the equal-degree splitting.
Poly edf_candidate(const FieldSpec& fs, uint32_t maxdeg, uint64_t k) {
  std::vector<Scalar> v(maxdeg + 1, Scalar::zero(fs));
  uint64_t n = k;
  for (uint32_t i = 0; i <= maxdeg; ++i) {
    v[i] = Scalar::of_residue(fs.p, n % fs.p);
    n /= fs.p;
  }
  return Poly(fs, std::move(v));
}

// Equal-degree splitting (Cantor-Zassenhaus) of a monic squarefree product
// of irreducibles all of degree d.
void edf_fp(const Poly& a, uint32_t d, std::vector<Poly>& out) {
  const FieldSpec& fs = a.field();
  if (a.deg() == static_cast<int>(d)) {
    out.push_back(a);
    return;
  }
  BigInt pd = 1;
  for (uint32_t i = 0; i < d; ++i) pd *= fs.p;
  for (uint64_t k = 1;; ++k) {
    Poly t = edf_candidate(fs, 2 * d > 1 ? 2 * d - 1 : 1, k);
    if (t.deg() < 1) continue;
    Poly g = poly_gcd(t, a);
    if (g.deg() == 0) {
      if (fs.p == 2) {
        // trace map t + t^2 + ... + t^(2^(d-1))
        Poly tr = poly_mod(t, a);
        Poly cur = tr;
        for (uint32_t i = 1; i < d; ++i) {
          cur = poly_mod(cur * cur, a);
          tr = tr + cur;
        }
        g = poly_gcd(tr, a);
      } else {
        BigInt e = (pd - 1) / 2;
        Poly s = poly_pow_mod(t, e, a);
        g = poly_gcd(s - Poly::one(fs), a);
      }
    }
    if (g.deg() > 0 && g.deg() < a.deg()) {
      edf_fp(g, d, out);
      edf_fp(euclid_div(a, g).first.monic(), d, out);
      return;
    }
  }
}

Factorization factor_fp(const Poly& a) {
  Factorization out;
  out.unit = a.lead();
  Poly f = a.monic();
  if (f.deg() == 0) return out;
  for (const auto& [sq, mult] : squarefree_fp(f)) {
    for (const auto& [prod, d] : ddf_fp(sq)) {
      std::vector<Poly> irr;
      edf_fp(prod, d, irr);
      for (const Poly& g : irr) merge_factor(out, g.monic(), mult);
    }
  }
  return out;
}

// --- Q ----------------------------------------------------------------

// Scale a monic rational polynomial to a primitive integer coefficient
// vector (content removed). Returned lowest degree first.
std::vector<BigInt> to_primitive_z(const Poly& a) {
  BigInt den = 1;
  for (const auto& c : a.coeffs()) den = boost::multiprecision::lcm(den, BigInt(denominator(c.rational())));
  std::vector<BigInt> v;
  for (const auto& c : a.coeffs()) {
    Rational q = c.rational() * Rational(den);
    v.push_back(BigInt(numerator(q)));
  }
  BigInt g = 0;
  for (const auto& n : v) g = boost::multiprecision::gcd(g, n);
  if (g != 0)
    for (auto& n : v) n /= g;
  return v;
}

std::vector<BigInt> divisors_with_sign(const BigInt& n) {
  std::vector<BigInt> out;
  BigInt an = boost::multiprecision::abs(n);
  for (BigInt d = 1; d * d <= an; ++d) {
    if (an % d == 0) {
      out.push_back(d);
      out.push_back(-d);
      BigInt e = an / d;
      if (e != d) {
        out.push_back(e);
        out.push_back(-e);
      }
    }
  }
  return out;
}

BigInt eval_z(const std::vector<BigInt>& v, const BigInt& x) {
  BigInt acc = 0;
  for (size_t i = v.size(); i-- > 0;) acc = acc * x + v[i];
  return acc;
}

// Rational roots of a primitive integer polynomial.
std::vector<Rational> rational_roots(const std::vector<BigInt>& v) {
  std::vector<Rational> roots;
  if (v.empty()) return roots;
  BigInt a0 = v.front(), an = v.back();
  if (a0 == 0) {
    roots.emplace_back(0);
    return roots;  // caller divides out X and retries
  }
  for (const BigInt& p : divisors_with_sign(a0))
    for (const BigInt& q : divisors_with_sign(an)) {
      if (q < 0) continue;
      Rational r(p, q);
      // evaluate exactly
      Rational acc = 0;
      for (size_t i = v.size(); i-- > 0;) acc = Rational(acc * r + Rational(v[i]));
      if (acc == 0 && std::find(roots.begin(), roots.end(), r) == roots.end())
        roots.push_back(r);
    }
  return roots;
}

// Degree-2 rational divisor search by Kronecker interpolation on a
// primitive integer polynomial without rational roots.
std::optional<Poly> quadratic_divisor_q(const Poly& h) {
  const FieldSpec& fs = h.field();
  std::vector<BigInt> v = to_primitive_z(h.monic());
  BigInt h0 = eval_z(v, 0), h1 = eval_z(v, 1), hm1 = eval_z(v, -1);
  for (const BigInt& d0 : divisors_with_sign(h0))
    for (const BigInt& d1 : divisors_with_sign(h1))
      for (const BigInt& dm1 : divisors_with_sign(hm1)) {
        // g with g(0)=d0, g(1)=d1, g(-1)=dm1:
        //   g = d0 + ((d1 - dm1)/2) X + ((d1 + dm1 - 2 d0)/2) X^2
        BigInt lin2 = d1 - dm1, quad2 = d1 + dm1 - 2 * d0;
        if (quad2 == 0) continue;
        std::vector<Scalar> gc = {Scalar::of_rational(Rational(d0)),
                                  Scalar::of_rational(Rational(lin2, 2)),
                                  Scalar::of_rational(Rational(quad2, 2))};
        Poly g(fs, std::move(gc));
        if (g.deg() == 2 && divides(g, h)) return g.monic();
      }
  return std::nullopt;
}

Factorization factor_q(const Poly& a, uint32_t degree_bound) {
  if (static_cast<uint32_t>(a.deg()) > degree_bound)
    throw error("poly_factor: degree " + std::to_string(a.deg()) +
                " over Q exceeds the configured bound " + std::to_string(degree_bound) +
                "; supply pre-factored input");
  Factorization out;
  out.unit = a.lead();
  Poly f = a.monic();
  const FieldSpec& fs = a.field();
  // strip rational roots
  while (f.deg() > 0) {
    std::vector<Rational> roots = rational_roots(to_primitive_z(f));
    if (roots.empty()) break;
    Poly lin = Poly::x(fs) - Poly::constant(Scalar::of_rational(roots.front()));
    merge_factor(out, lin, 1);
    f = euclid_div(f, lin).first;
  }
  if (f.deg() == 0) return out;
  if (f.deg() == 2 || f.deg() == 3) {
    merge_factor(out, f, 1);  // rootless degree 2/3 is irreducible over Q
    return out;
  }
  // degree 4, rootless: either irreducible or two irreducible quadratics
  if (auto g = quadratic_divisor_q(f)) {
    merge_factor(out, *g, 1);
    merge_factor(out, euclid_div(f, *g).first.monic(), 1);
    return out;
  }
  merge_factor(out, f, 1);
  return out;
}

}  // namespace

Factorization poly_factor(const Poly& a, uint32_t q_degree_bound) {
  if (a.is_zero()) throw error("poly_factor: zero polynomial");
  if (a.field().is_fp()) return factor_fp(a);
  return factor_q(a, q_degree_bound);
}

bool is_irreducible(const Poly& a) {
  if (a.deg() < 1) return false;
  if (a.deg() == 1) return true;
  if (a.field().is_fp()) {
    const FieldSpec& fs = a.field();
    Poly f = a.monic();
    uint32_t n = static_cast<uint32_t>(f.deg());
    // X^(p^n) == X mod f, and gcd(X^(p^(n/q)) - X, f) == 1 for primes q | n.
    Poly h = poly_mod(Poly::x(fs), f);
    std::vector<Poly> frob;  // X^(p^i) mod f
    frob.push_back(h);
    for (uint32_t i = 1; i <= n; ++i) frob.push_back(poly_pow_mod(frob.back(), BigInt(fs.p), f));
    if (frob[n] != poly_mod(Poly::x(fs), f)) return false;
    for (uint32_t q = 2; q <= n; ++q) {
      if (n % q != 0 || !is_prime_u32(q)) continue;
      if (poly_gcd(frob[n / q] - Poly::x(fs), f).deg() != 0) return false;
    }
    return true;
  }
  Factorization fac = poly_factor(a);
  return fac.factors.size() == 1 && fac.factors.begin()->second == 1;
}

std::optional<uint32_t> poly_valuation(const Poly& a, const Poly& f) {
  if (f.deg() < 1 || !f.is_monic() || !is_irreducible(f))
    throw error("poly_valuation: modulus must be monic irreducible");
  if (a.is_zero()) return std::nullopt;  // v_f(0) = infinity
  uint32_t e = 0;
  Poly rest = a;
  while (true) {
    auto [q, r] = euclid_div(rest, f);
    if (!r.is_zero()) return e;
    rest = q;
    ++e;
  }
}

std::vector<Poly> monic_irreducibles_fp(const FieldSpec& f, uint32_t d,
                                        size_t count, size_t skip) {
  if (!f.is_fp()) throw error("monic_irreducibles_fp: prime field required");
  std::vector<Poly> out;
  uint64_t total = 1;
  for (uint32_t i = 0; i < d; ++i) {
    if (total > (1ull << 40)) throw error("monic_irreducibles_fp: search space too large");
    total *= f.p;
  }
  for (uint64_t n = 0; n < total && out.size() < count; ++n) {
    std::vector<Scalar> v(d + 1, Scalar::zero(f));
    uint64_t k = n;
    for (uint32_t i = 0; i < d; ++i) {
      v[i] = Scalar::of_residue(f.p, k % f.p);
      k /= f.p;
    }
    v[d] = Scalar::one(f);
    Poly cand(f, std::move(v));
    if (is_irreducible(cand)) {
      if (skip > 0) {
        --skip;
        continue;
      }
      out.push_back(cand);
    }
  }
  if (out.size() < count) throw error("monic_irreducibles_fp: not enough irreducibles of degree " + std::to_string(d));
  return out;
}

}  // namespace endoq
