#include "endoq/finmodel.hpp"

#include <algorithm>

namespace endoq {

FpMat FpMat::identity(uint32_t p, uint32_t n) {
  FpMat m(p, n, n);
  for (uint32_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

FpMat FpMat::operator+(const FpMat& o) const {
  FpMat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = (a_[i] + o.a_[i]) % p_;
  return r;
}

FpMat FpMat::operator-(const FpMat& o) const {
  FpMat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = (a_[i] + p_ - o.a_[i] % p_) % p_;
  return r;
}

FpMat FpMat::operator*(const FpMat& o) const {
  if (cols_ != o.rows_) throw error("FpMat: shape mismatch in product");
  FpMat r(p_, rows_, o.cols_);
  for (uint32_t i = 0; i < rows_; ++i)
    for (uint32_t k = 0; k < cols_; ++k) {
      uint64_t aik = at(i, k);
      if (!aik) continue;
      for (uint32_t j = 0; j < o.cols_; ++j)
        r.at(i, j) = static_cast<uint32_t>((r.at(i, j) + aik * o.at(k, j)) % p_);
    }
  return r;
}

FpMat FpMat::scaled(uint32_t s) const {
  FpMat r = *this;
  for (auto& x : r.a_) x = static_cast<uint32_t>((static_cast<uint64_t>(x) * s) % p_);
  return r;
}

FpVec FpMat::mul(const FpVec& v) const {
  if (v.size() != cols_) throw error("FpMat: vector length mismatch");
  FpVec r(rows_, 0);
  for (uint32_t i = 0; i < rows_; ++i) {
    uint64_t acc = 0;
    for (uint32_t j = 0; j < cols_; ++j) acc += static_cast<uint64_t>(at(i, j)) * v[j];
    r[i] = static_cast<uint32_t>(acc % p_);
  }
  return r;
}

bool FpMat::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](uint32_t x) { return x == 0; });
}

namespace {

// Row echelon form in place; returns pivot column per row.
std::vector<uint32_t> row_reduce(FpMat& m) {
  std::vector<uint32_t> pivots;
  uint32_t p = m.p();
  uint32_t row = 0;
  for (uint32_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    uint32_t sel = row;
    while (sel < m.rows() && m.at(sel, col) == 0) ++sel;
    if (sel == m.rows()) continue;
    if (sel != row)
      for (uint32_t j = 0; j < m.cols(); ++j) std::swap(m.at(sel, j), m.at(row, j));
    uint32_t inv = static_cast<uint32_t>(invmod_u64(m.at(row, col), p));
    for (uint32_t j = 0; j < m.cols(); ++j)
      m.at(row, j) = static_cast<uint32_t>((static_cast<uint64_t>(m.at(row, j)) * inv) % p);
    for (uint32_t i = 0; i < m.rows(); ++i) {
      if (i == row || m.at(i, col) == 0) continue;
      uint64_t c = m.at(i, col);
      for (uint32_t j = 0; j < m.cols(); ++j)
        m.at(i, j) = static_cast<uint32_t>((m.at(i, j) + (p - c % p) * m.at(row, j)) % p);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

uint32_t mat_rank(FpMat m) { return static_cast<uint32_t>(row_reduce(m).size()); }

std::vector<FpVec> mat_kernel(const FpMat& m) {
  FpMat r = m;
  std::vector<uint32_t> pivots = row_reduce(r);
  std::vector<bool> is_pivot(m.cols(), false);
  for (uint32_t c : pivots) is_pivot[c] = true;
  std::vector<FpVec> basis;
  for (uint32_t freec = 0; freec < m.cols(); ++freec) {
    if (is_pivot[freec]) continue;
    FpVec v(m.cols(), 0);
    v[freec] = 1;
    for (size_t i = 0; i < pivots.size(); ++i) {
      uint32_t c = r.at(static_cast<uint32_t>(i), freec);
      v[pivots[i]] = c == 0 ? 0 : m.p() - c;
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<FpVec> mat_column_space(const FpMat& m) {
  FpMat r = m;
  std::vector<uint32_t> pivots = row_reduce(r);
  std::vector<FpVec> basis;
  for (uint32_t c : pivots) {
    FpVec v(m.rows(), 0);
    for (uint32_t i = 0; i < m.rows(); ++i) v[i] = m.at(i, c);
    basis.push_back(std::move(v));
  }
  return basis;
}

FpMat mat_inverse(const FpMat& m) {
  if (m.rows() != m.cols()) throw error("mat_inverse: square matrix required");
  uint32_t n = m.rows();
  FpMat aug(m.p(), n, 2 * n);
  for (uint32_t i = 0; i < n; ++i) {
    for (uint32_t j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = 1;
  }
  std::vector<uint32_t> pivots = row_reduce(aug);
  if (pivots.size() != n || pivots[n - 1] != n - 1)
    throw error("mat_inverse: matrix is singular");
  FpMat inv(m.p(), n, n);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < n; ++j) inv.at(i, j) = aug.at(i, n + j);
  return inv;
}

std::optional<FpVec> mat_solve(const FpMat& m, const FpVec& b) {
  FpMat aug(m.p(), m.rows(), m.cols() + 1);
  for (uint32_t i = 0; i < m.rows(); ++i) {
    for (uint32_t j = 0; j < m.cols(); ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols()) = b[i] % m.p();
  }
  std::vector<uint32_t> pivots = row_reduce(aug);
  for (size_t i = 0; i < pivots.size(); ++i)
    if (pivots[i] == m.cols()) return std::nullopt;  // inconsistent
  FpVec x(m.cols(), 0);
  for (size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug.at(static_cast<uint32_t>(i), m.cols());
  return x;
}

FpMat mat_from_columns(uint32_t p, uint32_t dim, const std::vector<FpVec>& cols) {
  FpMat m(p, dim, static_cast<uint32_t>(cols.size()));
  for (uint32_t j = 0; j < cols.size(); ++j)
    for (uint32_t i = 0; i < dim; ++i) m.at(i, j) = cols[j][i] % p;
  return m;
}

FpMat poly_apply(const Poly& rho, const FpMat& theta) {
  uint32_t p = theta.p();
  uint32_t n = theta.rows();
  FpMat acc(p, n, n);
  // Horner
  for (int i = rho.deg(); i >= 0; --i) {
    acc = acc * theta;
    uint32_t c = static_cast<uint32_t>(rho.at(static_cast<size_t>(i)).residue());
    for (uint32_t k = 0; k < n; ++k) acc.at(k, k) = (acc.at(k, k) + c) % p;
  }
  return acc;
}

Poly matrix_min_poly(const FpMat& theta, const FieldSpec& f) {
  uint32_t n = theta.rows();
  Poly acc = Poly::one(f);
  for (uint32_t s = 0; s < n; ++s) {
    FpVec e(n, 0);
    e[s] = 1;
    // Krylov sequence until linear dependence
    std::vector<FpVec> seq = {e};
    while (true) {
      FpVec next = theta.mul(seq.back());
      FpMat m = mat_from_columns(theta.p(), n, seq);
      // solve m x = next
      auto x = mat_solve(m, next);
      if (x) {
        // dependence: next = sum x_i seq_i, so annihilator X^k - sum x_i X^i
        std::vector<Scalar> c(seq.size() + 1, Scalar::zero(f));
        for (size_t i = 0; i < x->size(); ++i)
          c[i] = -Scalar::of_residue(f.p, (*x)[i]);
        c[seq.size()] = Scalar::one(f);
        acc = poly_lcm(acc, Poly(f, std::move(c)));
        break;
      }
      seq.push_back(std::move(next));
    }
  }
  return acc.monic();
}

FpMat companion_matrix(const Poly& monic, const FieldSpec& f) {
  if (!monic.is_monic() || monic.deg() < 1)
    throw error("companion_matrix: monic polynomial of positive degree required");
  uint32_t n = static_cast<uint32_t>(monic.deg());
  FpMat m(f.p, n, n);
  for (uint32_t i = 1; i < n; ++i) m.at(i, i - 1) = 1;
  for (uint32_t i = 0; i < n; ++i) {
    Scalar c = -monic.at(i);
    m.at(i, n - 1) = static_cast<uint32_t>(c.residue());
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

FmReport check_factors(const FinModel& m, const std::vector<Poly>& factors) {
  FmReport rep;
  for (const Poly& f : factors) {
    ExtNat c = kc_classify(m.cfg, f);
    if (c.is_inf()) continue;  // no condition
    FmFactorReport fr;
    fr.f = f;
    fr.cvalue = c;
    uint32_t e = std::min<uint32_t>(c.v, m.dim + 1);
    FpMat a = poly_apply(poly_pow(f, e), m.theta);
    FpMat a1 = poly_apply(poly_pow(f, std::min<uint32_t>(e + 1, m.dim + 2)), m.theta);
    fr.ker_dim_c = m.dim - mat_rank(a);
    fr.ker_dim_c1 = m.dim - mat_rank(a1);
    fr.kernel_ok = fr.ker_dim_c == fr.ker_dim_c1;
    fr.image_ok = fr.kernel_ok;  // rank-nullity: the two chains stall together
    rep.is_C_endo = rep.is_C_endo && fr.kernel_ok;
    rep.is_image_complete = rep.is_image_complete && fr.image_ok;
    rep.per_factor.push_back(std::move(fr));
  }
  if (m.cfg.is_algebraic()) {
    // Def 2.4(i): MiPo(C)[theta] = 0 is the whole condition.
    bool mipo_zero = poly_apply(kc_mipo(m.cfg), m.theta).is_zero();
    rep.is_C_endo = mipo_zero;
    if (!mipo_zero) {
      FmFactorReport fr;
      fr.f = kc_mipo(m.cfg);
      fr.cvalue = ExtNat::fin(1);
      fr.kernel_ok = false;
      rep.per_factor.push_back(std::move(fr));
    }
  }
  return rep;
}

std::vector<Poly> strict_factor_set(const FinModel& m) {
  std::map<Poly, bool, PolyLess> seen;
  std::vector<Poly> out;
  for (const auto& [f, v] : m.cfg.entries)
    if (!seen[f]) {
      seen[f] = true;
      out.push_back(f);
    }
  Poly mp = matrix_min_poly(m.theta, m.field);
  for (const auto& [f, mult] : poly_factor(mp).factors)
    if (!seen[f]) {
      seen[f] = true;
      out.push_back(f);
    }
  return out;
}

}  // namespace

FinModel fm_build(const KernelConfig& cfg, const std::vector<Block>& blocks,
                  const std::vector<Poly>& support) {
  if (!cfg.field.is_fp()) throw error("fm_build: prime field required");
  FinModel m;
  m.field = cfg.field;
  m.cfg = cfg;
  m.blocks = blocks;
  m.support = support;
  uint32_t dim = 0;
  for (const Block& b : blocks) {
    if (!b.f.is_monic() || !is_irreducible(b.f))
      throw error("fm_build: block polynomial must be monic irreducible");
    if (b.exp == 0) throw error("fm_build: zero block exponent");
    ExtNat c = kc_classify(cfg, b.f);
    bool in_support = false;
    for (const Poly& s : support)
      if (s == b.f) in_support = true;
    if (!c.is_inf() && c.v == 0) {
      // admissible only as a filler outside the guaranteed support
      if (in_support || cfg.is_algebraic())
        throw error("fm_build: factor " + b.f.str() + " has C(f) = 0, no block allowed");
    } else if (!c.is_inf() && b.exp > c.v) {
      throw error("fm_build: block (" + b.f.str() + ")^" + std::to_string(b.exp) +
                  " exceeds C(f) = " + std::to_string(c.v));
    }
    dim += static_cast<uint32_t>(b.f.deg()) * b.exp;
  }
  if (dim == 0) throw error("fm_build: empty model");
  m.dim = dim;
  m.theta = FpMat(cfg.field.p, dim, dim);
  uint32_t off = 0;
  for (const Block& b : blocks) {
    FpMat c = companion_matrix(poly_pow(b.f, b.exp), cfg.field);
    for (uint32_t i = 0; i < c.rows(); ++i)
      for (uint32_t j = 0; j < c.cols(); ++j) m.theta.at(off + i, off + j) = c.at(i, j);
    off += c.rows();
  }
  for (const Poly& f : support) {
    ExtNat c = kc_classify(cfg, f);
    if (!c.is_inf() && c.v == 0)
      for (const Block& b : blocks)
        if (b.f == f) throw error("fm_build: support factor with C = 0 appears in a block");
  }
  FmReport rep = fm_check_relative(m, m.support);
  if (!rep.is_C_endo || !rep.is_image_complete)
    throw error("fm_build: constructed model violates the configuration on its support");
  return m;
}

FmReport fm_check(const FinModel& m) { return check_factors(m, strict_factor_set(m)); }

FmReport fm_check_relative(const FinModel& m, const std::vector<Poly>& support) {
  if (m.cfg.is_algebraic()) return check_factors(m, support);  // MiPo drives the verdict
  return check_factors(m, support);
}

Decomposition fm_decompose(const FinModel& m, const std::vector<Poly>& F) {
  Decomposition d;
  const uint32_t p = m.field.p;
  Poly fc = Poly::one(m.field);
  for (const Poly& f : F) {
    ExtNat c = kc_classify(m.cfg, f);
    if (c.is_inf() || c.v == 0)
      throw error("fm_decompose: factor " + f.str() + " not in 0 < C < infinity");
    FmReport rep = fm_check_relative(m, {f});
    if (!rep.is_image_complete)
      throw error("fm_decompose: model not image-complete for " + f.str());
    fc = fc * poly_pow(f, std::min<uint32_t>(c.v, m.dim + 1));
  }
  FpMat a = poly_apply(fc, m.theta);
  d.im_basis = mat_column_space(a);
  std::vector<FpVec> all_cols = d.im_basis;
  std::vector<std::pair<Poly, size_t>> spans;  // factor -> basis size
  for (const Poly& f : F) {
    ExtNat c = kc_classify(m.cfg, f);
    FpMat fk = poly_apply(poly_pow(f, std::min<uint32_t>(c.v, m.dim + 1)), m.theta);
    auto kb = mat_kernel(fk);
    spans.emplace_back(f, kb.size());
    d.ker_bases[f] = kb;
    for (auto& v : kb) all_cols.push_back(v);
  }
  if (all_cols.size() != m.dim)
    throw error("fm_decompose: dimension additivity fails");
  FpMat basis = mat_from_columns(p, m.dim, all_cols);
  FpMat binv = mat_inverse(basis);  // throws if the sum is not direct
  // projector onto a coordinate range in the new basis
  auto projector = [&](size_t lo, size_t hi) {
    FpMat sel(p, m.dim, m.dim);
    for (size_t k = lo; k < hi; ++k) sel.at(static_cast<uint32_t>(k), static_cast<uint32_t>(k)) = 1;
    return basis * sel * binv;
  };
  size_t off = d.im_basis.size();
  d.proj_im = projector(0, off);
  for (const auto& [f, sz] : spans) {
    d.proj_ker[f] = projector(off, off + sz);
    off += sz;
  }
  return d;
}

FinModel fm_extend(const FinModel& m, const std::vector<Block>& extra) {
  std::vector<Block> blocks = m.blocks;
  for (const Block& b : extra) blocks.push_back(b);
  if (!m.blocks.empty()) {
    FinModel ext = fm_build(m.cfg, blocks, m.support);
    return ext;
  }
  // no block metadata: append companion summands directly
  uint32_t extdim = m.dim;
  for (const Block& b : extra) extdim += static_cast<uint32_t>(b.f.deg()) * b.exp;
  FinModel r = m;
  r.dim = extdim;
  r.theta = FpMat(m.field.p, extdim, extdim);
  for (uint32_t i = 0; i < m.dim; ++i)
    for (uint32_t j = 0; j < m.dim; ++j) r.theta.at(i, j) = m.theta.at(i, j);
  uint32_t off = m.dim;
  for (const Block& b : extra) {
    FpMat c = companion_matrix(poly_pow(b.f, b.exp), m.field);
    for (uint32_t i = 0; i < c.rows(); ++i)
      for (uint32_t j = 0; j < c.cols(); ++j) r.theta.at(off + i, off + j) = c.at(i, j);
    off += c.rows();
  }
  return r;
}

nlohmann::json fm_to_json(const FinModel& m) {
  nlohmann::json j;
  j["p"] = m.field.p;
  j["dim"] = m.dim;
  nlohmann::json rows = nlohmann::json::array();
  for (uint32_t i = 0; i < m.dim; ++i)
    for (uint32_t k = 0; k < m.dim; ++k) rows.push_back(m.theta.at(i, k));
  j["theta"] = rows;
  nlohmann::json blocks = nlohmann::json::array();
  for (const Block& b : m.blocks) blocks.push_back({{"f", b.f.str()}, {"exp", b.exp}});
  j["blocks"] = blocks;
  nlohmann::json sup = nlohmann::json::array();
  for (const Poly& f : m.support) sup.push_back(f.str());
  j["support"] = sup;
  return j;
}

FinModel fm_from_json(const nlohmann::json& j, const KernelConfig& cfg) {
  FinModel m;
  m.field = FieldSpec::fp(j.at("p").get<uint32_t>());
  if (m.field != cfg.field) throw error("fm_from_json: field mismatch with configuration");
  m.cfg = cfg;
  m.dim = j.at("dim").get<uint32_t>();
  m.theta = FpMat(m.field.p, m.dim, m.dim);
  const auto& rows = j.at("theta");
  if (rows.size() != static_cast<size_t>(m.dim) * m.dim)
    throw error("fm_from_json: theta size mismatch");
  for (uint32_t i = 0; i < m.dim; ++i)
    for (uint32_t k = 0; k < m.dim; ++k)
      m.theta.at(i, k) = rows[static_cast<size_t>(i) * m.dim + k].get<uint32_t>() % m.field.p;
  if (j.contains("blocks"))
    for (const auto& bj : j.at("blocks"))
      m.blocks.push_back(Block{parse_poly(bj.at("f").get<std::string>(), m.field),
                               bj.at("exp").get<uint32_t>()});
  if (j.contains("support"))
    for (const auto& sj : j.at("support"))
      m.support.push_back(parse_poly(sj.get<std::string>(), m.field));
  return m;
}

}  // namespace endoq
