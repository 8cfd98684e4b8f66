#ifndef ENDOQ_FINMODEL_HPP
#define ENDOQ_FINMODEL_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "endoq/kernel_config.hpp"

namespace endoq {

using FpVec = std::vector<uint32_t>;

// Dense matrix over F_p. Vectors act as columns: (A v)[i] = sum_j A(i,j) v[j].
class FpMat {
 public:
  FpMat() = default;
  FpMat(uint32_t p, uint32_t rows, uint32_t cols)
      : p_(p), rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0) {}
  static FpMat identity(uint32_t p, uint32_t n);

  uint32_t p() const { return p_; }
  uint32_t rows() const { return rows_; }
  uint32_t cols() const { return cols_; }
  uint32_t& at(uint32_t i, uint32_t j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  uint32_t at(uint32_t i, uint32_t j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  FpMat operator+(const FpMat& o) const;
  FpMat operator-(const FpMat& o) const;
  FpMat operator*(const FpMat& o) const;
  FpMat scaled(uint32_t s) const;
  FpVec mul(const FpVec& v) const;
  bool is_zero() const;
  bool operator==(const FpMat& o) const { return p_ == o.p_ && rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }

 private:
  uint32_t p_ = 2, rows_ = 0, cols_ = 0;
  std::vector<uint32_t> a_;
};

uint32_t mat_rank(FpMat m);
// Basis of the null space of m.
std::vector<FpVec> mat_kernel(const FpMat& m);
// Basis of the column space of m.
std::vector<FpVec> mat_column_space(const FpMat& m);
FpMat mat_inverse(const FpMat& m);  // square invertible
// One solution x of m x = b, if any.
std::optional<FpVec> mat_solve(const FpMat& m, const FpVec& b);
FpMat mat_from_columns(uint32_t p, uint32_t dim, const std::vector<FpVec>& cols);
// rho[theta] as a matrix.
FpMat poly_apply(const Poly& rho, const FpMat& theta);
Poly matrix_min_poly(const FpMat& theta, const FieldSpec& f);
FpMat companion_matrix(const Poly& monic, const FieldSpec& f);

// One Jordan-style building block: companion matrix of f^exp.
struct Block {
  Poly f;
  uint32_t exp = 1;
};

// Finite-dimensional F_p model of a kernel configuration, block diagonal.
struct FinModel {
  FieldSpec field;
  uint32_t dim = 0;
  FpMat theta;
  KernelConfig cfg;
  std::vector<Block> blocks;  // metadata, present when constructed block-wise
  std::vector<Poly> support;  // factors the model guarantees Def 2.4/2.6 for
};

// Block-companion construction. The model satisfies the configuration's
// kernel-chain and image conditions for every factor in `support`; filler
// blocks must avoid `support` (transcendental configurations only).
FinModel fm_build(const KernelConfig& cfg, const std::vector<Block>& blocks,
                  const std::vector<Poly>& support);

struct FmFactorReport {
  Poly f;
  ExtNat cvalue;
  bool kernel_ok = true;  // Ker(f^C) = Ker(f^(C+1))
  bool image_ok = true;   // Im(f^(C+1)) = Im(f^C)
  uint32_t ker_dim_c = 0, ker_dim_c1 = 0;
};
struct FmReport {
  bool is_C_endo = true;
  bool is_image_complete = true;
  std::vector<FmFactorReport> per_factor;
};

// Strict check over cfg entries and every factor of theta's minimal
// polynomial with finite configuration value.
FmReport fm_check(const FinModel& m);
// Same conditions restricted to the given factor set.
FmReport fm_check_relative(const FinModel& m, const std::vector<Poly>& support);

struct Decomposition {
  std::vector<FpVec> im_basis;
  std::map<Poly, std::vector<FpVec>, PolyLess> ker_bases;
  FpMat proj_im;
  std::map<Poly, FpMat, PolyLess> proj_ker;
};

// V = Im(F^C) + direct sum of Ker(f^C), with projector matrices.
Decomposition fm_decompose(const FinModel& m, const std::vector<Poly>& F);

FinModel fm_extend(const FinModel& m, const std::vector<Block>& extra);

nlohmann::json fm_to_json(const FinModel& m);
FinModel fm_from_json(const nlohmann::json& j, const KernelConfig& cfg);

}  // namespace endoq

#endif
