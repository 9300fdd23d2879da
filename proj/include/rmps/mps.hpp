#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rmps/random.hpp"
#include "rmps/types.hpp"

namespace rmps {

enum class BoundaryCondition { kOpen, kPeriodic };

// The D matrices A^0[k], ..., A^{D-1}[k] of one site, each χ×χ.
struct SiteTensor {
  std::vector<ComplexMatrix> a;

  int phys_dim() const { return static_cast<int>(a.size()); }
  int bond_dim() const { return a.empty() ? 0 : static_cast<int>(a.front().rows()); }
};

// Matrix product state
//
//   OBC: Σ ⟨φ_I|A^{i_1}[1] ⋯ A^{i_N}[N]|φ_F⟩ |i_1 ⋯ i_N⟩
//   PBC: Σ Tr(A^{i_1}[1] ⋯ A^{i_N}[N]) |i_1 ⋯ i_N⟩
//
// Sites are indexed 0..N-1 and contracted left to right. Values are immutable;
// a homogeneous state stores one SiteTensor that every site aliases. States are
// not normalized: expectation() and reduced_density_matrix() divide by
// mps_norm_sq() themselves.
class Mps {
 public:
  static Mps open(std::vector<SiteTensor> sites, ComplexVector left, ComplexVector right);
  static Mps periodic(std::vector<SiteTensor> sites);
  static Mps homogeneous_open(int n_sites, SiteTensor site, ComplexVector left, ComplexVector right);
  static Mps homogeneous_periodic(int n_sites, SiteTensor site);

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int phys_dim() const { return phys_dim_; }
  int bond_dim() const { return bond_dim_; }
  BoundaryCondition boundary() const { return boundary_; }
  bool homogeneous() const { return homogeneous_; }

  const SiteTensor& site(int k) const;
  // φ_I and φ_F; empty for PBC.
  const ComplexVector& left_vec() const { return left_; }
  const ComplexVector& right_vec() const { return right_; }

  // Copy with site k replaced. The copy is non-homogeneous.
  Mps with_site(int k, SiteTensor tensor) const;

 private:
  Mps() = default;
  void check() const;

  std::vector<std::shared_ptr<const SiteTensor>> sites_;
  int phys_dim_ = 0;
  int bond_dim_ = 0;
  BoundaryCondition boundary_ = BoundaryCondition::kOpen;
  bool homogeneous_ = false;
  ComplexVector left_;
  ComplexVector right_;
};

// Product of single-site Hermitian operators on sites start_site, ...,
// start_site + L − 1 and identity elsewhere.
struct LocalObservable {
  std::vector<ComplexMatrix> site_ops;
  int start_site = 0;

  int length() const { return static_cast<int>(site_ops.size()); }
};

// χ²×χ² transfer operator; row/column (α, α') ↦ α·χ + α'.
struct TransferOp {
  ComplexMatrix matrix;
};

// A^i_{α,β} = ⟨i,α|U|0,β⟩ with composite index (i, α) ↦ i·χ + α.
std::vector<ComplexMatrix> a_matrices_from_unitary(const UnitaryMatrix& u, int phys_dim, int bond_dim);

struct RmpsParams {
  int n_sites = 1;
  int phys_dim = 2;
  int bond_dim = 1;
  bool homogeneous = false;
  BoundaryCondition boundary = BoundaryCondition::kOpen;
};

// Sequentially generated random MPS. Site k draws haar_unitary(χD,
// subseed(seed, k)); a homogeneous chain draws one unitary from subseed(seed, 0).
// OBC: φ_I = |0⟩ of the ancilla and φ_F = haar_state(χ, subseed(seed, N)).
Mps sample_rmps(const RmpsParams& params, Seed seed);

// Σ_i A^i ⊗ conj(A^i).
TransferOp transfer_identity(const Mps& mps, int site);

// Σ_{i,j} ⟨i|O|j⟩ A^i ⊗ conj(A^j). Chained with kets built from A this yields
// ⟨ψ|Oᵀ|ψ⟩; expectation() uses the transposed weights so it returns ⟨ψ|O|ψ⟩.
TransferOp transfer_observable(const Mps& mps, int site, const ComplexMatrix& op);

// ⟨ψ|ψ⟩. O(N·D·χ³) for OBC, O(N·D·χ⁵) for PBC.
double mps_norm_sq(const Mps& mps);

// ⟨a|b⟩. Bond dimensions and boundary conditions may differ.
Complex mps_overlap(const Mps& a, const Mps& b);

// ⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩.
double expectation(const Mps& mps, const LocalObservable& obs);

// Reduced state of sites [first, first + length), normalized to unit trace.
DensityMatrix reduced_density_matrix(const Mps& mps, int first, int length,
                                     std::size_t dim_cap = kDefaultDensityDimCap);

// All N one-site reduced states from one left and one right sweep.
std::vector<DensityMatrix> single_site_density_matrices(const Mps& mps);

// Unnormalized amplitudes; basis ordering as in DenseState.
DenseState to_dense(const Mps& mps, std::size_t amplitude_cap = kDefaultAmplitudeCap);

// max_k ‖Σ_i A^i[k]†A^i[k] − I‖_max.
double isometry_error(const Mps& mps);

}  // namespace rmps
