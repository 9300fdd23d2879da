#pragma once

#include <vector>

#include "rmps/random.hpp"
#include "rmps/types.hpp"

// Exact small-system reference computations and closed-form ensemble values.
namespace rmps {

// Reduced state on `keep` (sorted, distinct site indices). The returned
// subsystem_dims list the kept sites in ascending order.
DensityMatrix partial_trace(const DenseState& psi, const std::vector<int>& keep,
                            std::size_t dim_cap = kDefaultDensityDimCap);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                            std::size_t dim_cap = kDefaultDensityDimCap);

// ‖a − b‖₁ as the sum of singular values, no ½ prefactor (range [0, 2]).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
// ‖a − b‖₂ (Frobenius).
double hs_distance(const DensityMatrix& a, const DensityMatrix& b);

// Eigenvalues of (ρ + ρ†)/2 in ascending order.
Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m);

// Tr ρ^m, m ≥ 2.
double purity_moment(const DensityMatrix& rho, int m);
// Smallest eigenvalue; values in (−1e−10, 0) are reported as 0.
double min_eigenvalue(const DensityMatrix& rho);

// Q = 2 − (2/N) Σ_i Tr ρ_i² from the single-qubit purities.
double global_entanglement_from_purities(const std::vector<double>& purities);
// Same, from the dense state of N qubits.
double global_entanglement_q(const DenseState& psi);

// (2ⁿ − 2) / (2ⁿ + 1).
double cue_q_exact(int n_qubits);
// Haar average of Tr ρ_A^m for m ∈ {2, 3, 4}.
double cue_moment_exact(int m, long long d_a, long long d_b);
// 1 / d_a³.
double cue_min_eig_exact(int d_a);
// √(d_s / d_b).
double typicality_bound(int d_s, int d_b);

// (1/d) Σ_{l,l'} |l,l⟩⟨l',l'|.
ComplexMatrix maximally_entangled_projector(int d);

// Monte-Carlo average of (U ⊗ U*)^{⊗n_copies} over r Haar unitaries of
// dimension `dim`. Sample i uses subseed(seed, i). Factor ordering is
// U ⊗ U* ⊗ U ⊗ U* ⊗ ⋯.
ComplexMatrix mc_twirl_moment(int n_copies, int dim, int r, Seed seed,
                              std::size_t dim_cap = std::size_t{1} << 12);

// Σ_σ |P_σ⟩⟨P_σ| over σ ∈ S_{n_copies}, where |P_σ⟩ pairs U-factor k with
// U*-factor σ(k) in the ordering of mc_twirl_moment, scaled to unit norm.
ComplexMatrix permutation_twirl_expression(int n_copies, int dim,
                                           std::size_t dim_cap = std::size_t{1} << 12);

}  // namespace rmps
