#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rmps {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Dense caps for oracle-side objects.
inline constexpr std::size_t kDefaultAmplitudeCap = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultDensityDimCap = std::size_t{1} << 10;

// Square matrix with ‖U†U − I‖_max ≤ 1e−12. Only produced by the samplers or by
// from_matrix(), which checks the bound.
class UnitaryMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  static UnitaryMatrix from_matrix(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  explicit UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  friend UnitaryMatrix make_unitary_unchecked(ComplexMatrix m);

  ComplexMatrix m_;
};

// Wraps a matrix the caller has constructed to be unitary (QR output).
UnitaryMatrix make_unitary_unchecked(ComplexMatrix m);

// Pure state on a product of local spaces. Basis index of (i_1, ..., i_N) is
// i_1·d_2⋯d_N + ... + i_N, i.e. site 1 is the most significant digit.
struct DenseState {
  std::vector<int> dims;
  ComplexVector amplitudes;

  DenseState() = default;
  DenseState(std::vector<int> site_dims, ComplexVector amps);

  std::size_t total_dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm_sq() const { return amplitudes.squaredNorm(); }
  DenseState normalized() const;
};

// Density matrix with optional site-dimension metadata (product equals dim()).
struct DensityMatrix {
  ComplexMatrix matrix;
  std::vector<int> subsystem_dims;

  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m, std::vector<int> dims = {});

  Eigen::Index dim() const { return matrix.rows(); }

  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix pure(const DenseState& psi);
};

// Hermitian, unit trace and eigenvalues ≥ −tol.
bool is_valid_density_matrix(const DensityMatrix& rho, double tol = 1e-10);

}  // namespace rmps
