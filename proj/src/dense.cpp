#include "rmps/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmps/errors.hpp"

namespace rmps {

DenseState::DenseState(std::vector<int> site_dims, ComplexVector amps)
    : dims(std::move(site_dims)), amplitudes(std::move(amps)) {
  std::size_t total = 1;
  for (int d : dims) {
    if (d < 1) throw InvalidDimension("DenseState: site dimension must be >= 1");
    total *= static_cast<std::size_t>(d);
  }
  if (dims.empty() || total != static_cast<std::size_t>(amplitudes.size())) {
    throw ShapeError("DenseState: product of site dimensions does not match amplitude count");
  }
}

DenseState DenseState::normalized() const {
  DenseState out = *this;
  out.amplitudes /= amplitudes.norm();
  return out;
}

DensityMatrix::DensityMatrix(ComplexMatrix m, std::vector<int> dims)
    : matrix(std::move(m)), subsystem_dims(std::move(dims)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ShapeError("DensityMatrix: matrix must be square and non-empty");
  }
  if (!subsystem_dims.empty()) {
    const long prod = std::accumulate(subsystem_dims.begin(), subsystem_dims.end(), 1L, std::multiplies<>());
    if (prod != matrix.rows()) throw ShapeError("DensityMatrix: subsystem dims do not match matrix size");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw InvalidDimension("maximally_mixed: dim must be >= 1");
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const DenseState& psi) {
  const ComplexVector v = psi.amplitudes / psi.amplitudes.norm();
  return DensityMatrix(v * v.adjoint(), psi.dims);
}

Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool is_valid_density_matrix(const DensityMatrix& rho, double tol) {
  const ComplexMatrix& m = rho.matrix;
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(m.trace() - Complex(1.0, 0.0)) > tol) return false;
  return hermitian_eigenvalues(m).minCoeff() >= -tol;
}

namespace {

std::vector<int> dims_of(const DensityMatrix& rho) {
  if (!rho.subsystem_dims.empty()) return rho.subsystem_dims;
  return {static_cast<int>(rho.dim())};
}

void check_keep(const std::vector<int>& keep, std::size_t n_sites) {
  if (keep.empty()) throw ShapeError("partial_trace: keep set is empty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || static_cast<std::size_t>(keep[i]) >= n_sites) {
      throw ShapeError("partial_trace: site index " + std::to_string(keep[i]) + " out of range");
    }
    if (i > 0 && keep[i] <= keep[i - 1]) throw ShapeError("partial_trace: keep must be sorted and distinct");
  }
}

// Split every full basis index into (kept index, traced index).
struct Split {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> rest;
  Eigen::Index kept_dim = 1;
  Eigen::Index rest_dim = 1;
  std::vector<int> kept_dims;
};

Split split_indices(const std::vector<int>& dims, const std::vector<int>& keep, std::size_t dim_cap) {
  check_keep(keep, dims.size());
  Split s;
  std::vector<bool> is_kept(dims.size(), false);
  for (int k : keep) {
    is_kept[static_cast<std::size_t>(k)] = true;
    s.kept_dim *= dims[static_cast<std::size_t>(k)];
    s.kept_dims.push_back(dims[static_cast<std::size_t>(k)]);
  }
  if (static_cast<std::size_t>(s.kept_dim) > dim_cap) {
    throw ResourceError("partial_trace: kept dimension " + std::to_string(s.kept_dim) + " exceeds cap " +
                        std::to_string(dim_cap));
  }
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  s.rest_dim = total / s.kept_dim;
  s.kept.resize(static_cast<std::size_t>(total));
  s.rest.resize(static_cast<std::size_t>(total));
  std::vector<int> digit(dims.size(), 0);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index kidx = 0, ridx = 0;
    for (std::size_t q = 0; q < dims.size(); ++q) {
      if (is_kept[q]) kidx = kidx * dims[q] + digit[q];
      else ridx = ridx * dims[q] + digit[q];
    }
    s.kept[static_cast<std::size_t>(idx)] = kidx;
    s.rest[static_cast<std::size_t>(idx)] = ridx;
    // Increment the mixed-radix counter, last site fastest.
    for (std::size_t q = dims.size(); q-- > 0;) {
      if (++digit[q] < dims[q]) break;
      digit[q] = 0;
    }
  }
  return s;
}

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(what) + ": dimension mismatch " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::size_t twirl_side(int n_copies, int dim, std::size_t dim_cap, const char* what) {
  if (n_copies < 1) throw InvalidDimension(std::string(what) + ": n_copies must be >= 1");
  if (dim < 1) throw InvalidDimension(std::string(what) + ": dim must be >= 1");
  std::size_t side = 1;
  for (int c = 0; c < n_copies; ++c) {
    side *= static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (side > dim_cap) {
      throw ResourceError(std::string(what) + ": (dim^2)^n_copies exceeds cap " + std::to_string(dim_cap));
    }
  }
  return side;
}

}  // namespace

DensityMatrix partial_trace(const DenseState& psi, const std::vector<int>& keep, std::size_t dim_cap) {
  const Split s = split_indices(psi.dims, keep, dim_cap);
  ComplexMatrix m = ComplexMatrix::Zero(s.kept_dim, s.rest_dim);
  for (std::size_t idx = 0; idx < s.kept.size(); ++idx) {
    m(s.kept[idx], s.rest[idx]) = psi.amplitudes(static_cast<Eigen::Index>(idx));
  }
  ComplexMatrix rho = m * m.adjoint();
  return DensityMatrix(0.5 * (rho + rho.adjoint()), s.kept_dims);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep, std::size_t dim_cap) {
  const Split s = split_indices(dims_of(rho), keep, dim_cap);
  ComplexMatrix out = ComplexMatrix::Zero(s.kept_dim, s.kept_dim);
  const auto total = static_cast<std::size_t>(rho.dim());
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      if (s.rest[i] != s.rest[j]) continue;
      out(s.kept[i], s.kept[j]) += rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DensityMatrix(std::move(out), s.kept_dims);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a, b, "trace_distance");
  // The solver is not exactly odd in its argument; a fixed operand order makes
  // the result exactly symmetric.
  const bool swap = std::lexicographical_compare(
      b.matrix.data(), b.matrix.data() + b.matrix.size(), a.matrix.data(), a.matrix.data() + a.matrix.size(),
      [](const Complex& x, const Complex& y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
  const ComplexMatrix diff = swap ? ComplexMatrix(b.matrix - a.matrix) : ComplexMatrix(a.matrix - b.matrix);
  return hermitian_eigenvalues(diff).cwiseAbs().sum();
}

double hs_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a, b, "hs_distance");
  return (a.matrix - b.matrix).norm();
}

double purity_moment(const DensityMatrix& rho, int m) {
  if (m < 2) throw std::invalid_argument("purity_moment: m must be >= 2");
  if (m == 2) {
    // Tr ρ² = ‖ρ‖_F² for Hermitian ρ.
    return rho.matrix.squaredNorm();
  }
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho.matrix);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::pow(ev(i), m);
  return sum;
}

double min_eigenvalue(const DensityMatrix& rho) {
  const double lo = hermitian_eigenvalues(rho.matrix)(0);
  return (lo < 0.0 && lo > -1e-10) ? 0.0 : lo;
}

double global_entanglement_from_purities(const std::vector<double>& purities) {
  if (purities.empty()) throw InvalidDimension("global_entanglement: no sites");
  const double sum = std::accumulate(purities.begin(), purities.end(), 0.0);
  return 2.0 - 2.0 * sum / static_cast<double>(purities.size());
}

double global_entanglement_q(const DenseState& psi) {
  for (int d : psi.dims) {
    if (d != 2) throw ShapeError("global_entanglement_q: all sites must be qubits");
  }
  const DenseState unit = psi.normalized();
  std::vector<double> purities;
  purities.reserve(psi.dims.size());
  for (int k = 0; k < static_cast<int>(psi.dims.size()); ++k) {
    purities.push_back(purity_moment(partial_trace(unit, {k}), 2));
  }
  return global_entanglement_from_purities(purities);
}

double cue_q_exact(int n_qubits) {
  if (n_qubits < 1) throw InvalidDimension("cue_q_exact: n must be >= 1");
  const double p = std::ldexp(1.0, n_qubits);
  return (p - 2.0) / (p + 1.0);
}

double cue_moment_exact(int m, long long d_a, long long d_b) {
  if (d_a < 1 || d_b < 1) throw InvalidDimension("cue_moment_exact: dimensions must be >= 1");
  const auto a = static_cast<double>(d_a);
  const auto b = static_cast<double>(d_b);
  const double ab = a * b;
  switch (m) {
    case 2:
      return (a + b) / (ab + 1.0);
    case 3:
      return (a * a + 3.0 * ab + b * b + 1.0) / ((ab + 1.0) * (ab + 2.0));
    case 4:
      return (a * a * a + 6.0 * a * a * b + 6.0 * a * b * b + b * b * b + 5.0 * a + 5.0 * b) /
             ((ab + 1.0) * (ab + 2.0) * (ab + 3.0));
    default:
      throw std::invalid_argument("cue_moment_exact: m must be 2, 3 or 4, got " + std::to_string(m));
  }
}

double cue_min_eig_exact(int d_a) {
  if (d_a < 2) throw InvalidDimension("cue_min_eig_exact: d_a must be >= 2");
  const double a = d_a;
  return 1.0 / (a * a * a);
}

double typicality_bound(int d_s, int d_b) {
  if (d_s < 1 || d_b < 1) throw InvalidDimension("typicality_bound: dimensions must be >= 1");
  return std::sqrt(static_cast<double>(d_s) / static_cast<double>(d_b));
}

ComplexMatrix maximally_entangled_projector(int d) {
  if (d < 1) throw InvalidDimension("maximally_entangled_projector: d must be >= 1");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d) * d);
  for (int l = 0; l < d; ++l) v(l * d + l) = 1.0;
  return v * v.adjoint() / static_cast<double>(d);
}

ComplexMatrix mc_twirl_moment(int n_copies, int dim, int r, Seed seed, std::size_t dim_cap) {
  const auto side = static_cast<Eigen::Index>(twirl_side(n_copies, dim, dim_cap, "mc_twirl_moment"));
  if (r < 1) throw std::invalid_argument("mc_twirl_moment: r must be >= 1");
  ComplexMatrix acc = ComplexMatrix::Zero(side, side);
  for (int i = 0; i < r; ++i) {
    const ComplexMatrix u = haar_unitary(dim, subseed(seed, static_cast<std::uint64_t>(i))).matrix();
    const ComplexMatrix pair = kron(u, u.conjugate());
    ComplexMatrix term = pair;
    for (int c = 1; c < n_copies; ++c) term = kron(term, pair);
    acc += term;
  }
  return acc / static_cast<double>(r);
}

ComplexMatrix permutation_twirl_expression(int n_copies, int dim, std::size_t dim_cap) {
  const auto side = static_cast<Eigen::Index>(twirl_side(n_copies, dim, dim_cap, "permutation_twirl_expression"));
  std::vector<int> sigma(static_cast<std::size_t>(n_copies));
  std::iota(sigma.begin(), sigma.end(), 0);
  const double scale = std::pow(static_cast<double>(dim), -0.5 * n_copies);
  ComplexMatrix out = ComplexMatrix::Zero(side, side);
  const std::size_t n = sigma.size();
  do {
    ComplexVector v = ComplexVector::Zero(side);
    // Enumerate i_1..i_N; the vector has a 1 at digits (i_1, i_σ(1), ..., i_N, i_σ(N)).
    std::vector<int> digits(n, 0);
    long count = 1;
    for (std::size_t c = 0; c < n; ++c) count *= dim;
    for (long t = 0; t < count; ++t) {
      Eigen::Index idx = 0;
      for (std::size_t m = 0; m < n; ++m) {
        idx = idx * dim + digits[m];
        idx = idx * dim + digits[static_cast<std::size_t>(sigma[m])];
      }
      v(idx) = scale;
      for (std::size_t m = n; m-- > 0;) {
        if (++digits[m] < dim) break;
        digits[m] = 0;
      }
    }
    out += v * v.adjoint();
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

}  // namespace rmps
