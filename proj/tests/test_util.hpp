#pragma once

#include <cmath>
#include <vector>

#include "rmps/mps.hpp"
#include "rmps/random.hpp"
#include "rmps/types.hpp"

namespace rmps_test {

using rmps::Complex;
using rmps::ComplexMatrix;
using rmps::ComplexVector;

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline ComplexMatrix random_hermitian(int d, rmps::Seed seed) {
  const ComplexMatrix g = rmps::ginibre(d, seed);
  return (g + g.adjoint()) / 2.0;
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Amplitudes from explicit matrix products, one basis string at a time.
// Deliberately independent of to_dense().
inline ComplexVector brute_amplitudes(const rmps::Mps& mps) {
  const int n = mps.n_sites();
  const int d = mps.phys_dim();
  const int chi = mps.bond_dim();
  long total = 1;
  for (int k = 0; k < n; ++k) total *= d;
  ComplexVector out(total);
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = n - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<int>(rem % d);
      rem /= d;
    }
    ComplexMatrix prod = ComplexMatrix::Identity(chi, chi);
    for (int k = 0; k < n; ++k) prod = prod * mps.site(k).a[static_cast<std::size_t>(digits[static_cast<std::size_t>(k)])];
    if (mps.boundary() == rmps::BoundaryCondition::kPeriodic) {
      out(idx) = prod.trace();
    } else {
      out(idx) = mps.left_vec().dot(prod * mps.right_vec());
    }
  }
  return out;
}

// Applies the site operators of `obs` to psi (site 0 is the most significant
// digit).
inline ComplexVector apply_local(const ComplexVector& psi, int n_sites, int d, const rmps::LocalObservable& obs) {
  ComplexVector cur = psi;
  for (int k = 0; k < obs.length(); ++k) {
    const int s = obs.start_site + k;
    long stride = 1;
    for (int j = s + 1; j < n_sites; ++j) stride *= d;
    const ComplexMatrix& op = obs.site_ops[static_cast<std::size_t>(k)];
    ComplexVector next = ComplexVector::Zero(cur.size());
    for (long idx = 0; idx < cur.size(); ++idx) {
      const int digit = static_cast<int>((idx / stride) % d);
      const long base = idx - digit * stride;
      for (int j = 0; j < d; ++j) next(idx) += op(digit, j) * cur(base + j * stride);
    }
    cur = next;
  }
  return cur;
}

// χ=1 product state with every site in basis state `level`.
inline rmps::Mps basis_product(int n_sites, int d, int level) {
  rmps::SiteTensor t;
  for (int i = 0; i < d; ++i) t.a.push_back(ComplexMatrix::Constant(1, 1, i == level ? 1.0 : 0.0));
  const ComplexVector one = ComplexVector::Ones(1);
  return rmps::Mps::open(std::vector<rmps::SiteTensor>(static_cast<std::size_t>(n_sites), t), one, one);
}

}  // namespace rmps_test
