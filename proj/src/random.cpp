#include "rmps/random.hpp"

#include <cmath>
#include <string>

#include "rmps/errors.hpp"

namespace rmps {

namespace {

void require_positive(int n, const char* what) {
  if (n < 1) {
    throw InvalidDimension(std::string(what) + ": dimension must be >= 1, got " + std::to_string(n));
  }
}

}  // namespace

UnitaryMatrix UnitaryMatrix::from_matrix(ComplexMatrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError("UnitaryMatrix: matrix must be square and non-empty");
  }
  const ComplexMatrix gram = m.adjoint() * m;
  const double err = (gram - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kTolerance)) {
    throw ShapeError("UnitaryMatrix: |U^dag U - I|_max = " + std::to_string(err));
  }
  return UnitaryMatrix(std::move(m));
}

UnitaryMatrix make_unitary_unchecked(ComplexMatrix m) { return UnitaryMatrix(std::move(m)); }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed subseed(Seed master, std::uint64_t index) {
  return Seed{mix64(mix64(master.value) ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

Seed derive_seed(Seed master, std::uint64_t stream) {
  return Seed{mix64(mix64(master.value ^ 0xd1b54a32d192ed03ULL) + mix64(stream ^ 0x8cb92ba72f3d8dd7ULL))};
}

Engine make_engine(Seed seed) { return Engine(mix64(seed.value)); }

ComplexMatrix ginibre(int n, Seed seed) {
  require_positive(n, "ginibre");
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = normal(eng);
      const double im = normal(eng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

namespace detail {

ComplexMatrix qr_unitary(const ComplexMatrix& m, bool phase_fix) {
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  ComplexMatrix q = qr.householderQ();
  if (phase_fix) {
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const Complex d = r(j, j);
      const double mag = std::abs(d);
      if (mag > 0.0) q.col(j) *= d / mag;
    }
  }
  return q;
}

}  // namespace detail

UnitaryMatrix haar_unitary(int n, Seed seed) {
  return make_unitary_unchecked(detail::qr_unitary(ginibre(n, seed), true));
}

DenseState haar_state(int dim, Seed seed) { return haar_state(std::vector<int>{dim}, seed); }

DenseState haar_state(std::vector<int> site_dims, Seed seed) {
  std::size_t total = 1;
  for (int d : site_dims) {
    require_positive(d, "haar_state");
    total *= static_cast<std::size_t>(d);
  }
  if (site_dims.empty()) throw InvalidDimension("haar_state: no sites");
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVector v(static_cast<Eigen::Index>(total));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = normal(eng);
    const double im = normal(eng);
    v(i) = Complex(re, im);
  }
  v /= v.norm();
  return DenseState(std::move(site_dims), std::move(v));
}

}  // namespace rmps
