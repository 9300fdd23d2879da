#include "rmps/mps.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "rmps/errors.hpp"

namespace rmps {

namespace {

constexpr double kBoundaryNormTol = 1e-10;

// Boundary vectors of one summand of the state. OBC has a single channel;
// PBC is the sum over α of the OBC chains with φ_I = φ_F = |α⟩.
struct Channel {
  ComplexVector left;
  ComplexVector right;
};

std::vector<Channel> channels(const Mps& m) {
  if (m.boundary() == BoundaryCondition::kOpen) return {{m.left_vec(), m.right_vec()}};
  std::vector<Channel> out;
  const int chi = m.bond_dim();
  out.reserve(static_cast<std::size_t>(chi));
  for (int a = 0; a < chi; ++a) {
    ComplexVector e = ComplexVector::Unit(chi, a);
    out.push_back({e, e});
  }
  return out;
}

// env'(β, β') = Σ_{i,j} ⟨j|O|i⟩ Σ_{α,α'} env(α, α') K^i(α, β) conj(B^j(α', β')),
// i.e. env' = Σ_{i,j} ⟨j|O|i⟩ K^iᵀ env conj(B^j). Null op means identity.
ComplexMatrix step_left(const ComplexMatrix& env, const SiteTensor& ket, const SiteTensor& bra,
                        const ComplexMatrix* op) {
  ComplexMatrix out = ComplexMatrix::Zero(ket.bond_dim(), bra.bond_dim());
  const int d = ket.phys_dim();
  for (int i = 0; i < d; ++i) {
    const ComplexMatrix t = ket.a[i].transpose() * env;
    if (op == nullptr) {
      out.noalias() += t * bra.a[i].conjugate();
      continue;
    }
    ComplexMatrix c = ComplexMatrix::Zero(bra.bond_dim(), bra.bond_dim());
    bool any = false;
    for (int j = 0; j < d; ++j) {
      const Complex w = (*op)(j, i);
      if (w == Complex(0.0, 0.0)) continue;
      c.noalias() += w * bra.a[j].conjugate();
      any = true;
    }
    if (any) out.noalias() += t * c;
  }
  return out;
}

// R(α, α') = Σ_{i,j} ⟨j|O|i⟩ (K^i R B^j†)(α, α').
ComplexMatrix step_right(const ComplexMatrix& r, const SiteTensor& ket, const SiteTensor& bra,
                         const ComplexMatrix* op) {
  ComplexMatrix out = ComplexMatrix::Zero(ket.bond_dim(), bra.bond_dim());
  const int d = ket.phys_dim();
  for (int i = 0; i < d; ++i) {
    const ComplexMatrix t = ket.a[i] * r;
    if (op == nullptr) {
      out.noalias() += t * bra.a[i].adjoint();
      continue;
    }
    ComplexMatrix c = ComplexMatrix::Zero(bra.bond_dim(), bra.bond_dim());
    bool any = false;
    for (int j = 0; j < d; ++j) {
      const Complex w = (*op)(j, i);
      if (w == Complex(0.0, 0.0)) continue;
      c.noalias() += w * bra.a[j].adjoint();
      any = true;
    }
    if (any) out.noalias() += t * c;
  }
  return out;
}

ComplexMatrix left_init(const Channel& ket, const Channel& bra) {
  return ket.left.conjugate() * bra.left.transpose();
}

ComplexMatrix right_init(const Channel& ket, const Channel& bra) {
  return ket.right * bra.right.adjoint();
}

Complex close_chain(const ComplexMatrix& env, const Channel& ket, const Channel& bra) {
  return (ket.right.transpose() * env * bra.right.conjugate())(0, 0);
}

void check_compatible(const Mps& a, const Mps& b) {
  if (a.n_sites() != b.n_sites() || a.phys_dim() != b.phys_dim()) {
    throw ShapeError("mps: states differ in number of sites or physical dimension");
  }
}

// ⟨bra| ⊗_k O[k] |ket⟩ with ops[k] == nullptr meaning identity.
Complex contract(const Mps& bra, const Mps& ket, const std::vector<const ComplexMatrix*>& ops) {
  check_compatible(bra, ket);
  Complex total(0.0, 0.0);
  const auto kc = channels(ket);
  const auto bc = channels(bra);
  for (const auto& k : kc) {
    for (const auto& b : bc) {
      ComplexMatrix env = left_init(k, b);
      for (int s = 0; s < ket.n_sites(); ++s) env = step_left(env, ket.site(s), bra.site(s), ops[s]);
      total += close_chain(env, k, b);
    }
  }
  return total;
}

void check_site(const Mps& mps, int site) {
  if (site < 0 || site >= mps.n_sites()) {
    throw ShapeError("mps: site index " + std::to_string(site) + " out of range [0, " +
                     std::to_string(mps.n_sites()) + ")");
  }
}

void check_op_shape(const Mps& mps, const ComplexMatrix& op) {
  if (op.rows() != mps.phys_dim() || op.cols() != mps.phys_dim()) {
    throw ShapeError("mps: site operator must be " + std::to_string(mps.phys_dim()) + "x" +
                     std::to_string(mps.phys_dim()));
  }
}

std::size_t checked_power(int base, int exponent, std::size_t cap, const char* what) {
  std::size_t v = 1;
  for (int i = 0; i < exponent; ++i) {
    v *= static_cast<std::size_t>(base);
    if (v > cap) {
      throw ResourceError(std::string(what) + ": dimension " + std::to_string(base) + "^" +
                          std::to_string(exponent) + " exceeds cap " + std::to_string(cap));
    }
  }
  return v;
}

}  // namespace

const SiteTensor& Mps::site(int k) const { return *sites_.at(static_cast<std::size_t>(k)); }

void Mps::check() const {
  if (sites_.empty()) throw InvalidDimension("mps: need at least one site");
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    const SiteTensor& s = *sites_[k];
    if (s.phys_dim() != phys_dim_ || phys_dim_ < 1) {
      throw ShapeError("mps: site " + std::to_string(k) + " has inconsistent physical dimension");
    }
    for (const auto& m : s.a) {
      if (m.rows() != bond_dim_ || m.cols() != bond_dim_) {
        throw ShapeError("mps: site " + std::to_string(k) + " matrices must be " +
                         std::to_string(bond_dim_) + "x" + std::to_string(bond_dim_));
      }
    }
  }
  if (boundary_ == BoundaryCondition::kOpen) {
    for (const ComplexVector* v : {&left_, &right_}) {
      if (v->size() != bond_dim_) throw ShapeError("mps: boundary vector has wrong dimension");
      if (std::abs(v->norm() - 1.0) > kBoundaryNormTol) {
        throw ShapeError("mps: boundary vectors must have unit norm");
      }
    }
  }
}

Mps Mps::open(std::vector<SiteTensor> sites, ComplexVector left, ComplexVector right) {
  Mps m;
  if (sites.empty()) throw InvalidDimension("mps: need at least one site");
  m.phys_dim_ = sites.front().phys_dim();
  m.bond_dim_ = sites.front().bond_dim();
  for (auto& s : sites) m.sites_.push_back(std::make_shared<const SiteTensor>(std::move(s)));
  m.boundary_ = BoundaryCondition::kOpen;
  m.left_ = std::move(left);
  m.right_ = std::move(right);
  m.check();
  return m;
}

Mps Mps::periodic(std::vector<SiteTensor> sites) {
  Mps m;
  if (sites.empty()) throw InvalidDimension("mps: need at least one site");
  m.phys_dim_ = sites.front().phys_dim();
  m.bond_dim_ = sites.front().bond_dim();
  for (auto& s : sites) m.sites_.push_back(std::make_shared<const SiteTensor>(std::move(s)));
  m.boundary_ = BoundaryCondition::kPeriodic;
  m.check();
  return m;
}

Mps Mps::homogeneous_open(int n_sites, SiteTensor site, ComplexVector left, ComplexVector right) {
  if (n_sites < 1) throw InvalidDimension("mps: need at least one site");
  Mps m;
  m.phys_dim_ = site.phys_dim();
  m.bond_dim_ = site.bond_dim();
  auto shared = std::make_shared<const SiteTensor>(std::move(site));
  m.sites_.assign(static_cast<std::size_t>(n_sites), shared);
  m.boundary_ = BoundaryCondition::kOpen;
  m.homogeneous_ = true;
  m.left_ = std::move(left);
  m.right_ = std::move(right);
  m.check();
  return m;
}

Mps Mps::homogeneous_periodic(int n_sites, SiteTensor site) {
  if (n_sites < 1) throw InvalidDimension("mps: need at least one site");
  Mps m;
  m.phys_dim_ = site.phys_dim();
  m.bond_dim_ = site.bond_dim();
  auto shared = std::make_shared<const SiteTensor>(std::move(site));
  m.sites_.assign(static_cast<std::size_t>(n_sites), shared);
  m.boundary_ = BoundaryCondition::kPeriodic;
  m.homogeneous_ = true;
  m.check();
  return m;
}

Mps Mps::with_site(int k, SiteTensor tensor) const {
  check_site(*this, k);
  Mps m = *this;
  m.sites_[static_cast<std::size_t>(k)] = std::make_shared<const SiteTensor>(std::move(tensor));
  m.homogeneous_ = false;
  m.check();
  return m;
}

std::vector<ComplexMatrix> a_matrices_from_unitary(const UnitaryMatrix& u, int phys_dim, int bond_dim) {
  if (phys_dim < 1 || bond_dim < 1) throw InvalidDimension("a_matrices_from_unitary: dims must be >= 1");
  if (u.dim() != static_cast<Eigen::Index>(phys_dim) * bond_dim) {
    throw ShapeError("a_matrices_from_unitary: unitary has dimension " + std::to_string(u.dim()) +
                     ", expected chi*D = " + std::to_string(phys_dim * bond_dim));
  }
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(phys_dim));
  for (int i = 0; i < phys_dim; ++i) {
    // Rows (i, α) = i·χ + α, columns (0, β) = β.
    out.emplace_back(u.matrix().block(static_cast<Eigen::Index>(i) * bond_dim, 0, bond_dim, bond_dim));
  }
  return out;
}

Mps sample_rmps(const RmpsParams& p, Seed seed) {
  if (p.n_sites < 1) throw InvalidDimension("sample_rmps: n_sites must be >= 1");
  if (p.bond_dim < 1) throw InvalidDimension("sample_rmps: bond_dim must be >= 1");
  if (p.phys_dim < 2) throw InvalidDimension("sample_rmps: phys_dim must be >= 2");
  const int dim = p.phys_dim * p.bond_dim;
  auto draw_site = [&](std::uint64_t k) {
    return SiteTensor{a_matrices_from_unitary(haar_unitary(dim, subseed(seed, k)), p.phys_dim, p.bond_dim)};
  };
  const bool open = p.boundary == BoundaryCondition::kOpen;
  ComplexVector left, right;
  if (open) {
    left = ComplexVector::Unit(p.bond_dim, 0);
    right = haar_state(p.bond_dim, subseed(seed, static_cast<std::uint64_t>(p.n_sites))).amplitudes;
  }
  if (p.homogeneous) {
    SiteTensor s = draw_site(0);
    return open ? Mps::homogeneous_open(p.n_sites, std::move(s), std::move(left), std::move(right))
                : Mps::homogeneous_periodic(p.n_sites, std::move(s));
  }
  std::vector<SiteTensor> sites;
  sites.reserve(static_cast<std::size_t>(p.n_sites));
  for (int k = 0; k < p.n_sites; ++k) sites.push_back(draw_site(static_cast<std::uint64_t>(k)));
  return open ? Mps::open(std::move(sites), std::move(left), std::move(right))
              : Mps::periodic(std::move(sites));
}

TransferOp transfer_observable(const Mps& mps, int site, const ComplexMatrix& op) {
  check_site(mps, site);
  check_op_shape(mps, op);
  const SiteTensor& s = mps.site(site);
  const int chi = mps.bond_dim();
  const int d = mps.phys_dim();
  ComplexMatrix e = ComplexMatrix::Zero(chi * chi, chi * chi);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Complex w = op(i, j);
      if (w == Complex(0.0, 0.0)) continue;
      const ComplexMatrix& ai = s.a[i];
      const ComplexMatrix aj = s.a[j].conjugate();
      for (int a = 0; a < chi; ++a)
        for (int b = 0; b < chi; ++b) {
          const Complex x = w * ai(a, b);
          if (x == Complex(0.0, 0.0)) continue;
          e.block(a * chi, b * chi, chi, chi).noalias() += x * aj;
        }
    }
  }
  return {std::move(e)};
}

TransferOp transfer_identity(const Mps& mps, int site) {
  check_site(mps, site);
  return transfer_observable(mps, site, ComplexMatrix::Identity(mps.phys_dim(), mps.phys_dim()));
}

double mps_norm_sq(const Mps& mps) {
  const std::vector<const ComplexMatrix*> ops(static_cast<std::size_t>(mps.n_sites()), nullptr);
  return contract(mps, mps, ops).real();
}

Complex mps_overlap(const Mps& a, const Mps& b) {
  check_compatible(a, b);
  const std::vector<const ComplexMatrix*> ops(static_cast<std::size_t>(a.n_sites()), nullptr);
  return contract(a, b, ops);
}

double expectation(const Mps& mps, const LocalObservable& obs) {
  if (obs.length() < 1 || obs.start_site < 0 || obs.start_site + obs.length() > mps.n_sites()) {
    throw ShapeError("expectation: observable does not fit inside the chain");
  }
  std::vector<const ComplexMatrix*> ops(static_cast<std::size_t>(mps.n_sites()), nullptr);
  for (int l = 0; l < obs.length(); ++l) {
    check_op_shape(mps, obs.site_ops[static_cast<std::size_t>(l)]);
    ops[static_cast<std::size_t>(obs.start_site + l)] = &obs.site_ops[static_cast<std::size_t>(l)];
  }
  return contract(mps, mps, ops).real() / mps_norm_sq(mps);
}

DensityMatrix reduced_density_matrix(const Mps& mps, int first, int length, std::size_t dim_cap) {
  if (length < 1 || first < 0 || first + length > mps.n_sites()) {
    throw ShapeError("reduced_density_matrix: site range outside the chain");
  }
  const int d = mps.phys_dim();
  const auto dim = static_cast<Eigen::Index>(checked_power(d, length, dim_cap, "reduced_density_matrix"));
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  const auto ch = channels(mps);
  const int last = first + length;

  for (const auto& k : ch) {
    for (const auto& b : ch) {
      ComplexMatrix left = left_init(k, b);
      for (int s = 0; s < first; ++s) left = step_left(left, mps.site(s), mps.site(s), nullptr);
      ComplexMatrix right = right_init(k, b);
      for (int s = mps.n_sites() - 1; s >= last; --s) right = step_right(right, mps.site(s), mps.site(s), nullptr);

      // Depth-first over (ket string x, bra string y) of the open sites.
      std::function<void(int, const ComplexMatrix&, Eigen::Index, Eigen::Index)> expand =
          [&](int s, const ComplexMatrix& env, Eigen::Index x, Eigen::Index y) {
            if (s == last) {
              rho(x, y) += env.cwiseProduct(right).sum();
              return;
            }
            const SiteTensor& t = mps.site(s);
            for (int p = 0; p < d; ++p) {
              const ComplexMatrix kp = t.a[p].transpose() * env;
              for (int q = 0; q < d; ++q) {
                expand(s + 1, kp * t.a[q].conjugate(), x * d + p, y * d + q);
              }
            }
          };
      expand(first, left, 0, 0);
    }
  }
  const double tr = rho.trace().real();
  rho /= tr;
  ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(std::move(herm), std::vector<int>(static_cast<std::size_t>(length), d));
}

std::vector<DensityMatrix> single_site_density_matrices(const Mps& mps) {
  const int n = mps.n_sites();
  const int d = mps.phys_dim();
  std::vector<ComplexMatrix> rhos(static_cast<std::size_t>(n), ComplexMatrix::Zero(d, d));
  const auto ch = channels(mps);
  std::vector<ComplexMatrix> lefts(static_cast<std::size_t>(n));
  for (const auto& k : ch) {
    for (const auto& b : ch) {
      ComplexMatrix env = left_init(k, b);
      for (int s = 0; s < n; ++s) {
        lefts[static_cast<std::size_t>(s)] = env;
        if (s + 1 < n) env = step_left(env, mps.site(s), mps.site(s), nullptr);
      }
      ComplexMatrix right = right_init(k, b);
      for (int s = n - 1; s >= 0; --s) {
        const SiteTensor& t = mps.site(s);
        const ComplexMatrix& l = lefts[static_cast<std::size_t>(s)];
        ComplexMatrix& rho = rhos[static_cast<std::size_t>(s)];
        for (int p = 0; p < d; ++p) {
          const ComplexMatrix kp = t.a[p].transpose() * l;
          for (int q = 0; q < d; ++q) rho(p, q) += (kp * t.a[q].conjugate()).cwiseProduct(right).sum();
        }
        if (s > 0) right = step_right(right, t, t, nullptr);
      }
    }
  }
  std::vector<DensityMatrix> out;
  out.reserve(rhos.size());
  for (auto& rho : rhos) {
    rho /= rho.trace().real();
    out.emplace_back(0.5 * (rho + rho.adjoint()), std::vector<int>{d});
  }
  return out;
}

DenseState to_dense(const Mps& mps, std::size_t amplitude_cap) {
  const int n = mps.n_sites();
  const int d = mps.phys_dim();
  const std::size_t total = checked_power(d, n, amplitude_cap, "to_dense");
  ComplexVector amps(static_cast<Eigen::Index>(total));

  if (mps.boundary() == BoundaryCondition::kOpen) {
    std::function<void(int, const ComplexMatrix&, Eigen::Index)> walk = [&](int s, const ComplexMatrix& row,
                                                                           Eigen::Index idx) {
      if (s == n) {
        amps(idx) = (row * mps.right_vec())(0, 0);
        return;
      }
      for (int i = 0; i < d; ++i) walk(s + 1, row * mps.site(s).a[i], idx * d + i);
    };
    walk(0, mps.left_vec().adjoint(), 0);
  } else {
    std::function<void(int, const ComplexMatrix&, Eigen::Index)> walk = [&](int s, const ComplexMatrix& prod,
                                                                           Eigen::Index idx) {
      if (s == n) {
        amps(idx) = prod.trace();
        return;
      }
      for (int i = 0; i < d; ++i) walk(s + 1, prod * mps.site(s).a[i], idx * d + i);
    };
    walk(0, ComplexMatrix::Identity(mps.bond_dim(), mps.bond_dim()), 0);
  }
  return DenseState(std::vector<int>(static_cast<std::size_t>(n), d), std::move(amps));
}

double isometry_error(const Mps& mps) {
  double worst = 0.0;
  const int chi = mps.bond_dim();
  for (int k = 0; k < mps.n_sites(); ++k) {
    ComplexMatrix sum = ComplexMatrix::Zero(chi, chi);
    for (const auto& a : mps.site(k).a) sum.noalias() += a.adjoint() * a;
    worst = std::max(worst, (sum - ComplexMatrix::Identity(chi, chi)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace rmps
