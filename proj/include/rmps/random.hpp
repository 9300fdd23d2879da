#pragma once

#include <cstdint>
#include <random>

#include "rmps/types.hpp"

namespace rmps {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Independent stream for sample/site `index` under `master`. Depends only on
// (master, index), so ensembles can be split over workers in any order.
Seed subseed(Seed master, std::uint64_t index);

// Master seed of an independent stream, e.g. one ensemble of a parameter scan.
// Streams never coincide with subseed() values of the same master.
Seed derive_seed(Seed master, std::uint64_t stream);

using Engine = std::mt19937_64;

Engine make_engine(Seed seed);

// n×n matrix of i.i.d. complex Gaussians, real and imaginary parts each
// N(0, 1). Entries are drawn column by column, real part first, so the first
// column depends only on the first n draws.
ComplexMatrix ginibre(int n, Seed seed);

// Haar-distributed unitary: QR of ginibre(n, seed) with column phases fixed so
// that diag(R) is positive.
UnitaryMatrix haar_unitary(int n, Seed seed);

// Uniformly distributed unit vector in C^dim. Equals the first column of
// haar_unitary(dim, seed) up to roundoff, at O(dim) cost.
DenseState haar_state(int dim, Seed seed);
DenseState haar_state(std::vector<int> site_dims, Seed seed);

namespace detail {

// Orthonormalize `m` by Householder QR. Without the phase fix the result is
// unitary but not Haar distributed.
ComplexMatrix qr_unitary(const ComplexMatrix& m, bool phase_fix);

}  // namespace detail

}  // namespace rmps
