#pragma once

#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rmps/mps.hpp"
#include "rmps/stats.hpp"
#include "rmps/types.hpp"

namespace rmps {

// Haar-random pure states on a product of local spaces.
struct CueSource {
  std::vector<int> site_dims;
};

using EnsembleSource = std::variant<RmpsParams, CueSource>;

// Sample i of an ensemble is drawn from subseed(master_seed, i), so a run can
// be extended or split over workers without changing earlier samples.
struct EnsembleSpec {
  EnsembleSource source;
  int r = 500;
  Seed master_seed{};

  bool is_rmps() const { return std::holds_alternative<RmpsParams>(source); }
  int n_sites() const;
  // Local dimension of site k.
  int site_dim(int k) const;
  // Product of all site dimensions, saturating at SIZE_MAX.
  std::size_t total_dim() const;
  std::string label() const;
};

EnsembleSpec rmps_ensemble(RmpsParams params, int r, Seed seed);
EnsembleSpec cue_ensemble(int n_qubits, int r, Seed seed);

struct EnsembleOptions {
  int workers = default_workers();
};

struct EnsembleReport {
  EnsembleSpec spec;
  std::string estimator_name;
  double value = 0.0;
  double std_error = 0.0;
  // Closed-form target the value is measured against, if any.
  double reference = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_sample_values;
  double wall_time = 0.0;
};

enum class DistanceNorm { kTrace, kHilbertSchmidt };
enum class SubsystemReference { kEmpirical, kMaximallyMixed };

double distance(const DensityMatrix& a, const DensityMatrix& b, DistanceNorm norm);

// Normalized dense state of sample i (the RMPS path goes through to_dense).
DenseState sample_dense_state(const EnsembleSpec& spec, std::size_t i);
// Reduced state of sites [first, first + length) of sample i.
DensityMatrix sample_reduced_state(const EnsembleSpec& spec, std::size_t i, int first, int length);

// (1/r) Σ |ψ_i⟩⟨ψ_i| / ⟨ψ_i|ψ_i⟩.
DensityMatrix empirical_average_state(const EnsembleSpec& spec, const EnsembleOptions& opts = {});

// Distance of the empirical average from I/dim, with a delete-a-group
// jackknife standard error.
EnsembleReport average_state_distance(const EnsembleSpec& spec, DistanceNorm norm,
                                      const EnsembleOptions& opts = {});

// ‖ρ̄^{r'} − I/dim‖ for every prefix r' = 1..r.
std::vector<double> average_state_convergence(const EnsembleSpec& spec, DistanceNorm norm,
                                              const EnsembleOptions& opts = {});

struct SubsystemQuery {
  int length = 1;
  int first_site = 0;
  DistanceNorm norm = DistanceNorm::kTrace;
  SubsystemReference reference = SubsystemReference::kEmpirical;
};

// Mean over samples of ‖ρ_s,i − reference‖ where the reference is either the
// empirical average subsystem state or I/D^L.
EnsembleReport subsystem_distance_stats(const EnsembleSpec& spec, const SubsystemQuery& query,
                                        const EnsembleOptions& opts = {});

// The same mean evaluated on the prefixes r' in `prefixes`, each against its
// own prefix average.
std::vector<double> subsystem_distance_convergence(const EnsembleSpec& spec, const SubsystemQuery& query,
                                                   const std::vector<int>& prefixes,
                                                   const EnsembleOptions& opts = {});

struct PurityReport {
  // 1/r + cross term.
  EnsembleReport purity;
  // (1/r²) Σ_{i≠j} |⟨ψ_i|ψ_j⟩|² / (⟨ψ_i|ψ_i⟩⟨ψ_j|ψ_j⟩).
  EnsembleReport cross_term;
};

// Upper triangle of w_ij = |⟨ψ_i|ψ_j⟩|² / (⟨ψ_i|ψ_i⟩⟨ψ_j|ψ_j⟩); row i holds
// j = i+1, ..., r−1.
using PairWeights = std::vector<std::vector<double>>;

PairWeights pair_weights(std::span<const Mps> states, int workers = 1);

struct OverlapPurity {
  double purity = 0.0;
  double cross_term = 0.0;
  // Delete-one jackknife standard errors.
  double purity_stderr = 0.0;
  double cross_term_stderr = 0.0;
};

// Tr[(ρ̄^r)²] = 1/r + (2/r²) Σ_{i<j} w_ij, with row sums and the total
// accumulated by pairwise summation.
OverlapPurity purity_from_pair_weights(const PairWeights& w);

// Tr[(ρ̄^r)²] from pairwise overlaps; no dense object is built for RMPS.
PurityReport purity_of_average_via_overlaps(const EnsembleSpec& spec, const EnsembleOptions& opts = {});

// (cross − D^{−N}) / D^{−N}.
double purity_relative_error(const EnsembleSpec& spec, double cross_term);
double purity_relative_error(const EnsembleSpec& spec, const PurityReport& report);

struct QStatistics {
  Histogram histogram;
  EnsembleReport mean;
  EnsembleReport stddev;
};

// Global entanglement Q per sample (qubit chains only). RMPS samples use
// one-site reduced states from the MPS, never the dense state.
QStatistics q_statistics(const EnsembleSpec& spec, int bins = 100, const EnsembleOptions& opts = {});

// Subsystem A is the first k sites with D^k = d_a.
EnsembleReport moment_comparison(const EnsembleSpec& spec, int d_a, int m, const EnsembleOptions& opts = {});
EnsembleReport min_eig_comparison(const EnsembleSpec& spec, int d_a, const EnsembleOptions& opts = {});

// χ as a function of N: round(coefficient · N^exponent), at least 1.
struct ChiRule {
  double coefficient = 1.0;
  double exponent = 1.0;

  static ChiRule fixed(int chi) { return {static_cast<double>(chi), 0.0}; }
  static ChiRule linear() { return {1.0, 1.0}; }
  int chi_for(int n_sites) const;
};

struct ConcentrationParams {
  LocalObservable observable;
  ChiRule chi_rule;
  std::vector<int> n_values;
  int r = 500;
  Seed seed{};
  int phys_dim = 2;
  bool homogeneous = false;
  BoundaryCondition boundary = BoundaryCondition::kOpen;
};

// Per N: value = sample standard deviation of f = ⟨ψ|O|ψ⟩ over r samples,
// std_error = its jackknife standard error, per-sample values f_i.
std::vector<EnsembleReport> concentration_scan(const ConcentrationParams& params, const EnsembleOptions& opts = {});

}  // namespace rmps
