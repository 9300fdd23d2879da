#include "rmps/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "rmps/dense.hpp"
#include "rmps/errors.hpp"

namespace rmps {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::size_t kJackknifeGroups = 50;

void check_r(const EnsembleSpec& spec) {
  if (spec.r < 1) throw std::invalid_argument("ensemble: r must be >= 1");
}

void check_dense(const EnsembleSpec& spec, std::size_t cap) {
  const std::size_t dim = spec.total_dim();
  if (dim > cap) {
    throw ResourceError("ensemble: dense dimension " + (dim == std::numeric_limits<std::size_t>::max()
                                                            ? std::string("(overflow)")
                                                            : std::to_string(dim)) +
                        " exceeds cap " + std::to_string(cap));
  }
}

// Number of leading sites whose dimensions multiply to d_a; at least one site
// must remain as the bath.
int leading_sites_for(const EnsembleSpec& spec, long long d_a) {
  long long prod = 1;
  for (int k = 0; k + 1 < spec.n_sites() && prod < d_a; ++k) {
    prod *= spec.site_dim(k);
    if (prod == d_a) return k + 1;
  }
  throw ShapeError("ensemble: d_a = " + std::to_string(d_a) +
                   " is not the dimension of a proper leading block of sites");
}

long long bath_dim(const EnsembleSpec& spec, int first_sites) {
  long double prod = 1;
  for (int k = first_sites; k < spec.n_sites(); ++k) prod *= spec.site_dim(k);
  if (prod > static_cast<long double>(std::numeric_limits<long long>::max())) {
    throw ShapeError("ensemble: bath dimension overflows");
  }
  return static_cast<long long>(prod);
}

ComplexMatrix projector(const DenseState& psi) { return psi.amplitudes * psi.amplitudes.adjoint(); }

// Sums of normalized projectors over contiguous sample groups. Group
// boundaries depend only on (r, groups).
std::vector<ComplexMatrix> projector_group_sums(const EnsembleSpec& spec, std::size_t groups, int workers) {
  const auto r = static_cast<std::size_t>(spec.r);
  const auto dim = static_cast<Eigen::Index>(spec.total_dim());
  std::vector<ComplexMatrix> sums(groups, ComplexMatrix::Zero(dim, dim));
  parallel_for(groups, workers, [&](std::size_t g) {
    const std::size_t lo = g * r / groups;
    const std::size_t hi = (g + 1) * r / groups;
    for (std::size_t i = lo; i < hi; ++i) sums[g].noalias() += projector(sample_dense_state(spec, i));
  });
  return sums;
}

EnsembleReport make_report(const EnsembleSpec& spec, std::string name) {
  EnsembleReport rep;
  rep.spec = spec;
  rep.estimator_name = std::move(name);
  return rep;
}

DensityMatrix average_of(const std::vector<DensityMatrix>& states, std::size_t count) {
  ComplexMatrix acc = ComplexMatrix::Zero(states.front().dim(), states.front().dim());
  for (std::size_t i = 0; i < count; ++i) acc += states[i].matrix;
  return DensityMatrix(acc / static_cast<double>(count), states.front().subsystem_dims);
}

std::vector<DensityMatrix> reduced_states(const EnsembleSpec& spec, int first, int length, int workers) {
  std::vector<std::optional<DensityMatrix>> tmp(static_cast<std::size_t>(spec.r));
  parallel_for(tmp.size(), workers, [&](std::size_t i) { tmp[i] = sample_reduced_state(spec, i, first, length); });
  std::vector<DensityMatrix> out;
  out.reserve(tmp.size());
  for (auto& t : tmp) out.push_back(std::move(*t));
  return out;
}

void check_subsystem(const EnsembleSpec& spec, const SubsystemQuery& q) {
  if (q.length < 1 || q.first_site < 0 || q.first_site + q.length > spec.n_sites()) {
    throw ShapeError("ensemble: subsystem outside the chain");
  }
  if (q.length >= spec.n_sites()) throw ShapeError("ensemble: subsystem must leave a bath (L < N)");
}

double q_of_sample(const EnsembleSpec& spec, std::size_t i) {
  if (const auto* p = std::get_if<RmpsParams>(&spec.source)) {
    const Mps mps = sample_rmps(*p, subseed(spec.master_seed, i));
    std::vector<double> purities;
    for (const auto& rho : single_site_density_matrices(mps)) purities.push_back(purity_moment(rho, 2));
    return global_entanglement_from_purities(purities);
  }
  return global_entanglement_q(sample_dense_state(spec, i));
}

EnsembleReport per_sample_deviation(const EnsembleSpec& spec, std::string name, double reference,
                                    std::vector<double> values, Clock::time_point t0) {
  EnsembleReport rep = make_report(spec, std::move(name));
  rep.reference = reference;
  rep.value = std::abs(mean(values) - reference);
  rep.std_error = standard_error(values);
  rep.per_sample_values = std::move(values);
  rep.wall_time = seconds_since(t0);
  return rep;
}

}  // namespace

int EnsembleSpec::n_sites() const {
  if (const auto* p = std::get_if<RmpsParams>(&source)) return p->n_sites;
  return static_cast<int>(std::get<CueSource>(source).site_dims.size());
}

int EnsembleSpec::site_dim(int k) const {
  if (const auto* p = std::get_if<RmpsParams>(&source)) return p->phys_dim;
  return std::get<CueSource>(source).site_dims.at(static_cast<std::size_t>(k));
}

std::size_t EnsembleSpec::total_dim() const {
  std::size_t total = 1;
  const std::size_t max = std::numeric_limits<std::size_t>::max();
  for (int k = 0; k < n_sites(); ++k) {
    const auto d = static_cast<std::size_t>(site_dim(k));
    if (total > max / d) return max;
    total *= d;
  }
  return total;
}

std::string EnsembleSpec::label() const {
  std::ostringstream os;
  if (const auto* p = std::get_if<RmpsParams>(&source)) {
    os << "rmps(N=" << p->n_sites << ",D=" << p->phys_dim << ",chi=" << p->bond_dim << ","
       << (p->homogeneous ? "homogeneous" : "non-homogeneous") << ","
       << (p->boundary == BoundaryCondition::kOpen ? "obc" : "pbc") << ")";
  } else {
    os << "cue(N=" << n_sites() << ",dim=" << total_dim() << ")";
  }
  return os.str();
}

EnsembleSpec rmps_ensemble(RmpsParams params, int r, Seed seed) { return {params, r, seed}; }

EnsembleSpec cue_ensemble(int n_qubits, int r, Seed seed) {
  if (n_qubits < 1) throw InvalidDimension("cue_ensemble: need at least one qubit");
  return {CueSource{std::vector<int>(static_cast<std::size_t>(n_qubits), 2)}, r, seed};
}

double distance(const DensityMatrix& a, const DensityMatrix& b, DistanceNorm norm) {
  return norm == DistanceNorm::kTrace ? trace_distance(a, b) : hs_distance(a, b);
}

DenseState sample_dense_state(const EnsembleSpec& spec, std::size_t i) {
  const Seed s = subseed(spec.master_seed, i);
  if (const auto* p = std::get_if<RmpsParams>(&spec.source)) return to_dense(sample_rmps(*p, s)).normalized();
  return haar_state(std::get<CueSource>(spec.source).site_dims, s);
}

DensityMatrix sample_reduced_state(const EnsembleSpec& spec, std::size_t i, int first, int length) {
  if (const auto* p = std::get_if<RmpsParams>(&spec.source)) {
    return reduced_density_matrix(sample_rmps(*p, subseed(spec.master_seed, i)), first, length);
  }
  std::vector<int> keep;
  for (int k = first; k < first + length; ++k) keep.push_back(k);
  return partial_trace(sample_dense_state(spec, i), keep);
}

DensityMatrix empirical_average_state(const EnsembleSpec& spec, const EnsembleOptions& opts) {
  check_r(spec);
  check_dense(spec, kDefaultDensityDimCap);
  const auto groups = projector_group_sums(spec, std::min<std::size_t>(static_cast<std::size_t>(spec.r), kJackknifeGroups),
                                           opts.workers);
  ComplexMatrix acc = ComplexMatrix::Zero(groups.front().rows(), groups.front().cols());
  for (const auto& g : groups) acc += g;
  std::vector<int> dims;
  for (int k = 0; k < spec.n_sites(); ++k) dims.push_back(spec.site_dim(k));
  return DensityMatrix(acc / static_cast<double>(spec.r), std::move(dims));
}

EnsembleReport average_state_distance(const EnsembleSpec& spec, DistanceNorm norm, const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  check_dense(spec, kDefaultDensityDimCap);
  const auto r = static_cast<std::size_t>(spec.r);
  const std::size_t n_groups = std::min(r, kJackknifeGroups);
  const auto groups = projector_group_sums(spec, n_groups, opts.workers);
  const auto dim = static_cast<int>(spec.total_dim());
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(dim);
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  for (const auto& g : groups) total += g;

  EnsembleReport rep = make_report(spec, norm == DistanceNorm::kTrace ? "avg_state_trace_distance"
                                                                      : "avg_state_hs_distance");
  rep.value = distance(DensityMatrix(total / static_cast<double>(r)), mixed, norm);
  if (n_groups >= 2) {
    std::vector<double> loo;
    for (std::size_t g = 0; g < n_groups; ++g) {
      const std::size_t size = (g + 1) * r / n_groups - g * r / n_groups;
      loo.push_back(distance(DensityMatrix((total - groups[g]) / static_cast<double>(r - size)), mixed, norm));
    }
    const double m = mean(loo);
    double ss = 0.0;
    for (double v : loo) ss += (v - m) * (v - m);
    const auto g = static_cast<double>(n_groups);
    rep.std_error = std::sqrt((g - 1.0) / g * ss);
  }
  rep.reference = 0.0;
  rep.wall_time = seconds_since(t0);
  return rep;
}

std::vector<double> average_state_convergence(const EnsembleSpec& spec, DistanceNorm norm,
                                              const EnsembleOptions& opts) {
  check_r(spec);
  check_dense(spec, kDefaultDensityDimCap);
  const auto dim = static_cast<int>(spec.total_dim());
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(dim);
  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.r));
  constexpr std::size_t kBlock = 64;
  const auto r = static_cast<std::size_t>(spec.r);
  for (std::size_t start = 0; start < r; start += kBlock) {
    const std::size_t count = std::min(kBlock, r - start);
    std::vector<std::optional<DenseState>> block(count);
    parallel_for(count, opts.workers, [&](std::size_t j) { block[j] = sample_dense_state(spec, start + j); });
    for (std::size_t j = 0; j < count; ++j) {
      acc.noalias() += projector(*block[j]);
      out.push_back(distance(DensityMatrix(acc / static_cast<double>(start + j + 1)), mixed, norm));
    }
  }
  return out;
}

EnsembleReport subsystem_distance_stats(const EnsembleSpec& spec, const SubsystemQuery& q,
                                        const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  check_subsystem(spec, q);
  const auto states = reduced_states(spec, q.first_site, q.length, opts.workers);
  const DensityMatrix ref = q.reference == SubsystemReference::kEmpirical
                                ? average_of(states, states.size())
                                : DensityMatrix::maximally_mixed(static_cast<int>(states.front().dim()));
  std::vector<double> values;
  values.reserve(states.size());
  for (const auto& s : states) values.push_back(distance(s, ref, q.norm));
  EnsembleReport rep = make_report(spec, std::string("subsystem_") +
                                             (q.norm == DistanceNorm::kTrace ? "trace" : "hs") + "_distance_" +
                                             (q.reference == SubsystemReference::kEmpirical ? "empirical"
                                                                                            : "mixed"));
  rep.value = mean(values);
  rep.std_error = standard_error(values);
  rep.per_sample_values = std::move(values);
  rep.wall_time = seconds_since(t0);
  return rep;
}

std::vector<double> subsystem_distance_convergence(const EnsembleSpec& spec, const SubsystemQuery& q,
                                                   const std::vector<int>& prefixes, const EnsembleOptions& opts) {
  check_r(spec);
  check_subsystem(spec, q);
  const auto states = reduced_states(spec, q.first_site, q.length, opts.workers);
  std::vector<double> out;
  out.reserve(prefixes.size());
  for (int p : prefixes) {
    if (p < 1 || p > spec.r) throw std::invalid_argument("subsystem_distance_convergence: prefix out of range");
    const auto count = static_cast<std::size_t>(p);
    const DensityMatrix ref = q.reference == SubsystemReference::kEmpirical
                                  ? average_of(states, count)
                                  : DensityMatrix::maximally_mixed(static_cast<int>(states.front().dim()));
    std::vector<double> d;
    d.reserve(count);
    for (std::size_t i = 0; i < count; ++i) d.push_back(distance(states[i], ref, q.norm));
    out.push_back(mean(d));
  }
  return out;
}

PairWeights pair_weights(std::span<const Mps> states, int workers) {
  const std::size_t r = states.size();
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) norms[i] = mps_norm_sq(states[i]);
  PairWeights upper(r);
  parallel_for(r, workers, [&](std::size_t i) {
    upper[i].resize(r - i - 1);
    for (std::size_t j = i + 1; j < r; ++j) {
      upper[i][j - i - 1] = std::norm(mps_overlap(states[i], states[j])) / (norms[i] * norms[j]);
    }
  });
  return upper;
}

OverlapPurity purity_from_pair_weights(const PairWeights& upper) {
  const std::size_t r = upper.size();
  if (r == 0) throw std::invalid_argument("purity_from_pair_weights: no samples");
  std::vector<double> row_sums(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (upper[i].size() != r - i - 1) throw ShapeError("purity_from_pair_weights: rows must hold j > i");
    row_sums[i] = pairwise_sum(upper[i]);
  }
  const double half = pairwise_sum(row_sums);
  const auto rd = static_cast<double>(r);

  OverlapPurity out;
  out.cross_term = 2.0 * half / (rd * rd);
  out.purity = 1.0 / rd + out.cross_term;
  if (r < 2) return out;

  // Removing sample k drops every weight in its row and column.
  std::vector<double> totals(row_sums);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j) totals[j] += upper[i][j - i - 1];
  std::vector<double> cross_loo(r);
  std::vector<double> purity_loo(r);
  const double rm1 = rd - 1.0;
  for (std::size_t k = 0; k < r; ++k) {
    cross_loo[k] = 2.0 * (half - totals[k]) / (rm1 * rm1);
    purity_loo[k] = 1.0 / rm1 + cross_loo[k];
  }
  auto jackknife = [&](const std::vector<double>& v) {
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) sq[k] = (v[k] - m) * (v[k] - m);
    return std::sqrt((rd - 1.0) / rd * pairwise_sum(sq));
  };
  out.cross_term_stderr = jackknife(cross_loo);
  out.purity_stderr = jackknife(purity_loo);
  return out;
}

PurityReport purity_of_average_via_overlaps(const EnsembleSpec& spec, const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  const auto r = static_cast<std::size_t>(spec.r);

  PairWeights upper;
  if (const auto* p = std::get_if<RmpsParams>(&spec.source)) {
    std::vector<std::optional<Mps>> drawn(r);
    parallel_for(r, opts.workers, [&](std::size_t i) { drawn[i] = sample_rmps(*p, subseed(spec.master_seed, i)); });
    std::vector<Mps> states;
    states.reserve(r);
    for (auto& m : drawn) states.push_back(std::move(*m));
    upper = pair_weights(states, opts.workers);
  } else {
    std::vector<std::optional<DenseState>> states(r);
    parallel_for(r, opts.workers, [&](std::size_t i) { states[i] = sample_dense_state(spec, i); });
    upper.resize(r);
    parallel_for(r, opts.workers, [&](std::size_t i) {
      upper[i].resize(r - i - 1);
      for (std::size_t j = i + 1; j < r; ++j) {
        upper[i][j - i - 1] = std::norm(states[i]->amplitudes.dot(states[j]->amplitudes));
      }
    });
  }
  const OverlapPurity op = purity_from_pair_weights(upper);

  PurityReport out{make_report(spec, "purity_of_average"), make_report(spec, "purity_cross_term")};
  out.purity.value = op.purity;
  out.purity.std_error = op.purity_stderr;
  out.cross_term.value = op.cross_term;
  out.cross_term.std_error = op.cross_term_stderr;
  double inv = 1.0;
  for (int k = 0; k < spec.n_sites(); ++k) inv /= spec.site_dim(k);
  out.cross_term.reference = inv;
  out.cross_term.wall_time = out.purity.wall_time = seconds_since(t0);
  return out;
}

double purity_relative_error(const EnsembleSpec& spec, double cross_term) {
  double inv = 1.0;
  for (int k = 0; k < spec.n_sites(); ++k) inv /= spec.site_dim(k);
  return (cross_term - inv) / inv;
}

double purity_relative_error(const EnsembleSpec& spec, const PurityReport& report) {
  return purity_relative_error(spec, report.cross_term.value);
}

QStatistics q_statistics(const EnsembleSpec& spec, int bins, const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  for (int k = 0; k < spec.n_sites(); ++k) {
    if (spec.site_dim(k) != 2) throw ShapeError("q_statistics: Q is defined for qubit chains");
  }
  const auto values = parallel_map<double>(static_cast<std::size_t>(spec.r), opts.workers,
                                           [&](std::size_t i) { return q_of_sample(spec, i); });
  QStatistics out{Histogram::uniform(0.0, 1.0, bins), make_report(spec, "q_mean"), make_report(spec, "q_stddev")};
  for (double v : values) out.histogram.add(v);
  out.mean.value = mean(values);
  out.mean.std_error = standard_error(values);
  out.mean.reference = cue_q_exact(spec.n_sites());
  out.stddev.value = sample_stddev(values);
  out.stddev.std_error = stddev_stderr(values);
  out.mean.per_sample_values = values;
  out.stddev.per_sample_values = values;
  out.mean.wall_time = out.stddev.wall_time = seconds_since(t0);
  return out;
}

EnsembleReport moment_comparison(const EnsembleSpec& spec, int d_a, int m, const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  const int k = leading_sites_for(spec, d_a);
  const double reference = cue_moment_exact(m, d_a, bath_dim(spec, k));
  const auto values = parallel_map<double>(static_cast<std::size_t>(spec.r), opts.workers, [&](std::size_t i) {
    return purity_moment(sample_reduced_state(spec, i, 0, k), m);
  });
  return per_sample_deviation(spec, "moment" + std::to_string(m) + "_deviation", reference, values, t0);
}

EnsembleReport min_eig_comparison(const EnsembleSpec& spec, int d_a, const EnsembleOptions& opts) {
  const auto t0 = Clock::now();
  check_r(spec);
  const int k = leading_sites_for(spec, d_a);
  const double reference = cue_min_eig_exact(d_a);
  const auto values = parallel_map<double>(static_cast<std::size_t>(spec.r), opts.workers, [&](std::size_t i) {
    return min_eigenvalue(sample_reduced_state(spec, i, 0, k));
  });
  return per_sample_deviation(spec, "min_eig_deviation", reference, values, t0);
}

int ChiRule::chi_for(int n_sites) const {
  const double v = coefficient * std::pow(static_cast<double>(n_sites), exponent);
  return std::max(1, static_cast<int>(std::lround(v)));
}

std::vector<EnsembleReport> concentration_scan(const ConcentrationParams& params, const EnsembleOptions& opts) {
  std::vector<EnsembleReport> out;
  for (int n : params.n_values) {
    const auto t0 = Clock::now();
    const RmpsParams rp{n, params.phys_dim, params.chi_rule.chi_for(n), params.homogeneous, params.boundary};
    const EnsembleSpec spec = rmps_ensemble(rp, params.r, derive_seed(params.seed, static_cast<std::uint64_t>(n)));
    check_r(spec);
    if (params.observable.start_site + params.observable.length() > n) {
      throw ShapeError("concentration_scan: observable does not fit in N = " + std::to_string(n));
    }
    auto values = parallel_map<double>(static_cast<std::size_t>(spec.r), opts.workers, [&](std::size_t i) {
      return expectation(sample_rmps(rp, subseed(spec.master_seed, i)), params.observable);
    });
    EnsembleReport rep = make_report(spec, "observable_stddev");
    rep.value = sample_stddev(values);
    rep.std_error = stddev_stderr(values);
    rep.per_sample_values = std::move(values);
    rep.wall_time = seconds_since(t0);
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace rmps
