#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rmps/dense.hpp"
#include "rmps/ensemble.hpp"
#include "rmps/errors.hpp"
#include "test_util.hpp"

using namespace rmps;
using namespace rmps_test;

namespace {

EnsembleSpec rmps_spec(int n, int chi, int r, std::uint64_t seed, BoundaryCondition bc = BoundaryCondition::kOpen,
                       bool homogeneous = false) {
  return rmps_ensemble({n, 2, chi, homogeneous, bc}, r, Seed{seed});
}

bool agree(const EnsembleReport& a, const EnsembleReport& b, double sigmas) {
  return std::abs(a.value - b.value) <= sigmas * std::hypot(a.std_error, b.std_error);
}

const EnsembleOptions kSerial{1};

}  // namespace

TEST(ensemble_spec, dims_and_labels) {
  const EnsembleSpec cue = cue_ensemble(3, 10, Seed{1});
  EXPECT_FALSE(cue.is_rmps());
  EXPECT_EQ(cue.n_sites(), 3);
  EXPECT_EQ(cue.total_dim(), 8u);
  const EnsembleSpec big = rmps_spec(200, 2, 10, 1);
  EXPECT_EQ(big.total_dim(), std::numeric_limits<std::size_t>::max());
  EXPECT_NE(big.label().find("chi=2"), std::string::npos);
  EXPECT_THROW(cue_ensemble(0, 10, Seed{1}), InvalidDimension);
}

TEST(empirical_average_state, single_sample_is_pure) {
  const DensityMatrix rho = empirical_average_state(cue_ensemble(3, 1, Seed{4}), kSerial);
  EXPECT_NEAR(purity_moment(rho, 2), 1.0, 1e-12);
  const DensityMatrix avg = empirical_average_state(rmps_spec(3, 2, 40, 5), kSerial);
  EXPECT_TRUE(is_valid_density_matrix(avg));
}

TEST(average_state_distance, single_fixed_state) {
  for (int n : {1, 2, 3}) {
    const double d = std::pow(2.0, n);
    const EnsembleReport rep = average_state_distance(cue_ensemble(n, 1, Seed{9}), DistanceNorm::kTrace, kSerial);
    EXPECT_NEAR(rep.value, 2.0 * (1.0 - 1.0 / d), 1e-12);
    EXPECT_EQ(rep.reference, 0.0);
  }
}

TEST(average_state_distance, cue_decreases_with_r) {
  const double small = average_state_distance(cue_ensemble(3, 100, Seed{1}), DistanceNorm::kTrace, kSerial).value;
  const double large = average_state_distance(cue_ensemble(3, 500, Seed{1}), DistanceNorm::kTrace, kSerial).value;
  EXPECT_LT(large, small);
}

TEST(average_state_distance, cue_scales_as_inverse_sqrt_r) {
  // Averaged over independent master seeds so one realization's noise does
  // not dominate the ratio.
  double at_r = 0.0;
  double at_4r = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    at_r += average_state_distance(cue_ensemble(2, 250, Seed{100 + s}), DistanceNorm::kTrace, kSerial).value;
    at_4r += average_state_distance(cue_ensemble(2, 1000, Seed{200 + s}), DistanceNorm::kTrace, kSerial).value;
  }
  EXPECT_NEAR(at_4r / at_r, 0.5, 0.15);
}

TEST(average_state_distance, independent_of_chi) {
  const auto a = average_state_distance(rmps_spec(2, 2, 500, 31), DistanceNorm::kTrace, kSerial);
  const auto b = average_state_distance(rmps_spec(2, 4, 500, 32), DistanceNorm::kTrace, kSerial);
  EXPECT_GT(a.std_error, 0.0);
  EXPECT_TRUE(agree(a, b, 3.0)) << a.value << " +- " << a.std_error << " vs " << b.value << " +- " << b.std_error;
}

TEST(average_state_distance, convergence_curve_ends_at_full_value) {
  const EnsembleSpec spec = cue_ensemble(3, 150, Seed{12});
  const auto curve = average_state_convergence(spec, DistanceNorm::kHilbertSchmidt, kSerial);
  ASSERT_EQ(curve.size(), 150u);
  EXPECT_NEAR(curve.front(), std::sqrt(1.0 - 1.0 / 8.0), 1e-12);
  EXPECT_NEAR(curve.back(), average_state_distance(spec, DistanceNorm::kHilbertSchmidt, kSerial).value, 1e-12);
}

TEST(average_state_distance, dense_cap) {
  EXPECT_THROW(average_state_distance(cue_ensemble(11, 2, Seed{1}), DistanceNorm::kTrace, kSerial), ResourceError);
  EXPECT_THROW(empirical_average_state(rmps_spec(11, 2, 2, 1), kSerial), ResourceError);
  EXPECT_THROW(average_state_distance(cue_ensemble(2, 0, Seed{1}), DistanceNorm::kTrace, kSerial),
               std::invalid_argument);
}

TEST(subsystem_distance, product_states_are_far_from_mixed) {
  const SubsystemQuery q{1, 2, DistanceNorm::kTrace, SubsystemReference::kMaximallyMixed};
  const EnsembleReport rep = subsystem_distance_stats(rmps_spec(4, 1, 50, 3), q, kSerial);
  EXPECT_NEAR(rep.value, 1.0, 1e-10);
  EXPECT_EQ(rep.per_sample_values.size(), 50u);
  const SubsystemQuery emp{2, 1, DistanceNorm::kTrace, SubsystemReference::kEmpirical};
  const EnsembleReport e = subsystem_distance_stats(rmps_spec(5, 3, 60, 4), emp, kSerial);
  EXPECT_GE(e.value, 0.0);
  EXPECT_LE(e.value, 2.0);
}

TEST(subsystem_distance, cue_below_typicality_bound) {
  const SubsystemQuery q{1, 0, DistanceNorm::kTrace, SubsystemReference::kEmpirical};
  const EnsembleReport rep = subsystem_distance_stats(cue_ensemble(6, 300, Seed{8}), q, kSerial);
  EXPECT_LE(rep.value, typicality_bound(2, 32) + 3 * rep.std_error);
}

TEST(subsystem_distance, per_sample_values_reproduce_report) {
  const SubsystemQuery q{2, 0, DistanceNorm::kHilbertSchmidt, SubsystemReference::kEmpirical};
  const EnsembleReport rep = subsystem_distance_stats(cue_ensemble(4, 80, Seed{2}), q, kSerial);
  EXPECT_EQ(rep.value, mean(rep.per_sample_values));
  EXPECT_EQ(rep.std_error, standard_error(rep.per_sample_values));
}

TEST(subsystem_distance, convergence_prefixes) {
  const EnsembleSpec spec = rmps_spec(5, 2, 90, 14);
  const SubsystemQuery q{1, 1, DistanceNorm::kTrace, SubsystemReference::kEmpirical};
  const auto curve = subsystem_distance_convergence(spec, q, {1, 10, 90}, kSerial);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_NEAR(curve[0], 0.0, 1e-12);
  EXPECT_NEAR(curve[2], subsystem_distance_stats(spec, q, kSerial).value, 1e-12);
  EXPECT_THROW(subsystem_distance_convergence(spec, q, {91}, kSerial), std::invalid_argument);
}

TEST(subsystem_distance, subsystem_must_leave_a_bath) {
  const SubsystemQuery whole{3, 0, DistanceNorm::kTrace, SubsystemReference::kEmpirical};
  EXPECT_THROW(subsystem_distance_stats(cue_ensemble(3, 5, Seed{1}), whole, kSerial), ShapeError);
  const SubsystemQuery outside{2, 2, DistanceNorm::kTrace, SubsystemReference::kEmpirical};
  EXPECT_THROW(subsystem_distance_stats(cue_ensemble(3, 5, Seed{1}), outside, kSerial), ShapeError);
}

TEST(purity_from_pair_weights, degenerate_cases) {
  const PairWeights identical{{1.0, 1.0, 1.0}, {1.0, 1.0}, {1.0}, {}};
  EXPECT_EQ(purity_from_pair_weights(identical).purity, 1.0);
  EXPECT_EQ(purity_from_pair_weights({{0.0}, {}}).purity, 0.5);
  EXPECT_EQ(purity_from_pair_weights({{}}).purity, 1.0);
  EXPECT_THROW(purity_from_pair_weights({{1.0}, {1.0}}), ShapeError);
  EXPECT_THROW(purity_from_pair_weights({}), std::invalid_argument);
}

TEST(purity_from_pair_weights, identical_and_orthogonal_states) {
  const Mps a = sample_rmps({6, 2, 3, false, BoundaryCondition::kOpen}, Seed{1});
  const std::vector<Mps> same{a, a, a, a, a};
  EXPECT_NEAR(purity_from_pair_weights(pair_weights(same)).purity, 1.0, 1e-12);
  const std::vector<Mps> orth{basis_product(3, 2, 0), basis_product(3, 2, 1)};
  EXPECT_EQ(purity_from_pair_weights(pair_weights(orth)).purity, 0.5);
}

TEST(purity_of_average, matches_dense_average_state) {
  for (const EnsembleSpec& spec :
       {rmps_spec(4, 2, 60, 7), rmps_spec(3, 3, 40, 8, BoundaryCondition::kPeriodic), cue_ensemble(3, 50, Seed{9})}) {
    const PurityReport rep = purity_of_average_via_overlaps(spec, kSerial);
    const double dense = empirical_average_state(spec, kSerial).matrix.squaredNorm();
    EXPECT_NEAR(rep.purity.value, dense, 1e-8);
    EXPECT_NEAR(rep.purity.value - rep.cross_term.value, 1.0 / spec.r, 1e-15);
  }
}

TEST(purity_of_average, large_chain_cross_term) {
  const EnsembleSpec spec = rmps_spec(20, 2, 500, 2020);
  const PurityReport rep = purity_of_average_via_overlaps(spec);
  EXPECT_EQ(rep.cross_term.reference, std::ldexp(1.0, -20));
  EXPECT_LE(std::abs(purity_relative_error(spec, rep)), 0.3);
}

TEST(purity_relative_error, algebra) {
  const EnsembleSpec spec = rmps_spec(10, 2, 5, 1);
  EXPECT_EQ(purity_relative_error(spec, std::ldexp(1.0, -10)), 0.0);
  EXPECT_NEAR(purity_relative_error(spec, 1.1 * std::ldexp(1.0, -10)), 0.1, 1e-14);
}

TEST(q_statistics, product_states) {
  const QStatistics q = q_statistics(rmps_spec(5, 1, 100, 6), 100, kSerial);
  for (double v : q.mean.per_sample_values) EXPECT_NEAR(v, 0.0, 1e-10);
  EXPECT_EQ(q.histogram.total, 100);
  EXPECT_EQ(q.histogram.counts.front(), 100);
}

TEST(q_statistics, mps_route_matches_dense_route) {
  const EnsembleSpec spec = rmps_spec(5, 4, 20, 10, BoundaryCondition::kPeriodic);
  const QStatistics q = q_statistics(spec, 10, kSerial);
  for (std::size_t i = 0; i < 20; ++i)
    EXPECT_NEAR(q.mean.per_sample_values[i], global_entanglement_q(sample_dense_state(spec, i)), 1e-10);
  long total = 0;
  for (long c : q.histogram.counts) total += c;
  EXPECT_EQ(total, 20);
}

TEST(q_statistics, cue_mean) {
  const QStatistics q = q_statistics(cue_ensemble(4, 2000, Seed{44}), 100, kSerial);
  EXPECT_EQ(q.mean.reference, cue_q_exact(4));
  EXPECT_LT(std::abs(q.mean.value - q.mean.reference), 3 * q.mean.std_error);
  EXPECT_GT(q.stddev.std_error, 0.0);
}

TEST(q_statistics, qubits_only) {
  EXPECT_THROW(q_statistics(rmps_ensemble({4, 3, 2, false, BoundaryCondition::kOpen}, 5, Seed{1}), 10, kSerial),
               ShapeError);
}

TEST(moment_comparison, product_states_and_cue) {
  const EnsembleReport prod = moment_comparison(rmps_spec(6, 1, 30, 5), 4, 2, kSerial);
  EXPECT_NEAR(prod.value, 1.0 - 20.0 / 65.0, 1e-10);
  const EnsembleReport cue = moment_comparison(cue_ensemble(6, 1000, Seed{6}), 4, 2, kSerial);
  EXPECT_EQ(cue.reference, 20.0 / 65.0);
  EXPECT_LE(cue.value, 3 * cue.std_error);
  EXPECT_THROW(moment_comparison(cue_ensemble(6, 10, Seed{6}), 3, 2, kSerial), ShapeError);
  EXPECT_THROW(moment_comparison(cue_ensemble(2, 10, Seed{6}), 4, 2, kSerial), ShapeError);
}

TEST(min_eig_comparison, product_states) {
  const EnsembleReport rep = min_eig_comparison(rmps_spec(6, 1, 30, 5), 4, kSerial);
  EXPECT_NEAR(rep.value, 1.0 / 64.0, 1e-10);
  for (double v : rep.per_sample_values) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(concentration_scan, identity_observable) {
  ConcentrationParams p;
  p.observable = {{ComplexMatrix::Identity(2, 2)}, 0};
  p.chi_rule = ChiRule::fixed(3);
  p.n_values = {2, 4, 6};
  p.r = 40;
  const auto reps = concentration_scan(p, kSerial);
  ASSERT_EQ(reps.size(), 3u);
  for (const auto& rep : reps) EXPECT_NEAR(rep.value, 0.0, 1e-12);
}

TEST(concentration_scan, chi_rule_and_fit) {
  EXPECT_EQ(ChiRule::linear().chi_for(7), 7);
  EXPECT_EQ(ChiRule::fixed(5).chi_for(100), 5);
  EXPECT_EQ((ChiRule{0.5, 2.0}).chi_for(3), 5);
  EXPECT_EQ((ChiRule{0.01, 1.0}).chi_for(3), 1);
  ConcentrationParams p;
  p.observable = {{pauli_z(), pauli_z()}, 3};
  p.n_values = {4};
  p.r = 5;
  EXPECT_THROW(concentration_scan(p, kSerial), ShapeError);
}

TEST(merge_invariance, worker_count_does_not_change_results) {
  const EnsembleSpec spec = rmps_spec(4, 3, 120, 77, BoundaryCondition::kPeriodic);
  const EnsembleOptions one{1};
  const EnsembleOptions many{4};
  EXPECT_EQ(average_state_distance(spec, DistanceNorm::kTrace, one).value,
            average_state_distance(spec, DistanceNorm::kTrace, many).value);
  EXPECT_EQ(average_state_convergence(spec, DistanceNorm::kTrace, one),
            average_state_convergence(spec, DistanceNorm::kTrace, many));
  const auto p1 = purity_of_average_via_overlaps(spec, one);
  const auto p4 = purity_of_average_via_overlaps(spec, many);
  EXPECT_EQ(p1.purity.value, p4.purity.value);
  EXPECT_EQ(p1.cross_term.std_error, p4.cross_term.std_error);
  const auto q1 = q_statistics(spec, 20, one);
  const auto q4 = q_statistics(spec, 20, many);
  EXPECT_EQ(q1.mean.per_sample_values, q4.mean.per_sample_values);
  EXPECT_EQ(q1.histogram.counts, q4.histogram.counts);
  EXPECT_EQ(q1.stddev.std_error, q4.stddev.std_error);
  EXPECT_EQ(moment_comparison(spec, 4, 3, one).per_sample_values, moment_comparison(spec, 4, 3, many).per_sample_values);
}

TEST(sample_indexing, extending_r_keeps_earlier_samples) {
  const auto short_run = q_statistics(rmps_spec(4, 2, 30, 3), 10, kSerial).mean.per_sample_values;
  const auto long_run = q_statistics(rmps_spec(4, 2, 60, 3), 10, kSerial).mean.per_sample_values;
  EXPECT_TRUE(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}
