#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "rmps/errors.hpp"
#include "rmps/serialize.hpp"

using namespace rmps;

namespace {

bool same_tensors(const Mps& a, const Mps& b) {
  if (a.n_sites() != b.n_sites() || a.phys_dim() != b.phys_dim() || a.bond_dim() != b.bond_dim()) return false;
  if (a.boundary() != b.boundary() || a.homogeneous() != b.homogeneous()) return false;
  if (!(a.left_vec() == b.left_vec()) || !(a.right_vec() == b.right_vec())) return false;
  for (int k = 0; k < a.n_sites(); ++k)
    for (int i = 0; i < a.phys_dim(); ++i)
      if (!(a.site(k).a[i] == b.site(k).a[i])) return false;
  return true;
}

}  // namespace

TEST(matrix_json, row_major_layout) {
  ComplexMatrix m(2, 2);
  m << Complex(1, 2), Complex(3, 4), Complex(5, 6), Complex(7, 8);
  const auto j = matrix_to_json(m);
  EXPECT_EQ(j["data"], (nlohmann::json{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}));
  EXPECT_TRUE(matrix_from_json(j) == m);
  auto bad = j;
  bad["rows"] = 3;
  EXPECT_THROW(matrix_from_json(bad), ShapeError);
}

TEST(mps_json, round_trip_is_bit_exact) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const RmpsParams p{1 + static_cast<int>(s % 5), 2 + static_cast<int>(s % 2), 1 + static_cast<int>(s % 6), s % 3 == 0,
                       s % 2 ? BoundaryCondition::kPeriodic : BoundaryCondition::kOpen};
    const Mps m = sample_rmps(p, Seed{s});
    const Mps back = mps_from_json(nlohmann::json::parse(mps_to_json(m).dump()));
    EXPECT_TRUE(same_tensors(m, back)) << "seed " << s;
    EXPECT_EQ(mps_norm_sq(m), mps_norm_sq(back));
  }
}

TEST(mps_json, homogeneous_stores_one_site) {
  const Mps m = sample_rmps({6, 2, 3, true, BoundaryCondition::kPeriodic}, Seed{1});
  const auto j = mps_to_json(m);
  EXPECT_EQ(j["sites"].size(), 1u);
  EXPECT_EQ(j["boundary"], "pbc");
  EXPECT_FALSE(j.contains("left_vec"));
  EXPECT_TRUE(mps_from_json(j).homogeneous());
}

TEST(mps_json, rejects_malformed_documents) {
  const auto good = mps_to_json(sample_rmps({3, 2, 2, false, BoundaryCondition::kOpen}, Seed{2}));
  auto wrong_format = good;
  wrong_format["format"] = "other";
  EXPECT_THROW(mps_from_json(wrong_format), ShapeError);
  auto wrong_version = good;
  wrong_version["version"] = 99;
  EXPECT_THROW(mps_from_json(wrong_version), ShapeError);
  auto wrong_count = good;
  wrong_count["n_sites"] = 4;
  EXPECT_THROW(mps_from_json(wrong_count), ShapeError);
  auto wrong_dim = good;
  wrong_dim["bond_dim"] = 3;
  EXPECT_THROW(mps_from_json(wrong_dim), ShapeError);
}

TEST(mps_file, save_and_load) {
  const Mps m = sample_rmps({4, 2, 3, false, BoundaryCondition::kOpen}, Seed{5});
  const auto path = (std::filesystem::temp_directory_path() / "rmps_test_state.json").string();
  save_mps(m, path);
  EXPECT_TRUE(same_tensors(m, load_mps(path)));
  std::remove(path.c_str());
  EXPECT_THROW(load_mps(path), std::runtime_error);
  EXPECT_THROW(save_mps(m, "/nonexistent-dir/x.json"), std::runtime_error);
}

TEST(report_json, fields_and_wall_time_opt_in) {
  EnsembleReport r;
  r.spec = cue_ensemble(3, 10, Seed{4});
  r.estimator_name = "x";
  r.value = 0.1;
  r.std_error = 0.01;
  r.per_sample_values = {1.0, 2.0};
  r.wall_time = 3.0;
  const auto j = report_to_json(r);
  EXPECT_EQ(j["estimator"], "x");
  EXPECT_EQ(j["r"], 10);
  EXPECT_TRUE(j["reference"].is_null());
  EXPECT_FALSE(j.contains("wall_time"));
  EXPECT_FALSE(j.contains("per_sample_values"));
  const auto full = report_to_json(r, true, true);
  EXPECT_EQ(full["per_sample_values"].size(), 2u);
  EXPECT_EQ(full["wall_time"], 3.0);
}

TEST(histogram_json, counts) {
  Histogram h = Histogram::uniform(0, 1, 2);
  h.add(0.2);
  const auto j = histogram_to_json(h);
  EXPECT_EQ(j["total"], 1);
  EXPECT_EQ(j["counts"], (nlohmann::json{1, 0}));
}
