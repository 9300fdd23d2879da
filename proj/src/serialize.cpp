#include "rmps/serialize.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rmps/errors.hpp"

namespace rmps {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(2 * rows * cols)) {
    throw ShapeError("matrix_from_json: data length does not match rows*cols");
  }
  ComplexMatrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c, k += 2) m(i, c) = Complex(data[k].get<double>(), data[k + 1].get<double>());
  return m;
}

namespace {

json site_to_json(const SiteTensor& s) {
  json out = json::array();
  for (const auto& a : s.a) out.push_back(matrix_to_json(a));
  return out;
}

SiteTensor site_from_json(const json& j) {
  SiteTensor s;
  for (const auto& m : j) s.a.push_back(matrix_from_json(m));
  return s;
}

}  // namespace

json mps_to_json(const Mps& mps) {
  json j;
  j["format"] = "rmps-mps";
  j["version"] = kMpsFormatVersion;
  j["n_sites"] = mps.n_sites();
  j["phys_dim"] = mps.phys_dim();
  j["bond_dim"] = mps.bond_dim();
  j["boundary"] = mps.boundary() == BoundaryCondition::kOpen ? "obc" : "pbc";
  j["homogeneous"] = mps.homogeneous();
  if (mps.boundary() == BoundaryCondition::kOpen) {
    j["left_vec"] = matrix_to_json(mps.left_vec());
    j["right_vec"] = matrix_to_json(mps.right_vec());
  }
  json sites = json::array();
  const int stored = mps.homogeneous() ? 1 : mps.n_sites();
  for (int k = 0; k < stored; ++k) sites.push_back(site_to_json(mps.site(k)));
  j["sites"] = std::move(sites);
  return j;
}

Mps mps_from_json(const json& j) {
  if (j.value("format", std::string()) != "rmps-mps") throw ShapeError("mps_from_json: not an rmps-mps document");
  if (j.at("version").get<int>() != kMpsFormatVersion) throw ShapeError("mps_from_json: unsupported version");
  const int n = j.at("n_sites").get<int>();
  const bool homogeneous = j.at("homogeneous").get<bool>();
  const bool open = j.at("boundary").get<std::string>() == "obc";
  std::vector<SiteTensor> sites;
  for (const auto& s : j.at("sites")) sites.push_back(site_from_json(s));
  if (sites.size() != static_cast<std::size_t>(homogeneous ? 1 : n)) {
    throw ShapeError("mps_from_json: number of stored sites does not match n_sites");
  }
  ComplexVector left, right;
  if (open) {
    left = matrix_from_json(j.at("left_vec"));
    right = matrix_from_json(j.at("right_vec"));
  }
  Mps m = homogeneous ? (open ? Mps::homogeneous_open(n, std::move(sites.front()), left, right)
                              : Mps::homogeneous_periodic(n, std::move(sites.front())))
                      : (open ? Mps::open(std::move(sites), left, right) : Mps::periodic(std::move(sites)));
  if (m.phys_dim() != j.at("phys_dim").get<int>() || m.bond_dim() != j.at("bond_dim").get<int>()) {
    throw ShapeError("mps_from_json: declared dimensions do not match tensor data");
  }
  return m;
}

void save_mps(const Mps& mps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mps: cannot open " + path);
  out << mps_to_json(mps).dump() << '\n';
  if (!out) throw std::runtime_error("save_mps: write failed for " + path);
}

Mps load_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mps: cannot open " + path);
  return mps_from_json(json::parse(in));
}

json report_to_json(const EnsembleReport& report, bool include_per_sample, bool include_wall_time) {
  json j;
  j["record"] = "ensemble_report";
  j["estimator"] = report.estimator_name;
  j["source"] = report.spec.label();
  j["r"] = report.spec.r;
  j["seed"] = report.spec.master_seed.value;
  j["value"] = report.value;
  j["stderr"] = report.std_error;
  if (std::isnan(report.reference)) j["reference"] = nullptr;
  else j["reference"] = report.reference;
  if (include_per_sample) j["per_sample_values"] = report.per_sample_values;
  if (include_wall_time) j["wall_time"] = report.wall_time;
  return j;
}

json histogram_to_json(const Histogram& h) {
  return {{"record", "histogram"}, {"bin_edges", h.bin_edges}, {"counts", h.counts}, {"total", h.total}};
}

}  // namespace rmps
