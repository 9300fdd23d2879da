#include "rmps/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rmps/dense.hpp"
#include "rmps/errors.hpp"

#ifndef RMPS_VERSION
#define RMPS_VERSION "0.0.0"
#endif

namespace rmps {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Execution plan shared by validate() and the cost model.

struct Point {
  int n = 1;
  int chi = 1;
};

struct Plan {
  std::vector<Point> points;
  bool dense_full = false;  // builds D^N × D^N average states
  bool subsystem = false;   // reduced states of subsystem_len sites
  bool leading_block = false;  // bipartition with d_a on the left
  bool qubits = false;
  bool overlaps = false;
  bool twirl = false;
  bool observable = false;
  double passes = 1.0;  // ensembles drawn per point
};

using Runner = std::function<Table(const RunConfig&, int)>;
using Planner = std::function<Plan(const RunConfig&)>;

struct Experiment {
  ExperimentInfo info;
  json defaults;
  Planner plan;
  Runner run;
};

const std::vector<Experiment>& registry();

const Experiment* find_experiment(const std::string& id) {
  for (const auto& e : registry())
    if (e.info.id == id) return &e;
  return nullptr;
}

std::string registry_names() {
  std::string s;
  for (const auto& e : registry()) s += (s.empty() ? "" : ", ") + e.info.id;
  return s;
}

bool is_cue(const RunConfig& c) { return c.source == "cue"; }

std::uint64_t stream_key(const RunConfig& c, int n, int chi) {
  return (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint32_t>(is_cue(c) ? 0 : chi);
}

EnsembleSpec spec_for(const RunConfig& c, int n, int chi) {
  const Seed s = derive_seed(c.seed, stream_key(c, n, chi));
  if (is_cue(c)) return {CueSource{std::vector<int>(static_cast<std::size_t>(n), c.phys_dim)}, c.r, s};
  return rmps_ensemble({n, c.phys_dim, chi, c.homogeneous, c.boundary}, c.r, s);
}

ChiRule chi_rule(const RunConfig& c) { return {c.chi_coefficient, c.chi_exponent}; }

std::vector<int> prefixes_up_to(int r) {
  std::vector<int> out;
  for (long base = 1; base <= r; base *= 10)
    for (int f : {1, 2, 5})
      if (base * f <= r) out.push_back(static_cast<int>(base * f));
  if (out.empty() || out.back() != r) out.push_back(r);
  return out;
}

ComplexMatrix named_observable(const std::string& name) {
  ComplexMatrix m(2, 2);
  if (name == "x") m << 0, 1, 1, 0;
  else if (name == "y") m << 0, Complex(0, -1), Complex(0, 1), 0;
  else if (name == "z") m << 1, 0, 0, -1;
  else m = ComplexMatrix::Identity(2, 2);
  return m;
}

std::string norm_name(DistanceNorm n) { return n == DistanceNorm::kTrace ? "trace" : "hs"; }

// ---------------------------------------------------------------------------
// Experiments.

Table avg_state_convergence(const RunConfig& c, int workers) {
  const auto curve = average_state_convergence(spec_for(c, c.n_sites, c.chi), c.norm, {workers});
  Table t{c.experiment, {"r_prefix", norm_name(c.norm) + "_distance"}, {}};
  for (std::size_t i = 0; i < curve.size(); ++i) t.rows.push_back({static_cast<long long>(i + 1), curve[i]});
  return t;
}

Table subsystem_convergence(const RunConfig& c, int workers) {
  Table t{c.experiment, {"n_sites", "bath_sites", "r_prefix", "mean_" + norm_name(c.norm) + "_distance"}, {}};
  const SubsystemQuery q{c.subsystem_len, c.site, c.norm, c.reference};
  const auto prefixes = prefixes_up_to(c.r);
  for (int n : c.n_values) {
    const auto curve = subsystem_distance_convergence(spec_for(c, n, c.chi), q, prefixes, {workers});
    for (std::size_t i = 0; i < curve.size(); ++i)
      t.rows.push_back({static_cast<long long>(n), static_cast<long long>(n - c.subsystem_len),
                        static_cast<long long>(prefixes[i]), curve[i]});
  }
  return t;
}

Table bound_comparison(const RunConfig& c, int workers) {
  Table t{c.experiment, {"bath_sites", "d_s", "d_b", "mean_trace_distance", "stderr", "bound"}, {}};
  const SubsystemQuery q{c.subsystem_len, 0, DistanceNorm::kTrace, c.reference};
  const int d_s = static_cast<int>(std::lround(std::pow(c.phys_dim, c.subsystem_len)));
  for (int b : c.bath_values) {
    const auto rep = subsystem_distance_stats(spec_for(c, c.subsystem_len + b, c.chi), q, {workers});
    const int d_b = static_cast<int>(std::lround(std::pow(c.phys_dim, b)));
    t.rows.push_back({static_cast<long long>(b), static_cast<long long>(d_s), static_cast<long long>(d_b), rep.value,
                      rep.std_error, typicality_bound(d_s, d_b)});
  }
  return t;
}

Table chi_independence(const RunConfig& c, int workers) {
  Table t{c.experiment, {"ensemble", "chi", norm_name(c.norm) + "_distance", "stderr"}, {}};
  RunConfig rm = c;
  rm.source = "rmps";
  for (int chi : c.chi_values) {
    const auto rep = average_state_distance(spec_for(rm, c.n_sites, chi), c.norm, {workers});
    t.rows.push_back({std::string("rmps"), static_cast<long long>(chi), rep.value, rep.std_error});
  }
  RunConfig cue = c;
  cue.source = "cue";
  const auto rep = average_state_distance(spec_for(cue, c.n_sites, 0), c.norm, {workers});
  t.rows.push_back({std::string("cue"), 0LL, rep.value, rep.std_error});
  return t;
}

Table distance_vs_chi(const RunConfig& c, int workers) {
  Table t{c.experiment, {"chi", "mean_" + norm_name(c.norm) + "_distance", "stderr"}, {}};
  const SubsystemQuery q{c.subsystem_len, c.site, c.norm, c.reference};
  for (int chi : c.chi_values) {
    const auto rep = subsystem_distance_stats(spec_for(c, c.n_sites, chi), q, {workers});
    t.rows.push_back({static_cast<long long>(chi), rep.value, rep.std_error});
  }
  return t;
}

Table linear_chi_scan(const RunConfig& c, int workers) {
  Table t{c.experiment,
          {"n_sites", "chi", "mean_" + norm_name(c.norm) + "_distance", "stderr", "stddev", "stddev_stderr"},
          {}};
  const SubsystemQuery q{c.subsystem_len, c.site, c.norm, c.reference};
  for (int n : c.n_values) {
    const int chi = chi_rule(c).chi_for(n);
    const auto rep = subsystem_distance_stats(spec_for(c, n, chi), q, {workers});
    t.rows.push_back({static_cast<long long>(n), static_cast<long long>(chi), rep.value, rep.std_error,
                      sample_stddev(rep.per_sample_values), stddev_stderr(rep.per_sample_values)});
  }
  return t;
}

Table purity_scaling(const RunConfig& c, int workers) {
  Table t{c.experiment,
          {"n_sites", "chi", "purity", "cross_term", "cross_term_stderr", "inverse_dim", "relative_error"},
          {}};
  for (int n : c.n_values) {
    const EnsembleSpec spec = spec_for(c, n, c.chi);
    const PurityReport rep = purity_of_average_via_overlaps(spec, {workers});
    t.rows.push_back({static_cast<long long>(n), static_cast<long long>(c.chi), rep.purity.value,
                      rep.cross_term.value, rep.cross_term.std_error, rep.cross_term.reference,
                      purity_relative_error(spec, rep)});
  }
  return t;
}

Table purity_error(const RunConfig& c, int workers) {
  Table t{c.experiment, {"n_sites", "chi", "relative_error", "relative_error_stderr"}, {}};
  for (int chi : c.chi_values) {
    for (int n : c.n_values) {
      const EnsembleSpec spec = spec_for(c, n, chi);
      const PurityReport rep = purity_of_average_via_overlaps(spec, {workers});
      t.rows.push_back({static_cast<long long>(n), static_cast<long long>(chi), purity_relative_error(spec, rep),
                        rep.cross_term.std_error / rep.cross_term.reference});
    }
  }
  return t;
}

Table q_histogram(const RunConfig& c, int workers) {
  const QStatistics q = q_statistics(spec_for(c, c.n_sites, c.chi), c.bins, {workers});
  Table t{c.experiment, {"bin_lo", "bin_hi", "count"}, {}};
  for (std::size_t b = 0; b < q.histogram.counts.size(); ++b)
    t.rows.push_back({q.histogram.bin_edges[b], q.histogram.bin_edges[b + 1],
                      static_cast<long long>(q.histogram.counts[b])});
  return t;
}

Table q_vs_chi(const RunConfig& c, int workers) {
  Table t{c.experiment, {"chi", "q_mean", "q_mean_stderr", "q_cue", "abs_deviation"}, {}};
  for (int chi : c.chi_values) {
    const QStatistics q = q_statistics(spec_for(c, c.n_sites, chi), c.bins, {workers});
    t.rows.push_back({static_cast<long long>(chi), q.mean.value, q.mean.std_error, q.mean.reference,
                      std::abs(q.mean.value - q.mean.reference)});
  }
  return t;
}

Table q_stddev(const RunConfig& c, int workers) {
  Table t{c.experiment, {"n_sites", "chi", "q_stddev", "stderr", "q_mean"}, {}};
  for (int n : c.n_values) {
    const QStatistics q = q_statistics(spec_for(c, n, c.chi), c.bins, {workers});
    t.rows.push_back({static_cast<long long>(n), static_cast<long long>(c.chi), q.stddev.value, q.stddev.std_error,
                      q.mean.value});
  }
  return t;
}

Table moments_vs_chi(const RunConfig& c, int workers) {
  Table t{c.experiment, {"chi", "m", "mean", "reference", "abs_deviation", "stderr"}, {}};
  for (int chi : c.chi_values) {
    for (int m : c.moments) {
      const auto rep = moment_comparison(spec_for(c, c.n_sites, chi), c.d_a, m, {workers});
      t.rows.push_back({static_cast<long long>(chi), static_cast<long long>(m), mean(rep.per_sample_values),
                        rep.reference, rep.value, rep.std_error});
    }
  }
  return t;
}

Table min_eig_vs_chi(const RunConfig& c, int workers) {
  Table t{c.experiment, {"chi", "mean_min_eig", "reference", "abs_deviation", "stderr"}, {}};
  for (int chi : c.chi_values) {
    const auto rep = min_eig_comparison(spec_for(c, c.n_sites, chi), c.d_a, {workers});
    t.rows.push_back({static_cast<long long>(chi), mean(rep.per_sample_values), rep.reference, rep.value,
                      rep.std_error});
  }
  return t;
}

Table concentration(const RunConfig& c, int workers) {
  ConcentrationParams p;
  p.observable = {{named_observable(c.observable)}, c.site};
  p.chi_rule = chi_rule(c);
  p.n_values = c.n_values;
  p.r = c.r;
  p.seed = c.seed;
  p.phys_dim = c.phys_dim;
  p.homogeneous = c.homogeneous;
  p.boundary = c.boundary;
  Table t{c.experiment, {"n_sites", "chi", "stddev", "stderr", "mean"}, {}};
  for (const auto& rep : concentration_scan(p, {workers})) {
    const int n = rep.spec.n_sites();
    t.rows.push_back({static_cast<long long>(n), static_cast<long long>(p.chi_rule.chi_for(n)), rep.value,
                      rep.std_error, mean(rep.per_sample_values)});
  }
  return t;
}

Table twirl_compare(const RunConfig& c, int workers) {
  (void)workers;
  Table t{c.experiment, {"n_copies", "dim", "r", "max_entry_deviation", "five_over_sqrt_r"}, {}};
  for (int copies : c.copies) {
    for (int n : c.dims) {
      const Seed s = derive_seed(c.seed, (static_cast<std::uint64_t>(copies) << 32) | static_cast<std::uint32_t>(n));
      const ComplexMatrix mc = mc_twirl_moment(copies, n, c.r, s);
      const double dev = (mc - permutation_twirl_expression(copies, n)).cwiseAbs().maxCoeff();
      t.rows.push_back({static_cast<long long>(copies), static_cast<long long>(n), static_cast<long long>(c.r), dev,
                        5.0 / std::sqrt(static_cast<double>(c.r))});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Plans.

Plan single_point(const RunConfig& c) { return {{{c.n_sites, c.chi}}}; }

Plan over_n(const RunConfig& c, bool use_rule) {
  Plan p;
  for (int n : c.n_values) p.points.push_back({n, use_rule ? chi_rule(c).chi_for(n) : c.chi});
  return p;
}

Plan over_chi(const RunConfig& c) {
  Plan p;
  for (int chi : c.chi_values) p.points.push_back({c.n_sites, chi});
  return p;
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> reg = [] {
    std::vector<Experiment> r;
    auto add = [&](std::string id, std::string analog, std::string desc, json defaults, Planner plan, Runner run) {
      r.push_back({{std::move(id), std::move(analog), std::move(desc)}, std::move(defaults), std::move(plan),
                   std::move(run)});
    };
    add("avg-state-convergence", "Figs. 2, 7", "distance of the empirical average state from I/D^N versus r",
        {{"source", "cue"}, {"n_sites", 3}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p = single_point(c);
          p.dense_full = true;
          return p;
        },
        avg_state_convergence);
    add("subsystem-convergence", "Figs. 3, 5, 6",
        "mean subsystem distance from the prefix-average subsystem state versus r, per chain length",
        {{"chi", 8}, {"n_values", {3, 5, 9, 17, 33}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p = over_n(c, false);
          p.subsystem = true;
          return p;
        },
        subsystem_convergence);
    add("bound-comparison", "Fig. 4", "CUE subsystem distance against sqrt(d_S/d_B) for growing baths",
        {{"source", "cue"}, {"bath_values", {5, 6, 7, 8, 9}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p;
          for (int b : c.bath_values) p.points.push_back({c.subsystem_len + b, c.chi});
          p.subsystem = true;
          return p;
        },
        bound_comparison);
    add("chi-independence", "Fig. 8", "average-state distance for several chi next to the CUE value",
        {{"n_sites", 3}, {"chi_values", {2, 4, 8}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_chi(c);
          p.points.push_back({c.n_sites, 0});
          p.dense_full = true;
          return p;
        },
        chi_independence);
    add("distance-vs-chi", "Fig. 9 (Sec. IV.A)", "mean subsystem distance versus chi at fixed N",
        {{"n_sites", 10}, {"chi_values", {1, 2, 4, 8, 16, 32}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p = over_chi(c);
          p.subsystem = true;
          return p;
        },
        distance_vs_chi);
    add("linear-chi-scan", "Fig. 10 (Sec. IV.A)", "subsystem distance and its spread with chi growing with N",
        {{"n_values", {4, 8, 16, 32}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p = over_n(c, true);
          p.subsystem = true;
          return p;
        },
        linear_chi_scan);
    add("purity-scaling", "Figs. 9-10 (Sec. IV.C)", "purity of the average state from overlaps versus N",
        {{"chi", 2}, {"n_values", {10, 15, 20, 25, 30}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p = over_n(c, false);
          p.overlaps = true;
          return p;
        },
        purity_scaling);
    add("purity-error", "Fig. 11", "relative error of the cross-term purity for several chi",
        {{"chi_values", {2, 4}}, {"n_values", {10, 20, 30}}, {"r", 500}},
        [](const RunConfig& c) {
          Plan p;
          for (int chi : c.chi_values)
            for (int n : c.n_values) p.points.push_back({n, chi});
          p.overlaps = true;
          return p;
        },
        purity_error);
    add("q-histogram", "Fig. 12", "histogram of the global entanglement Q",
        {{"n_sites", 8}, {"chi", 16}, {"r", 10000}},
        [](const RunConfig& c) {
          Plan p = single_point(c);
          p.qubits = true;
          return p;
        },
        q_histogram);
    add("q-vs-chi", "Fig. 13(a)", "|mean Q - CUE value| versus chi",
        {{"n_sites", 6}, {"chi_values", {1, 2, 4, 8, 16, 32}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_chi(c);
          p.qubits = true;
          return p;
        },
        q_vs_chi);
    add("q-stddev", "Fig. 13(b)", "standard deviation of Q versus N",
        {{"chi", 16}, {"n_values", {4, 6, 8}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_n(c, false);
          p.qubits = true;
          return p;
        },
        q_stddev);
    add("moments-vs-chi", "Fig. 13(c)", "deviation of Tr rho_A^m from the CUE value versus chi",
        {{"n_sites", 6}, {"d_a", 4}, {"chi_values", {1, 2, 4, 8, 16, 32}}, {"moments", {2, 3, 4}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_chi(c);
          p.leading_block = true;
          p.passes = static_cast<double>(std::max<std::size_t>(1, c.moments.size()));
          return p;
        },
        moments_vs_chi);
    add("min-eig-vs-chi", "Fig. 13(d)", "deviation of the mean smallest eigenvalue of rho_A from 1/d_A^3 versus chi",
        {{"n_sites", 6}, {"d_a", 4}, {"chi_values", {1, 2, 4, 8, 16, 32}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_chi(c);
          p.leading_block = true;
          return p;
        },
        min_eig_vs_chi);
    add("concentration-scan", "Eq. com_f", "standard deviation of a local expectation value as N and chi grow",
        {{"n_values", {4, 8, 16}}, {"r", 2000}},
        [](const RunConfig& c) {
          Plan p = over_n(c, true);
          p.observable = true;
          return p;
        },
        concentration);
    add("twirl-compare", "Sec. IV.B", "Monte-Carlo Haar twirl against the permutation expression",
        {{"dims", {2, 3, 4}}, {"copies", {1, 2}}, {"r", 10000}},
        [](const RunConfig&) {
          Plan p;
          p.twirl = true;
          return p;
        },
        twirl_compare);
    return r;
  }();
  return reg;
}

// ---------------------------------------------------------------------------
// Config parsing.

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: key '") + key + "' has the wrong type (" + j.at(key).dump() + ")");
  }
}

template <typename T>
T pick(const json& j, const char* key, const std::map<std::string, T>& options) {
  const auto s = get_as<std::string>(j, key);
  const auto it = options.find(s);
  if (it == options.end()) {
    std::string allowed;
    for (const auto& [k, v] : options) allowed += (allowed.empty() ? "" : ", ") + k;
    throw ConfigError(std::string("config: key '") + key + "' must be one of " + allowed + ", got '" + s + "'");
  }
  return it->second;
}

const std::map<std::string, BoundaryCondition> kBoundaries{{"obc", BoundaryCondition::kOpen},
                                                           {"pbc", BoundaryCondition::kPeriodic}};
const std::map<std::string, TableFormat> kFormats{{"csv", TableFormat::kCsv}, {"jsonl", TableFormat::kJsonLines}};
const std::map<std::string, DistanceNorm> kNorms{{"trace", DistanceNorm::kTrace}, {"hs", DistanceNorm::kHilbertSchmidt}};
const std::map<std::string, SubsystemReference> kReferences{{"empirical", SubsystemReference::kEmpirical},
                                                            {"mixed", SubsystemReference::kMaximallyMixed}};

template <typename T>
std::string name_of(const std::map<std::string, T>& options, T value) {
  for (const auto& [k, v] : options)
    if (v == value) return k;
  return "";
}

void merge_into(json& target, const json& src, const char* what) {
  if (src.is_null()) return;
  if (!src.is_object()) throw ConfigError(std::string("config: ") + what + " must be a JSON object");
  for (const auto& [k, v] : src.items()) target[k] = v;
}

// Pipeline stages, with timing in seconds per unit and memory in bytes.
constexpr double kFlopsPerSecond = 3e9;

double qr_flops(double n) { return 20.0 * n * n * n; }

struct Cost {
  double seconds = 0.0;
  double bytes = 0.0;
};

Cost estimate_cost(const RunConfig& c, const Plan& p) {
  Cost cost;
  const double d = c.phys_dim;
  const double r = c.r;
  if (p.twirl) {
    for (int copies : c.copies)
      for (int n : c.dims) {
        const double side = std::pow(static_cast<double>(n) * n, copies);
        cost.seconds += r * (side * side * 64.0 + qr_flops(n)) / kFlopsPerSecond;
        cost.bytes = std::max(cost.bytes, 3.0 * side * side * 16.0);
      }
    return cost;
  }
  for (const Point& pt : p.points) {
    const double n = pt.n;
    const bool cue = is_cue(c) || pt.chi == 0;
    const double chi = std::max(1, pt.chi);
    const double dim = std::pow(d, n);
    double per_sample = 0.0;
    double stored = 0.0;
    if (cue) {
      per_sample += dim * 60.0;
      if (p.subsystem || p.leading_block) per_sample += dim * std::pow(d, c.subsystem_len) * 8.0;
    } else {
      const double sites = c.homogeneous ? 1.0 : n;
      per_sample += sites * qr_flops(chi * d);
      const double step = d * chi * chi * chi * 32.0 * (c.boundary == BoundaryCondition::kPeriodic ? chi * chi : 1.0);
      const double contraction = n * step;
      if (p.subsystem || p.leading_block) {
        const int len = p.leading_block ? static_cast<int>(std::round(std::log(c.d_a) / std::log(d))) : c.subsystem_len;
        per_sample += contraction + std::pow(d, 2.0 * len) * len * step / d;
      }
      if (p.qubits || p.observable) per_sample += 3.0 * contraction;
      if (p.dense_full) per_sample += dim * chi * chi * 8.0;
      stored = sites * d * chi * chi * 16.0;
    }
    if (p.dense_full) per_sample += dim * dim * 8.0;
    cost.seconds += p.passes * r * per_sample / kFlopsPerSecond;
    if (p.overlaps) {
      const double pair = n * d * chi * chi * chi * 32.0 * (c.boundary == BoundaryCondition::kPeriodic ? chi * chi : 1.0);
      cost.seconds += 0.5 * r * r * pair / kFlopsPerSecond;
      cost.bytes = std::max(cost.bytes, r * stored + 0.5 * r * r * 8.0);
    }
    // Per-sample results plus one sample's tensors and site unitary.
    cost.bytes = std::max(cost.bytes, r * 8.0 + stored + (cue ? dim * 16.0 : chi * chi * d * d * 16.0));
    if (p.dense_full) cost.bytes = std::max(cost.bytes, 51.0 * dim * dim * 16.0);
    if (p.subsystem || p.leading_block) {
      const double sub = p.leading_block ? static_cast<double>(c.d_a) : std::pow(d, c.subsystem_len);
      cost.bytes = std::max(cost.bytes, r * sub * sub * 16.0);
    }
  }
  return cost;
}

std::string table_file(const RunConfig& c, const Table& t) {
  return t.name + (c.format == TableFormat::kCsv ? ".csv" : ".jsonl");
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << bytes;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------

json RunConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["source"] = source;
  j["n_sites"] = n_sites;
  j["phys_dim"] = phys_dim;
  j["chi"] = chi;
  j["homogeneous"] = homogeneous;
  j["boundary"] = name_of(kBoundaries, boundary);
  j["subsystem_len"] = subsystem_len;
  j["site"] = site;
  j["d_a"] = d_a;
  j["r"] = r;
  j["seed"] = seed.value;
  j["format"] = name_of(kFormats, format);
  j["out"] = out;
  j["norm"] = name_of(kNorms, norm);
  j["reference"] = name_of(kReferences, reference);
  j["bins"] = bins;
  j["observable"] = observable;
  j["chi_coefficient"] = chi_coefficient;
  j["chi_exponent"] = chi_exponent;
  j["n_values"] = n_values;
  j["chi_values"] = chi_values;
  j["bath_values"] = bath_values;
  j["moments"] = moments;
  j["dims"] = dims;
  j["copies"] = copies;
  return j;
}

RunConfig make_config(const json& file, const json& overrides) {
  json given = json::object();
  merge_into(given, file, "config file");
  merge_into(given, overrides, "overrides");
  if (!given.contains("experiment")) throw ConfigError("config: missing 'experiment'; registered: " + registry_names());
  const auto id = get_as<std::string>(given, "experiment");
  const Experiment* e = find_experiment(id);
  if (!e) throw ConfigError("config: unknown experiment '" + id + "'; registered: " + registry_names());

  json merged = RunConfig{}.to_json();
  for (const auto& [k, v] : given.items()) {
    if (!merged.contains(k)) throw ConfigError("config: unknown key '" + k + "'");
  }
  merge_into(merged, e->defaults, "defaults");
  merge_into(merged, given, "config");

  RunConfig c;
  c.experiment = id;
  c.source = get_as<std::string>(merged, "source");
  if (c.source != "rmps" && c.source != "cue") throw ConfigError("config: key 'source' must be rmps or cue");
  c.n_sites = get_as<int>(merged, "n_sites");
  c.phys_dim = get_as<int>(merged, "phys_dim");
  c.chi = get_as<int>(merged, "chi");
  c.homogeneous = get_as<bool>(merged, "homogeneous");
  c.boundary = pick(merged, "boundary", kBoundaries);
  c.subsystem_len = get_as<int>(merged, "subsystem_len");
  c.site = get_as<int>(merged, "site");
  c.d_a = get_as<int>(merged, "d_a");
  c.r = get_as<int>(merged, "r");
  if (merged.at("seed").is_number_integer() && merged.at("seed").get<long long>() < 0 &&
      !merged.at("seed").is_number_unsigned()) {
    throw ConfigError("config: key 'seed' must be a non-negative 64-bit integer");
  }
  c.seed = Seed{get_as<std::uint64_t>(merged, "seed")};
  c.format = pick(merged, "format", kFormats);
  c.out = get_as<std::string>(merged, "out");
  c.norm = pick(merged, "norm", kNorms);
  c.reference = pick(merged, "reference", kReferences);
  c.bins = get_as<int>(merged, "bins");
  c.observable = get_as<std::string>(merged, "observable");
  c.chi_coefficient = get_as<double>(merged, "chi_coefficient");
  c.chi_exponent = get_as<double>(merged, "chi_exponent");
  c.n_values = get_as<std::vector<int>>(merged, "n_values");
  c.chi_values = get_as<std::vector<int>>(merged, "chi_values");
  c.bath_values = get_as<std::vector<int>>(merged, "bath_values");
  c.moments = get_as<std::vector<int>>(merged, "moments");
  c.dims = get_as<std::vector<int>>(merged, "dims");
  c.copies = get_as<std::vector<int>>(merged, "copies");
  return c;
}

void apply_override(json& overrides, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  overrides[key] = parsed.is_discarded() ? json(value) : parsed;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config file " + path + " is not a JSON object");
  return j;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::get<std::string>(cell);
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) out += (k ? "," : "") + t.columns[k];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + cell_text(row[k]);
    out += '\n';
  }
  return out;
}

std::string to_json_lines(const Table& t) {
  std::string out;
  for (const auto& row : t.rows) {
    json j = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Cell& cell = row[k];
      if (const auto* i = std::get_if<long long>(&cell)) j[t.columns[k]] = *i;
      else if (const auto* d = std::get_if<double>(&cell)) j[t.columns[k]] = std::isfinite(*d) ? json(*d) : json(nullptr);
      else j[t.columns[k]] = std::get<std::string>(cell);
    }
    out += j.dump() + '\n';
  }
  return out;
}

Diagnostics validate(const RunConfig& c) {
  Diagnostics d;
  int cap_errors = 0;
  auto fail = [&](std::string msg) {
    d.ok = false;
    if (msg.rfind("dense cap exceeded", 0) == 0) ++cap_errors;
    d.errors.push_back(std::move(msg));
  };
  const Experiment* e = find_experiment(c.experiment);
  if (!e) {
    fail("unknown experiment '" + c.experiment + "'; registered: " + registry_names());
    return d;
  }
  if (c.r < 1) fail("precondition violated: r must be >= 1 (got " + std::to_string(c.r) + ")");
  if (c.phys_dim < 2) fail("precondition violated: phys_dim must be >= 2");
  if (c.bins < 1) fail("precondition violated: bins must be >= 1");
  if (c.observable != "x" && c.observable != "y" && c.observable != "z" && c.observable != "i")
    fail("precondition violated: observable must be one of x, y, z, i");
  if (!d.ok) return d;

  const Plan p = e->plan(c);
  if (!p.twirl && p.points.empty()) fail("precondition violated: the parameter list for this experiment is empty");
  for (const Point& pt : p.points) {
    const std::string where = " (N=" + std::to_string(pt.n) + ", chi=" + std::to_string(pt.chi) + ")";
    if (pt.n < 1) fail("precondition violated: n_sites must be >= 1" + where);
    if (pt.chi < 1 && !(pt.chi == 0 && p.dense_full)) fail("precondition violated: chi must be >= 1" + where);
    if (pt.n < 1) continue;
    const double dim = std::pow(static_cast<double>(c.phys_dim), pt.n);
    if (p.dense_full && dim > static_cast<double>(kDefaultDensityDimCap))
      fail("dense cap exceeded: D^N = " + format_double(dim) + " > " + std::to_string(kDefaultDensityDimCap) + where);
    if (is_cue(c) && dim > static_cast<double>(kDefaultAmplitudeCap))
      fail("dense cap exceeded: CUE state of dimension " + format_double(dim) + " > " +
           std::to_string(kDefaultAmplitudeCap) + where);
    if (p.subsystem) {
      if (c.subsystem_len < 1 || c.site < 0 || c.site + c.subsystem_len > pt.n)
        fail("precondition violated: subsystem sites [site, site + subsystem_len) must lie in the chain" + where);
      else if (c.subsystem_len >= pt.n)
        fail("precondition violated: subsystem_len must be < n_sites" + where);
      if (std::pow(static_cast<double>(c.phys_dim), c.subsystem_len) > static_cast<double>(kDefaultDensityDimCap))
        fail("dense cap exceeded: D^L above the reduced-state cap");
    }
    if (p.leading_block) {
      long long prod = 1;
      int k = 0;
      while (prod < c.d_a && k + 1 < pt.n) {
        prod *= c.phys_dim;
        ++k;
      }
      if (prod != c.d_a) fail("precondition violated: d_a must equal D^k for some 1 <= k < N" + where);
      if (c.d_a > static_cast<int>(kDefaultDensityDimCap)) fail("dense cap exceeded: d_a above the reduced-state cap");
    }
    if (p.qubits && c.phys_dim != 2) fail("precondition violated: Q requires qubits (phys_dim = 2)");
    if (p.observable && (c.phys_dim != 2 || c.site < 0 || c.site >= pt.n))
      fail("precondition violated: the observable needs phys_dim = 2 and 0 <= site < N" + where);
  }
  if (p.overlaps && is_cue(c)) {
    for (const Point& pt : p.points)
      if (std::pow(static_cast<double>(c.phys_dim), pt.n) > static_cast<double>(kDefaultAmplitudeCap)) {
        fail("dense cap exceeded: overlaps of CUE states need dense vectors");
        break;
      }
  }
  if (p.leading_block)
    for (int m : c.moments)
      if ((m < 2 || m > 4) && c.experiment == "moments-vs-chi") fail("precondition violated: moments must be 2, 3 or 4");
  if (p.twirl) {
    if (c.dims.empty() || c.copies.empty()) fail("precondition violated: dims and copies must be non-empty");
    for (int copies : c.copies)
      for (int n : c.dims) {
        if (copies < 1 || n < 1) {
          fail("precondition violated: dims and copies must be >= 1");
          continue;
        }
        if (std::pow(static_cast<double>(n) * n, copies) > 4096.0)
          fail("dense cap exceeded: (dim^2)^copies > 4096 for dim=" + std::to_string(n) +
               ", copies=" + std::to_string(copies));
      }
  }
  d.resource_only = !d.ok && cap_errors == static_cast<int>(d.errors.size());
  if (!d.ok) return d;

  const Cost cost = estimate_cost(c, p);
  d.estimated_seconds = cost.seconds;
  d.estimated_bytes = cost.bytes;
  d.notes.push_back("cost model: O(N D chi^3) per OBC sample (chi^5 for PBC), (chi D)^3 per site unitary, "
                    "O(r^2) overlap stage, D^(2N) per dense average-state sample");
  return d;
}

json RunManifest::to_json() const {
  json files = json::array();
  for (const auto& f : outputs) files.push_back({{"file", f.path}, {"sha256", f.sha256}, {"rows", f.rows}});
  json j;
  j["artifact"] = "rmps";
  j["version"] = version;
  j["config"] = config;
  j["outputs"] = std::move(files);
  j["wall_time_s"] = wall_time;
  j["completed"] = completed;
  if (!error.empty()) j["error"] = error;
  return j;
}

std::vector<Table> compute_tables(const RunConfig& c, int workers) {
  const Diagnostics d = validate(c);
  if (!d.ok) {
    std::string msg;
    for (const auto& err : d.errors) msg += (msg.empty() ? "" : "; ") + err;
    if (d.resource_only) throw ResourceError(msg);
    throw ConfigError(msg);
  }
  return {find_experiment(c.experiment)->run(c, std::max(1, workers))};
}

RunManifest run(const RunConfig& c, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = c.to_json();
  m.version = version_string();
  const std::filesystem::path dir(c.out);
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& err) {
    throw IoError("cannot create output directory " + c.out + ": " + err.what());
  }
  auto finish = [&] {
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
  };
  try {
    for (const Table& t : compute_tables(c, workers)) {
      const std::string bytes = c.format == TableFormat::kCsv ? to_csv(t) : to_json_lines(t);
      const std::string name = table_file(c, t);
      write_file(dir / name, bytes);
      m.outputs.push_back({name, sha256_hex(bytes), t.rows.size()});
    }
    m.completed = true;
  } catch (const std::exception& err) {
    m.error = err.what();
    try {
      finish();
    } catch (const IoError&) {
    }
    throw;
  }
  finish();
  return m;
}

std::vector<ExperimentInfo> list_experiments() {
  std::vector<ExperimentInfo> out;
  for (const auto& e : registry()) out.push_back(e.info);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string version_string() { return RMPS_VERSION; }

}  // namespace rmps
