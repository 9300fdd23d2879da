#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "rmps/ensemble.hpp"
#include "rmps/mps.hpp"

// Structured-text containers (JSON) for states, matrices and reports.
//
// Complex matrices are stored as {"rows": R, "cols": C, "data": [re, im, ...]}
// with entries row-major. An Mps document is
//
//   {"format": "rmps-mps", "version": 1, "n_sites": N, "phys_dim": D,
//    "bond_dim": χ, "boundary": "obc" | "pbc", "homogeneous": bool,
//    "left_vec": matrix, "right_vec": matrix,        (OBC only, χ×1)
//    "sites": [[A^0, ..., A^{D-1}], ...]}             (one entry if homogeneous)
//
// Doubles are written with round-trip precision.
namespace rmps {

inline constexpr int kMpsFormatVersion = 1;

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json mps_to_json(const Mps& mps);
Mps mps_from_json(const nlohmann::json& j);

void save_mps(const Mps& mps, const std::string& path);
Mps load_mps(const std::string& path);

// One self-describing record. Wall time is left out unless requested, so that
// identical runs produce identical records.
nlohmann::json report_to_json(const EnsembleReport& report, bool include_per_sample = false,
                              bool include_wall_time = false);
nlohmann::json histogram_to_json(const Histogram& h);

}  // namespace rmps
