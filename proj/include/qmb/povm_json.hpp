#pragma once

#include <string>
#include <string_view>

#include "qmb/measurement.hpp"

namespace qmb {

/// Estimator document: { "dim": d, "outcomes": [matrix, ...],
/// "xi": [[xi_j1, ..., xi_jM], ...], "labels": [string] }. Matrices use the
/// model schema. The POVM is validated on load.
Estimator estimator_from_json(std::string_view text);

std::string estimator_to_json(const Estimator& estimator);

Estimator load_estimator_file(const std::string& path);

}  // namespace qmb
