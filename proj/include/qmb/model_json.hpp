#pragma once

#include <string>
#include <string_view>

#include "qmb/model.hpp"

namespace qmb {

/// Parses the model JSON document and validates it. Syntax errors raise
/// ParseError with a position; schema and invariant violations raise
/// InvalidArgument naming the offending field.
StatisticalModel model_from_json(std::string_view text);

std::string model_to_json(const StatisticalModel& model);

StatisticalModel load_model_file(const std::string& path);

}  // namespace qmb
