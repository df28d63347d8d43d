#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "qmb/linalg.hpp"

namespace qmb::detail {

using nlohmann::json;

json parse_json(std::string_view text);

const json& require(const json& obj, const char* field);

int as_int(const json& v, const std::string& field);
double as_double(const json& v, const std::string& field);

/// Reads a dim x dim matrix given as a list of rows of [re, im] pairs.
ComplexMatrix matrix_from_json(const json& v, int dim, const std::string& field);
json matrix_to_json(const ComplexMatrix& m);

std::string read_text_file(const std::string& path);

}  // namespace qmb::detail
