#include "qmb/model_json.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "qmb/error.hpp"

namespace qmb {

namespace detail {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert it to line and column.
    const std::size_t pos = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("invalid JSON", line, col);
  }
}

const json& require(const json& obj, const char* field) {
  if (!obj.is_object()) throw InvalidArgument("expected a JSON object");
  auto it = obj.find(field);
  if (it == obj.end()) throw InvalidArgument(std::string("missing field '") + field + "'");
  return *it;
}

int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw InvalidArgument("field '" + field + "' must be an integer");
  return v.get<int>();
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw InvalidArgument("field '" + field + "' must be a number");
  return v.get<double>();
}

ComplexMatrix matrix_from_json(const json& v, int dim, const std::string& field) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw InvalidArgument("field '" + field + "' must be a list of " + std::to_string(dim) +
                          " rows");
  }
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const json& row = v[i];
    const std::string rname = field + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw InvalidArgument("field '" + rname + "' must have " + std::to_string(dim) +
                            " entries");
    }
    for (int k = 0; k < dim; ++k) {
      const json& e = row[k];
      const std::string ename = rname + "[" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 2) {
        throw InvalidArgument("field '" + ename + "' must be a [re, im] pair");
      }
      m(i, k) = Complex(as_double(e[0], ename), as_double(e[1], ename));
    }
  }
  return m;
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

using detail::json;

StatisticalModel model_from_json(std::string_view text) {
  const json doc = detail::parse_json(text);
  StatisticalModel m;
  m.dim = detail::as_int(detail::require(doc, "dim"), "dim");
  if (m.dim < 1) throw InvalidArgument("field 'dim' must be >= 1");
  m.state = detail::matrix_from_json(detail::require(doc, "state"), m.dim, "state");
  const json& derivs = detail::require(doc, "derivs");
  if (!derivs.is_array() || derivs.empty()) {
    throw InvalidArgument("field 'derivs' must be a nonempty list of matrices");
  }
  for (std::size_t j = 0; j < derivs.size(); ++j) {
    m.derivs.push_back(
        detail::matrix_from_json(derivs[j], m.dim, "derivs[" + std::to_string(j) + "]"));
  }
  const json& theta = detail::require(doc, "theta");
  if (!theta.is_array()) throw InvalidArgument("field 'theta' must be a list of numbers");
  for (std::size_t j = 0; j < theta.size(); ++j) {
    m.theta.push_back(detail::as_double(theta[j], "theta[" + std::to_string(j) + "]"));
  }
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_array()) throw InvalidArgument("field 'labels' must be a list of strings");
    for (const auto& l : *it) {
      if (!l.is_string()) throw InvalidArgument("field 'labels' must be a list of strings");
      m.labels.push_back(l.get<std::string>());
    }
  } else {
    for (int j = 0; j < m.num_params(); ++j) m.labels.push_back("p" + std::to_string(j));
  }
  if (auto it = doc.find("blocks"); it != doc.end()) {
    if (!it->is_array()) throw InvalidArgument("field 'blocks' must be a list of integers");
    for (std::size_t b = 0; b < it->size(); ++b) {
      m.blocks.push_back(detail::as_int((*it)[b], "blocks[" + std::to_string(b) + "]"));
    }
  }
  m.validate();
  return m;
}

std::string model_to_json(const StatisticalModel& model) {
  model.validate();
  json doc;
  doc["dim"] = model.dim;
  doc["state"] = detail::matrix_to_json(model.state);
  json derivs = json::array();
  for (const auto& d : model.derivs) derivs.push_back(detail::matrix_to_json(d));
  doc["derivs"] = std::move(derivs);
  doc["theta"] = model.theta;
  doc["labels"] = model.labels;
  if (!model.blocks.empty()) doc["blocks"] = model.blocks;
  return doc.dump(1) + "\n";
}

StatisticalModel load_model_file(const std::string& path) {
  return model_from_json(detail::read_text_file(path));
}

}  // namespace qmb
