#include "qmb/povm_json.hpp"

#include "json_util.hpp"
#include "qmb/error.hpp"

namespace qmb {

using detail::json;

Estimator estimator_from_json(std::string_view text) {
  const json doc = detail::parse_json(text);
  const int dim = detail::as_int(detail::require(doc, "dim"), "dim");
  if (dim < 1) throw InvalidArgument("field 'dim' must be >= 1");
  const json& outcomes = detail::require(doc, "outcomes");
  if (!outcomes.is_array() || outcomes.empty()) {
    throw InvalidArgument("field 'outcomes' must be a nonempty list of matrices");
  }
  Estimator e;
  for (std::size_t m = 0; m < outcomes.size(); ++m) {
    e.povm.outcomes.push_back(
        detail::matrix_from_json(outcomes[m], dim, "outcomes[" + std::to_string(m) + "]"));
  }
  const int count = e.povm.size();
  const json& xi = detail::require(doc, "xi");
  if (!xi.is_array()) throw InvalidArgument("field 'xi' must be a list of rows");
  e.xi.resize(static_cast<Eigen::Index>(xi.size()), count);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    const std::string rname = "xi[" + std::to_string(j) + "]";
    if (!xi[j].is_array() || static_cast<int>(xi[j].size()) != count) {
      throw InvalidArgument("field '" + rname + "' must have one entry per outcome (" +
                            std::to_string(count) + ")");
    }
    for (int m = 0; m < count; ++m) {
      e.xi(static_cast<Eigen::Index>(j), m) =
          detail::as_double(xi[j][m], rname + "[" + std::to_string(m) + "]");
    }
  }
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_array() || it->size() != xi.size()) {
      throw InvalidArgument("field 'labels' must hold one string per row of 'xi'");
    }
    for (const auto& l : *it) {
      if (!l.is_string()) throw InvalidArgument("field 'labels' must be a list of strings");
      e.labels.push_back(l.get<std::string>());
    }
  } else {
    for (std::size_t j = 0; j < xi.size(); ++j) e.labels.push_back("p" + std::to_string(j));
  }
  const PovmReport rep = validate_povm(e.povm);
  if (!rep.ok) throw InvalidArgument("field 'outcomes': " + rep.failure);
  return e;
}

std::string estimator_to_json(const Estimator& estimator) {
  json doc;
  doc["dim"] = estimator.povm.dim();
  json outcomes = json::array();
  for (const auto& p : estimator.povm.outcomes) outcomes.push_back(detail::matrix_to_json(p));
  doc["outcomes"] = std::move(outcomes);
  json xi = json::array();
  for (Eigen::Index j = 0; j < estimator.xi.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index m = 0; m < estimator.xi.cols(); ++m) row.push_back(estimator.xi(j, m));
    xi.push_back(std::move(row));
  }
  doc["xi"] = std::move(xi);
  doc["labels"] = estimator.labels;
  return doc.dump(1) + "\n";
}

Estimator load_estimator_file(const std::string& path) {
  return estimator_from_json(detail::read_text_file(path));
}

}  // namespace qmb
