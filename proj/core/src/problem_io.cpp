#include "nesgd/problem_io.hpp"

#include <cmath>
#include <string>

#include "nesgd/errors.hpp"

namespace nesgd {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc, const char* what) {
  if (!doc.is_array() || doc.empty() || !doc.front().is_array()) {
    throw FormatError(std::string(what) + ": expected a nonempty array of rows");
  }
  const auto rows = static_cast<Index>(doc.size());
  const auto cols = static_cast<Index>(doc.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw FormatError(std::string(what) + ": ragged rows");
    }
    for (Index j = 0; j < cols; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

std::string_view map_kind_name(SymmetricMap::Kind kind) {
  switch (kind) {
    case SymmetricMap::Kind::kScaledIdentity:
      return "scaled-identity";
    case SymmetricMap::Kind::kDiagonal:
      return "diagonal";
    case SymmetricMap::Kind::kDense:
      return "dense";
    case SymmetricMap::Kind::kLeftMultiply:
      return "left-multiply";
  }
  return "";
}

}  // namespace

json to_json(const Point& x) {
  return {{"matrix", x.is_matrix()}, {"values", matrix_to_json(x.values())}};
}

Point point_from_json(const json& doc) {
  Eigen::MatrixXd v = matrix_from_json(field(doc, "values"), "point");
  if (field(doc, "matrix").get<bool>()) return Point::matrix(std::move(v));
  if (v.cols() != 1) throw FormatError("point: vector values must be a single column");
  return Point::vector(v.col(0));
}

json to_json(const OperatorSpace& space) {
  return {{"kind", std::string(to_string(space.kind()))},
          {"rows", space.rows()},
          {"cols", space.cols()}};
}

OperatorSpace space_from_json(const json& doc) {
  const SpaceKind kind = parse_space_kind(field(doc, "kind").get<std::string>());
  const auto rows = field(doc, "rows").get<Index>();
  switch (kind) {
    case SpaceKind::kScalar:
      return OperatorSpace::scalar(rows);
    case SpaceKind::kDiagonal:
      return OperatorSpace::diagonal(rows);
    case SpaceKind::kLeftMatrix:
      return OperatorSpace::left_matrix(rows, field(doc, "cols").get<Index>());
  }
  throw FormatError("unknown space kind");
}

json to_json(const StructuredOperator& op) { return {{"payload", matrix_to_json(op.payload())}}; }

StructuredOperator operator_from_json(const json& doc, const OperatorSpace& space) {
  Eigen::MatrixXd payload = matrix_from_json(field(doc, "payload"), "operator");
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return StructuredOperator::scalar(space, payload(0, 0));
    case SpaceKind::kDiagonal:
      return StructuredOperator::diagonal(space, payload.col(0));
    case SpaceKind::kLeftMatrix:
      return StructuredOperator::left(space, std::move(payload));
  }
  throw FormatError("unknown space kind");
}

json to_json(const SymmetricMap& map) {
  return {{"kind", std::string(map_kind_name(map.kind()))},
          {"data", matrix_to_json(map.data())}};
}

SymmetricMap map_from_json(const json& doc) {
  const std::string kind = field(doc, "kind").get<std::string>();
  Eigen::MatrixXd data = matrix_from_json(field(doc, "data"), "map");
  if (kind == "scaled-identity") return SymmetricMap::scaled_identity(data(0, 0));
  if (kind == "diagonal") return SymmetricMap::diagonal(data.col(0));
  if (kind == "dense") return SymmetricMap::dense(std::move(data));
  if (kind == "left-multiply") return SymmetricMap::left_multiply(std::move(data));
  throw FormatError("unknown map kind '" + kind + "'");
}

json to_json(const ProblemSpec& p) {
  json radius = std::isinf(p.radius) ? json("inf") : json(p.radius);
  return {
      {"name", p.name},
      {"space", to_json(p.space)},
      {"hessian", to_json(p.hessian)},
      {"x_opt", to_json(p.x_opt)},
      {"f_offset", p.f_offset},
      {"noise_factor", to_json(p.noise_factor)},
      {"noise", std::string(to_string(p.noise))},
      {"L", to_json(p.L)},
      {"sigma", to_json(p.sigma)},
      {"M", to_json(p.M)},
      {"T", to_json(p.T)},
      {"radius", radius},
      {"f_opt", p.f_opt},
      {"convex", p.convex},
      {"x0", to_json(p.x0)},
  };
}

ProblemSpec problem_from_json(const json& doc) {
  try {
    const OperatorSpace space = space_from_json(field(doc, "space"));
    const json& r = field(doc, "radius");
    double radius = 0.0;
    if (r.is_string()) {
      if (r.get<std::string>() != "inf") throw FormatError("radius: expected a number or \"inf\"");
      radius = kInfinity;
    } else {
      radius = r.get<double>();
    }
    ProblemSpec p{
        .name = field(doc, "name").get<std::string>(),
        .space = space,
        .hessian = map_from_json(field(doc, "hessian")),
        .x_opt = point_from_json(field(doc, "x_opt")),
        .f_offset = field(doc, "f_offset").get<double>(),
        .noise_factor = map_from_json(field(doc, "noise_factor")),
        .noise = parse_noise_kind(field(doc, "noise").get<std::string>()),
        .L = operator_from_json(field(doc, "L"), space),
        .sigma = operator_from_json(field(doc, "sigma"), space),
        .M = operator_from_json(field(doc, "M"), space),
        .T = operator_from_json(field(doc, "T"), space),
        .radius = radius,
        .f_opt = field(doc, "f_opt").get<double>(),
        .convex = field(doc, "convex").get<bool>(),
        .x0 = point_from_json(field(doc, "x0")),
    };
    validate(p);
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("problem document: ") + e.what());
  }
}

}  // namespace nesgd
