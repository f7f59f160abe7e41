#pragma once

// JSON forms of the core value types. Poses serialize as translation
// (meters) plus unit quaternion in (w, x, y, z) order; this is the one
// pose encoding used by every file format in the project.

#include <nlohmann/json.hpp>

#include "fgtrack/lie.hpp"

namespace fgtrack {

using json = nlohmann::json;

inline json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond& q = p.rotation.quaternion();
  return json{{"t", {p.translation.x(), p.translation.y(), p.translation.z()}},
              {"q", {q.w(), q.x(), q.y(), q.z()}}};
}

inline Pose pose_from_json(const json& j) {
  const auto& t = j.at("t");
  const auto& q = j.at("q");
  if (t.size() != 3 || q.size() != 4) {
    throw std::invalid_argument("pose: expected 3-vector t and wxyz quaternion q");
  }
  Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(),
                          q[2].get<double>(), q[3].get<double>());
  return Pose(Rotation(quat),
              Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXd();
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) {
      throw std::invalid_argument("matrix: ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

}  // namespace fgtrack
