#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace uis {

/// Parametric plane curve u in [0, 1] -> R^2 with an arclength table.
class Curve {
 public:
  enum class Type { kSegment, kCircle, kArc, kSine };

  static Curve segment(Eigen::Vector2d from, Eigen::Vector2d to);
  static Curve circle(Eigen::Vector2d center, double radius);
  // Arc of a circle from start_angle to end_angle (radians).
  static Curve arc(Eigen::Vector2d center, double radius, double start_angle, double end_angle);
  // y = amplitude * sin(2 pi cycles (x - x0) / (x1 - x0)) for x in [x0, x1].
  static Curve sine(double x0, double x1, double amplitude, double cycles);

  static Curve from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Type type() const { return type_; }
  bool closed() const { return type_ == Type::kCircle; }

  Eigen::Vector2d point(double u) const;

  // Total length. Throws ArgumentError for a degenerate curve.
  double length() const;
  // Point at arclength fraction s in [0, 1], from the dense table.
  Eigen::Vector2d at_arclength(double s) const;

  // Number of segments of the arclength table.
  static constexpr std::size_t kTableSegments = 1 << 14;

 private:
  Curve(Type type, std::vector<double> params);
  void build_table();

  Type type_;
  std::vector<double> params_;
  std::vector<double> cumulative_;  // arclength at u = i / kTableSegments
};

}  // namespace uis
