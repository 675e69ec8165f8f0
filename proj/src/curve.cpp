#include "uis/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "uis/errors.hpp"

namespace uis {

Curve::Curve(Type type, std::vector<double> params) : type_(type), params_(std::move(params)) {
  for (double p : params_) {
    if (!std::isfinite(p)) throw ArgumentError("curve parameters must be finite");
  }
  build_table();
}

Curve Curve::segment(Eigen::Vector2d from, Eigen::Vector2d to) {
  return Curve(Type::kSegment, {from.x(), from.y(), to.x(), to.y()});
}

Curve Curve::circle(Eigen::Vector2d center, double radius) {
  return Curve(Type::kCircle, {center.x(), center.y(), radius});
}

Curve Curve::arc(Eigen::Vector2d center, double radius, double start_angle, double end_angle) {
  return Curve(Type::kArc, {center.x(), center.y(), radius, start_angle, end_angle});
}

Curve Curve::sine(double x0, double x1, double amplitude, double cycles) {
  return Curve(Type::kSine, {x0, x1, amplitude, cycles});
}

Eigen::Vector2d Curve::point(double u) const {
  const auto& p = params_;
  switch (type_) {
    case Type::kSegment:
      return {p[0] + u * (p[2] - p[0]), p[1] + u * (p[3] - p[1])};
    case Type::kCircle: {
      const double a = 2.0 * std::numbers::pi * u;
      return {p[0] + p[2] * std::cos(a), p[1] + p[2] * std::sin(a)};
    }
    case Type::kArc: {
      const double a = p[3] + u * (p[4] - p[3]);
      return {p[0] + p[2] * std::cos(a), p[1] + p[2] * std::sin(a)};
    }
    case Type::kSine: {
      const double x = p[0] + u * (p[1] - p[0]);
      return {x, p[2] * std::sin(2.0 * std::numbers::pi * p[3] * u)};
    }
  }
  return {0.0, 0.0};
}

void Curve::build_table() {
  cumulative_.assign(kTableSegments + 1, 0.0);
  Eigen::Vector2d prev = point(0.0);
  for (std::size_t i = 1; i <= kTableSegments; ++i) {
    const Eigen::Vector2d next = point(static_cast<double>(i) / kTableSegments);
    cumulative_[i] = cumulative_[i - 1] + (next - prev).norm();
    prev = next;
  }
}

double Curve::length() const {
  const double len = cumulative_.back();
  if (!(len > 1e-12)) throw ArgumentError("degenerate curve (zero length)");
  return len;
}

Eigen::Vector2d Curve::at_arclength(double s) const {
  const double target = std::clamp(s, 0.0, 1.0) * length();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.begin()) return point(0.0);
  if (it == cumulative_.end()) return point(1.0);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  const double lo = cumulative_[i - 1];
  const double hi = cumulative_[i];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
  return point((static_cast<double>(i - 1) + frac) / kTableSegments);
}

nlohmann::json Curve::to_json() const {
  const auto& p = params_;
  switch (type_) {
    case Type::kSegment:
      return {{"type", "segment"}, {"from", {p[0], p[1]}}, {"to", {p[2], p[3]}}};
    case Type::kCircle:
      return {{"type", "circle"}, {"center", {p[0], p[1]}}, {"radius", p[2]}};
    case Type::kArc:
      return {{"type", "arc"}, {"center", {p[0], p[1]}}, {"radius", p[2]},
              {"start_angle", p[3]}, {"end_angle", p[4]}};
    case Type::kSine:
      return {{"type", "sine"}, {"x0", p[0]}, {"x1", p[1]}, {"amplitude", p[2]}, {"cycles", p[3]}};
  }
  return {};
}

Curve Curve::from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto vec2 = [&](const char* key, Eigen::Vector2d fallback) -> Eigen::Vector2d {
    if (!j.contains(key)) return fallback;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(fmt::format("curve field '{}' must have two entries", key));
    return {v[0], v[1]};
  };
  if (type == "segment") return segment(vec2("from", {0, 0}), vec2("to", {1, 0}));
  if (type == "circle") return circle(vec2("center", {0, 0}), j.value("radius", 1.0));
  if (type == "arc") {
    return arc(vec2("center", {0, 0}), j.value("radius", 1.0), j.value("start_angle", 0.0),
               j.value("end_angle", std::numbers::pi));
  }
  if (type == "sine") {
    return sine(j.value("x0", -1.0), j.value("x1", 1.0), j.value("amplitude", 0.5), j.value("cycles", 1.0));
  }
  throw ConfigError(fmt::format("unknown curve type '{}'", type));
}

}  // namespace uis
