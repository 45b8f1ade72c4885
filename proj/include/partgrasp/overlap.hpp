// Exact separating-axis overlap test between an oriented box and a triangle
// (closed sets: touching counts as overlap). 13 candidate axes: 3 box axes,
// the triangle normal, and the 9 edge cross products.
#pragma once

#include <cmath>

#include "partgrasp/geometry.hpp"

namespace partgrasp {

struct OrientedBox {
  Vec3 center{Vec3::Zero()};
  Vec3 half_extents{Vec3::Ones()};
  Mat3 rotation{Mat3::Identity()};  // columns are the box axes

  Aabb bounding_aabb() const {
    Vec3 r = rotation.cwiseAbs() * half_extents;
    Aabb box;
    box.expand(center - r);
    box.expand(center + r);
    return box;
  }
};

namespace detail {

// Projects the triangle (in box-local frame) and the box onto `axis`;
// true when the projections are strictly separated.
inline bool sat_separated(const Vec3& axis, const Vec3& v0, const Vec3& v1,
                          const Vec3& v2, const Vec3& half) {
  const double len2 = axis.squaredNorm();
  if (len2 < 1e-24) return false;  // degenerate axis carries no information
  const double p0 = axis.dot(v0);
  const double p1 = axis.dot(v1);
  const double p2 = axis.dot(v2);
  const double tri_min = std::min(p0, std::min(p1, p2));
  const double tri_max = std::max(p0, std::max(p1, p2));
  const double box_r = half.x() * std::abs(axis.x()) +
                       half.y() * std::abs(axis.y()) +
                       half.z() * std::abs(axis.z());
  return tri_min > box_r || tri_max < -box_r;
}

}  // namespace detail

inline bool box_triangle_overlap(const OrientedBox& box, const Vec3& a,
                                 const Vec3& b, const Vec3& c) {
  // box-local frame: box at origin, axes aligned
  const Mat3 rt = box.rotation.transpose();
  const Vec3 v0 = rt * (a - box.center);
  const Vec3 v1 = rt * (b - box.center);
  const Vec3 v2 = rt * (c - box.center);
  const Vec3& h = box.half_extents;

  // box face axes
  for (int i = 0; i < 3; ++i) {
    Vec3 axis = Vec3::Zero();
    axis[i] = 1.0;
    if (detail::sat_separated(axis, v0, v1, v2, h)) return false;
  }

  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;

  // triangle normal
  if (detail::sat_separated(e0.cross(e1), v0, v1, v2, h)) return false;

  // edge cross products
  const Vec3 edges[3] = {e0, e1, e2};
  for (int i = 0; i < 3; ++i) {
    for (int axis_i = 0; axis_i < 3; ++axis_i) {
      Vec3 unit = Vec3::Zero();
      unit[axis_i] = 1.0;
      if (detail::sat_separated(unit.cross(edges[i]), v0, v1, v2, h)) return false;
    }
  }
  return true;
}

}  // namespace partgrasp
