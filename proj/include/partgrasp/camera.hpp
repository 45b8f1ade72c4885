// Pinhole camera (CV convention: x right, y down, z forward) with a rigid
// world-to-camera pose, plus the 2D bounding-box type used for grounding.
#pragma once

#include <nlohmann/json.hpp>

#include <optional>

#include "partgrasp/geometry.hpp"

namespace partgrasp {

struct RigidTransform {
  Mat3 rotation{Mat3::Identity()};
  Vec3 translation{Vec3::Zero()};

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

struct CameraModel {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  RigidTransform pose;  // world -> camera

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw ParseError("camera: focal lengths must be > 0");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
      throw ParseError("camera: principal point outside the image");
    const Mat3& r = pose.rotation;
    if (((r * r.transpose()) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
      throw ParseError("camera: rotation not orthonormal");
    if (std::abs(r.determinant() - 1.0) > 1e-9)
      throw ParseError("camera: rotation determinant != +1");
  }

  Vec3 optical_center() const { return pose.inverse().translation; }
};

// Pixel of a world point, or nothing when the point is at or behind the
// camera plane (depth <= 1e-6 m).
inline std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& p) {
  const Vec3 pc = camera.pose.apply(p);
  if (pc.z() <= 1e-6) return std::nullopt;
  return Vec2{camera.fx * pc.x() / pc.z() + camera.cx,
              camera.fy * pc.y() / pc.z() + camera.cy};
}

// World-space viewing ray through a pixel, anchored at the optical center.
inline Ray pixel_ray(const CameraModel& camera, const Vec2& pixel) {
  const Vec3 dir_cam{(pixel.x() - camera.cx) / camera.fx,
                     (pixel.y() - camera.cy) / camera.fy, 1.0};
  const Vec3 dir_world = camera.pose.rotation.transpose() * dir_cam;
  return Ray{camera.optical_center(), dir_world.normalized()};
}

struct BoundingBox2D {
  double x_min = 0.0, y_min = 0.0;
  double x_max = 0.0, y_max = 0.0;
  double confidence = 1.0;
  std::string label;

  bool valid() const { return x_min < x_max && y_min < y_max; }

  bool contains(const Vec2& px) const {
    return px.x() >= x_min && px.x() <= x_max && px.y() >= y_min && px.y() <= y_max;
  }

  // Intersection with the image rectangle; an empty result means the box lies
  // entirely outside the image.
  std::optional<BoundingBox2D> clamped(int width, int height) const {
    BoundingBox2D out = *this;
    out.x_min = std::max(0.0, x_min);
    out.y_min = std::max(0.0, y_min);
    out.x_max = std::min(static_cast<double>(width), x_max);
    out.y_max = std::min(static_cast<double>(height), y_max);
    if (!(out.x_min < out.x_max && out.y_min < out.y_max)) return std::nullopt;
    return out;
  }
};

inline CameraModel load_camera(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CameraModel cam;
  try {
    cam.fx = doc.at("fx").get<double>();
    cam.fy = doc.at("fy").get<double>();
    cam.cx = doc.at("cx").get<double>();
    cam.cy = doc.at("cy").get<double>();
    cam.width = doc.at("width").get<int>();
    cam.height = doc.at("height").get<int>();
    const auto& pose = doc.at("pose");
    const auto& rot = pose.at("rotation");
    const auto& tr = pose.at("translation");
    for (int i = 0; i < 3; ++i) {
      cam.pose.translation[i] = tr.at(i).get<double>();
      for (int j = 0; j < 3; ++j) cam.pose.rotation(i, j) = rot.at(i).at(j).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  cam.validate();
  return cam;
}

}  // namespace partgrasp
