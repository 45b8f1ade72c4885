// Splits mesh faces into graspable/obstacle regions from a 2D bounding box:
// a face belongs to the box region when its projected centroid falls inside
// the (image-clamped) box and passes the visibility rule. Grasp mode keeps
// the box region graspable; avoid mode complements it.
#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "partgrasp/bvh.hpp"
#include "partgrasp/camera.hpp"
#include "partgrasp/common.hpp"

namespace partgrasp {

enum class FaceLabel : std::uint8_t { Graspable, Obstacle };

struct Visibility {
  enum class Rule { Silhouette, DepthBand };
  Rule rule = Rule::Silhouette;
  double depth_band = 0.02;  // m, DepthBand only

  static Visibility silhouette() { return {}; }
  static Visibility depth_band_rule(double delta) {
    return {Rule::DepthBand, delta};
  }
};

struct RegionPartition {
  const TriMesh* mesh = nullptr;
  std::vector<FaceLabel> face_labels;
  TaskMode mode = TaskMode::Grasp;
  BoundingBox2D source_box;

  int graspable_count() const {
    int n = 0;
    for (FaceLabel l : face_labels)
      if (l == FaceLabel::Graspable) ++n;
    return n;
  }
  int obstacle_count() const {
    return static_cast<int>(face_labels.size()) - graspable_count();
  }
  bool graspable(int face) const {
    return face_labels[face] == FaceLabel::Graspable;
  }
  // Membership in region a (the box-selected part) independent of mode.
  bool in_region_a(int face) const {
    const FaceLabel l = face_labels[face];
    return mode == TaskMode::Grasp ? l == FaceLabel::Graspable
                                   : l == FaceLabel::Obstacle;
  }

  static RegionPartition all_graspable(const TriMesh& mesh) {
    RegionPartition p;
    p.mesh = &mesh;
    p.face_labels.assign(mesh.face_count(), FaceLabel::Graspable);
    p.source_box = BoundingBox2D{0, 0, 1, 1, 1.0, "<all>"};
    return p;
  }
};

namespace detail {

inline bool face_in_box_region(const TriMesh& mesh, const CameraModel& camera,
                               const BoundingBox2D& clamped_box,
                               const Visibility& visibility, const Bvh* bvh,
                               int face) {
  const Vec3 centroid = mesh.face_centroid(face);
  const auto px = project_point(camera, centroid);
  if (!px) return false;  // behind the camera: never part of the region
  if (!clamped_box.contains(*px)) return false;
  if (visibility.rule == Visibility::Rule::Silhouette) return true;
  // DepthBand: the centroid must lie within delta (along the viewing ray) of
  // the first surface the ray meets.
  const Ray ray = pixel_ray(camera, *px);
  const auto first = bvh->ray_cast(mesh, ray);
  if (!first) return false;
  const double centroid_depth = (centroid - ray.origin).norm();
  return centroid_depth - first->distance <= visibility.depth_band + 1e-9;
}

}  // namespace detail

inline RegionPartition partition_mesh(const TriMesh& mesh, const CameraModel& camera,
                                      const BoundingBox2D& box, TaskMode mode,
                                      const Visibility& visibility = {}) {
  if (!box.valid()) throw BoxOutsideImage("degenerate bounding box");
  const auto clamped = box.clamped(camera.width, camera.height);
  if (!clamped) throw BoxOutsideImage("box does not intersect the image rectangle");

  std::unique_ptr<Bvh> bvh;
  if (visibility.rule == Visibility::Rule::DepthBand)
    bvh = std::make_unique<Bvh>(mesh);

  RegionPartition part;
  part.mesh = &mesh;
  part.mode = mode;
  part.source_box = *clamped;
  part.face_labels.resize(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const bool member =
        detail::face_in_box_region(mesh, camera, *clamped, visibility, bvh.get(), f);
    const bool graspable = (mode == TaskMode::Grasp) ? member : !member;
    part.face_labels[f] = graspable ? FaceLabel::Graspable : FaceLabel::Obstacle;
  }
  if (part.graspable_count() == 0)
    throw EmptyRegion("no graspable face under box [" + format_g9(clamped->x_min) +
                      ", " + format_g9(clamped->y_min) + ", " + format_g9(clamped->x_max) +
                      ", " + format_g9(clamped->y_max) + "] in " + to_string(mode) +
                      " mode");
  return part;
}

enum class GraspRegion { InsideA, OutsideA };

// InsideA when every contact face belongs to region a (the part selected by
// the bounding box).
inline GraspRegion region_of_grasp(const RegionPartition& partition,
                                   std::span<const int> contact_faces) {
  for (int f : contact_faces) {
    if (f < 0 || f >= static_cast<int>(partition.face_labels.size()))
      throw OutOfRange("contact face index " + std::to_string(f));
    if (!partition.in_region_a(f)) return GraspRegion::OutsideA;
  }
  return GraspRegion::InsideA;
}

// One label per face, in face order; the debug/golden-file format.
inline std::string labels_to_text(const RegionPartition& partition) {
  std::string out;
  out.reserve(partition.face_labels.size() * 10);
  for (FaceLabel l : partition.face_labels)
    out += (l == FaceLabel::Graspable) ? "graspable\n" : "obstacle\n";
  return out;
}

inline std::vector<FaceLabel> labels_from_text(const std::string& text) {
  std::vector<FaceLabel> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line == "graspable")
      out.push_back(FaceLabel::Graspable);
    else if (line == "obstacle")
      out.push_back(FaceLabel::Obstacle);
    else
      throw ParseError("unknown face label: " + line);
  }
  return out;
}

}  // namespace partgrasp
