// Bounding volume hierarchy over mesh faces: nearest-hit ray casting and
// box-overlap queries. Median split over the longest axis, leaf size <= 8,
// so construction is deterministic for a given mesh.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "partgrasp/geometry.hpp"

namespace partgrasp {

struct Hit {
  int face = -1;
  double distance = 0.0;
  Vec2 barycentric{0.0, 0.0};  // (u, v) weights of vertices 1 and 2
};

// Moller-Trumbore with inclusive edge handling so a ray through a shared
// edge registers on both incident faces; the caller resolves the tie.
// Hits require t > 1e-9; near-parallel rays (|det| < 1e-12) miss.
inline std::optional<Hit> intersect_triangle(const Ray& ray, const Vec3& a,
                                             const Vec3& b, const Vec3& c) {
  constexpr double kDetEps = 1e-12;
  constexpr double kDistEps = 1e-9;
  constexpr double kBaryEps = 1e-13;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kDetEps) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kBaryEps || u > 1.0 + kBaryEps) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv_det;
  if (v < -kBaryEps || u + v > 1.0 + kBaryEps) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= kDistEps) return std::nullopt;
  return Hit{-1, t, Vec2{u, v}};
}

inline bool ray_aabb_hit(const Ray& ray, const Aabb& box, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int i = 0; i < 3; ++i) {
    const double inv = 1.0 / ray.direction[i];  // +-inf for axis-parallel rays
    double near = (box.lo[i] - ray.origin[i]) * inv;
    double far = (box.hi[i] - ray.origin[i]) * inv;
    if (inv < 0.0) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

class Bvh {
 public:
  static constexpr int kLeafSize = 8;

  explicit Bvh(const TriMesh& mesh) {
    const int n = mesh.face_count();
    face_order_.resize(n);
    for (int i = 0; i < n; ++i) face_order_[i] = i;
    std::vector<Aabb> face_boxes(n);
    std::vector<Vec3> centroids(n);
    for (int f = 0; f < n; ++f) {
      auto v = mesh.face_vertices(f);
      for (const auto& p : v) face_boxes[f].expand(p);
      centroids[f] = mesh.face_centroid(f);
    }
    nodes_.reserve(2 * n);
    build(0, n, face_boxes, centroids);
  }

  // Nearest intersection along the ray; equal-distance ties resolve to the
  // lowest face index. ignore_face is excluded from candidates (used by the
  // grasp sampler to skip the contact's own face).
  std::optional<Hit> ray_cast(const TriMesh& mesh, const Ray& ray,
                              int ignore_face = -1) const {
    Hit best;
    best.distance = std::numeric_limits<double>::infinity();
    cast_node(0, mesh, ray, ignore_face, best);
    if (best.face < 0) return std::nullopt;
    return best;
  }

  // Collects faces whose bounding boxes overlap `query`.
  void collect_overlapping(const Aabb& query, std::vector<int>& out) const {
    collect_node(0, query, out);
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }

  // Invariant audit used by tests: every face in exactly one leaf, every leaf
  // box containing its faces' vertices.
  bool check_structure(const TriMesh& mesh) const {
    std::vector<int> seen(mesh.face_count(), 0);
    bool ok = true;
    for (const auto& node : nodes_) {
      if (!node.is_leaf()) continue;
      for (int i = node.first; i < node.first + node.count; ++i) {
        int f = face_order_[i];
        seen[f]++;
        for (const auto& p : mesh.face_vertices(f)) {
          ok = ok && (p.array() >= node.box.lo.array() - 1e-12).all() &&
               (p.array() <= node.box.hi.array() + 1e-12).all();
        }
      }
    }
    for (int s : seen) ok = ok && s == 1;
    return ok;
  }

 private:
  struct Node {
    Aabb box;
    int left = -1;   // internal: child index; leaf: -1
    int right = -1;
    int first = 0;   // leaf: range into face_order_
    int count = 0;
    bool is_leaf() const { return left < 0; }
  };

  int build(int begin, int end, const std::vector<Aabb>& face_boxes,
            const std::vector<Vec3>& centroids) {
    Node node;
    for (int i = begin; i < end; ++i) node.box.expand(face_boxes[face_order_[i]]);
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) {
      nodes_[idx].first = begin;
      nodes_[idx].count = end - begin;
      return idx;
    }
    const Vec3 extent = node.box.hi - node.box.lo;
    int axis = 0;
    if (extent.y() > extent.x()) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;
    const int mid = (begin + end) / 2;
    std::nth_element(face_order_.begin() + begin, face_order_.begin() + mid,
                     face_order_.begin() + end, [&](int fa, int fb) {
                       const double ca = centroids[fa][axis];
                       const double cb = centroids[fb][axis];
                       return ca < cb || (ca == cb && fa < fb);
                     });
    const int l = build(begin, mid, face_boxes, centroids);
    const int r = build(mid, end, face_boxes, centroids);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
  }

  void cast_node(int idx, const TriMesh& mesh, const Ray& ray, int ignore_face,
                 Hit& best) const {
    const Node& node = nodes_[idx];
    // non-strict bound keeps equal-distance candidates reachable for the
    // lowest-face-index tie rule
    if (!ray_aabb_hit(ray, node.box, best.distance)) return;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = face_order_[i];
        if (f == ignore_face) continue;
        auto v = mesh.face_vertices(f);
        auto hit = intersect_triangle(ray, v[0], v[1], v[2]);
        if (!hit) continue;
        if (hit->distance < best.distance ||
            (hit->distance == best.distance && f < best.face)) {
          best = *hit;
          best.face = f;
        }
      }
      return;
    }
    cast_node(node.left, mesh, ray, ignore_face, best);
    cast_node(node.right, mesh, ray, ignore_face, best);
  }

  void collect_node(int idx, const Aabb& query, std::vector<int>& out) const {
    const Node& node = nodes_[idx];
    if (!node.box.overlaps(query)) return;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i)
        out.push_back(face_order_[i]);
      return;
    }
    collect_node(node.left, query, out);
    collect_node(node.right, query, out);
  }

  std::vector<Node> nodes_;
  std::vector<int> face_order_;
};

inline std::optional<Hit> ray_cast(const TriMesh& mesh, const Bvh& bvh,
                                   const Ray& ray, int ignore_face = -1) {
  return bvh.ray_cast(mesh, ray, ignore_face);
}

}  // namespace partgrasp
