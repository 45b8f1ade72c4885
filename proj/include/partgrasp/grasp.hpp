// Region-confined antipodal grasp sampling for a parallel-jaw gripper.
//
// Sampler outline: draw a surface point on a graspable face (area-weighted),
// ray-cast inward to find the opposing contact, apply the friction-cone
// antipodal test, then try 8 rolls of the gripper about the closing axis and
// keep those whose swept finger volumes and palm slab clear every obstacle
// face. Attempts are partitioned into fixed-size strata with per-stratum
// derived RNG streams, so the result is identical for any worker count.
#pragma once

#include <future>
#include <random>
#include <span>
#include <thread>

#include "partgrasp/overlap.hpp"
#include "partgrasp/partition.hpp"

namespace partgrasp {

struct GripperModel {
  double max_opening = 0.12;    // m
  double finger_length = 0.04;  // m
  Vec3 finger_box{0.01, 0.01, 0.02};  // half-extents: closing, lateral, approach
  double palm_clearance = 0.01;  // m
  double friction_mu = 0.5;

  void validate() const {
    if (!(max_opening > 0.0 && finger_length > 0.0 && palm_clearance > 0.0) ||
        !(finger_box.array() > 0.0).all())
      throw ConfigError("gripper lengths must be > 0");
    if (!(friction_mu > 0.0)) throw ConfigError("friction coefficient must be > 0");
  }

  double cone_cos() const { return 1.0 / std::sqrt(1.0 + friction_mu * friction_mu); }

  GripperModel scaled(double s) const {
    GripperModel g = *this;
    g.max_opening *= s;
    g.finger_length *= s;
    g.finger_box *= s;
    g.palm_clearance *= s;
    return g;
  }
};

struct Contact {
  Vec3 point{Vec3::Zero()};
  Vec3 normal{Vec3::Zero()};  // outward surface normal
  int face = -1;
};

struct GraspCandidate {
  Eigen::Matrix4d pose{Eigen::Matrix4d::Identity()};  // gripper frame in mesh frame
  Contact contact_a;
  Contact contact_b;
  double width = 0.0;
  double quality = 0.0;
  std::int64_t seed_id = 0;

  Vec3 closing_axis() const { return (contact_b.point - contact_a.point) / width; }
};

struct GraspSet {
  std::vector<GraspCandidate> grasps;
  std::uint64_t rng_seed = 0;

  // descending quality, ties by ascending seed_id
  void sort_canonical() {
    std::sort(grasps.begin(), grasps.end(),
              [](const GraspCandidate& x, const GraspCandidate& y) {
                if (x.quality != y.quality) return x.quality > y.quality;
                return x.seed_id < y.seed_id;
              });
  }
  size_t size() const { return grasps.size(); }
};

// Friction-cone margin scaled by a width preference. theta_i is the angle
// between the inward contact normal and the closing direction at contact i;
// alpha = atan(mu).
inline double score_grasp(const GraspCandidate& candidate, const GripperModel& gripper) {
  const Vec3 u = candidate.closing_axis();
  const double cos_alpha = gripper.cone_cos();
  const double cos_a = -candidate.contact_a.normal.dot(u);
  const double cos_b = candidate.contact_b.normal.dot(u);
  const double denom = 1.0 - cos_alpha;
  auto margin = [&](double cos_theta) {
    return std::clamp((cos_theta - cos_alpha) / denom, 0.0, 1.0);
  };
  const double cone = std::min(margin(cos_a), margin(cos_b));
  const double width_factor =
      std::clamp(1.0 - candidate.width / gripper.max_opening, 0.25, 1.0);
  return cone * width_factor;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 is bit-identical across platforms; the [0,1) mapping below keeps
// it that way (std::uniform_real_distribution is not pinned by the standard).
struct SampleRng {
  std::mt19937_64 engine;
  explicit SampleRng(std::uint64_t seed) : engine(seed) {}
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
};

// Orthonormal frame completion: two unit vectors spanning the plane normal
// to `axis`, chosen deterministically.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& axis) {
  int smallest = 0;
  if (std::abs(axis.y()) < std::abs(axis[smallest])) smallest = 1;
  if (std::abs(axis.z()) < std::abs(axis[smallest])) smallest = 2;
  Vec3 e = Vec3::Zero();
  e[smallest] = 1.0;
  const Vec3 b1 = axis.cross(e).normalized();
  const Vec3 b2 = axis.cross(b1);
  return {b1, b2};
}

struct GripperBoxes {
  OrientedBox finger_a;  // swept from full opening to the contact
  OrientedBox finger_b;
  OrientedBox palm;
};

// Boxes in mesh frame for a contact pair and an approach direction. Axis
// convention: x = closing axis (a->b), z = approach (palm -> object),
// y = z cross x.
inline GripperBoxes gripper_boxes(const Vec3& pa, const Vec3& pb, const Vec3& approach,
                                  const GripperModel& gripper) {
  const Vec3 center = 0.5 * (pa + pb);
  const double width = (pb - pa).norm();
  const Vec3 x = (pb - pa) / width;
  const Vec3 z = approach;
  const Vec3 y = z.cross(x);
  Mat3 rot;
  rot.col(0) = x;
  rot.col(1) = y;
  rot.col(2) = z;

  const double hx = gripper.finger_box.x();
  const double hy = gripper.finger_box.y();
  const double hz = gripper.finger_box.z();
  const double open_half = 0.5 * gripper.max_opening;

  GripperBoxes boxes;
  // swept finger: [-open_half - 2hx, -width/2] along x, centered on the
  // contact plane along the approach
  const double sweep_half = 0.5 * (open_half + 2.0 * hx - 0.5 * width);
  const double sweep_center = -0.5 * width - sweep_half;
  boxes.finger_a.rotation = rot;
  boxes.finger_a.half_extents = Vec3(sweep_half, hy, hz);
  boxes.finger_a.center = center + rot * Vec3(sweep_center, 0.0, 0.0);
  boxes.finger_b = boxes.finger_a;
  boxes.finger_b.center = center + rot * Vec3(-sweep_center, 0.0, 0.0);

  boxes.palm.rotation = rot;
  boxes.palm.half_extents =
      Vec3(open_half + 2.0 * hx, hy, 0.5 * gripper.palm_clearance);
  boxes.palm.center =
      center + rot * Vec3(0.0, 0.0, -(hz + 0.5 * gripper.palm_clearance));
  return boxes;
}

inline Eigen::Matrix4d gripper_pose(const Vec3& pa, const Vec3& pb, const Vec3& approach) {
  const Vec3 x = (pb - pa).normalized();
  const Vec3 z = approach;
  const Vec3 y = z.cross(x);
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
  pose.block<3, 1>(0, 0) = x;
  pose.block<3, 1>(0, 1) = y;
  pose.block<3, 1>(0, 2) = z;
  pose.block<3, 1>(0, 3) = 0.5 * (pa + pb);
  return pose;
}

inline bool box_hits_obstacle(const OrientedBox& box, const TriMesh& mesh,
                              const Bvh& bvh, const RegionPartition& partition,
                              std::vector<int>& scratch) {
  scratch.clear();
  bvh.collect_overlapping(box.bounding_aabb(), scratch);
  for (int f : scratch) {
    if (partition.graspable(f)) continue;
    auto v = mesh.face_vertices(f);
    if (box_triangle_overlap(box, v[0], v[1], v[2])) return true;
  }
  return false;
}

struct AreaTable {
  std::vector<double> cumulative;
  std::vector<int> faces;
  double total = 0.0;

  static AreaTable build(const TriMesh& mesh, const RegionPartition& partition) {
    AreaTable t;
    for (int f = 0; f < mesh.face_count(); ++f) {
      if (!partition.graspable(f)) continue;
      t.total += mesh.face_areas()[f];
      t.cumulative.push_back(t.total);
      t.faces.push_back(f);
    }
    return t;
  }

  int pick(double u) const {
    const double target = u * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    size_t i = static_cast<size_t>(it - cumulative.begin());
    if (i >= faces.size()) i = faces.size() - 1;
    return faces[i];
  }
};

}  // namespace detail

struct SamplerOptions {
  int rolls = 8;               // approach directions per contact pair
  int budget_factor = 200;     // attempts allowed per requested grasp
  int workers = 1;             // any value yields an identical GraspSet
  double contact_offset = 1e-6;  // m, ray origin lift off the surface
};

inline GraspSet sample_grasps(const TriMesh& mesh, const Bvh& bvh,
                              const RegionPartition& partition,
                              const GripperModel& gripper, int n_target,
                              std::uint64_t rng_seed,
                              const SamplerOptions& options = {}) {
  gripper.validate();
  if (n_target < 1) throw ConfigError("n_target must be >= 1");
  if (partition.graspable_count() < 1)
    throw RegionTooSmall("partition has no graspable face");

  const auto areas = detail::AreaTable::build(mesh, partition);
  const double cos_alpha = gripper.cone_cos();
  const long budget = static_cast<long>(options.budget_factor) * n_target;
  constexpr long kStratumSize = 64;
  const long n_strata = (budget + kStratumSize - 1) / kStratumSize;

  auto run_stratum = [&](long stratum) {
    std::vector<GraspCandidate> found;
    detail::SampleRng rng(detail::splitmix64(rng_seed ^ detail::splitmix64(
                                                 static_cast<std::uint64_t>(stratum) + 1)));
    std::vector<int> scratch;
    const long first_attempt = stratum * kStratumSize;
    const long last_attempt = std::min(first_attempt + kStratumSize, budget);
    for (long attempt = first_attempt; attempt < last_attempt; ++attempt) {
      const double r_face = rng.uniform();
      const double r_u = rng.uniform();
      const double r_v = rng.uniform();

      const int face_a = areas.pick(r_face);
      const auto tri = mesh.face_vertices(face_a);
      const Vec3 pa = sample_triangle_point(tri[0], tri[1], tri[2], r_u, r_v);
      const Vec3 na = mesh.face_normals()[face_a];

      const Ray inward{pa + options.contact_offset * na, -na};
      const auto hit = bvh.ray_cast(mesh, inward, face_a);
      if (!hit) continue;
      const Vec3 pb = inward.origin + hit->distance * inward.direction;
      const double width = (pb - pa).norm();
      if (width > gripper.max_opening || width < 1e-9) continue;
      if (!partition.graspable(hit->face)) continue;
      const Vec3 nb = mesh.face_normals()[hit->face];

      const Vec3 u = (pb - pa) / width;
      if (-na.dot(u) < cos_alpha) continue;  // angle(na, pb->pa) > alpha
      if (nb.dot(u) < cos_alpha) continue;   // angle(nb, pa->pb) > alpha

      auto [b1, b2] = detail::plane_basis(u);
      GraspCandidate base;
      base.contact_a = {pa, na, face_a};
      base.contact_b = {pb, nb, hit->face};
      base.width = width;
      for (int roll = 0; roll < options.rolls; ++roll) {
        const double phi = 2.0 * M_PI * roll / options.rolls;
        const Vec3 approach = std::cos(phi) * b1 + std::sin(phi) * b2;
        const auto boxes = detail::gripper_boxes(pa, pb, approach, gripper);
        if (detail::box_hits_obstacle(boxes.finger_a, mesh, bvh, partition, scratch) ||
            detail::box_hits_obstacle(boxes.finger_b, mesh, bvh, partition, scratch) ||
            detail::box_hits_obstacle(boxes.palm, mesh, bvh, partition, scratch))
          continue;
        GraspCandidate cand = base;
        cand.pose = detail::gripper_pose(pa, pb, approach);
        cand.seed_id = attempt * options.rolls + roll;
        cand.quality = score_grasp(cand, gripper);
        found.push_back(std::move(cand));
      }
    }
    return found;
  };

  std::vector<GraspCandidate> accepted;
  const int workers = std::max(1, options.workers);
  for (long block = 0; block < n_strata; block += workers) {
    const long block_end = std::min(block + workers, n_strata);
    std::vector<std::future<std::vector<GraspCandidate>>> futures;
    for (long s = block + 1; s < block_end; ++s)
      futures.push_back(std::async(std::launch::async, run_stratum, s));
    auto first = run_stratum(block);
    accepted.insert(accepted.end(), first.begin(), first.end());
    for (auto& fut : futures) {
      auto part = fut.get();
      accepted.insert(accepted.end(), part.begin(), part.end());
    }
    // completed strata form a contiguous prefix of the attempt sequence, so
    // reaching n_target here matches the sequential early stop
    if (static_cast<int>(accepted.size()) >= n_target) break;
  }

  if (accepted.empty())
    throw RegionTooSmall("no grasp found within " + std::to_string(budget) +
                         " attempts; the graspable region is unusable");

  std::sort(accepted.begin(), accepted.end(),
            [](const GraspCandidate& x, const GraspCandidate& y) {
              return x.seed_id < y.seed_id;
            });
  if (static_cast<int>(accepted.size()) > n_target) accepted.resize(n_target);

  GraspSet set;
  set.rng_seed = rng_seed;
  set.grasps = std::move(accepted);
  set.sort_canonical();
  return set;
}

// Same sampler with every face treated as graspable (no part restriction).
inline GraspSet unrestricted_baseline(const TriMesh& mesh, const Bvh& bvh,
                                      const GripperModel& gripper, int n_target,
                                      std::uint64_t rng_seed,
                                      const SamplerOptions& options = {}) {
  return sample_grasps(mesh, bvh, RegionPartition::all_graspable(mesh), gripper,
                       n_target, rng_seed, options);
}

inline GraspSet top_k(const GraspSet& grasps, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  GraspSet out;
  out.rng_seed = grasps.rng_seed;
  const size_t n = std::min<size_t>(static_cast<size_t>(k), grasps.grasps.size());
  out.grasps.assign(grasps.grasps.begin(), grasps.grasps.begin() + n);
  return out;
}

// ---------------------------------------------------------------------------
// serialization (fixed 9-significant-digit floats, stable field order)

namespace detail {

inline void append_vec3(std::string& out, const Vec3& v) {
  out += '[';
  out += format_g9(v.x());
  out += ',';
  out += format_g9(v.y());
  out += ',';
  out += format_g9(v.z());
  out += ']';
}

inline void append_contact(std::string& out, const Contact& c) {
  out += "{\"point\":";
  append_vec3(out, c.point);
  out += ",\"normal\":";
  append_vec3(out, c.normal);
  out += ",\"face\":" + std::to_string(c.face) + "}";
}

}  // namespace detail

inline std::string serialize_grasps(const GraspSet& set, const GripperModel& gripper,
                                    const std::string& fixture_id) {
  std::string out;
  out += "{\n\"header\":{\"rng_seed\":" + std::to_string(set.rng_seed);
  out += ",\"fixture\":\"" + fixture_id + "\"";
  out += ",\"gripper\":{\"max_opening\":" + format_g9(gripper.max_opening);
  out += ",\"finger_length\":" + format_g9(gripper.finger_length);
  out += ",\"finger_box\":";
  detail::append_vec3(out, gripper.finger_box);
  out += ",\"palm_clearance\":" + format_g9(gripper.palm_clearance);
  out += ",\"friction_mu\":" + format_g9(gripper.friction_mu) + "}},\n";
  out += "\"grasps\":[";
  for (size_t i = 0; i < set.grasps.size(); ++i) {
    const auto& g = set.grasps[i];
    out += i == 0 ? "\n" : ",\n";
    out += "{\"pose\":[";
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        if (r || c) out += ',';
        out += format_g9(g.pose(r, c));
      }
    out += "],\"width\":" + format_g9(g.width);
    out += ",\"contacts\":[";
    detail::append_contact(out, g.contact_a);
    out += ',';
    detail::append_contact(out, g.contact_b);
    out += "],\"quality\":" + format_g9(g.quality);
    out += ",\"seed_id\":" + std::to_string(g.seed_id) + "}";
  }
  out += "\n]\n}\n";
  return out;
}

struct GraspDocument {
  GraspSet set;
  GripperModel gripper;
  std::string fixture_id;
};

inline GraspDocument parse_grasps(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grasp set: ") + e.what());
  }
  GraspDocument out;
  try {
    const auto& header = doc.at("header");
    out.set.rng_seed = header.at("rng_seed").get<std::uint64_t>();
    out.fixture_id = header.value("fixture", "");
    const auto& grip = header.at("gripper");
    out.gripper.max_opening = grip.at("max_opening").get<double>();
    out.gripper.finger_length = grip.at("finger_length").get<double>();
    for (int i = 0; i < 3; ++i)
      out.gripper.finger_box[i] = grip.at("finger_box").at(i).get<double>();
    out.gripper.palm_clearance = grip.at("palm_clearance").get<double>();
    out.gripper.friction_mu = grip.at("friction_mu").get<double>();
    for (const auto& g : doc.at("grasps")) {
      GraspCandidate cand;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cand.pose(r, c) = g.at("pose").at(r * 4 + c).get<double>();
      cand.width = g.at("width").get<double>();
      auto read_contact = [&](const nlohmann::json& j) {
        Contact contact;
        for (int i = 0; i < 3; ++i) {
          contact.point[i] = j.at("point").at(i).get<double>();
          contact.normal[i] = j.at("normal").at(i).get<double>();
        }
        contact.face = j.at("face").get<int>();
        return contact;
      };
      cand.contact_a = read_contact(g.at("contacts").at(0));
      cand.contact_b = read_contact(g.at("contacts").at(1));
      cand.quality = g.at("quality").get<double>();
      cand.seed_id = g.at("seed_id").get<std::int64_t>();
      if (std::abs(cand.width - (cand.contact_a.point - cand.contact_b.point).norm()) > 1e-6)
        throw ParseError("grasp set: width inconsistent with contact points");
      if (cand.quality < 0.0 || cand.quality > 1.0)
        throw ParseError("grasp set: quality outside [0,1]");
      out.set.grasps.push_back(std::move(cand));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grasp set: ") + e.what());
  }
  out.set.sort_canonical();
  return out;
}

}  // namespace partgrasp
