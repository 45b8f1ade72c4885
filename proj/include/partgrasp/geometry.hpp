// Indexed triangle mesh: loading (OBJ / ASCII PLY), derived per-face data,
// and the small geometric helpers the rest of the toolkit builds on.
//
// Units are meters. Face normals are recomputed from winding on load; input
// vt/vn records are ignored. Degenerate faces (area <= 1e-12 m^2) are dropped
// at load time with a count reported on stderr.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "partgrasp/common.hpp"
#include "partgrasp/errors.hpp"

namespace partgrasp {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

constexpr double kDegenerateAreaEps = 1e-12;  // m^2

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  static Ray through(const Vec3& origin, const Vec3& target) {
    return Ray{origin, (target - origin).normalized()};
  }
};

struct Aabb {
  Vec3 lo{Vec3::Constant(std::numeric_limits<double>::max())};
  Vec3 hi{Vec3::Constant(std::numeric_limits<double>::lowest())};

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& o) {
    lo = lo.cwiseMin(o.lo);
    hi = hi.cwiseMax(o.hi);
  }
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (hi.array() >= o.lo.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }
};

enum class MeshFormat { Obj, PlyAscii };

class TriMesh {
 public:
  TriMesh() = default;

  // Builds the mesh from raw data: filters degenerate faces, validates
  // indices, computes normals/areas/bounds.
  static TriMesh from_data(std::vector<Vec3> vertices,
                           std::vector<std::array<int, 3>> faces,
                           const std::string& origin = "<memory>") {
    TriMesh m;
    m.vertices_ = std::move(vertices);
    const int nv = static_cast<int>(m.vertices_.size());
    int dropped = 0;
    m.faces_.reserve(faces.size());
    for (const auto& f : faces) {
      for (int i : f) {
        if (i < 0 || i >= nv)
          throw ParseError(origin + ": face index " + std::to_string(i) +
                           " out of range (vertex count " + std::to_string(nv) + ")");
      }
      const Vec3& a = m.vertices_[f[0]];
      const Vec3& b = m.vertices_[f[1]];
      const Vec3& c = m.vertices_[f[2]];
      Vec3 n = (b - a).cross(c - a);
      double area = 0.5 * n.norm();
      if (area <= kDegenerateAreaEps) {
        ++dropped;
        continue;
      }
      m.faces_.push_back(f);
      m.face_normals_.push_back(n / n.norm());
      m.face_areas_.push_back(area);
    }
    if (dropped > 0)
      std::cerr << "[mesh] " << origin << ": dropped " << dropped
                << " degenerate face(s)\n";
    if (m.faces_.empty()) throw EmptyMesh(origin + ": no valid faces");
    for (const auto& f : m.faces_)
      for (int i : f) m.bounds_.expand(m.vertices_[i]);
    if (!(m.bounds_.diagonal() > 0.0)) throw EmptyMesh(origin + ": zero-extent mesh");
    m.dropped_degenerate_ = dropped;
    return m;
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  const std::vector<double>& face_areas() const { return face_areas_; }
  const Aabb& bounds() const { return bounds_; }
  int face_count() const { return static_cast<int>(faces_.size()); }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int dropped_degenerate_count() const { return dropped_degenerate_; }

  std::array<Vec3, 3> face_vertices(int f) const {
    const auto& t = faces_[f];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }

  Vec3 face_centroid(int f) const {
    auto v = face_vertices(f);
    return (v[0] + v[1] + v[2]) / 3.0;
  }

  double total_area() const {
    double s = 0.0;
    for (double a : face_areas_) s += a;
    return s;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  Aabb bounds_;
  int dropped_degenerate_ = 0;
};

namespace detail {

inline int parse_obj_index(const std::string& token, int vertex_count,
                           const std::string& origin) {
  // "3", "3/1", "3/1/2", "3//2" all reference vertex 3; negative indices are
  // relative to the end per the OBJ spec.
  size_t slash = token.find('/');
  std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    throw ParseError(origin + ": bad face index token '" + token + "'");
  }
  if (idx < 0) idx = vertex_count + idx + 1;
  if (idx <= 0) throw ParseError(origin + ": non-positive face index '" + token + "'");
  return idx - 1;
}

inline TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int line_no = 0;
  const std::string origin = path.filename().string();
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z()))
        throw ParseError(origin + ":" + std::to_string(line_no) + ": bad vertex record");
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ss >> tok)
        poly.push_back(parse_obj_index(tok, static_cast<int>(vertices.size()), origin));
      if (poly.size() < 3)
        throw ParseError(origin + ":" + std::to_string(line_no) + ": face with <3 vertices");
      for (size_t i = 1; i + 1 < poly.size(); ++i)  // fan triangulation
        faces.push_back({poly[0], poly[i], poly[i + 1]});
    }
    // vt / vn / usemtl / o / g / s are ignored
  }
  return TriMesh::from_data(std::move(vertices), std::move(faces), origin);
}

inline TriMesh load_ply_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  const std::string origin = path.filename().string();
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply")
    throw ParseError(origin + ": missing ply magic");
  long n_vertices = -1, n_faces = -1;
  bool ascii = false;
  std::string current_element;
  std::vector<std::string> vertex_props;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "comment") continue;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (tag == "element") {
      std::string name;
      long count = 0;
      ss >> name >> count;
      current_element = name;
      if (name == "vertex") n_vertices = count;
      if (name == "face") n_faces = count;
    } else if (tag == "property") {
      if (current_element == "vertex") {
        std::string type, name;
        ss >> type >> name;
        vertex_props.push_back(name);
      }
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw ParseError(origin + ": only ASCII PLY is supported");
  if (n_vertices < 0 || n_faces < 0)
    throw ParseError(origin + ": header missing vertex/face elements");
  int ix = -1, iy = -1, iz = -1;
  for (size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<int>(i);
    if (vertex_props[i] == "y") iy = static_cast<int>(i);
    if (vertex_props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(origin + ": vertex lacks x/y/z");
  std::vector<Vec3> vertices;
  vertices.reserve(n_vertices);
  for (long v = 0; v < n_vertices; ++v) {
    if (!std::getline(in, line)) throw ParseError(origin + ": truncated vertex list");
    std::istringstream ss(line);
    std::vector<double> vals(vertex_props.size());
    for (auto& x : vals)
      if (!(ss >> x)) throw ParseError(origin + ": bad vertex line");
    vertices.emplace_back(vals[ix], vals[iy], vals[iz]);
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(n_faces);
  for (long f = 0; f < n_faces; ++f) {
    if (!std::getline(in, line)) throw ParseError(origin + ": truncated face list");
    std::istringstream ss(line);
    int n = 0;
    if (!(ss >> n) || n < 3) throw ParseError(origin + ": bad face list");
    std::vector<int> poly(n);
    for (int& i : poly)
      if (!(ss >> i)) throw ParseError(origin + ": bad face index");
    for (int i = 1; i + 1 < n; ++i) faces.push_back({poly[0], poly[i], poly[i + 1]});
  }
  return TriMesh::from_data(std::move(vertices), std::move(faces), origin);
}

}  // namespace detail

inline TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  return format == MeshFormat::Obj ? detail::load_obj(path)
                                   : detail::load_ply_ascii(path);
}

// Format inferred from the extension (.obj / .ply).
inline TriMesh load_mesh(const std::filesystem::path& path) {
  std::string ext = to_lower(path.extension().string());
  if (ext == ".obj") return load_mesh(path, MeshFormat::Obj);
  if (ext == ".ply") return load_mesh(path, MeshFormat::PlyAscii);
  throw ParseError("unknown mesh extension: " + path.string());
}

inline void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& v : mesh.vertices())
    out << "v " << format_g9(v.x()) << ' ' << format_g9(v.y()) << ' '
        << format_g9(v.z()) << '\n';
  for (const auto& f : mesh.faces())
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  atomic_write_file(path, out.str());
}

// Uniform point on a triangle from two unit variates (fold-over mapping).
inline Vec3 sample_triangle_point(const Vec3& a, const Vec3& b, const Vec3& c,
                                  double u, double v) {
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return a + u * (b - a) + v * (c - a);
}

}  // namespace partgrasp
