#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "partgrasp/grasp.hpp"

using namespace partgrasp;

namespace {

RegionPartition labels_partition(const TriMesh& mesh, std::vector<FaceLabel> labels) {
  RegionPartition part;
  part.mesh = &mesh;
  part.face_labels = std::move(labels);
  part.mode = TaskMode::Grasp;
  part.source_box = {0, 0, 1, 1, 1.0, "<test>"};
  return part;
}

GraspCandidate make_candidate(const Vec3& pa, const Vec3& na, const Vec3& pb,
                              const Vec3& nb) {
  GraspCandidate c;
  c.contact_a = {pa, na, 0};
  c.contact_b = {pb, nb, 1};
  c.width = (pb - pa).norm();
  return c;
}

}  // namespace

TEST_CASE("parallel plates yield antipodal grasps at the plate distance") {
  const auto mesh = load_mesh(oracles::fixture("meshes/plates.obj"));
  const Bvh bvh(mesh);
  GripperModel gripper;  // max_opening 0.12
  const auto set = unrestricted_baseline(mesh, bvh, gripper, 20, 7);
  REQUIRE(set.size() == 20);
  for (const auto& g : set.grasps) {
    CHECK_THAT(g.width, Catch::Matchers::WithinAbs(0.06, 1e-6));
    // one contact per plate
    CHECK(std::abs(g.contact_a.point.z()) + std::abs(g.contact_b.point.z()) ==
          Catch::Approx(0.06).margin(1e-9));
    CHECK(g.contact_a.point.z() * g.contact_b.point.z() < 0.0);
    const Vec3 u = g.closing_axis();
    CHECK_THAT(-g.contact_a.normal.dot(u), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(g.contact_b.normal.dot(u), Catch::Matchers::WithinAbs(1.0, 1e-12));
    // perfect cone margin times the width factor 1 - 0.06/0.12
    CHECK_THAT(g.quality, Catch::Matchers::WithinAbs(0.5, 1e-9));
  }
}

TEST_CASE("an obstacle opposing plate starves the sampler") {
  const auto mesh = load_mesh(oracles::fixture("meshes/plates.obj"));
  const Bvh bvh(mesh);
  // plate_a graspable, plate_b obstacle: every opposing contact is rejected
  std::vector<FaceLabel> labels(mesh.face_count(), FaceLabel::Obstacle);
  labels[0] = labels[1] = FaceLabel::Graspable;
  const auto part = labels_partition(mesh, std::move(labels));
  GripperModel gripper;
  CHECK_THROWS_AS(sample_grasps(mesh, bvh, part, gripper, 5, 11), RegionTooSmall);
}

TEST_CASE("oversized objects exhaust the budget") {
  const auto mesh = load_mesh(oracles::fixture("meshes/cube.obj"));
  const Bvh bvh(mesh);
  GripperModel gripper;  // 0.12 m opening vs a 1 m cube
  CHECK_THROWS_AS(unrestricted_baseline(mesh, bvh, gripper, 5, 1), RegionTooSmall);
}

TEST_CASE("score formula matches the worked examples") {
  GripperModel gripper;
  const double alpha = std::atan(gripper.friction_mu);

  SECTION("perfect antipodal limit") {
    auto c = make_candidate({0, 0, 0}, {0, 0, -1}, {0, 0, 1e-9}, {0, 0, 1});
    CHECK_THAT(score_grasp(c, gripper), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(score_grasp(c, gripper),
               Catch::Matchers::WithinAbs(
                   oracles::independent_quality(1.0, 1.0, c.width, gripper.max_opening,
                                                gripper.friction_mu),
                   1e-12));
  }

  SECTION("cone boundary scores zero regardless of the other contact") {
    const Vec3 tilted{0.0, std::sin(alpha), -std::cos(alpha)};
    auto c = make_candidate({0, 0, 0}, tilted, {0, 0, 0.01}, {0, 0, 1});
    CHECK_THAT(score_grasp(c, gripper), Catch::Matchers::WithinAbs(0.0, 1e-9));
  }

  SECTION("half margin at half opening gives 0.25") {
    const double cos_theta = (1.0 + std::cos(alpha)) / 2.0;
    const double theta = std::acos(cos_theta);
    const Vec3 na{0.0, std::sin(theta), -std::cos(theta)};
    const Vec3 nb{0.0, std::sin(theta), std::cos(theta)};
    auto c = make_candidate({0, 0, 0}, na, {0, 0, gripper.max_opening / 2}, nb);
    CHECK_THAT(score_grasp(c, gripper), Catch::Matchers::WithinAbs(0.25, 1e-12));
    CHECK_THAT(score_grasp(c, gripper),
               Catch::Matchers::WithinAbs(
                   oracles::independent_quality(cos_theta, cos_theta, c.width,
                                                gripper.max_opening,
                                                gripper.friction_mu),
                   1e-12));
  }
}

TEST_CASE("top_k truncates under the canonical order") {
  GraspSet set;
  auto push = [&](double q, std::int64_t seed) {
    GraspCandidate c;
    c.quality = q;
    c.seed_id = seed;
    c.width = 0.01;
    c.contact_a.point = Vec3::Zero();
    c.contact_b.point = Vec3{0.01, 0, 0};
    set.grasps.push_back(c);
  };
  push(0.5, 3);
  push(0.9, 7);
  push(0.5, 1);
  push(0.1, 0);
  set.sort_canonical();
  REQUIRE(set.grasps[0].quality == 0.9);
  CHECK(set.grasps[1].seed_id == 1);  // quality tie resolved by seed_id
  CHECK(set.grasps[2].seed_id == 3);
  const auto top2 = top_k(set, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2.grasps[1].seed_id == 1);
  CHECK(top_k(set, 20).size() == 4);
  CHECK_THROWS_AS(top_k(set, 0), ConfigError);
}

TEST_CASE("sampling is deterministic and worker-count independent") {
  const auto mesh = load_mesh(oracles::fixture("meshes/mug.obj"));
  const Bvh bvh(mesh);
  const auto cam = load_camera(oracles::fixture("cameras/mug.json"));
  const auto part = partition_mesh(mesh, cam, {363.4, 196.8, 411.7, 282.6, 0.9, "handle"},
                                   TaskMode::Grasp);
  GripperModel gripper;
  SamplerOptions opts;
  const auto reference = serialize_grasps(
      sample_grasps(mesh, bvh, part, gripper, 20, 42, opts), gripper, "mug");
  for (int workers : {1, 3, 4, 8}) {
    opts.workers = workers;
    const auto again = serialize_grasps(
        sample_grasps(mesh, bvh, part, gripper, 20, 42, opts), gripper, "mug");
    CHECK(again == reference);
  }
}

TEST_CASE("handle-confined sampling touches only graspable faces") {
  const auto mesh = load_mesh(oracles::fixture("meshes/mug.obj"));
  const Bvh bvh(mesh);
  const auto cam = load_camera(oracles::fixture("cameras/mug.json"));
  const auto part = partition_mesh(mesh, cam, {363.4, 196.8, 411.7, 282.6, 0.9, "handle"},
                                   TaskMode::Grasp);
  GripperModel gripper;
  const auto set = sample_grasps(mesh, bvh, part, gripper, 100, 42);
  REQUIRE(set.size() == 100);
  const double cone_limit = std::atan(gripper.friction_mu) + 1e-6;
  for (const auto& g : set.grasps) {
    CHECK(part.graspable(g.contact_a.face));
    CHECK(part.graspable(g.contact_b.face));
    CHECK(g.width <= gripper.max_opening + 1e-12);
    CHECK(g.quality >= 0.0);
    CHECK(g.quality <= 1.0);
    const Vec3 u = g.closing_axis();
    CHECK(std::acos(std::clamp(-g.contact_a.normal.dot(u), -1.0, 1.0)) <= cone_limit);
    CHECK(std::acos(std::clamp(g.contact_b.normal.dot(u), -1.0, 1.0)) <= cone_limit);
  }
}

TEST_CASE("obstacle walls prune approach rolls") {
  // two graspable plates plus an obstacle wall on the +y side
  std::vector<Vec3> verts = {
      {-0.04, -0.04, -0.03}, {0.04, -0.04, -0.03}, {0.04, 0.04, -0.03}, {-0.04, 0.04, -0.03},
      {-0.04, -0.04, 0.03},  {0.04, -0.04, 0.03},  {0.04, 0.04, 0.03},  {-0.04, 0.04, 0.03},
      {-0.06, 0.05, -0.08},  {0.06, 0.05, -0.08},  {0.06, 0.05, 0.08},  {-0.06, 0.05, 0.08}};
  // lower plate wound for an outward -z normal, upper for +z
  std::vector<std::array<int, 3>> faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                                           {8, 9, 10}, {8, 10, 11}};
  const auto mesh = TriMesh::from_data(verts, faces);
  const Bvh bvh(mesh);
  std::vector<FaceLabel> labels(6, FaceLabel::Graspable);
  labels[4] = labels[5] = FaceLabel::Obstacle;
  const auto part = labels_partition(mesh, std::move(labels));
  GripperModel gripper;
  const auto set = sample_grasps(mesh, bvh, part, gripper, 40, 5);
  REQUIRE(set.size() > 0);
  for (const auto& g : set.grasps) {
    const auto boxes = detail::gripper_boxes(
        g.contact_a.point, g.contact_b.point, g.pose.block<3, 1>(0, 2), gripper);
    for (const auto* box : {&boxes.finger_a, &boxes.finger_b, &boxes.palm}) {
      for (int f = 4; f < 6; ++f) {
        auto v = mesh.face_vertices(f);
        CHECK(oracles::sampling_overlap_verdict(*box, v[0], v[1], v[2]) !=
              oracles::OverlapVerdict::Intersect);
      }
    }
  }
  // the same scene without the wall admits more rolls per contact pair
  std::vector<Vec3> free_verts(verts.begin(), verts.begin() + 8);
  std::vector<std::array<int, 3>> free_faces(faces.begin(), faces.begin() + 4);
  const auto free_mesh = TriMesh::from_data(free_verts, free_faces);
  const Bvh free_bvh(free_mesh);
  const auto free_set = unrestricted_baseline(free_mesh, free_bvh, gripper, 40, 5);
  CHECK(free_set.size() == 40);
}

TEST_CASE("uniform scaling scales contacts and keeps quality") {
  const auto mesh = load_mesh(oracles::fixture("meshes/plates.obj"));
  std::vector<Vec3> scaled_verts = mesh.vertices();
  for (auto& v : scaled_verts) v *= 2.0;  // power of two: exact in floating point
  const auto scaled_mesh = TriMesh::from_data(scaled_verts, mesh.faces());
  const Bvh bvh(mesh), scaled_bvh(scaled_mesh);
  GripperModel gripper;
  const auto base = unrestricted_baseline(mesh, bvh, gripper, 30, 99);
  const auto scaled = unrestricted_baseline(scaled_mesh, scaled_bvh, gripper.scaled(2.0),
                                            30, 99);
  REQUIRE(base.size() == scaled.size());
  for (size_t i = 0; i < base.size(); ++i) {
    const auto& g0 = base.grasps[i];
    const auto& g1 = scaled.grasps[i];
    CHECK(g0.seed_id == g1.seed_id);
    CHECK_THAT(g1.width, Catch::Matchers::WithinAbs(2.0 * g0.width, 1e-9));
    CHECK((g1.contact_a.point - 2.0 * g0.contact_a.point).norm() < 1e-9);
    CHECK((g1.contact_b.point - 2.0 * g0.contact_b.point).norm() < 1e-9);
    CHECK_THAT(g1.quality, Catch::Matchers::WithinAbs(g0.quality, 1e-9));
  }
}

TEST_CASE("unrestricted baseline spreads contacts over the cube") {
  const auto mesh = load_mesh(oracles::fixture("meshes/cube.obj"));
  const Bvh bvh(mesh);
  const GripperModel gripper = GripperModel{}.scaled(10.0);  // 1.2 m opening
  std::set<int> faces_touched;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto set = unrestricted_baseline(mesh, bvh, gripper, 20, seed);
    REQUIRE(set.size() == 20);
    for (const auto& g : set.grasps) {
      faces_touched.insert(g.contact_a.face);
      faces_touched.insert(g.contact_b.face);
    }
    const auto repeat = unrestricted_baseline(mesh, bvh, gripper, 20, seed);
    CHECK(serialize_grasps(repeat, gripper, "cube") ==
          serialize_grasps(set, gripper, "cube"));
  }
  CHECK(faces_touched.size() >= 3);
}

TEST_CASE("grasp sets survive the json round trip") {
  const auto mesh = load_mesh(oracles::fixture("meshes/plates.obj"));
  const Bvh bvh(mesh);
  GripperModel gripper;
  const auto set = unrestricted_baseline(mesh, bvh, gripper, 10, 3);
  const std::string text = serialize_grasps(set, gripper, "plates");
  const auto doc = parse_grasps(text);
  REQUIRE(doc.set.size() == set.size());
  CHECK(doc.fixture_id == "plates");
  CHECK(doc.gripper.max_opening == gripper.max_opening);
  for (size_t i = 0; i < set.size(); ++i) {
    CHECK(doc.set.grasps[i].seed_id == set.grasps[i].seed_id);
    CHECK(doc.set.grasps[i].contact_a.face == set.grasps[i].contact_a.face);
    CHECK_THAT(doc.set.grasps[i].quality,
               Catch::Matchers::WithinAbs(set.grasps[i].quality, 1e-9));
  }
  // serializing the parsed set reproduces the bytes (stable formatting)
  CHECK(serialize_grasps(doc.set, doc.gripper, doc.fixture_id) == text);

  auto tampered = nlohmann::json::parse(text);
  tampered["grasps"][0]["width"] = 0.5;
  CHECK_THROWS_AS(parse_grasps(tampered.dump()), ParseError);
}

TEST_CASE("invalid sampler inputs are rejected") {
  const auto mesh = load_mesh(oracles::fixture("meshes/plates.obj"));
  const Bvh bvh(mesh);
  GripperModel gripper;
  CHECK_THROWS_AS(unrestricted_baseline(mesh, bvh, gripper, 0, 1), ConfigError);
  GripperModel bad = gripper;
  bad.friction_mu = 0.0;
  CHECK_THROWS_AS(unrestricted_baseline(mesh, bvh, bad, 5, 1), ConfigError);
  std::vector<FaceLabel> labels(mesh.face_count(), FaceLabel::Obstacle);
  auto part = labels_partition(mesh, std::move(labels));
  CHECK_THROWS_AS(sample_grasps(mesh, bvh, part, gripper, 5, 1), RegionTooSmall);
}
