// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Each criterion pins its tolerance in code; runtime budgets are enforced
// where stated.
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "../oracles.hpp"
#include "partgrasp/pipeline.hpp"

using namespace partgrasp;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

struct Scene {
  std::string name;
  std::string part;
  TaskMode mode;
};

const std::vector<Scene> kScenes = {{"mug", "handle", TaskMode::Grasp},
                                    {"teapot", "spout", TaskMode::Avoid},
                                    {"ice_cream", "cone", TaskMode::Grasp},
                                    {"doll", "torso", TaskMode::Grasp},
                                    {"plant", "pot", TaskMode::Grasp}};

BoundingBox2D fixture_box(MockVlm& vlm, const std::string& scene,
                          const std::string& part) {
  ImageRGB dummy = ImageRGB::filled(640, 480, {0, 0, 0});
  return ground_part(vlm, {scene, &dummy}, part);
}

// published Table-style reference: deterministic pipeline column
const std::vector<std::pair<std::string, double>> kPublishedPipeline = {
    {"doll", 0.92},          {"ice cream", 1.00},
    {"candle", 0.93},        {"flowers in the vase", 0.93},
    {"bag", 0.91},           {"plant", 0.94},
    {"hand brush", 0.95},    {"toilet brush", 0.98},
    {"cactus", 0.99},        {"cupcake", 1.00},
    {"cup on a saucer", 0.81}, {"plate of cake", 0.99},
    {"mug", 0.77},           {"saucepan", 0.94},
    {"broom", 0.98}};

CriterionResult criterion_1_pipeline_column() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto survey = ingest_survey(oracles::fixture("survey/preferences.csv"));
  const auto freqs = deterministic_llm_frequencies(
      survey, oracles::fixture("mock/llm_parts.csv"), "pipeline");
  const auto report = build_report(survey, freqs);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream detail;
  bool pass = report.rows.size() == 15;
  for (size_t i = 0; i < report.rows.size() && pass; ++i) {
    const double sim = report.rows[i].sims.at("pipeline");
    if (std::abs(sim - kPublishedPipeline[i].second) > 0.005) {
      pass = false;
      detail << report.rows[i].object_label << " sim " << sim << " vs published "
             << kPublishedPipeline[i].second << "; ";
    }
  }
  const double avg = report.averages.at("pipeline");
  if (std::abs(avg - 0.94) > 0.005) {
    pass = false;
    detail << "average " << avg << " vs 0.94; ";
  }
  if (elapsed >= 1.0) {
    pass = false;
    detail << "runtime " << elapsed << "s >= 1s; ";
  }
  if (pass) {
    detail << "15/15 sims within 0.005, average " << format_g9(avg) << " ("
           << format_g9(elapsed) << "s)";
  }
  return {pass, detail.str()};
}

CriterionResult criterion_2_backsolve() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto survey = ingest_survey(oracles::fixture("survey/preferences.csv"));
  std::map<std::string, double> p_h;
  for (const auto& rec : survey) p_h[rec.object_label] = rec.p_a_human;
  const auto refs =
      load_reference_scores(oracles::fixture("reference/baseline_scores.csv"));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int resolved = 0;
  std::ostringstream failures;
  for (const auto& ref : refs) {
    if (backsolve_count(p_h.at(ref.object_label), ref.sim)) {
      ++resolved;
    } else {
      double best_err = 1e9, best_sim = 0;
      for (int k = 0; k <= 20; ++k) {
        const double sim = 1.0 - std::abs(p_h.at(ref.object_label) - k / 20.0);
        if (std::abs(sim - ref.sim) < best_err) {
          best_err = std::abs(sim - ref.sim);
          best_sim = sim;
        }
      }
      failures << ref.object_label << "/" << ref.method << " published "
               << format_g9(ref.sim) << " nearest k/20 value " << format_g9(best_sim)
               << " (off by " << format_g9(best_err) << "); ";
    }
  }
  const bool pass = resolved == static_cast<int>(refs.size()) && elapsed < 1.0;
  std::ostringstream detail;
  detail << resolved << "/" << refs.size() << " cells back-solve (" << format_g9(elapsed)
         << "s)";
  if (!failures.str().empty()) detail << "; irreproducible: " << failures.str();
  return {pass, detail.str()};
}

CriterionResult criterion_3_confinement() {
  const auto t0 = std::chrono::steady_clock::now();
  MockVlm vlm(oracles::fixture("mock/vlm_boxes.csv"));
  GripperModel gripper;
  int total = 0, label_violations = 0, collision_violations = 0;
  for (const auto& scene : kScenes) {
    const auto mesh = load_mesh(oracles::fixture("meshes/" + scene.name + ".obj"));
    const auto cam = load_camera(oracles::fixture("cameras/" + scene.name + ".json"));
    const Bvh bvh(mesh);
    const auto box = fixture_box(vlm, scene.name, scene.part);
    const auto part = partition_mesh(mesh, cam, box, scene.mode);
    SamplerOptions opts;
    opts.workers = 4;
    const auto set = sample_grasps(mesh, bvh, part, gripper, 220, 17, opts);
    total += static_cast<int>(set.size());
    std::vector<int> near;
    for (const auto& g : set.grasps) {
      if (!part.graspable(g.contact_a.face) || !part.graspable(g.contact_b.face))
        ++label_violations;
      const auto boxes = detail::gripper_boxes(g.contact_a.point, g.contact_b.point,
                                               g.pose.block<3, 1>(0, 2), gripper);
      for (const auto* obox : {&boxes.finger_a, &boxes.finger_b, &boxes.palm}) {
        near.clear();
        bvh.collect_overlapping(obox->bounding_aabb(), near);
        for (int f : near) {
          if (part.graspable(f)) continue;
          const auto v = mesh.face_vertices(f);
          if (oracles::sampling_overlap_verdict(*obox, v[0], v[1], v[2]) ==
              oracles::OverlapVerdict::Intersect)
            ++collision_violations;
        }
      }
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = total >= 1000 && label_violations == 0 &&
                    collision_violations == 0 && elapsed < 60.0;
  std::ostringstream detail;
  detail << total << " grasps over " << kScenes.size() << " fixtures, "
         << label_violations << " label violations, " << collision_violations
         << " oracle collisions (" << format_g9(elapsed) << "s)";
  return {pass, detail.str()};
}

CriterionResult criterion_4_raycast_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  oracles::TestRng rng(2024);
  long mismatches = 0, rays_total = 0;
  for (const char* name : {"cube", "plates", "mug", "teapot", "ice_cream", "doll",
                           "plant"}) {
    const auto mesh = load_mesh(oracles::fixture(std::string("meshes/") + name + ".obj"));
    const Bvh bvh(mesh);
    const Vec3 center = mesh.bounds().center();
    const double radius = mesh.bounds().diagonal();
    for (int i = 0; i < 10000; ++i) {
      const Vec3 origin = center + radius * rng.unit_vector();
      Vec3 target;
      for (int k = 0; k < 3; ++k)
        target[k] = rng.uniform(mesh.bounds().lo[k], mesh.bounds().hi[k]);
      const Ray ray = Ray::through(origin, target);
      ++rays_total;
      const auto fast = ray_cast(mesh, bvh, ray);
      const auto slow = oracles::brute_force_raycast(mesh, ray);
      if (fast.has_value() != slow.has_value()) {
        ++mismatches;
        continue;
      }
      if (!fast) continue;
      const bool distance_ok = std::abs(fast->distance - slow->distance) <= 1e-9;
      const bool face_ok = fast->face == slow->face || distance_ok;
      if (!distance_ok || !face_ok) ++mismatches;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = mismatches == 0 && elapsed < 30.0;
  std::ostringstream detail;
  detail << rays_total << " rays across 7 fixtures, " << mismatches << " mismatches ("
         << format_g9(elapsed) << "s)";
  return {pass, detail.str()};
}

CriterionResult criterion_5_friction_cone() {
  GripperModel gripper;
  const double cone_limit = std::atan(gripper.friction_mu) + 1e-6;
  int checked = 0, violations = 0;

  MockVlm vlm(oracles::fixture("mock/vlm_boxes.csv"));
  const auto mesh = load_mesh(oracles::fixture("meshes/mug.obj"));
  const auto cam = load_camera(oracles::fixture("cameras/mug.json"));
  const Bvh bvh(mesh);
  const auto part =
      partition_mesh(mesh, cam, fixture_box(vlm, "mug", "handle"), TaskMode::Grasp);
  const auto set = sample_grasps(mesh, bvh, part, gripper, 200, 5);
  for (const auto& g : set.grasps) {
    const Vec3 u = g.closing_axis();
    const double ang_a = std::acos(std::clamp(-g.contact_a.normal.dot(u), -1.0, 1.0));
    const double ang_b = std::acos(std::clamp(g.contact_b.normal.dot(u), -1.0, 1.0));
    checked += 2;
    if (ang_a > cone_limit) ++violations;
    if (ang_b > cone_limit) ++violations;
  }

  // quality formula spot checks against an independent transcription
  const double alpha = std::atan(gripper.friction_mu);
  bool formula_ok = true;
  {
    GraspCandidate c;
    c.contact_a = {{0, 0, 0}, {0, 0, -1}, 0};
    c.contact_b = {{0, 0, 1e-9}, {0, 0, 1}, 1};
    c.width = 1e-9;
    formula_ok = formula_ok && std::abs(score_grasp(c, gripper) - 1.0) < 1e-6;
  }
  {
    GraspCandidate c;
    c.contact_a = {{0, 0, 0}, {0.0, std::sin(alpha), -std::cos(alpha)}, 0};
    c.contact_b = {{0, 0, 0.01}, {0, 0, 1}, 1};
    c.width = 0.01;
    formula_ok = formula_ok && std::abs(score_grasp(c, gripper)) < 1e-9;
  }
  {
    const double ct = (1.0 + std::cos(alpha)) / 2.0;
    const double theta = std::acos(ct);
    GraspCandidate c;
    c.contact_a = {{0, 0, 0}, {0.0, std::sin(theta), -std::cos(theta)}, 0};
    c.contact_b = {{0, 0, gripper.max_opening / 2},
                   {0.0, std::sin(theta), std::cos(theta)}, 1};
    c.width = gripper.max_opening / 2;
    const double expect = oracles::independent_quality(ct, ct, c.width,
                                                       gripper.max_opening,
                                                       gripper.friction_mu);
    formula_ok = formula_ok && std::abs(score_grasp(c, gripper) - 0.25) < 1e-12 &&
                 std::abs(expect - 0.25) < 1e-12;
  }

  const bool pass = violations == 0 && formula_ok && checked >= 400;
  std::ostringstream detail;
  detail << checked << " contacts within atan(mu)+1e-6, " << violations
         << " violations; formula spot checks "
         << (formula_ok ? "match" : "DIVERGE");
  return {pass, detail.str()};
}

CriterionResult criterion_6_avoid_complement() {
  MockVlm vlm(oracles::fixture("mock/vlm_boxes.csv"));
  bool complement_ok = true;
  for (const auto& scene : kScenes) {
    const auto mesh = load_mesh(oracles::fixture("meshes/" + scene.name + ".obj"));
    const auto cam = load_camera(oracles::fixture("cameras/" + scene.name + ".json"));
    const auto box = fixture_box(vlm, scene.name, scene.part);
    const auto grasp_part = partition_mesh(mesh, cam, box, TaskMode::Grasp);
    const auto avoid_part = partition_mesh(mesh, cam, box, TaskMode::Avoid);
    for (int f = 0; f < mesh.face_count(); ++f) {
      if (grasp_part.graspable(f) == avoid_part.graspable(f)) complement_ok = false;
      if (grasp_part.in_region_a(f) != avoid_part.in_region_a(f)) complement_ok = false;
    }
  }

  // teapot avoid mode: sampled grasps never touch the spout box region
  const auto mesh = load_mesh(oracles::fixture("meshes/teapot.obj"));
  const auto cam = load_camera(oracles::fixture("cameras/teapot.json"));
  const Bvh bvh(mesh);
  const auto box = fixture_box(vlm, "teapot", "spout");
  const auto part = partition_mesh(mesh, cam, box, TaskMode::Avoid);
  GripperModel gripper;
  const auto set = sample_grasps(mesh, bvh, part, gripper, 150, 23);
  int spout_contacts = 0;
  for (const auto& g : set.grasps) {
    if (part.in_region_a(g.contact_a.face)) ++spout_contacts;
    if (part.in_region_a(g.contact_b.face)) ++spout_contacts;
  }
  const bool pass = complement_ok && spout_contacts == 0 && set.size() > 0;
  std::ostringstream detail;
  detail << "complement exact on " << kScenes.size() << " fixtures; " << set.size()
         << " avoid-mode grasps, " << spout_contacts << " contacts in the avoided box";
  return {pass, detail.str()};
}

CriterionResult criterion_7_plan_determinism() {
  namespace fs = std::filesystem;
  const fs::path out_a = fs::temp_directory_path() / "pg_accept_a";
  const fs::path out_b = fs::temp_directory_path() / "pg_accept_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  const std::string config = oracles::fixture("configs/mug_plan.json");
  std::ostringstream detail;
  for (const auto& out : {out_a, out_b}) {
    const std::string cmd = std::string(PARTGRASP_CLI_PATH) + " plan --config " +
                            config + " --out-dir " + out.string() +
                            " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      detail << "plan exited with " << rc;
      return {false, detail.str()};
    }
  }
  const std::string a = read_text_file(out_a / "grasps.json");
  const std::string b = read_text_file(out_b / "grasps.json");
  const bool pass = !a.empty() && a == b;
  detail << "two plan runs, grasps.json " << a.size() << " bytes, "
         << (pass ? "byte-identical" : "DIFFER");
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  return {pass, detail.str()};
}

CriterionResult criterion_8_prompt_goldens() {
  const auto grasp = build_grasp_prompt({"ice cream", TaskMode::Grasp});
  const auto avoid = build_avoid_prompt({"teapot", TaskMode::Avoid});
  const bool grasp_ok =
      grasp.system() == "You are an intelligent robotic arm." &&
      grasp.user() ==
          "If you want to pick up an ice cream, which part makes the most sense to "
          "grasp? Name one part.";
  const bool avoid_ok =
      avoid.user() ==
      "Consider you are an intelligent robotic arm. If you want to pick up a teapot, "
      "which part you should avoid touching? Answer in one word.";
  const auto literal = build_grasp_prompt({"mug", TaskMode::Grasp}, true);
  const bool literal_ok =
      literal.user().rfind("If you want to pick up an mug,", 0) == 0;
  const bool pass = grasp_ok && avoid_ok && literal_ok;
  std::ostringstream detail;
  detail << "grasp " << (grasp_ok ? "exact" : "DIFF") << ", avoid "
         << (avoid_ok ? "exact" : "DIFF") << ", literal-template "
         << (literal_ok ? "exact" : "DIFF");
  return {pass, detail.str()};
}

CriterionResult criterion_9_declared_scope() {
  // live GPT-4/OWL-ViT, robot executions, the human survey, and the exact
  // GraspIt! 0.31 average are declared out of desk-scale reach; the testable
  // remainder is the baseline-diversity property on the cube fixture.
  const auto mesh = load_mesh(oracles::fixture("meshes/cube.obj"));
  const Bvh bvh(mesh);
  const GripperModel gripper = GripperModel{}.scaled(10.0);
  std::set<int> faces;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto set = unrestricted_baseline(mesh, bvh, gripper, 20, seed);
    for (const auto& g : set.grasps) {
      faces.insert(g.contact_a.face);
      faces.insert(g.contact_b.face);
    }
  }
  const bool pass = faces.size() >= 3;
  std::ostringstream detail;
  detail << "declared: live backends/robot/survey/GraspIt! covered by mocks + "
            "back-solve; cube baseline touches "
         << faces.size() << " distinct faces across 3 seeds";
  return {pass, detail.str()};
}

}  // namespace

int main() {
  using Criterion = std::pair<const char*, std::function<CriterionResult()>>;
  const std::vector<Criterion> criteria = {
      {"1 pipeline similarity column", criterion_1_pipeline_column},
      {"2 metric back-solve consistency", criterion_2_backsolve},
      {"3 region confinement", criterion_3_confinement},
      {"4 ray-cast oracle equivalence", criterion_4_raycast_oracle},
      {"5 friction-cone and quality invariants", criterion_5_friction_cone},
      {"6 avoid-mode complement", criterion_6_avoid_complement},
      {"7 plan determinism", criterion_7_plan_determinism},
      {"8 prompt golden tests", criterion_8_prompt_goldens},
      {"9 declared out-of-reach scope", criterion_9_declared_scope},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    CriterionResult result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (!result.pass) ++failures;
    std::cout << "criterion " << name << ": " << (result.pass ? "PASS" : "FAIL")
              << " - " << result.detail << "\n";
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size()
            << " criteria pass\n";
  return failures == 0 ? 0 : 1;
}
