#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "partgrasp/pipeline.hpp"

using namespace partgrasp;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

PipelineConfig mug_config(const std::filesystem::path& out_dir) {
  auto cfg = load_pipeline_config(oracles::fixture("configs/mug_plan.json"));
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("config files load with paths resolved against the config directory") {
  const auto cfg = load_pipeline_config(oracles::fixture("configs/mug_plan.json"));
  CHECK(std::filesystem::exists(cfg.mesh_path));
  CHECK(std::filesystem::exists(cfg.image_path));
  CHECK(std::filesystem::exists(cfg.camera_path));
  CHECK(cfg.object_label == "mug");
  CHECK(cfg.n_grasps == 20);
  CHECK(cfg.rng_seed == 42);
  CHECK(cfg.backends.llm.kind == "mock");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("missing input files fail validation with the config exit code") {
  auto cfg = load_pipeline_config(oracles::fixture("configs/mug_plan.json"));
  cfg.mesh_path = "/nonexistent/mesh.obj";
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("distinct failure modes map to distinct exit codes") {
  CHECK(InvalidLabel("x").exit_code() == 3);
  CHECK(NoDetection("x").exit_code() == 4);
  CHECK(EmptyRegion("x").exit_code() == 5);
  CHECK(RegionTooSmall("x").exit_code() == 6);
  CHECK(BackendUnavailable("x").exit_code() == 7);
  CHECK(MalformedResponse("x").exit_code() == 8);
  std::set<int> codes = {InvalidLabel("x").exit_code(), NoDetection("x").exit_code(),
                         EmptyRegion("x").exit_code(), RegionTooSmall("x").exit_code(),
                         BackendUnavailable("x").exit_code(),
                         MalformedResponse("x").exit_code(),
                         ConfigError("x").exit_code()};
  CHECK(codes.size() == 7);
}

TEST_CASE("mug pipeline selects the handle and confines grasps to it") {
  TempDir out("pg_mug_out");
  const auto result = run_pipeline(mug_config(out.path));
  CHECK(result.part.part_label == "handle");
  CHECK(result.grasps.size() == 20);
  for (const auto& g : result.grasps.grasps) {
    CHECK(result.partition.graspable(g.contact_a.face));
    CHECK(result.partition.graspable(g.contact_b.face));
  }
  // counts verified against an independent projection of the fixture: the
  // handle torus is finely tessellated, so it dominates the face count
  CHECK(result.partition.graspable_count() == 247);
  CHECK(result.partition.obstacle_count() == 77);
  CHECK(std::filesystem::exists(result.grasps_path));
  CHECK(std::filesystem::exists(result.overlay_path));
  CHECK(std::filesystem::exists(result.partition_path));
  CHECK(result.timings.size() >= 6);
  for (const auto& t : result.timings) CHECK(t.ms >= 0.0);

  // the partition dump has one label per face
  const auto labels = labels_from_text(read_text_file(result.partition_path));
  CHECK(static_cast<int>(labels.size()) ==
        result.partition.graspable_count() + result.partition.obstacle_count());

  // overlay is a valid PNG with the box drawn in green
  const auto png = read_text_file(result.overlay_path);
  CHECK(png.rfind("\x89PNG", 0) == 0);
}

TEST_CASE("pipeline runs are byte-identical with mock backends") {
  TempDir out_a("pg_det_a"), out_b("pg_det_b");
  run_pipeline(mug_config(out_a.path));
  run_pipeline(mug_config(out_b.path));
  CHECK(read_text_file(out_a.path / "grasps.json") ==
        read_text_file(out_b.path / "grasps.json"));
  CHECK(read_text_file(out_a.path / "partition.txt") ==
        read_text_file(out_b.path / "partition.txt"));
  CHECK(read_text_file(out_a.path / "overlay.png") ==
        read_text_file(out_b.path / "overlay.png"));
}

TEST_CASE("ice cream pipeline grasps the cone region") {
  TempDir out("pg_cone_out");
  auto cfg = load_pipeline_config(oracles::fixture("configs/ice_cream_plan.json"));
  cfg.out_dir = out.path;
  const auto result = run_pipeline(cfg);
  CHECK(result.part.part_label == "cone");
  CHECK(result.grasps.size() == 20);
  for (const auto& g : result.grasps.grasps) {
    CHECK(result.partition.graspable(g.contact_a.face));
    CHECK(result.partition.graspable(g.contact_b.face));
  }
}

TEST_CASE("teapot avoid mode keeps every contact off the spout region") {
  TempDir out("pg_teapot_out");
  auto cfg = load_pipeline_config(oracles::fixture("configs/teapot_avoid.json"));
  cfg.out_dir = out.path;
  const auto result = run_pipeline(cfg);
  CHECK(result.part.part_label == "spout");
  CHECK(result.partition.mode == TaskMode::Avoid);
  REQUIRE(result.grasps.size() > 0);
  for (const auto& g : result.grasps.grasps) {
    // region a is the avoided part: no contact may fall inside it
    CHECK_FALSE(result.partition.in_region_a(g.contact_a.face));
    CHECK_FALSE(result.partition.in_region_a(g.contact_b.face));
  }
}

TEST_CASE("unknown objects propagate MalformedResponse out of the pipeline") {
  TempDir out("pg_unknown_out");
  auto cfg = mug_config(out.path);
  cfg.object_label = "submarine";
  CHECK_THROWS_AS(run_pipeline(cfg), MalformedResponse);
  // no partial outputs
  CHECK_FALSE(std::filesystem::exists(out.path / "grasps.json"));
  CHECK_FALSE(std::filesystem::exists(out.path / "overlay.png"));
}

TEST_CASE("overlay renders the box and skips unprojectable contacts") {
  const auto cam = load_camera(oracles::fixture("cameras/cube.json"));
  ImageRGB image = ImageRGB::filled(640, 480, {0, 0, 0});
  const BoundingBox2D box{10, 10, 630, 470, 1.0, "all"};

  SECTION("box only") {
    const auto out = render_overlay(image, box, cam, GraspSet{});
    CHECK(out.get(320, 10).g > 150);   // top edge
    CHECK(out.get(10, 240).g > 150);   // left edge
    CHECK(out.get(320, 240).g == 0);   // interior untouched
  }

  SECTION("contact markers land on the projected pixels") {
    GraspSet set;
    GraspCandidate g;
    g.contact_a = {{0, 0, 0}, {0, 0, 1}, 0};      // projects to (320, 240)
    g.contact_b = {{0.1, 0, 0}, {0, 0, 1}, 1};    // 320 + 500*0.1/2.5 = (340, 240)
    g.width = 0.1;
    set.grasps.push_back(g);
    const auto out = render_overlay(image, box, cam, set);
    const auto at_a = out.get(320, 240);
    CHECK(static_cast<int>(at_a.b) > 150);  // first contact marker
    const auto at_b = out.get(340, 240);
    CHECK(static_cast<int>(at_b.r) > 150);  // second contact marker
  }

  SECTION("contacts behind the camera are skipped without crashing") {
    GraspSet set;
    GraspCandidate g;
    g.contact_a = {{0, 0, 10}, {0, 0, 1}, 0};  // behind the camera at z=2.5
    g.contact_b = {{0, 0, 0}, {0, 0, 1}, 1};
    g.width = 10.0;
    set.grasps.push_back(g);
    CHECK_NOTHROW(render_overlay(image, box, cam, set));
  }
}

TEST_CASE("eval harness writes the report pair") {
  TempDir out("pg_eval_out");
  std::vector<EvalSource> sources = {
      {EvalSource::Kind::DeterministicLlm, "pipeline",
       oracles::fixture("mock/llm_parts.csv")},
      {EvalSource::Kind::ReferenceCsv, "", oracles::fixture("reference/baseline_scores.csv")}};
  const auto result = run_eval(oracles::fixture("survey/preferences.csv"), sources, out.path);
  CHECK(std::filesystem::exists(result.text_path));
  CHECK(std::filesystem::exists(result.json_path));
  CHECK(result.report.rows.size() == 15);
  CHECK(std::abs(result.report.averages.at("pipeline") - 0.94) <= 0.005);
  CHECK_THROWS_AS(run_eval(oracles::fixture("survey/preferences.csv"), {}, out.path),
                  MissingSurveyRow);
}

TEST_CASE("image dimension mismatches are rejected") {
  TempDir out("pg_dim_out");
  auto cfg = mug_config(out.path);
  const auto small = ImageRGB::filled(320, 240, {1, 2, 3});
  const auto img_path = out.path / "small.ppm";
  save_ppm(small, img_path);
  cfg.image_path = img_path;
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
}
