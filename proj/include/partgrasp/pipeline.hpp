// End-to-end orchestration: object label -> prompt -> part -> box ->
// partition -> grasp sampling -> ranked output, plus the evaluation harness
// that reproduces the preference-similarity report.
#pragma once

#include <chrono>

#include "partgrasp/evaluation.hpp"
#include "partgrasp/http_backends.hpp"
#include "partgrasp/image.hpp"

namespace partgrasp {

struct PipelineConfig {
  std::filesystem::path mesh_path;
  std::filesystem::path image_path;
  std::filesystem::path camera_path;
  std::string object_label;
  TaskMode mode = TaskMode::Grasp;
  Visibility visibility;
  GripperModel gripper;
  int n_grasps = 20;
  std::uint64_t rng_seed = 0;
  BackendConfig backends;
  std::filesystem::path out_dir = "out";
  bool literal_template = false;
  double vlm_threshold = 0.1;
  int workers = 1;

  void validate() const {
    namespace fs = std::filesystem;
    for (const auto& [name, path] : {std::pair{"mesh", mesh_path},
                                     {"image", image_path},
                                     {"camera", camera_path}}) {
      if (path.empty()) throw ConfigError(std::string(name) + " path not set");
      if (!fs::exists(path))
        throw ConfigError(std::string(name) + " file missing: " + path.string());
    }
    if (trim(object_label).empty()) throw ConfigError("object_label not set");
    if (n_grasps < 1) throw ConfigError("n_grasps must be >= 1");
    gripper.validate();
    backends.validate();
  }
};

inline PipelineConfig load_pipeline_config(const std::filesystem::path& config_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(config_path));
  } catch (const std::exception& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
  const auto base = config_path.has_parent_path()
                        ? config_path.parent_path()
                        : std::filesystem::path(".");
  auto resolve = [&](const std::string& key) -> std::filesystem::path {
    std::filesystem::path p = doc.value(key, std::string());
    if (!p.empty() && p.is_relative()) p = base / p;
    return p;
  };
  PipelineConfig cfg;
  cfg.mesh_path = resolve("mesh");
  cfg.image_path = resolve("image");
  cfg.camera_path = resolve("camera");
  cfg.object_label = doc.value("object_label", "");
  if (doc.contains("mode")) cfg.mode = task_mode_from_string(doc.at("mode").get<std::string>());
  if (doc.contains("visibility")) {
    const std::string v = doc.at("visibility").get<std::string>();
    if (v == "silhouette")
      cfg.visibility = Visibility::silhouette();
    else if (v == "depth-band" || v == "depth_band")
      cfg.visibility = Visibility::depth_band_rule(doc.value("depth_band_m", 0.02));
    else
      throw ConfigError("unknown visibility rule: " + v);
  }
  if (doc.contains("gripper")) {
    const auto& g = doc.at("gripper");
    cfg.gripper.max_opening = g.value("max_opening", cfg.gripper.max_opening);
    cfg.gripper.finger_length = g.value("finger_length", cfg.gripper.finger_length);
    if (g.contains("finger_box"))
      for (int i = 0; i < 3; ++i) cfg.gripper.finger_box[i] = g.at("finger_box").at(i).get<double>();
    cfg.gripper.palm_clearance = g.value("palm_clearance", cfg.gripper.palm_clearance);
    cfg.gripper.friction_mu = g.value("friction_mu", cfg.gripper.friction_mu);
  }
  cfg.n_grasps = doc.value("n_grasps", 20);
  cfg.rng_seed = doc.value("rng_seed", 0ULL);
  if (doc.contains("backends")) cfg.backends = backend_config_from_json(doc.at("backends"), base);
  cfg.out_dir = doc.value("out_dir", std::string("out"));
  cfg.literal_template = doc.value("literal_template", false);
  cfg.vlm_threshold = doc.value("vlm_threshold", 0.1);
  cfg.workers = doc.value("workers", 1);
  return cfg;
}

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  PartAnswer part;
  BoundingBox2D box;
  RegionPartition partition;
  GraspSet grasps;
  std::vector<StageTiming> timings;
  std::filesystem::path grasps_path;
  std::filesystem::path overlay_path;
  std::filesystem::path partition_path;
};

// Green box plus projected contact markers labeled with their rank; contacts
// that project behind the camera or outside the frame are skipped with a
// warning.
inline ImageRGB render_overlay(const ImageRGB& image, const BoundingBox2D& box,
                               const CameraModel& camera, const GraspSet& grasps) {
  ImageRGB out = image;
  draw_rect(out, box.x_min, box.y_min, box.x_max, box.y_max, kGreen, 2);
  for (size_t i = 0; i < grasps.grasps.size(); ++i) {
    const auto& g = grasps.grasps[i];
    const int rank = static_cast<int>(i) + 1;
    bool labeled = false;
    for (const Contact* contact : {&g.contact_a, &g.contact_b}) {
      const auto px = project_point(camera, contact->point);
      if (!px || px->x() < 0 || px->x() >= out.width || px->y() < 0 ||
          px->y() >= out.height) {
        std::cerr << "[overlay] grasp " << rank
                  << ": contact outside the frame, marker skipped\n";
        continue;
      }
      draw_disc(out, px->x(), px->y(), 3, contact == &g.contact_a ? kBlue : kRed);
      if (!labeled) {
        draw_number(out, static_cast<int>(px->x()) + 5, static_cast<int>(px->y()) - 5,
                    rank, kWhite);
        labeled = true;
      }
    }
  }
  return out;
}

inline PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  using clock = std::chrono::steady_clock;
  PipelineResult result;
  auto timed = [&result](const std::string& stage, auto&& fn) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    result.timings.push_back(
        {stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
  };

  TriMesh mesh;
  CameraModel camera;
  ImageRGB image;
  timed("load", [&] {
    mesh = load_mesh(config.mesh_path);
    camera = load_camera(config.camera_path);
    image = load_ppm(config.image_path);
    if (image.width != camera.width || image.height != camera.height)
      throw ConfigError("image dimensions do not match the camera model");
  });

  ChatPrompt prompt;
  timed("prompt", [&] {
    prompt = build_prompt({config.object_label, config.mode}, config.literal_template);
  });

  auto llm = make_llm_client(config.backends);
  timed("llm", [&] { result.part = query_part(*llm, prompt); });

  auto vlm = make_vlm_client(config.backends);
  timed("vlm", [&] {
    const VlmImage handle{config.image_path.stem().string(), &image};
    result.box = ground_part(*vlm, handle, result.part.part_label, config.vlm_threshold);
  });

  timed("partition", [&] {
    result.partition =
        partition_mesh(mesh, camera, result.box, config.mode, config.visibility);
  });

  Bvh bvh(mesh);
  timed("sample", [&] {
    SamplerOptions options;
    options.workers = config.workers;
    GraspSet sampled = sample_grasps(mesh, bvh, result.partition, config.gripper,
                                     config.n_grasps, config.rng_seed, options);
    result.grasps = top_k(sampled, config.n_grasps);
  });

  timed("outputs", [&] {
    const auto& dir = config.out_dir;
    result.grasps_path = dir / "grasps.json";
    result.overlay_path = dir / "overlay.png";
    result.partition_path = dir / "partition.txt";
    atomic_write_file(result.grasps_path,
                      serialize_grasps(result.grasps, config.gripper,
                                       config.mesh_path.stem().string()));
    atomic_write_file(result.partition_path, labels_to_text(result.partition));
    save_png(render_overlay(image, result.box, camera, result.grasps),
             result.overlay_path);
  });
  return result;
}

// ---------------------------------------------------------------------------
// evaluation harness

struct EvalSource {
  enum class Kind {
    DeterministicLlm,  // mock LLM part choice vs. part_a: p is 1 or 0
    FrequencyCsv,      // measured counts: object,inside,total
    ReferenceCsv,      // published similarity scores: object,method,score
  };
  Kind kind = Kind::ReferenceCsv;
  std::string method;  // column name (ReferenceCsv: filter, empty = all)
  std::filesystem::path path;
};

inline std::vector<MethodFrequency> frequencies_from_csv(
    const std::filesystem::path& path, const std::string& method) {
  auto table = detail::load_csv(path);
  const int c_obj = detail::csv_column(table, "object", path);
  const int c_in = detail::csv_column(table, "inside", path);
  const int c_tot = detail::csv_column(table, "total", path);
  std::vector<MethodFrequency> out;
  for (const auto& row : table.rows) {
    MethodFrequency f;
    f.object_label = trim(row[c_obj]);
    f.method = method;
    int inside = 0;
    try {
      inside = std::stoi(row[c_in]);
      f.n_grasps = std::stoi(row[c_tot]);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad count for '" + f.object_label + "'");
    }
    if (f.n_grasps <= 0 || inside < 0 || inside > f.n_grasps)
      throw InvalidFraction(path.string() + ": counts " + std::to_string(inside) + "/" +
                            std::to_string(f.n_grasps));
    f.p_a_method = static_cast<double>(inside) / f.n_grasps;
    out.push_back(std::move(f));
  }
  return out;
}

// The deterministic pipeline column: the mock LLM names one part per object,
// so the frequency is 1 when it matches the survey's region a and 0 otherwise.
inline std::vector<MethodFrequency> deterministic_llm_frequencies(
    const std::vector<SurveyRecord>& survey, const std::filesystem::path& fixture,
    const std::string& method) {
  MockLlm llm(fixture);
  std::vector<MethodFrequency> out;
  for (const auto& rec : survey) {
    const auto part = llm.lookup(rec.object_label, TaskMode::Grasp);
    if (!part)
      throw MalformedResponse("mock fixture has no part for '" + rec.object_label + "'");
    MethodFrequency f;
    f.object_label = rec.object_label;
    f.method = method;
    f.n_grasps = 1;
    f.p_a_method = normalize_part_label(*part) == rec.part_a ? 1.0 : 0.0;
    out.push_back(std::move(f));
  }
  return out;
}

struct EvalOutput {
  SimilarityReport report;
  std::filesystem::path text_path;
  std::filesystem::path json_path;
};

inline EvalOutput run_eval(const std::filesystem::path& survey_path,
                           const std::vector<EvalSource>& sources,
                           const std::filesystem::path& out_dir) {
  const auto survey = ingest_survey(survey_path);
  std::vector<MethodFrequency> freqs;
  std::vector<ReferenceScore> refs;
  for (const auto& src : sources) {
    switch (src.kind) {
      case EvalSource::Kind::DeterministicLlm: {
        auto f = deterministic_llm_frequencies(survey, src.path, src.method);
        freqs.insert(freqs.end(), f.begin(), f.end());
        break;
      }
      case EvalSource::Kind::FrequencyCsv: {
        auto f = frequencies_from_csv(src.path, src.method);
        freqs.insert(freqs.end(), f.begin(), f.end());
        break;
      }
      case EvalSource::Kind::ReferenceCsv: {
        auto r = load_reference_scores(src.path, src.method);
        refs.insert(refs.end(), r.begin(), r.end());
        break;
      }
    }
  }
  EvalOutput out;
  out.report = build_report(survey, freqs, refs);
  out.text_path = out_dir / "report.txt";
  out.json_path = out_dir / "report.json";
  atomic_write_file(out.text_path, report_to_text(out.report));
  atomic_write_file(out.json_path, report_to_json(out.report));
  return out;
}

}  // namespace partgrasp
