// Command-line driver: `plan` runs the full label -> part -> box -> partition
// -> grasp pipeline, `eval` builds the preference-similarity report,
// `partition` dumps face labels for inspection, and `mock-serve` exposes the
// fixture backends over the HTTP wire contract.
#include <CLI11.hpp>

#include <iostream>

#include "partgrasp/pipeline.hpp"

namespace {

constexpr const char* kExitCodeHelp = R"(Exit codes:
  0  success                      6  RegionTooSmall (sampling budget exhausted)
  1  unexpected error             7  BackendUnavailable (after retries)
  2  config / parse error         8  MalformedResponse
  3  InvalidLabel                 9  EmptyMesh
  4  NoDetection                 10  BoxOutsideImage
  5  EmptyRegion                 11+ evaluation input errors
)";

struct PlanFlags {
  std::string config_path;
  std::string mesh_path;
  std::string image_path;
  std::string camera_path;
  std::string object_label;
  std::string mode;
  std::string visibility;
  double depth_band = -1.0;
  std::string out_dir;
  std::string llm_kind;
  std::string vlm_kind;
  long long seed = -1;
  int n_grasps = -1;
  int workers = -1;
  bool literal_template = false;
};

partgrasp::PipelineConfig merge_flags(const PlanFlags& flags) {
  auto cfg = partgrasp::load_pipeline_config(flags.config_path);
  if (!flags.mesh_path.empty()) cfg.mesh_path = flags.mesh_path;
  if (!flags.image_path.empty()) cfg.image_path = flags.image_path;
  if (!flags.camera_path.empty()) cfg.camera_path = flags.camera_path;
  if (!flags.object_label.empty()) cfg.object_label = flags.object_label;
  if (!flags.mode.empty()) cfg.mode = partgrasp::task_mode_from_string(flags.mode);
  if (!flags.visibility.empty()) {
    if (flags.visibility == "silhouette")
      cfg.visibility = partgrasp::Visibility::silhouette();
    else if (flags.visibility == "depth-band")
      cfg.visibility = partgrasp::Visibility::depth_band_rule(
          flags.depth_band > 0 ? flags.depth_band : cfg.visibility.depth_band);
    else
      throw partgrasp::ConfigError("unknown visibility rule: " + flags.visibility);
  } else if (flags.depth_band > 0) {
    cfg.visibility.depth_band = flags.depth_band;
  }
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.llm_kind.empty()) cfg.backends.llm.kind = flags.llm_kind;
  if (!flags.vlm_kind.empty()) cfg.backends.vlm.kind = flags.vlm_kind;
  if (flags.seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.n_grasps > 0) cfg.n_grasps = flags.n_grasps;
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (flags.literal_template) cfg.literal_template = true;
  return cfg;
}

int run_plan(const PlanFlags& flags) {
  const auto cfg = merge_flags(flags);
  const auto result = partgrasp::run_pipeline(cfg);
  std::cout << "part: " << result.part.part_label << "\n";
  std::cout << "box: [" << result.box.x_min << ", " << result.box.y_min << ", "
            << result.box.x_max << ", " << result.box.y_max
            << "] confidence " << result.box.confidence << "\n";
  std::cout << "partition: " << result.partition.graspable_count() << " graspable / "
            << result.partition.obstacle_count() << " obstacle faces\n";
  std::cout << "grasps: " << result.grasps.size() << " ranked candidates\n";
  for (const auto& t : result.timings)
    std::cout << "  " << t.stage << ": " << partgrasp::format_g9(t.ms) << " ms\n";
  std::cout << "wrote " << result.grasps_path.string() << ", "
            << result.overlay_path.string() << ", "
            << result.partition_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic part-aware grasp planning toolkit"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  PlanFlags plan_flags;
  auto* plan = app.add_subcommand("plan", "Run the full grasp-planning pipeline");
  plan->add_option("--config", plan_flags.config_path, "pipeline config (JSON)")
      ->required();
  plan->add_option("--mesh", plan_flags.mesh_path, "mesh path override");
  plan->add_option("--image", plan_flags.image_path, "image path override");
  plan->add_option("--camera", plan_flags.camera_path, "camera path override");
  plan->add_option("--object", plan_flags.object_label, "object label override");
  plan->add_option("--mode", plan_flags.mode, "grasp|avoid");
  plan->add_option("--seed", plan_flags.seed, "RNG seed override");
  plan->add_option("--n-grasps", plan_flags.n_grasps, "number of grasps to keep");
  plan->add_option("--visibility", plan_flags.visibility, "silhouette|depth-band");
  plan->add_option("--depth-band-delta", plan_flags.depth_band,
                   "depth band width in meters");
  plan->add_option("--out-dir", plan_flags.out_dir, "output directory");
  plan->add_option("--llm", plan_flags.llm_kind, "mock|http");
  plan->add_option("--vlm", plan_flags.vlm_kind, "mock|http");
  plan->add_option("--workers", plan_flags.workers, "sampler worker threads");
  plan->add_flag("--literal-template", plan_flags.literal_template,
                 "verbatim prompt template (always 'an')");

  std::string eval_survey, eval_out = "out", eval_mock_llm, eval_reference;
  std::vector<std::string> eval_frequencies;
  auto* eval = app.add_subcommand("eval", "Build the preference-similarity report");
  eval->add_option("--survey", eval_survey, "survey CSV (object,part_a,part_b,p_a,unit)")
      ->required();
  eval->add_option("--mock-llm", eval_mock_llm,
                   "LLM fixture: adds the deterministic pipeline column");
  eval->add_option("--reference-scores", eval_reference,
                   "published scores CSV (object,method,score)");
  eval->add_option("--frequencies", eval_frequencies,
                   "measured column as name=path (CSV: object,inside,total)");
  eval->add_option("--out-dir", eval_out, "output directory");

  std::string part_mesh, part_camera, part_box, part_mode = "grasp";
  std::string part_visibility = "silhouette", part_out = "partition.txt";
  double part_delta = 0.02;
  auto* part = app.add_subcommand("partition", "Dump per-face region labels");
  part->add_option("--mesh", part_mesh, "mesh file (.obj/.ply)")->required();
  part->add_option("--camera", part_camera, "camera JSON")->required();
  part->add_option("--box", part_box, "x_min,y_min,x_max,y_max in pixels")->required();
  part->add_option("--mode", part_mode, "grasp|avoid");
  part->add_option("--visibility", part_visibility, "silhouette|depth-band");
  part->add_option("--depth-band-delta", part_delta, "depth band width in meters");
  part->add_option("--out", part_out, "output label file");

  std::string serve_llm, serve_vlm, serve_host = "127.0.0.1";
  int serve_port = 8085;
  auto* serve = app.add_subcommand("mock-serve",
                                   "Serve fixture backends over the wire contract");
  serve->add_option("--llm-fixture", serve_llm, "LLM fixture CSV")->required();
  serve->add_option("--vlm-fixture", serve_vlm, "VLM fixture CSV")->required();
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "bind port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return run_plan(plan_flags);
    if (*eval) {
      std::vector<partgrasp::EvalSource> sources;
      if (!eval_mock_llm.empty())
        sources.push_back({partgrasp::EvalSource::Kind::DeterministicLlm, "partgrasp",
                           eval_mock_llm});
      for (const auto& spec : eval_frequencies) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw partgrasp::ConfigError("--frequencies expects name=path, got " + spec);
        sources.push_back({partgrasp::EvalSource::Kind::FrequencyCsv,
                           spec.substr(0, eq), spec.substr(eq + 1)});
      }
      if (!eval_reference.empty())
        sources.push_back({partgrasp::EvalSource::Kind::ReferenceCsv, "", eval_reference});
      const auto out = partgrasp::run_eval(eval_survey, sources, eval_out);
      std::cout << partgrasp::report_to_text(out.report);
      std::cout << "wrote " << out.text_path.string() << ", " << out.json_path.string()
                << "\n";
      return 0;
    }
    if (*part) {
      partgrasp::BoundingBox2D box;
      if (std::sscanf(part_box.c_str(), "%lf,%lf,%lf,%lf", &box.x_min, &box.y_min,
                      &box.x_max, &box.y_max) != 4)
        throw partgrasp::ConfigError("--box expects x_min,y_min,x_max,y_max");
      const auto mesh = partgrasp::load_mesh(part_mesh);
      const auto camera = partgrasp::load_camera(part_camera);
      partgrasp::Visibility vis =
          part_visibility == "depth-band"
              ? partgrasp::Visibility::depth_band_rule(part_delta)
              : partgrasp::Visibility::silhouette();
      const auto partition = partgrasp::partition_mesh(
          mesh, camera, box, partgrasp::task_mode_from_string(part_mode), vis);
      partgrasp::atomic_write_file(part_out, partgrasp::labels_to_text(partition));
      std::cout << partition.graspable_count() << " graspable / "
                << partition.obstacle_count() << " obstacle -> " << part_out << "\n";
      return 0;
    }
    if (*serve) {
      partgrasp::MockServer server(serve_llm, serve_vlm);
      std::cout << "serving mock backends on " << serve_host << ":" << serve_port
                << " (POST /v1/chat/completions, POST /detect)\n";
      if (!server.listen(serve_host, serve_port))
        throw partgrasp::BackendUnavailable("cannot bind " + serve_host + ":" +
                                            std::to_string(serve_port));
      return 0;
    }
  } catch (const partgrasp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
