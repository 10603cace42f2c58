#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "streetsim/evalkit.hpp"
#include "streetsim/pipeline.hpp"

namespace {

using streetsim::RunConfig;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct GenerateArgs {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  long frames = 0;
  bool frames_set = false;
  std::string out_dir;
  int jobs = 0;  // <= 0: one worker per available core
};

struct EvalArgs {
  std::string gt_dir;
  std::string pred_dir;
  std::string resolution = "3840x2160";
  std::string report_path = "eval_report.json";
};

struct InspectArgs {
  std::string dataset_dir;
  long frame = -1;
  bool frame_set = false;
};

std::pair<int, int> parse_resolution(const std::string& text) {
  int w = 0, h = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &w, &h, &extra) != 2 || w < 1 || h < 1)
    throw std::invalid_argument("--res: expected WxH with positive integers, got '" + text +
                                "'");
  return {w, h};
}

int cmd_generate(const GenerateArgs& args) {
  RunConfig config;
  if (!args.config_path.empty()) config = streetsim::load_run_config(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (args.frames_set) config.capture.total_frames = args.frames;
  if (!args.out_dir.empty()) config.exporter.out_dir = args.out_dir;
  config.validate();

  const long total = config.capture.total_frames;
  const long stride = std::max(1L, total / 10);
  long last_reported = -1;
  const auto progress = [&](long done, long total_frames) {
    if (done == last_reported || (done % stride != 0 && done != total_frames)) return;
    last_reported = done;
    std::fprintf(stderr, "progress: %ld/%ld frames\n", done, total_frames);
  };

  const streetsim::GenerateStats stats = streetsim::run_generate(config, args.jobs, progress);

  nlohmann::ordered_json result;
  result["frames"] = stats.frames;
  result["seconds"] = stats.seconds;
  result["frames_per_second"] = stats.seconds > 0.0 ? stats.frames / stats.seconds : 0.0;
  result["out_dir"] = stats.out_dir.string();
  std::printf("%s\n", result.dump().c_str());
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const auto [width, height] = parse_resolution(args.resolution);
  const streetsim::GroundTruth gt = streetsim::load_ground_truth_dir(args.gt_dir, width, height);
  const streetsim::Predictions preds =
      streetsim::load_predictions_dir(args.pred_dir, width, height);

  const streetsim::EvalReport report = streetsim::map_at_50(gt, preds);
  std::fputs(streetsim::format_report(report).c_str(), stdout);
  if (!args.report_path.empty())
    streetsim::write_text_file(args.report_path, streetsim::report_json(report));
  return 0;
}

int cmd_inspect(const InspectArgs& args) {
  namespace fs = std::filesystem;
  const streetsim::DatasetLayout layout{args.dataset_dir};
  if (!fs::exists(layout.manifest()))
    throw std::invalid_argument("manifest not found: " + layout.manifest().string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(streetsim::read_text_file(layout.manifest()));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(layout.manifest().string() + ": invalid JSON: " + e.what());
  }

  const long frame_count = manifest.value("frame_count", 0L);
  std::printf("frames: %ld\n", frame_count);
  std::printf("seed: %" PRIu64 "\n", manifest.value("seed", uint64_t{0}));
  std::printf("config_hash: %s\n", manifest.value("config_hash", std::string("?")).c_str());
  std::printf("complete: %s\n", manifest.value("complete", false) ? "true" : "false");

  long pedestrians = 0;
  long vehicles = 0;
  std::map<std::string, long> weather_counts;
  for (const auto& frame : manifest.value("frames", nlohmann::json::array())) {
    pedestrians += frame.value("pedestrians", 0L);
    vehicles += frame.value("vehicles", 0L);
    weather_counts[frame.value("weather", std::string("?"))] += 1;
  }
  std::printf("boxes: pedestrian %ld, vehicle %ld\n", pedestrians, vehicles);
  std::string weather_line = "weather:";
  for (const auto& [name, count] : weather_counts)
    weather_line += " " + name + " " + std::to_string(count);
  std::printf("%s\n", weather_line.c_str());

  if (!args.frame_set) return 0;
  if (args.frame < 0 || args.frame >= frame_count)
    throw std::invalid_argument("--frame " + std::to_string(args.frame) +
                                " out of range [0, " + std::to_string(frame_count) + ")");

  const std::string stem = streetsim::DatasetLayout::stem(args.frame);
  const fs::path meta_path = layout.meta() / (stem + ".json");
  if (!fs::exists(meta_path))
    throw std::invalid_argument("frame metadata not found (meta export disabled?): " +
                                meta_path.string());
  nlohmann::json meta = nlohmann::json::parse(streetsim::read_text_file(meta_path));

  std::printf("\nframe %s  t=%.3f s  weather=%s  time_of_day=%.3f h\n", stem.c_str(),
              meta.value("capture_time_s", 0.0),
              meta["environment"].value("weather", std::string("?")).c_str(),
              meta["environment"].value("time_of_day", 0.0));
  std::printf("%6s  %-10s  %-28s  %7s  %5s\n", "id", "class", "bbox_amodal", "visible",
              "occl");
  for (const auto& obj : meta.value("objects", nlohmann::json::array())) {
    const auto& b = obj["rect_amodal"];
    char bbox[64];
    std::snprintf(bbox, sizeof bbox, "[%.0f, %.0f, %.0f, %.0f]", b[0].get<double>(),
                  b[1].get<double>(), b[2].get<double>(), b[3].get<double>());
    std::printf("%6d  %-10s  %-28s  %7.3f  %5d\n", obj.value("actor_id", 0),
                obj.value("class", std::string("?")).c_str(), bbox,
                obj.value("visible_fraction", 0.0), obj.value("occlusion_level", 0));
  }

  const fs::path image_path = layout.images() / (stem + ".ppm");
  if (fs::exists(image_path)) std::printf("image: %s\n", image_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic street-scene dataset generator and detection evaluation toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "Generate a labeled dataset");
  gen->add_option("--config", gen_args.config_path, "JSON run configuration file");
  gen->add_option("--seed", gen_args.seed, "Override config seed");
  gen->add_option("--frames", gen_args.frames, "Override capture.total_frames");
  gen->add_option("--out", gen_args.out_dir, "Override export.out_dir");
  gen->add_option("--jobs", gen_args.jobs,
                  "Worker threads for capture/annotation (default: all cores; 1 = serial)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--gt", eval_args.gt_dir, "Ground-truth YOLO label directory")->required();
  eval->add_option("--pred", eval_args.pred_dir, "Prediction label directory (YOLO + confidence)")
      ->required();
  eval->add_option("--res", eval_args.resolution, "Label pixel space as WxH")
      ->capture_default_str();
  eval->add_option("--report", eval_args.report_path, "Report JSON output path")
      ->capture_default_str();

  InspectArgs inspect_args;
  CLI::App* inspect = app.add_subcommand("inspect", "Summarize a generated dataset");
  inspect->add_option("dataset", inspect_args.dataset_dir, "Dataset directory")->required();
  inspect->add_option("--frame", inspect_args.frame, "Print one frame's annotations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  gen_args.seed_set = gen->count("--seed") > 0;
  gen_args.frames_set = gen->count("--frames") > 0;
  inspect_args.frame_set = inspect->count("--frame") > 0;

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (inspect->parsed()) return cmd_inspect(inspect_args);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
