#include "streetsim/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace streetsim {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

/// Strict reader over one JSON object: typed getters mark keys as consumed,
/// finish() rejects whatever was not recognized. Every error names the field
/// path ("config.traffic.dt: expected a number").
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw std::invalid_argument(path_ + ": expected an object");
  }

  bool has(const char* key) {
    consumed_.insert(key);
    return j_.contains(key);
  }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    out = v.get<int>();
  }

  void integer(const char* key, long& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    out = v.get<long>();
  }

  void unsigned64(const char* key, uint64_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<int64_t>() < 0))
      fail(key, "expected a non-negative integer");
    out = v.get<uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected a boolean");
    out = v.get<bool>();
  }

  void text(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }

  void vec3(const char* key, Vec3& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number())
      fail(key, "expected an array of 3 numbers");
    out = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  void range(const char* key, double& lo, double& hi) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(key, "expected an array of 2 numbers");
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  }

  /// Nested object, or nullptr when the key is absent.
  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    const json& v = j_.at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return &v;
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw std::invalid_argument(path_ + "." + key + ": " + what);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (consumed_.find(item.key()) == consumed_.end())
        throw std::invalid_argument(path_ + ": unknown key '" + item.key() + "'");
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

Weather weather_field(const std::string& path, const std::string& name) {
  try {
    return parse_weather(name);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void parse_scene(const json& j, SceneConfig& out) {
  Section s(j, "config.scene");
  s.integer("lanes_per_dir", out.lanes_per_dir);
  s.number("road_width", out.road_width);
  s.number("block_size", out.block_size);
  s.number("sidewalk_width", out.sidewalk_width);
  s.number("crosswalk_width", out.crosswalk_width);
  s.number("crosswalk_gap", out.crosswalk_gap);
  s.boolean("buildings", out.buildings);
  s.number("lod_near", out.lod_near);
  s.number("lod_far", out.lod_far);
  s.finish();
}

void parse_traffic(const json& j, TrafficConfig& out) {
  Section s(j, "config.traffic");
  s.integer("target_vehicles", out.target_vehicles);
  s.integer("target_pedestrians", out.target_pedestrians);
  s.number("vehicle_speed", out.vehicle_speed);
  s.number("pedestrian_speed", out.pedestrian_speed);
  s.number("speed_jitter", out.speed_jitter);
  s.number("min_gap", out.min_gap);
  s.number("dt", out.dt);
  s.number("spawn_offset_min", out.spawn_offset_min);
  if (const json* light = s.object("light")) {
    Section ls(*light, "config.traffic.light");
    ls.number("green_s", out.light.green_s);
    ls.number("yellow_s", out.light.yellow_s);
    ls.number("all_red_s", out.light.all_red_s);
    ls.finish();
  }
  s.finish();
}

void parse_camera(const json& j, CameraConfig& out) {
  Section s(j, "config.camera");
  s.vec3("position", out.position);
  s.number("yaw_deg", out.yaw_deg);
  s.number("pitch_deg", out.pitch_deg);
  s.number("focal_px", out.focal_px);
  s.integer("width", out.width);
  s.integer("height", out.height);
  s.finish();
}

void parse_environment(const json& j, EnvironmentSchedule& out) {
  Section s(j, "config.environment");

  std::string mode;
  s.text("mode", mode);
  if (!mode.empty()) {
    if (mode == "fixed")
      out.mode = EnvironmentSchedule::Mode::Fixed;
    else if (mode == "per_frame_random")
      out.mode = EnvironmentSchedule::Mode::PerFrameRandom;
    else if (mode == "cyclic")
      out.mode = EnvironmentSchedule::Mode::Cyclic;
    else
      s.fail("mode", "unknown mode '" + mode + "'");
  }

  if (const json* weights = s.object("weights")) {
    // A weights object is a complete assignment: weathers it does not
    // mention get weight 0.
    out.weights.fill(0.0);
    std::array<bool, kWeatherCount> seen{};
    for (const auto& item : weights->items()) {
      const Weather w = weather_field("config.environment.weights", item.key());
      if (seen[static_cast<size_t>(w)])
        throw std::invalid_argument("config.environment.weights: duplicate weather '" +
                                    item.key() + "'");
      seen[static_cast<size_t>(w)] = true;
      if (!item.value().is_number())
        throw std::invalid_argument("config.environment.weights." + item.key() +
                                    ": expected a number");
      out.weights[static_cast<size_t>(w)] = item.value().get<double>();
    }
  }

  s.range("time_range", out.time_lo, out.time_hi);
  s.number("fixed_time", out.fixed_time);

  std::string fixed_weather;
  s.text("fixed_weather", fixed_weather);
  if (!fixed_weather.empty())
    out.fixed_weather = weather_field("config.environment.fixed_weather", fixed_weather);

  if (const json* vis = s.object("visibility")) {
    std::array<bool, kWeatherCount> seen{};
    for (const auto& item : vis->items()) {
      const Weather w = weather_field("config.environment.visibility", item.key());
      if (seen[static_cast<size_t>(w)])
        throw std::invalid_argument("config.environment.visibility: duplicate weather '" +
                                    item.key() + "'");
      seen[static_cast<size_t>(w)] = true;
      if (item.value().is_null())
        out.visibility.limit_m[static_cast<size_t>(w)] = kUnlimitedVisibility;
      else if (item.value().is_number())
        out.visibility.limit_m[static_cast<size_t>(w)] = item.value().get<double>();
      else
        throw std::invalid_argument("config.environment.visibility." + item.key() +
                                    ": expected a number or null");
    }
  }

  s.boolean("visibility_culling", out.visibility.culling);
  s.finish();
}

void parse_capture(const json& j, CaptureConfig& out) {
  Section s(j, "config.capture");
  s.number("period", out.period);
  s.integer("total_frames", out.total_frames);
  s.integer("analysis_width", out.analysis_width);
  s.integer("analysis_height", out.analysis_height);
  s.number("min_visible", out.min_visible);
  s.integer("min_pixels", out.min_pixels);
  s.finish();
}

void parse_export(const json& j, ExportOptions& out) {
  Section s(j, "config.export");
  s.boolean("kitti", out.kitti);
  s.boolean("yolo", out.yolo);
  s.boolean("meta", out.meta);
  s.boolean("images", out.images);
  s.text("out_dir", out.out_dir);
  s.finish();
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void RunConfig::validate() const {
  require(version == 1, "config.version: unsupported schema version (expected 1)");

  // The scene builder owns the scene preconditions; building the map is
  // cheap, so validation simply exercises it.
  build_intersection(scene);

  require(traffic.target_vehicles >= 0, "traffic.target_vehicles must be >= 0");
  require(traffic.target_pedestrians >= 0, "traffic.target_pedestrians must be >= 0");
  require(traffic.vehicle_speed > 0.0, "traffic.vehicle_speed must be > 0");
  require(traffic.pedestrian_speed > 0.0, "traffic.pedestrian_speed must be > 0");
  require(traffic.speed_jitter >= 0.0 && traffic.speed_jitter < 1.0,
          "traffic.speed_jitter must be in [0, 1)");
  require(traffic.min_gap >= 0.0, "traffic.min_gap must be >= 0");
  require(traffic.dt > 0.0 && traffic.dt <= 0.1, "traffic.dt must be in (0, 0.1]");
  require(traffic.spawn_offset_min >= 0.0, "traffic.spawn_offset_min must be >= 0");
  require(traffic.light.green_s > 0.0, "traffic.light.green_s must be > 0");
  require(traffic.light.yellow_s > 0.0, "traffic.light.yellow_s must be > 0");
  require(traffic.light.all_red_s > 0.0, "traffic.light.all_red_s must be > 0");

  require(camera.focal_px > 0.0, "camera.focal_px must be > 0");
  require(camera.width >= 1, "camera.width must be >= 1");
  require(camera.height >= 1, "camera.height must be >= 1");
  require(camera.pitch_deg >= -90.0 && camera.pitch_deg <= 90.0,
          "camera.pitch_deg must be in [-90, 90]");

  environment.validate();

  require(capture.period > 0.0, "capture.period must be > 0");
  require(capture.total_frames >= 1, "capture.total_frames must be >= 1");
  require(capture.analysis_width >= 1, "capture.analysis_width must be >= 1");
  require(capture.analysis_height >= 1, "capture.analysis_height must be >= 1");
  require(capture.min_visible >= 0.0 && capture.min_visible <= 1.0,
          "capture.min_visible must be in [0, 1]");
  require(capture.min_pixels >= 0, "capture.min_pixels must be >= 0");

  require(!exporter.out_dir.empty(), "export.out_dir must not be empty");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  RunConfig config;
  Section root(j, "config");
  root.integer("version", config.version);
  root.unsigned64("seed", config.seed);
  if (const json* sub = root.object("scene")) parse_scene(*sub, config.scene);
  if (const json* sub = root.object("traffic")) parse_traffic(*sub, config.traffic);
  if (const json* sub = root.object("camera")) parse_camera(*sub, config.camera);
  if (const json* sub = root.object("environment")) parse_environment(*sub, config.environment);
  if (const json* sub = root.object("capture")) parse_capture(*sub, config.capture);
  if (const json* sub = root.object("export")) parse_export(*sub, config.exporter);
  root.finish();

  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path));
}

std::string config_json(const RunConfig& config) {
  ordered_json j;
  j["version"] = config.version;
  j["seed"] = config.seed;

  ordered_json scene;
  scene["lanes_per_dir"] = config.scene.lanes_per_dir;
  scene["road_width"] = config.scene.road_width;
  scene["block_size"] = config.scene.block_size;
  scene["sidewalk_width"] = config.scene.sidewalk_width;
  scene["crosswalk_width"] = config.scene.crosswalk_width;
  scene["crosswalk_gap"] = config.scene.crosswalk_gap;
  scene["buildings"] = config.scene.buildings;
  scene["lod_near"] = config.scene.lod_near;
  scene["lod_far"] = config.scene.lod_far;
  j["scene"] = scene;

  ordered_json traffic;
  traffic["target_vehicles"] = config.traffic.target_vehicles;
  traffic["target_pedestrians"] = config.traffic.target_pedestrians;
  traffic["vehicle_speed"] = config.traffic.vehicle_speed;
  traffic["pedestrian_speed"] = config.traffic.pedestrian_speed;
  traffic["speed_jitter"] = config.traffic.speed_jitter;
  traffic["min_gap"] = config.traffic.min_gap;
  traffic["dt"] = config.traffic.dt;
  traffic["spawn_offset_min"] = config.traffic.spawn_offset_min;
  ordered_json light;
  light["green_s"] = config.traffic.light.green_s;
  light["yellow_s"] = config.traffic.light.yellow_s;
  light["all_red_s"] = config.traffic.light.all_red_s;
  traffic["light"] = light;
  j["traffic"] = traffic;

  ordered_json camera;
  camera["position"] = {config.camera.position.x(), config.camera.position.y(),
                        config.camera.position.z()};
  camera["yaw_deg"] = config.camera.yaw_deg;
  camera["pitch_deg"] = config.camera.pitch_deg;
  camera["focal_px"] = config.camera.focal_px;
  camera["width"] = config.camera.width;
  camera["height"] = config.camera.height;
  j["camera"] = camera;

  ordered_json environment;
  switch (config.environment.mode) {
    case EnvironmentSchedule::Mode::Fixed: environment["mode"] = "fixed"; break;
    case EnvironmentSchedule::Mode::PerFrameRandom:
      environment["mode"] = "per_frame_random";
      break;
    case EnvironmentSchedule::Mode::Cyclic: environment["mode"] = "cyclic"; break;
  }
  ordered_json weights;
  for (int w = 0; w < kWeatherCount; ++w)
    weights[to_string(static_cast<Weather>(w))] = config.environment.weights[w];
  environment["weights"] = weights;
  environment["time_range"] = {config.environment.time_lo, config.environment.time_hi};
  environment["fixed_time"] = config.environment.fixed_time;
  environment["fixed_weather"] = to_string(config.environment.fixed_weather);
  ordered_json visibility;
  for (int w = 0; w < kWeatherCount; ++w) {
    const double limit = config.environment.visibility.limit_m[w];
    if (std::isinf(limit))
      visibility[to_string(static_cast<Weather>(w))] = nullptr;
    else
      visibility[to_string(static_cast<Weather>(w))] = limit;
  }
  environment["visibility"] = visibility;
  environment["visibility_culling"] = config.environment.visibility.culling;
  j["environment"] = environment;

  ordered_json capture;
  capture["period"] = config.capture.period;
  capture["total_frames"] = config.capture.total_frames;
  capture["analysis_width"] = config.capture.analysis_width;
  capture["analysis_height"] = config.capture.analysis_height;
  capture["min_visible"] = config.capture.min_visible;
  capture["min_pixels"] = config.capture.min_pixels;
  j["capture"] = capture;

  ordered_json exporter;
  exporter["kitti"] = config.exporter.kitti;
  exporter["yolo"] = config.exporter.yolo;
  exporter["meta"] = config.exporter.meta;
  exporter["images"] = config.exporter.images;
  exporter["out_dir"] = config.exporter.out_dir;
  j["export"] = exporter;

  return j.dump(2) + "\n";
}

CameraModel make_camera(const CameraConfig& config) {
  return CameraModel::rig(config.position, config.yaw_deg * kDegToRad,
                          config.pitch_deg * kDegToRad, config.focal_px, config.width,
                          config.height);
}

TrafficParams make_traffic_params(const TrafficConfig& config) {
  TrafficParams params;
  params.cycle = config.light;
  params.dt = config.dt;
  params.min_gap = config.min_gap;
  params.speed_jitter = config.speed_jitter;
  params.target_vehicles = config.target_vehicles;
  params.target_pedestrians = config.target_pedestrians;
  params.spawn_offset_min = config.spawn_offset_min;
  return params;
}

ActorCatalog make_catalog(const TrafficConfig& config) {
  return ActorCatalog::standard(config.vehicle_speed, config.pedestrian_speed);
}

AnnotateConfig make_annotate_config(const RunConfig& config) {
  AnnotateConfig out;
  out.analysis_width = config.capture.analysis_width;
  out.analysis_height = config.capture.analysis_height;
  out.min_visible = config.capture.min_visible;
  out.min_pixels = config.capture.min_pixels;
  out.lod_near = config.scene.lod_near;
  out.lod_far = config.scene.lod_far;
  out.visibility_culling = config.environment.visibility.culling;
  return out;
}

CaptureSchedule make_capture_schedule(const CaptureConfig& config) {
  CaptureSchedule schedule;
  schedule.period_s = config.period;
  schedule.total_frames = config.total_frames;
  return schedule;
}

}  // namespace streetsim
