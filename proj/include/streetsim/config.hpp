#pragma once

#include <cstdint>
#include <string>

#include "streetsim/annotate.hpp"
#include "streetsim/environment.hpp"
#include "streetsim/export.hpp"
#include "streetsim/geometry.hpp"
#include "streetsim/scene.hpp"
#include "streetsim/traffic.hpp"

namespace streetsim {

/// Camera placement section of the run configuration. Angles are stored in
/// degrees (the JSON-facing unit); make_camera converts to radians.
struct CameraConfig {
  Vec3 position{-30.0, -30.0, 40.0};
  double yaw_deg = 45.0;    // about world up-axis, 0 = +x
  double pitch_deg = -45.0; // negative looks down
  double focal_px = 2000.0;
  int width = 3840;
  int height = 2160;
};

/// Traffic section: kinematic targets plus the signal cycle. Speeds feed the
/// actor catalog; the rest maps onto TrafficParams.
struct TrafficConfig {
  int target_vehicles = 20;
  int target_pedestrians = 30;
  double vehicle_speed = 10.0;    // m/s, nominal before jitter
  double pedestrian_speed = 1.4;  // m/s, nominal before jitter
  double speed_jitter = 0.2;      // +-fraction applied at spawn
  double min_gap = 2.0;           // bumper-to-bumper, meters
  double dt = 0.05;               // integration step, seconds
  double spawn_offset_min = 5.0;  // pedestrian route start/end band, meters
  LightCycle light;
};

/// Capture section: sampling cadence plus annotation thresholds.
struct CaptureConfig {
  double period = 3.0;  // seconds between saved frames
  long total_frames = 8000;
  int analysis_width = 960;
  int analysis_height = 540;
  double min_visible = 0.05;  // visible_fraction floor
  int min_pixels = 20;        // solo-pixel floor at analysis resolution
};

/// The complete run configuration: one JSON document covering every module.
/// Unknown keys are rejected; every field is validated before any work
/// starts.
struct RunConfig {
  int version = 1;
  uint64_t seed = 1;
  SceneConfig scene;
  TrafficConfig traffic;
  CameraConfig camera;
  EnvironmentSchedule environment;
  CaptureConfig capture;
  ExportOptions exporter;

  /// Throws std::invalid_argument naming the offending field path
  /// (e.g. "capture.period must be > 0").
  void validate() const;
};

/// Parses a JSON document into a RunConfig. Missing sections and fields keep
/// their defaults; unknown keys throw std::invalid_argument with the field
/// path ("config.traffic: unknown key 'foo'"). The parsed config is validated
/// before being returned.
RunConfig parse_run_config(const std::string& json_text);

/// Reads and parses a config file (see parse_run_config). I/O failures throw
/// std::runtime_error.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON rendering of a config: fixed key order, two-space indent,
/// trailing newline. parse_run_config(config_json(c)) round-trips exactly;
/// the manifest records and hashes this form.
std::string config_json(const RunConfig& config);

// Module-facing builders -----------------------------------------------------

CameraModel make_camera(const CameraConfig& config);
TrafficParams make_traffic_params(const TrafficConfig& config);
ActorCatalog make_catalog(const TrafficConfig& config);
AnnotateConfig make_annotate_config(const RunConfig& config);
CaptureSchedule make_capture_schedule(const CaptureConfig& config);

}  // namespace streetsim
