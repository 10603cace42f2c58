#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "streetsim/environment.hpp"
#include "streetsim/geometry.hpp"
#include "streetsim/scene.hpp"
#include "streetsim/traffic.hpp"
#include "streetsim/visibility.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Annotation records

/// Oriented 3D box in the camera frame (x right, y down, z forward);
/// location is the bottom-face center.
struct Box3D {
  Vec3 location = Vec3::Zero();
  double height = 0.0, width = 0.0, length = 0.0;  // meters
  double rotation_y = 0.0;                         // about camera y, [-pi, pi)
  double alpha = 0.0;                              // observation angle, [-pi, pi)
};

struct ObjectAnnotation {
  int32_t actor_id = 0;
  ActorKind kind = ActorKind::Vehicle;
  PixelRect rect_modal;      // visible extent, clipped to the image
  PixelRect rect_amodal;     // full projection, clipped to the image
  PixelRect rect_unclipped;  // full projection, may exceed the image
  Box3D bbox3d;
  double truncation = 0.0;        // [0, 1]
  int occlusion_level = 0;        // 0 fully visible / 1 partly / 2 largely
  double visible_fraction = 0.0;  // [0, 1]
};

struct FrameAnnotation {
  long frame_index = 0;
  double capture_time_s = 0.0;
  CameraModel camera;
  EnvironmentState environment;
  std::vector<ObjectAnnotation> objects;  // ascending actor id
};

struct CaptureSchedule {
  double period_s = 3.0;
  long total_frames = 8000;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct AnnotateConfig {
  int analysis_width = 960;    // id/depth buffer resolution
  int analysis_height = 540;
  double min_visible = 0.05;   // drop objects below this visible fraction
  int min_pixels = 20;         // drop objects smaller than this, solo, at analysis res
  double lod_near = 30.0;      // LOD band edges, camera distance in meters
  double lod_far = 80.0;
  bool visibility_culling = false;  // drop objects beyond the weather's range
};

// ---------------------------------------------------------------------------
// Per-object pieces

/// Fraction of the (unclipped) box area falling outside the image;
/// a degenerate box counts as fully truncated.
double truncation(const PixelRect& rect_unclipped, int image_width, int image_height);

/// KITTI-style visibility bucket: >= 0.9 -> 0, >= 0.5 -> 1, else 2.
/// Level 3 ("unknown") is never produced — ground truth is always known here.
int occlusion_level(double visible_fraction);

/// Camera-frame oriented box for one actor. Throws std::invalid_argument when
/// the actor's bottom-face center is not in front of the camera (callers
/// filter such actors out first).
Box3D bbox3d_kitti(const Actor& actor, const ActorClass& cls, const CameraModel& cam);

/// Tight bounds of the actor's winning pixels, rescaled from the analysis
/// resolution to the camera resolution and clipped to the image. Empty when
/// nothing is visible.
PixelRect bbox2d_modal(const VisibilityStats& stats, int analysis_width, int analysis_height,
                       const CameraModel& cam);

// ---------------------------------------------------------------------------
// Frame capture

struct CaptureResult {
  FrameAnnotation frame;
  IdDepthBuffer buffer;  // analysis-resolution id/depth, for debug rendering
};

/// Builds the draw list for one frame: static props plus every actor at the
/// LOD band its camera distance selects.
SceneSnapshot build_snapshot(const std::vector<Actor>& actors, const IntersectionMap& map,
                             const ActorCatalog& catalog, const Vec3& cam_position,
                             double lod_near, double lod_far);

/// The full capture pipeline on an immutable actor list: LOD selection,
/// visibility statistics, filtering, and per-object annotation.
CaptureResult capture_actors(const std::vector<Actor>& actors, const IntersectionMap& map,
                             const ActorCatalog& catalog, const CameraModel& cam,
                             const EnvironmentState& env, const AnnotateConfig& cfg);

/// capture_actors over a live world (which is left untouched).
FrameAnnotation capture_frame(const WorldState& world, const IntersectionMap& map,
                              const ActorCatalog& catalog, const CameraModel& cam,
                              const EnvironmentState& env, const AnnotateConfig& cfg);

/// Steps traffic at the configured dt and captures at t = k * period exactly
/// (integration is aligned to capture boundaries, so there is no drift).
/// Frames are handed to the sink in order.
void run_capture_session(WorldState& world, const IntersectionMap& map,
                         const std::vector<Route>& vehicle_routes, const ActorCatalog& catalog,
                         const CameraModel& cam, const TrafficParams& traffic,
                         const CaptureSchedule& schedule, EnvironmentSchedule& env_schedule,
                         Rng& env_rng, const AnnotateConfig& cfg,
                         const std::function<void(CaptureResult&&)>& sink);

}  // namespace streetsim
