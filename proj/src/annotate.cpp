#include "streetsim/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace streetsim {

void CaptureSchedule::validate() const {
  if (!(period_s > 0.0)) throw std::invalid_argument("capture.period must be > 0");
  if (total_frames < 1) throw std::invalid_argument("capture.total_frames must be >= 1");
}

double truncation(const PixelRect& rect_unclipped, int image_width, int image_height) {
  const double area = rect_unclipped.area();
  if (!(area > 0.0)) return 1.0;
  const PixelRect image{0.0, 0.0, static_cast<double>(image_width),
                        static_cast<double>(image_height)};
  return 1.0 - rect_unclipped.intersect(image).area() / area;
}

int occlusion_level(double visible_fraction) {
  if (visible_fraction >= 0.9) return 0;
  if (visible_fraction >= 0.5) return 1;
  return 2;
}

Box3D bbox3d_kitti(const Actor& actor, const ActorClass& cls, const CameraModel& cam) {
  Box3D box;
  box.location = cam.world_to_camera(actor.pose.position);
  if (box.location.z() <= 0.0)
    throw std::invalid_argument("bbox3d: actor center is behind the camera");
  box.height = cls.height;
  box.width = cls.width;
  box.length = cls.length;

  // The actor's forward axis expressed in the camera frame; yaw about the
  // camera's (downward) y-axis measured from +z toward +x.
  const double yaw = actor.pose.yaw();
  const Vec3 heading_cam =
      cam.extrinsics.linear() * Vec3(std::cos(yaw), std::sin(yaw), 0.0);
  box.rotation_y = wrap_to_pi(std::atan2(heading_cam.x(), heading_cam.z()));
  box.alpha = alpha_angle(box.location, box.rotation_y);
  return box;
}

PixelRect bbox2d_modal(const VisibilityStats& stats, int analysis_width, int analysis_height,
                       const CameraModel& cam) {
  if (stats.visible_pixels == 0) return {};
  const double sx = static_cast<double>(cam.width) / analysis_width;
  const double sy = static_cast<double>(cam.height) / analysis_height;
  // A winning pixel (x, y) covers [x, x+1) x [y, y+1) in analysis space.
  const PixelRect raw{stats.min_x * sx, stats.min_y * sy, (stats.max_x + 1) * sx,
                      (stats.max_y + 1) * sy};
  return raw.intersect(cam.image_rect());
}

SceneSnapshot build_snapshot(const std::vector<Actor>& actors, const IntersectionMap& map,
                             const ActorCatalog& catalog, const Vec3& cam_position,
                             double lod_near, double lod_far) {
  SceneSnapshot snap;
  snap.instances.reserve(map.props.size() + actors.size());
  for (const TriMesh& prop : map.props)
    snap.instances.push_back({kStaticId, &prop, Isometry3::Identity()});
  for (const Actor& a : actors) {
    const int lod = select_lod(a.pose.position, cam_position, lod_near, lod_far);
    snap.instances.push_back({a.id, &catalog.of(a).lod_meshes[lod], a.pose.to_world()});
  }
  return snap;
}

CaptureResult capture_actors(const std::vector<Actor>& actors, const IntersectionMap& map,
                             const ActorCatalog& catalog, const CameraModel& cam,
                             const EnvironmentState& env, const AnnotateConfig& cfg) {
  const SceneSnapshot snap =
      build_snapshot(actors, map, catalog, cam.position(), cfg.lod_near, cfg.lod_far);

  CaptureResult res;
  res.frame.camera = cam;
  res.frame.environment = env;
  res.buffer = rasterize_ids(snap, cam, cfg.analysis_width, cfg.analysis_height);

  const std::vector<VisibilityStats> stats =
      visibility_stats(snap, cam, cfg.analysis_width, cfg.analysis_height);

  std::unordered_map<int32_t, const Actor*> by_id;
  by_id.reserve(actors.size());
  for (const Actor& a : actors) by_id[a.id] = &a;

  const Vec3 cam_pos = cam.position();
  for (const VisibilityStats& s : stats) {
    if (s.solo_pixels < cfg.min_pixels || s.visible_fraction < cfg.min_visible) continue;
    const Actor& actor = *by_id.at(s.id);

    // Behind-camera centers never reach the 3D box math.
    const Vec3 loc = cam.world_to_camera(actor.pose.position);
    if (loc.z() <= kNearPlane) continue;

    if (cfg.visibility_culling &&
        (actor.pose.position - cam_pos).norm() > env.visibility_limit_m)
      continue;

    const int lod = select_lod(actor.pose.position, cam_pos, cfg.lod_near, cfg.lod_far);
    const TriMesh& mesh = catalog.of(actor).lod_meshes[lod];
    const auto unclipped = project_mesh_amodal(mesh, actor.pose, cam);
    if (!unclipped) continue;
    const PixelRect amodal = unclipped->intersect(cam.image_rect());
    if (amodal.empty()) continue;

    ObjectAnnotation obj;
    obj.actor_id = actor.id;
    obj.kind = actor.kind;
    obj.rect_unclipped = *unclipped;
    obj.rect_amodal = amodal;
    // Keeping the modal rect inside the amodal one makes the containment
    // invariant exact; rescaling alone can overshoot by a fraction of an
    // analysis pixel.
    obj.rect_modal =
        bbox2d_modal(s, cfg.analysis_width, cfg.analysis_height, cam).intersect(amodal);
    obj.bbox3d = bbox3d_kitti(actor, catalog.of(actor), cam);
    obj.truncation = truncation(*unclipped, cam.width, cam.height);
    obj.occlusion_level = streetsim::occlusion_level(s.visible_fraction);
    obj.visible_fraction = s.visible_fraction;
    res.frame.objects.push_back(obj);
  }
  return res;
}

FrameAnnotation capture_frame(const WorldState& world, const IntersectionMap& map,
                              const ActorCatalog& catalog, const CameraModel& cam,
                              const EnvironmentState& env, const AnnotateConfig& cfg) {
  CaptureResult res = capture_actors(world.actors, map, catalog, cam, env, cfg);
  res.frame.capture_time_s = world.t;
  return std::move(res.frame);
}

void run_capture_session(WorldState& world, const IntersectionMap& map,
                         const std::vector<Route>& vehicle_routes, const ActorCatalog& catalog,
                         const CameraModel& cam, const TrafficParams& traffic,
                         const CaptureSchedule& schedule, EnvironmentSchedule& env_schedule,
                         Rng& env_rng, const AnnotateConfig& cfg,
                         const std::function<void(CaptureResult&&)>& sink) {
  schedule.validate();
  spawn_despawn(world, map, vehicle_routes, catalog, traffic);

  for (long k = 0; k < schedule.total_frames; ++k) {
    const double target = static_cast<double>(k) * schedule.period_s;
    while (world.t + 1e-9 < target) {
      step(world, map, catalog, traffic, std::min(traffic.dt, target - world.t));
      spawn_despawn(world, map, vehicle_routes, catalog, traffic);
    }
    // Capture times are exact multiples of the period; the sub-nanosecond
    // integration residue is snapped away rather than left to accumulate.
    world.t = target;
    world.lights = light_phase(target, traffic.cycle);

    const EnvironmentState env = next_environment(env_rng, env_schedule);
    CaptureResult res = capture_actors(world.actors, map, catalog, cam, env, cfg);
    res.frame.frame_index = k;
    res.frame.capture_time_s = target;
    sink(std::move(res));
  }
}

}  // namespace streetsim
