#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "streetsim/geometry.hpp"
#include "streetsim/types.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Road network primitives

enum class Approach { North = 0, East = 1, South = 2, West = 3 };
enum class Axis { NS = 0, EW = 1 };

inline Axis axis_of(Approach a) {
  return (a == Approach::North || a == Approach::South) ? Axis::NS : Axis::EW;
}
inline Approach opposite(Approach a) { return static_cast<Approach>((static_cast<int>(a) + 2) % 4); }
inline const char* to_string(Approach a) {
  static const char* names[] = {"north", "east", "south", "west"};
  return names[static_cast<int>(a)];
}

/// Directed polyline on the ground plane with cached cumulative arc lengths.
struct Polyline {
  std::vector<Vec3> points;
  std::vector<double> cumlen;

  static Polyline from_points(std::vector<Vec3> pts);
  double length() const { return cumlen.empty() ? 0.0 : cumlen.back(); }
  /// Position at arc length s (clamped to the domain).
  Vec3 point_at(double s) const;
  /// Heading (yaw about world z) of the segment containing s.
  double heading_at(double s) const;
};

struct Lane {
  Approach approach;
  bool inbound = true;  // toward/through the junction vs. exiting it
  int index = 0;        // 0-based within (approach, direction)
  Polyline path;
};

struct Crosswalk {
  Approach arm;  // which road arm it spans
  Polyline path; // walking line, curb to curb
};

/// Static world description: a procedural four-way intersection.
struct IntersectionMap {
  std::vector<Lane> lanes;
  std::vector<Crosswalk> crosswalks;
  std::vector<Polyline> sidewalks;                 // one loop per corner block
  std::array<double, 4> stop_lines{};              // arc position along each approach's inbound lanes
  std::vector<TriMesh> props;                      // buildings etc., world frame
  double half_road_width = 3.5;                    // junction box half extent
  double half_map = 123.5;                         // map boundary (|x|,|y| beyond = despawn)
  double lane_width = 3.5;
  double crosswalk_width = 3.0;                    // painted band, centered on each walking line
  int lanes_per_dir = 1;

  const Lane* find_lane(Approach a, bool inbound, int index) const;
};

struct SceneConfig {
  int lanes_per_dir = 2;
  double road_width = 14.0;      // total width, both directions
  double block_size = 110.0;     // arm length beyond the junction box
  double sidewalk_width = 2.5;
  double crosswalk_width = 3.0;
  double crosswalk_gap = 0.5;    // junction edge -> crosswalk
  bool buildings = true;
  double lod_near = 30.0;        // LOD0 below this camera distance
  double lod_far = 80.0;         // LOD2 beyond this
};

/// Deterministic procedural intersection. Throws std::invalid_argument
/// naming the offending field on bad configuration.
IntersectionMap build_intersection(const SceneConfig& cfg);

// ---------------------------------------------------------------------------
// Actors

/// One detectable class: exactly three meshes (LOD0 finest .. LOD2 coarsest)
/// sharing the same extents, plus KITTI-style dimensions.
struct ActorClass {
  ActorKind kind = ActorKind::Vehicle;
  std::array<TriMesh, 3> lod_meshes;
  double height = 1.5, width = 1.8, length = 4.5;  // meters
  double nominal_speed = 10.0;                     // m/s
};

/// Box/wedge composite vehicle at three tessellation levels.
ActorClass make_vehicle_class(double height = 1.5, double width = 1.8, double length = 4.5,
                              double nominal_speed = 10.0);
/// Torso + head composite pedestrian at three tessellation levels.
ActorClass make_pedestrian_class(double height = 1.8, double width = 0.5, double length = 0.5,
                                 double nominal_speed = 1.4);

/// How an actor travels: a concrete world polyline plus the signal metadata
/// the stepper needs. Vehicles get a stop line; pedestrians get the crossing
/// span and the road axis it conflicts with.
struct Route {
  Polyline path;
  Approach approach = Approach::North;  // signal approach (vehicles) / crossed arm (pedestrians)
  int lane_index = -1;                  // vehicles only
  double stop_s = -1.0;                 // vehicles: hold-front position when not green
  double cross_begin_s = -1.0;          // pedestrians: crosswalk span along the route
  double cross_end_s = -1.0;
  double wait_s = 0.0;                  // pedestrians: waiting spot shy of the curb
};

struct Actor {
  int32_t id = 0;
  int class_id = 0;  // index into the run's class catalog
  ActorKind kind = ActorKind::Vehicle;
  Pose pose;
  double speed = 0.0;         // effective speed over the last step
  double cruise_speed = 0.0;  // per-actor jittered target speed
  Route route;
  double progress = 0.0;   // arc length along route.path, at the actor center
  int active_lod = 0;
};

/// Distance-banded LOD selection: d < d0 -> 0, d0 <= d < d1 -> 1, else 2.
int select_lod(const Vec3& actor_position, const Vec3& cam_position, double d0, double d1);

/// Canonical text form used by determinism tests.
std::string serialize_map(const IntersectionMap& map);

}  // namespace streetsim
