#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streetsim/rng.hpp"
#include "streetsim/scene.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Signal controller

enum class LightColor { Green = 0, Yellow = 1, Red = 2 };

inline const char* to_string(LightColor c) {
  static const char* names[] = {"green", "yellow", "red"};
  return names[static_cast<int>(c)];
}

struct LightCycle {
  double green_s = 20.0;
  double yellow_s = 3.0;
  double all_red_s = 2.0;
  double period() const { return 2.0 * (green_s + yellow_s + all_red_s); }
};

struct LightState {
  LightColor ns = LightColor::Red;
  LightColor ew = LightColor::Red;
  LightColor axis_color(Axis a) const { return a == Axis::NS ? ns : ew; }
  LightColor approach_color(Approach a) const { return axis_color(axis_of(a)); }
};

/// Fixed-time schedule NS green -> NS yellow -> all red -> EW green ->
/// EW yellow -> all red, over half-open phase windows of (t mod period).
LightState light_phase(double t, const LightCycle& cycle);

/// Seconds from t until the given axis next turns green (0 if green now).
double time_until_green(double t, const LightCycle& cycle, Axis axis);

// ---------------------------------------------------------------------------
// World

struct TrafficParams {
  LightCycle cycle;
  double dt = 0.05;                 // fixed integration step
  double min_gap = 2.0;             // bumper-to-bumper, same lane
  double speed_jitter = 0.2;        // +-fraction applied to nominal speed at spawn
  int target_vehicles = 20;
  int target_pedestrians = 30;
  double spawn_offset_min = 5.0;    // pedestrian route start/end band
};

struct WorldState {
  double t = 0.0;
  std::vector<Actor> actors;
  LightState lights;
  Rng rng;
  int32_t next_actor_id = 1;

  int count(ActorKind k) const;
};

/// The per-class catalog shared by a run; index = Actor::class_id.
struct ActorCatalog {
  std::vector<ActorClass> classes;
  int pedestrian_id = -1;
  int vehicle_id = -1;

  static ActorCatalog standard(double vehicle_speed = 10.0, double pedestrian_speed = 1.4);
  const ActorClass& of(const Actor& a) const { return classes[a.class_id]; }
};

/// Fresh world at t = 0 with the signal state already resolved.
WorldState make_world(uint64_t seed, const TrafficParams& params);

/// Through routes (inbound lane + opposite outbound lane), one per
/// (approach, lane index). Built once per map.
std::vector<Route> build_vehicle_routes(const IntersectionMap& map);

/// Advances every actor by dt: vehicles follow their lanes under a
/// speed-cap rule (never closer than min_gap to a leader, hold at the stop
/// line unless green), pedestrians walk their routes and enter crosswalks
/// only when the conflicting axis stays red long enough to finish crossing.
void step(WorldState& world, const IntersectionMap& map, const ActorCatalog& catalog,
          const TrafficParams& params, double dt);

/// Removes actors that finished their route, then spawns at free entry
/// points until per-class counts meet their targets. All draws come from
/// world.rng in a fixed order.
void spawn_despawn(WorldState& world, const IntersectionMap& map,
                   const std::vector<Route>& vehicle_routes, const ActorCatalog& catalog,
                   const TrafficParams& params);

/// Canonical text dump used by determinism tests.
std::string serialize_world(const WorldState& world);

}  // namespace streetsim
