#include "streetsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

namespace streetsim {

namespace {

double phase_of(double t, const LightCycle& cycle) {
  const double period = cycle.period();
  double p = std::fmod(t, period);
  if (p < 0.0) p += period;
  return p;
}

Vec3 outward_of(Approach arm) {
  switch (arm) {
    case Approach::North: return {0.0, 1.0, 0.0};
    case Approach::East: return {1.0, 0.0, 0.0};
    case Approach::South: return {0.0, -1.0, 0.0};
    case Approach::West: return {-1.0, 0.0, 0.0};
  }
  throw std::logic_error("unreachable: bad approach");
}

Actor make_pedestrian(WorldState& world, const IntersectionMap& map,
                      const ActorCatalog& catalog, const TrafficParams& params) {
  // Draw order is part of the deterministic contract: crosswalk, direction,
  // lead, tail, lateral, setback, speed.
  const Crosswalk& cw = map.crosswalks[world.rng.uniform_index(map.crosswalks.size())];
  const bool reversed = world.rng.uniform() < 0.5;
  const double lead = params.spawn_offset_min + 10.0 * world.rng.uniform();
  const double tail = params.spawn_offset_min + 10.0 * world.rng.uniform();
  // Walking lines spread across the painted band, and every pedestrian waits
  // at its own distance from the curb, so red lights gather a crowd instead
  // of stacking coincident actors.
  const double body = catalog.classes[catalog.pedestrian_id].width;
  const double lat_max = std::max(0.0, 0.5 * (map.crosswalk_width - body));
  const double lateral = lat_max * (2.0 * world.rng.uniform() - 1.0);
  const double setback = 0.8 * world.rng.uniform();

  Vec3 near_end = cw.path.point_at(0.0);
  Vec3 far_end = cw.path.point_at(cw.path.length());
  if (reversed) std::swap(near_end, far_end);
  const Vec3 out = outward_of(cw.arm);
  near_end += out * lateral;
  far_end += out * lateral;

  // Walk along the sidewalk to the curb, straight across, then away along
  // the far sidewalk. Only the curb-to-curb span conflicts with traffic.
  Route r;
  r.path = Polyline::from_points(
      {near_end + out * lead, near_end, far_end, far_end + out * tail});
  r.approach = cw.arm;
  r.cross_begin_s = lead;
  r.cross_end_s = lead + (far_end - near_end).norm();
  r.wait_s = std::max(0.0, lead - setback);

  const ActorClass& cls = catalog.classes[catalog.pedestrian_id];
  Actor a;
  a.id = world.next_actor_id++;
  a.class_id = catalog.pedestrian_id;
  a.kind = ActorKind::Pedestrian;
  a.route = std::move(r);
  a.progress = 0.0;
  a.cruise_speed = cls.nominal_speed *
                   (1.0 + params.speed_jitter * (2.0 * world.rng.uniform() - 1.0));
  a.pose = Pose::from_position_yaw(a.route.path.point_at(0.0), a.route.path.heading_at(0.0));
  return a;
}

}  // namespace

LightState light_phase(double t, const LightCycle& cycle) {
  if (!(cycle.green_s > 0.0 && cycle.yellow_s > 0.0 && cycle.all_red_s > 0.0))
    throw std::invalid_argument("light cycle: all phase durations must be > 0");
  const double g = cycle.green_s;
  const double y = cycle.yellow_s;
  const double r = cycle.all_red_s;
  const double p = phase_of(t, cycle);

  LightState s;  // both red unless a window below claims otherwise
  if (p < g)
    s.ns = LightColor::Green;
  else if (p < g + y)
    s.ns = LightColor::Yellow;
  else if (p >= g + y + r && p < 2.0 * g + y + r)
    s.ew = LightColor::Green;
  else if (p >= 2.0 * g + y + r && p < 2.0 * (g + y) + r)
    s.ew = LightColor::Yellow;
  return s;
}

double time_until_green(double t, const LightCycle& cycle, Axis axis) {
  const double g = cycle.green_s;
  const double start = axis == Axis::NS ? 0.0 : g + cycle.yellow_s + cycle.all_red_s;
  const double p = phase_of(t, cycle);
  if (p >= start && p < start + g) return 0.0;
  double wait = start - p;
  if (wait < 0.0) wait += cycle.period();
  return wait;
}

int WorldState::count(ActorKind k) const {
  int n = 0;
  for (const Actor& a : actors)
    if (a.kind == k) ++n;
  return n;
}

ActorCatalog ActorCatalog::standard(double vehicle_speed, double pedestrian_speed) {
  ActorCatalog cat;
  cat.classes.push_back(make_pedestrian_class(1.8, 0.5, 0.5, pedestrian_speed));
  cat.classes.push_back(make_vehicle_class(1.5, 1.8, 4.5, vehicle_speed));
  cat.pedestrian_id = 0;
  cat.vehicle_id = 1;
  return cat;
}

WorldState make_world(uint64_t seed, const TrafficParams& params) {
  WorldState world;
  world.rng = Rng(seed);
  world.t = 0.0;
  world.lights = light_phase(0.0, params.cycle);
  return world;
}

std::vector<Route> build_vehicle_routes(const IntersectionMap& map) {
  std::vector<Route> routes;
  for (int ai = 0; ai < 4; ++ai) {
    const Approach a = static_cast<Approach>(ai);
    for (int k = 0; k < map.lanes_per_dir; ++k) {
      const Lane* in = map.find_lane(a, true, k);
      const Lane* out = map.find_lane(opposite(a), false, k);
      if (in == nullptr || out == nullptr)
        throw std::logic_error("intersection map is missing a through lane");
      // The inbound path ends exactly where the opposite outbound one
      // starts; drop the shared point when splicing.
      std::vector<Vec3> pts = in->path.points;
      pts.insert(pts.end(), out->path.points.begin() + 1, out->path.points.end());
      Route r;
      r.path = Polyline::from_points(std::move(pts));
      r.approach = a;
      r.lane_index = k;
      r.stop_s = map.stop_lines[static_cast<size_t>(ai)];
      routes.push_back(std::move(r));
    }
  }
  return routes;
}

void step(WorldState& world, const IntersectionMap& map, const ActorCatalog& catalog,
          const TrafficParams& params, double dt) {
  if (!(dt > 0.0 && dt <= 0.1))
    throw std::invalid_argument("traffic step: dt must be in (0, 0.1]");
  (void)map;
  const LightState lights = light_phase(world.t, params.cycle);

  // Group vehicles by through lane so every follower sees the position its
  // leader held at the start of the step; the update is then independent of
  // actor ordering.
  std::map<std::pair<int, int>, std::vector<size_t>> lane_groups;
  for (size_t i = 0; i < world.actors.size(); ++i) {
    const Actor& a = world.actors[i];
    if (a.kind == ActorKind::Vehicle)
      lane_groups[{static_cast<int>(a.route.approach), a.route.lane_index}].push_back(i);
  }

  std::vector<double> next_progress(world.actors.size());
  for (size_t i = 0; i < world.actors.size(); ++i) {
    const Actor& a = world.actors[i];
    double target = a.progress + a.cruise_speed * dt;

    if (a.kind == ActorKind::Vehicle) {
      const double len = catalog.of(a).length;
      const auto& group =
          lane_groups[{static_cast<int>(a.route.approach), a.route.lane_index}];
      const Actor* leader = nullptr;
      for (size_t j : group) {
        if (j == i) continue;
        const Actor& b = world.actors[j];
        const bool ahead =
            b.progress > a.progress || (b.progress == a.progress && b.id < a.id);
        if (ahead && (leader == nullptr || b.progress < leader->progress))
          leader = &b;
      }
      if (leader != nullptr) {
        // Keep min_gap of clear road between bumpers.
        target = std::min(target, leader->progress - params.min_gap -
                                      0.5 * (catalog.of(*leader).length + len));
      }
      // Hold the nose at the stop line unless the light is green; a vehicle
      // whose nose already passed the line is committed and clears the box.
      const double hold = a.route.stop_s - 0.5 * len;
      if (lights.approach_color(a.route.approach) != LightColor::Green &&
          a.progress <= hold)
        target = std::min(target, hold);
    } else {
      // Pedestrians wait near the curb until the conflicting axis is red and
      // stays red long enough to finish the crossing; once on the road they
      // are committed. Each waits at its own spot (wait_s) so a red light
      // gathers a loose crowd rather than a stack of coincident actors; one
      // caught between its spot and the curb when the light turns holds at
      // the curb itself.
      const Route& r = a.route;
      const double hold = a.progress <= r.wait_s ? r.wait_s : r.cross_begin_s;
      if (a.progress <= r.cross_begin_s && target > hold) {
        const Axis crossed = axis_of(r.approach);
        const double crossing_time = (r.cross_end_s - r.cross_begin_s) / a.cruise_speed;
        const bool clear_to_walk =
            lights.axis_color(crossed) == LightColor::Red &&
            time_until_green(world.t, params.cycle, crossed) >= crossing_time;
        if (!clear_to_walk) target = hold;
      }
    }
    next_progress[i] = std::max(a.progress, target);  // never reverse
  }

  for (size_t i = 0; i < world.actors.size(); ++i) {
    Actor& a = world.actors[i];
    a.speed = (next_progress[i] - a.progress) / dt;
    a.progress = next_progress[i];
    a.pose = Pose::from_position_yaw(a.route.path.point_at(a.progress),
                                     a.route.path.heading_at(a.progress));
  }
  world.t += dt;
  world.lights = light_phase(world.t, params.cycle);
}

void spawn_despawn(WorldState& world, const IntersectionMap& map,
                   const std::vector<Route>& vehicle_routes, const ActorCatalog& catalog,
                   const TrafficParams& params) {
  std::erase_if(world.actors,
                [](const Actor& a) { return a.progress >= a.route.path.length(); });

  // Vehicles enter at the start of a through lane, and only when the entry
  // is clear; if every lane is blocked the shortfall waits for a later call.
  const double entry_clear =
      params.min_gap + catalog.classes[catalog.vehicle_id].length + 0.5;
  int want = params.target_vehicles - world.count(ActorKind::Vehicle);
  while (want > 0) {
    std::vector<size_t> free_routes;
    for (size_t ri = 0; ri < vehicle_routes.size(); ++ri) {
      const Route& r = vehicle_routes[ri];
      bool blocked = false;
      for (const Actor& a : world.actors) {
        if (a.kind == ActorKind::Vehicle && a.route.approach == r.approach &&
            a.route.lane_index == r.lane_index && a.progress < entry_clear) {
          blocked = true;
          break;
        }
      }
      if (!blocked) free_routes.push_back(ri);
    }
    if (free_routes.empty()) break;

    const ActorClass& cls = catalog.classes[catalog.vehicle_id];
    Actor a;
    a.id = world.next_actor_id++;
    a.class_id = catalog.vehicle_id;
    a.kind = ActorKind::Vehicle;
    a.route = vehicle_routes[free_routes[world.rng.uniform_index(free_routes.size())]];
    a.progress = 0.0;
    a.cruise_speed = cls.nominal_speed *
                     (1.0 + params.speed_jitter * (2.0 * world.rng.uniform() - 1.0));
    a.pose = Pose::from_position_yaw(a.route.path.point_at(0.0), a.route.path.heading_at(0.0));
    world.actors.push_back(std::move(a));
    --want;
  }

  for (int i = world.count(ActorKind::Pedestrian); i < params.target_pedestrians; ++i)
    world.actors.push_back(make_pedestrian(world, map, catalog, params));
}

std::string serialize_world(const WorldState& world) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "t=%.9g ns=%s ew=%s rng=%016llx next_id=%d n=%zu\n",
                world.t, to_string(world.lights.ns), to_string(world.lights.ew),
                static_cast<unsigned long long>(world.rng.state()), world.next_actor_id,
                world.actors.size());
  out += line;
  for (const Actor& a : world.actors) {
    std::snprintf(line, sizeof line,
                  "%d %s class=%d s=%.9g v=%.9g vc=%.9g x=%.9g y=%.9g yaw=%.9g\n", a.id,
                  to_string(a.kind), a.class_id, a.progress, a.speed, a.cruise_speed,
                  a.pose.position.x(), a.pose.position.y(), a.pose.yaw());
    out += line;
  }
  return out;
}

}  // namespace streetsim
