#include "streetsim/scene.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace streetsim {

// ---------------------------------------------------------------------------
// Polyline

Polyline Polyline::from_points(std::vector<Vec3> pts) {
  Polyline p;
  p.points = std::move(pts);
  p.cumlen.resize(p.points.size(), 0.0);
  for (size_t i = 1; i < p.points.size(); ++i)
    p.cumlen[i] = p.cumlen[i - 1] + (p.points[i] - p.points[i - 1]).norm();
  return p;
}

Vec3 Polyline::point_at(double s) const {
  if (points.empty()) return Vec3::Zero();
  if (s <= 0.0) return points.front();
  if (s >= length()) return points.back();
  size_t i = 1;
  while (i < cumlen.size() && cumlen[i] < s) ++i;
  const double seg = cumlen[i] - cumlen[i - 1];
  const double t = seg > 0.0 ? (s - cumlen[i - 1]) / seg : 0.0;
  return points[i - 1] + t * (points[i] - points[i - 1]);
}

double Polyline::heading_at(double s) const {
  if (points.size() < 2) return 0.0;
  size_t i = 1;
  const double sc = std::clamp(s, 0.0, length());
  while (i < cumlen.size() - 1 && cumlen[i] <= sc) ++i;
  const Vec3 d = points[i] - points[i - 1];
  return std::atan2(d.y(), d.x());
}

const Lane* IntersectionMap::find_lane(Approach a, bool inbound, int index) const {
  for (const auto& l : lanes)
    if (l.approach == a && l.inbound == inbound && l.index == index) return &l;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Meshes

namespace {

// Tessellated quad patch: corners in CCW order, n x n cells.
void add_quad_patch(TriMesh& m, const Vec3& c00, const Vec3& c10, const Vec3& c11, const Vec3& c01,
                    int n) {
  const int base = static_cast<int>(m.vertices.size());
  for (int j = 0; j <= n; ++j) {
    const double fy = static_cast<double>(j) / n;
    const Vec3 a = c00 + fy * (c01 - c00);
    const Vec3 b = c10 + fy * (c11 - c10);
    for (int i = 0; i <= n; ++i) {
      const double fx = static_cast<double>(i) / n;
      m.vertices.push_back(a + fx * (b - a));
    }
  }
  const int stride = n + 1;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = base + j * stride + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + stride;
      const int v11 = v01 + 1;
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
}

// Frustum between two horizontal rectangles (a box when both are equal).
void add_frustum(TriMesh& m, const Vec3& lo, const Vec3& hi, const Vec3& top_lo,
                 const Vec3& top_hi, int n) {
  const Vec3 b00(lo.x(), lo.y(), lo.z()), b10(hi.x(), lo.y(), lo.z());
  const Vec3 b11(hi.x(), hi.y(), lo.z()), b01(lo.x(), hi.y(), lo.z());
  const Vec3 t00(top_lo.x(), top_lo.y(), top_lo.z()), t10(top_hi.x(), top_lo.y(), top_lo.z());
  const Vec3 t11(top_hi.x(), top_hi.y(), top_lo.z()), t01(top_lo.x(), top_hi.y(), top_lo.z());
  add_quad_patch(m, b00, b01, b11, b10, n);  // bottom
  add_quad_patch(m, t00, t10, t11, t01, n);  // top
  add_quad_patch(m, b00, b10, t10, t00, n);  // front (y = lo.y)
  add_quad_patch(m, b10, b11, t11, t10, n);  // right
  add_quad_patch(m, b11, b01, t01, t11, n);  // back
  add_quad_patch(m, b01, b00, t00, t01, n);  // left
}

void add_box(TriMesh& m, const Vec3& lo, const Vec3& hi, int n) {
  add_frustum(m, lo, hi, Vec3(lo.x(), lo.y(), hi.z()), Vec3(hi.x(), hi.y(), hi.z()), n);
}

TriMesh vehicle_mesh(double h, double w, double l, int n) {
  TriMesh m;
  const double hl = l / 2, hw = w / 2;
  const double body_top = 0.55 * h;
  add_box(m, Vec3(-hl, -hw, 0.0), Vec3(hl, hw, body_top), n);
  // Cabin: tapered toward the roof, inset from the bumpers.
  add_frustum(m, Vec3(-0.32 * l, -0.42 * w, body_top), Vec3(0.22 * l, 0.42 * w, body_top),
              Vec3(-0.24 * l, -0.38 * w, h), Vec3(0.12 * l, 0.38 * w, h), n);
  m.recompute_aabb();
  return m;
}

TriMesh pedestrian_mesh(double h, double w, double l, int n) {
  TriMesh m;
  const double hl = l / 2, hw = w / 2;
  const double shoulder = 0.82 * h;
  add_box(m, Vec3(-hl, -hw, 0.0), Vec3(hl, hw, shoulder), n);
  add_box(m, Vec3(-0.3 * l, -0.3 * w, shoulder), Vec3(0.3 * l, 0.3 * w, h), n);
  m.recompute_aabb();
  return m;
}

}  // namespace

ActorClass make_vehicle_class(double height, double width, double length, double nominal_speed) {
  ActorClass c;
  c.kind = ActorKind::Vehicle;
  c.height = height;
  c.width = width;
  c.length = length;
  c.nominal_speed = nominal_speed;
  const int tess[3] = {3, 2, 1};
  for (int i = 0; i < 3; ++i) c.lod_meshes[i] = vehicle_mesh(height, width, length, tess[i]);
  return c;
}

ActorClass make_pedestrian_class(double height, double width, double length,
                                 double nominal_speed) {
  ActorClass c;
  c.kind = ActorKind::Pedestrian;
  c.height = height;
  c.width = width;
  c.length = length;
  c.nominal_speed = nominal_speed;
  const int tess[3] = {3, 2, 1};
  for (int i = 0; i < 3; ++i) c.lod_meshes[i] = pedestrian_mesh(height, width, length, tess[i]);
  return c;
}

// ---------------------------------------------------------------------------
// Intersection layout

namespace {

Polyline segment(double x0, double y0, double x1, double y1) {
  return Polyline::from_points({Vec3(x0, y0, 0.0), Vec3(x1, y1, 0.0)});
}

}  // namespace

IntersectionMap build_intersection(const SceneConfig& cfg) {
  if (cfg.lanes_per_dir < 1)
    throw std::invalid_argument("scene.lanes_per_dir: must be >= 1");
  if (!(cfg.road_width > 0))
    throw std::invalid_argument("scene.road_width: must be > 0");
  if (!(cfg.block_size > 0))
    throw std::invalid_argument("scene.block_size: must be > 0");
  if (!(cfg.sidewalk_width > 0))
    throw std::invalid_argument("scene.sidewalk_width: must be > 0");
  if (!(cfg.crosswalk_width > 0))
    throw std::invalid_argument("scene.crosswalk_width: must be > 0");
  if (cfg.crosswalk_gap < 0)
    throw std::invalid_argument("scene.crosswalk_gap: must be >= 0");
  const double cw_span = cfg.crosswalk_gap + cfg.crosswalk_width + 0.5;
  if (cfg.block_size <= cw_span + 5.0)
    throw std::invalid_argument("scene.block_size: too small for the crosswalk band");
  if (!(cfg.lod_near > 0) || !(cfg.lod_near < cfg.lod_far))
    throw std::invalid_argument("scene.lod_near/lod_far: require 0 < near < far");

  IntersectionMap map;
  const int nl = cfg.lanes_per_dir;
  const double lw = cfg.road_width / (2.0 * nl);
  const double hr = cfg.road_width / 2.0;
  const double hm = hr + cfg.block_size;
  const double sw = cfg.sidewalk_width;
  map.lane_width = lw;
  map.half_road_width = hr;
  map.half_map = hm;
  map.crosswalk_width = cfg.crosswalk_width;
  map.lanes_per_dir = nl;

  // Inbound lanes run from the map edge through the junction to its far
  // boundary; outbound lanes continue from there to the edge, so a through
  // route is inbound(A) + outbound(opposite(A)) with no gap.
  for (int a = 0; a < 4; ++a) {
    const auto approach = static_cast<Approach>(a);
    for (int k = 0; k < nl; ++k) {
      const double off = (k + 0.5) * lw;
      Lane in{approach, true, k, {}};
      Lane out{approach, false, k, {}};
      switch (approach) {
        case Approach::North:
          in.path = segment(-off, hm, -off, -hr);
          out.path = segment(off, hr, off, hm);
          break;
        case Approach::East:
          in.path = segment(hm, off, -hr, off);
          out.path = segment(hr, -off, hm, -off);
          break;
        case Approach::South:
          in.path = segment(off, -hm, off, hr);
          out.path = segment(-off, -hr, -off, -hm);
          break;
        case Approach::West:
          in.path = segment(-hm, -off, hr, -off);
          out.path = segment(-hr, off, -hm, off);
          break;
      }
      map.lanes.push_back(std::move(in));
      map.lanes.push_back(std::move(out));
    }
  }

  // Front bumpers hold this far along every inbound lane when not green.
  const double stop_s = cfg.block_size - cw_span;
  map.stop_lines = {stop_s, stop_s, stop_s, stop_s};

  const double cw_mid = hr + cfg.crosswalk_gap + cfg.crosswalk_width / 2.0;
  const double curb = hr + sw / 2.0;
  map.crosswalks.push_back({Approach::North, segment(-curb, cw_mid, curb, cw_mid)});
  map.crosswalks.push_back({Approach::East, segment(cw_mid, curb, cw_mid, -curb)});
  map.crosswalks.push_back({Approach::South, segment(-curb, -cw_mid, curb, -cw_mid)});
  map.crosswalks.push_back({Approach::West, segment(-cw_mid, curb, -cw_mid, -curb)});

  // Sidewalk loops trace each corner block at the walkway centerline.
  const double inner = hr + sw / 2.0;
  const struct {
    double sx, sy;
  } quads[4] = {{+1, +1}, {+1, -1}, {-1, -1}, {-1, +1}};
  for (const auto& q : quads) {
    std::vector<Vec3> ring = {
        Vec3(q.sx * inner, q.sy * inner, 0), Vec3(q.sx * hm, q.sy * inner, 0),
        Vec3(q.sx * hm, q.sy * hm, 0), Vec3(q.sx * inner, q.sy * hm, 0),
        Vec3(q.sx * inner, q.sy * inner, 0)};
    map.sidewalks.push_back(Polyline::from_points(std::move(ring)));
  }

  if (cfg.buildings) {
    // Two boxes per corner block, heights from a fixed pattern.
    const double heights[8] = {14.0, 22.0, 10.0, 26.0, 17.0, 12.0, 20.0, 15.0};
    const double edge = hr + sw + 1.0;  // building line
    const double avail = hm - edge - 2.0;
    int idx = 0;
    for (const auto& q : quads) {
      const double a1 = std::min(20.0, 0.45 * avail), b1 = std::min(16.0, 0.4 * avail);
      const double a2 = std::min(14.0, 0.35 * avail), b2 = std::min(24.0, 0.5 * avail);
      if (avail > 8.0) {
        // Corner building near the junction.
        TriMesh bld1;
        add_box(bld1, Vec3(std::min(q.sx * edge, q.sx * (edge + a1)),
                           std::min(q.sy * edge, q.sy * (edge + b1)), 0.0),
                Vec3(std::max(q.sx * edge, q.sx * (edge + a1)),
                     std::max(q.sy * edge, q.sy * (edge + b1)), heights[idx]),
                1);
        bld1.recompute_aabb();
        map.props.push_back(std::move(bld1));
        // Mid-block building further out.
        TriMesh bld2;
        const double off = a1 + 4.0;
        add_box(bld2, Vec3(std::min(q.sx * (edge + off), q.sx * (edge + off + a2)),
                           std::min(q.sy * edge, q.sy * (edge + b2)), 0.0),
                Vec3(std::max(q.sx * (edge + off), q.sx * (edge + off + a2)),
                     std::max(q.sy * edge, q.sy * (edge + b2)), heights[idx + 1]),
                1);
        bld2.recompute_aabb();
        map.props.push_back(std::move(bld2));
      }
      idx += 2;
    }
  }

  return map;
}

int select_lod(const Vec3& actor_position, const Vec3& cam_position, double d0, double d1) {
  const double d = (actor_position - cam_position).norm();
  if (d < d0) return 0;
  if (d < d1) return 1;
  return 2;
}

namespace {

void append_poly(std::string& out, const Polyline& p) {
  char buf[96];
  for (const auto& v : p.points) {
    std::snprintf(buf, sizeof(buf), " (%.9g,%.9g,%.9g)", v.x(), v.y(), v.z());
    out += buf;
  }
  out += '\n';
}

}  // namespace

std::string serialize_map(const IntersectionMap& map) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "lanes=%zu crosswalks=%zu sidewalks=%zu props=%zu hr=%.9g hm=%.9g lw=%.9g\n",
                map.lanes.size(), map.crosswalks.size(), map.sidewalks.size(), map.props.size(),
                map.half_road_width, map.half_map, map.lane_width);
  out += buf;
  for (const auto& l : map.lanes) {
    std::snprintf(buf, sizeof(buf), "lane a=%d in=%d k=%d:", static_cast<int>(l.approach),
                  l.inbound ? 1 : 0, l.index);
    out += buf;
    append_poly(out, l.path);
  }
  for (const auto& c : map.crosswalks) {
    std::snprintf(buf, sizeof(buf), "crosswalk a=%d:", static_cast<int>(c.arm));
    out += buf;
    append_poly(out, c.path);
  }
  for (const auto& s : map.sidewalks) {
    out += "sidewalk:";
    append_poly(out, s);
  }
  for (int a = 0; a < 4; ++a) {
    std::snprintf(buf, sizeof(buf), "stop a=%d s=%.9g\n", a, map.stop_lines[a]);
    out += buf;
  }
  for (const auto& p : map.props) {
    std::snprintf(buf, sizeof(buf), "prop verts=%zu tris=%zu lo=(%.9g,%.9g,%.9g) hi=(%.9g,%.9g,%.9g)\n",
                  p.vertices.size(), p.triangles.size(), p.aabb.min().x(), p.aabb.min().y(),
                  p.aabb.min().z(), p.aabb.max().x(), p.aabb.max().y(), p.aabb.max().z());
    out += buf;
  }
  return out;
}

}  // namespace streetsim
