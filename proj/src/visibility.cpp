#include "streetsim/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace streetsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inclusive pixel rectangle a raster pass touched, so callers can cheaply
// reset just that region of a scratch buffer.
struct TouchedRect {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  void extend(int px0, int py0, int px1, int py1) {
    if (x1 < x0) {
      x0 = px0; y0 = py0; x1 = px1; y1 = py1;
    } else {
      x0 = std::min(x0, px0); y0 = std::min(y0, py0);
      x1 = std::max(x1, px1); y1 = std::max(y1, py1);
    }
  }
  bool empty() const { return x1 < x0 || y1 < y0; }
};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

void write_pixel(IdDepthBuffer& buf, size_t at, double z, int32_t id) {
  if (z < buf.depth[at] || (z == buf.depth[at] && id < buf.id[at])) {
    buf.depth[at] = z;
    buf.id[at] = id;
  }
}

// Rasterizes one camera-frame triangle (already in front of the near plane).
void raster_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int32_t id,
                     const CameraModel& cam, IdDepthBuffer& buf, TouchedRect& touched) {
  const PixelPoint pa = project_camera_point(a, cam);
  const PixelPoint pb = project_camera_point(b, cam);
  const PixelPoint pc = project_camera_point(c, cam);

  double area = edge(pa.u, pa.v, pb.u, pb.v, pc.u, pc.v);
  if (area == 0.0) return;
  // Accept both windings: orient so the inside test is w >= 0 throughout.
  const double flip = area > 0.0 ? 1.0 : -1.0;
  area *= flip;

  const double min_u = std::min({pa.u, pb.u, pc.u});
  const double max_u = std::max({pa.u, pb.u, pc.u});
  const double min_v = std::min({pa.v, pb.v, pc.v});
  const double max_v = std::max({pa.v, pb.v, pc.v});
  // Pixel centers sit at integer + 0.5.
  const int px0 = std::max(0, static_cast<int>(std::ceil(min_u - 0.5)));
  const int px1 = std::min(buf.width - 1, static_cast<int>(std::floor(max_u - 0.5)));
  const int py0 = std::max(0, static_cast<int>(std::ceil(min_v - 0.5)));
  const int py1 = std::min(buf.height - 1, static_cast<int>(std::floor(max_v - 0.5)));
  if (px0 > px1 || py0 > py1) return;
  touched.extend(px0, py0, px1, py1);

  const double iza = 1.0 / pa.depth;
  const double izb = 1.0 / pb.depth;
  const double izc = 1.0 / pc.depth;

  for (int py = py0; py <= py1; ++py) {
    const double cy = py + 0.5;
    for (int px = px0; px <= px1; ++px) {
      const double cx = px + 0.5;
      const double w0 = flip * edge(pb.u, pb.v, pc.u, pc.v, cx, cy);
      const double w1 = flip * edge(pc.u, pc.v, pa.u, pa.v, cx, cy);
      const double w2 = flip * edge(pa.u, pa.v, pb.u, pb.v, cx, cy);
      if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
      // Perspective-correct: 1/z interpolates linearly in screen space.
      const double inv_z = (w0 * iza + w1 * izb + w2 * izc) / area;
      write_pixel(buf, buf.index(px, py), 1.0 / inv_z, id);
    }
  }
}

void raster_instance(const MeshInstance& inst, const CameraModel& cam, IdDepthBuffer& buf,
                     TouchedRect& touched) {
  const Isometry3 to_cam = cam.extrinsics * inst.object_to_world;
  const TriMesh& mesh = *inst.mesh;

  std::vector<Vec3> pc(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) pc[i] = to_cam * mesh.vertices[i];

  std::array<Vec3, 4> poly;
  for (const auto& t : mesh.triangles) {
    const std::array<Vec3, 3> tri{pc[t[0]], pc[t[1]], pc[t[2]]};
    const int n = clip_triangle_near(tri, kNearPlane, poly);
    for (int i = 2; i < n; ++i)
      raster_triangle(poly[0], poly[i - 1], poly[i], inst.id, cam, buf, touched);
  }
}

void clear_region(IdDepthBuffer& buf, const TouchedRect& r) {
  if (r.empty()) return;
  for (int y = r.y0; y <= r.y1; ++y) {
    const size_t at = buf.index(r.x0, y);
    std::fill_n(buf.id.begin() + static_cast<ptrdiff_t>(at), r.x1 - r.x0 + 1, kEmptyId);
    std::fill_n(buf.depth.begin() + static_cast<ptrdiff_t>(at), r.x1 - r.x0 + 1, kInf);
  }
}

void check_resolution(int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("rasterizer resolution must be at least 1x1");
}

// Möller–Trumbore with an unnormalized direction whose z component is 1, so
// the ray parameter t is exactly the camera-frame depth.
bool ray_hit(const Vec3& d, const Vec3& v0, const Vec3& v1, const Vec3& v2, double& t_out) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return false;
  const double inv = 1.0 / det;
  const Vec3 s = -v0;  // ray origin is the camera center
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(q) * inv;
  if (t <= kNearPlane) return false;
  t_out = t;
  return true;
}

}  // namespace

IdDepthBuffer IdDepthBuffer::make(int width, int height) {
  check_resolution(width, height);
  IdDepthBuffer buf;
  buf.width = width;
  buf.height = height;
  buf.id.assign(static_cast<size_t>(width) * height, kEmptyId);
  buf.depth.assign(static_cast<size_t>(width) * height, kInf);
  return buf;
}

IdDepthBuffer rasterize_ids(const SceneSnapshot& snapshot, const CameraModel& cam,
                            int width, int height) {
  IdDepthBuffer buf = IdDepthBuffer::make(width, height);
  const CameraModel rc = cam.scaled(width, height);
  TouchedRect touched;
  for (const MeshInstance& inst : snapshot.instances)
    raster_instance(inst, rc, buf, touched);
  return buf;
}

IdDepthBuffer raycast_oracle(const SceneSnapshot& snapshot, const CameraModel& cam,
                             int width, int height) {
  IdDepthBuffer buf = IdDepthBuffer::make(width, height);
  const CameraModel rc = cam.scaled(width, height);

  for (const MeshInstance& inst : snapshot.instances) {
    const Isometry3 to_cam = rc.extrinsics * inst.object_to_world;
    const TriMesh& mesh = *inst.mesh;
    std::vector<Vec3> pc(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) pc[i] = to_cam * mesh.vertices[i];

    for (const auto& t : mesh.triangles) {
      const Vec3& v0 = pc[t[0]];
      const Vec3& v1 = pc[t[1]];
      const Vec3& v2 = pc[t[2]];
      if (v0.z() <= kNearPlane && v1.z() <= kNearPlane && v2.z() <= kNearPlane)
        continue;  // no hit can satisfy t > near

      // Conservative pixel bounds; triangles straddling the near plane get
      // the whole image since their projection is unbounded.
      int px0 = 0, px1 = width - 1, py0 = 0, py1 = height - 1;
      if (v0.z() > kNearPlane && v1.z() > kNearPlane && v2.z() > kNearPlane) {
        const PixelPoint a = project_camera_point(v0, rc);
        const PixelPoint b = project_camera_point(v1, rc);
        const PixelPoint c = project_camera_point(v2, rc);
        px0 = std::max(0, static_cast<int>(std::ceil(std::min({a.u, b.u, c.u}) - 0.5)) - 1);
        px1 = std::min(width - 1,
                       static_cast<int>(std::floor(std::max({a.u, b.u, c.u}) - 0.5)) + 1);
        py0 = std::max(0, static_cast<int>(std::ceil(std::min({a.v, b.v, c.v}) - 0.5)) - 1);
        py1 = std::min(height - 1,
                       static_cast<int>(std::floor(std::max({a.v, b.v, c.v}) - 0.5)) + 1);
      }

      for (int py = py0; py <= py1; ++py) {
        for (int px = px0; px <= px1; ++px) {
          const Vec3 d((px + 0.5 - rc.cx) / rc.fx, (py + 0.5 - rc.cy) / rc.fy, 1.0);
          double t_hit;
          if (ray_hit(d, v0, v1, v2, t_hit))
            write_pixel(buf, buf.index(px, py), t_hit, inst.id);
        }
      }
    }
  }
  return buf;
}

std::vector<VisibilityStats> visibility_stats(const SceneSnapshot& snapshot,
                                              const CameraModel& cam, int width, int height) {
  const IdDepthBuffer full = rasterize_ids(snapshot, cam, width, height);
  const CameraModel rc = cam.scaled(width, height);

  // One stats slot per distinct annotatable id, ascending.
  std::map<int32_t, VisibilityStats> by_id;
  for (const MeshInstance& inst : snapshot.instances)
    if (inst.id > kStaticId) by_id[inst.id].id = inst.id;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int32_t id = full.id[full.index(x, y)];
      if (id <= kStaticId) continue;
      VisibilityStats& s = by_id[id];
      if (s.visible_pixels == 0) {
        s.min_x = s.max_x = x;
        s.min_y = s.max_y = y;
      } else {
        s.min_x = std::min(s.min_x, x);
        s.max_x = std::max(s.max_x, x);
        s.min_y = std::min(s.min_y, y);
        s.max_y = std::max(s.max_y, y);
      }
      ++s.visible_pixels;
    }
  }

  // Solo coverage: each actor rasterized alone into a reusable scratch
  // buffer; only the touched region is counted and reset.
  IdDepthBuffer scratch = IdDepthBuffer::make(width, height);
  for (auto& [id, stats] : by_id) {
    TouchedRect touched;
    for (const MeshInstance& inst : snapshot.instances)
      if (inst.id == id) raster_instance(inst, rc, scratch, touched);
    if (!touched.empty()) {
      for (int y = touched.y0; y <= touched.y1; ++y)
        for (int x = touched.x0; x <= touched.x1; ++x)
          if (scratch.id[scratch.index(x, y)] == id) ++stats.solo_pixels;
      clear_region(scratch, touched);
    }
    stats.visible_fraction =
        stats.solo_pixels == 0
            ? 0.0
            : static_cast<double>(stats.visible_pixels) / static_cast<double>(stats.solo_pixels);
  }

  std::vector<VisibilityStats> out;
  out.reserve(by_id.size());
  for (const auto& [id, stats] : by_id) out.push_back(stats);
  return out;
}

}  // namespace streetsim
