#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "streetsim/types.hpp"

namespace streetsim {

/// Depth below which geometry is treated as behind the camera. Triangles
/// straddling this plane are clipped to it before projection.
inline constexpr double kNearPlane = 0.01;

// ---------------------------------------------------------------------------
// Pose

/// Rigid placement of an actor in the world: position of the mesh origin
/// (bottom-face center, on the ground) plus a rotation about the world
/// up-axis. The rotation is stored as a matrix; yaw is the canonical
/// parameter actors are driven by.
template <typename Scalar>
struct PoseT {
  Vec3T<Scalar> position = Vec3T<Scalar>::Zero();
  Mat3T<Scalar> rotation = Mat3T<Scalar>::Identity();

  static PoseT from_position_yaw(const Vec3T<Scalar>& p, Scalar yaw) {
    PoseT pose;
    pose.position = p;
    pose.rotation =
        Eigen::AngleAxis<Scalar>(wrap_to_pi(yaw), Vec3T<Scalar>::UnitZ()).toRotationMatrix();
    return pose;
  }

  Scalar yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

  /// Local -> world transform.
  IsometryT<Scalar> to_world() const {
    IsometryT<Scalar> iso = IsometryT<Scalar>::Identity();
    iso.linear() = rotation;
    iso.translation() = position;
    return iso;
  }

  bool rotation_orthonormal(Scalar tol = Scalar(1e-9)) const {
    return (rotation * rotation.transpose() - Mat3T<Scalar>::Identity()).cwiseAbs().maxCoeff() <=
           tol;
  }
};

using Pose = PoseT<double>;

// ---------------------------------------------------------------------------
// PixelRect

/// Axis-aligned rectangle in continuous pixel coordinates. Unclipped
/// (amodal) rects may extend outside the image.
template <typename Scalar>
struct PixelRectT {
  Scalar left = 0, top = 0, right = 0, bottom = 0;

  Scalar width() const { return right - left; }
  Scalar height() const { return bottom - top; }
  Scalar area() const { return width() * height(); }
  bool empty() const { return width() <= Scalar(0) || height() <= Scalar(0); }
  Vec2T<Scalar> center() const {
    return {(left + right) / Scalar(2), (top + bottom) / Scalar(2)};
  }

  bool contains(const PixelRectT& r, Scalar tol = Scalar(0)) const {
    return r.left >= left - tol && r.top >= top - tol && r.right <= right + tol &&
           r.bottom <= bottom + tol;
  }

  /// Intersection; degenerate results are clamped to zero extent.
  PixelRectT intersect(const PixelRectT& r) const {
    PixelRectT out;
    out.left = std::max(left, r.left);
    out.top = std::max(top, r.top);
    out.right = std::max(out.left, std::min(right, r.right));
    out.bottom = std::max(out.top, std::min(bottom, r.bottom));
    return out;
  }

  PixelRectT united(const PixelRectT& r) const {
    return {std::min(left, r.left), std::min(top, r.top), std::max(right, r.right),
            std::max(bottom, r.bottom)};
  }
};

using PixelRect = PixelRectT<double>;

/// Intersection-over-union; 0 when the union has zero area.
template <typename Scalar>
Scalar rect_iou(const PixelRectT<Scalar>& a, const PixelRectT<Scalar>& b) {
  const Scalar inter = a.intersect(b).area();
  const Scalar uni = a.area() + b.area() - inter;
  return uni > Scalar(0) ? inter / uni : Scalar(0);
}

// ---------------------------------------------------------------------------
// TriMesh

/// Indexed triangle mesh in the actor-local frame (x forward along length,
/// y left, z up, origin at the bottom-face center). Stray vertices without
/// triangles are permitted and still contribute to projected bounds.
template <typename Scalar>
struct TriMeshT {
  std::vector<Vec3T<Scalar>> vertices;
  std::vector<std::array<int, 3>> triangles;
  AlignedBox3T<Scalar> aabb;

  void recompute_aabb() {
    aabb.setEmpty();
    for (const auto& v : vertices) aabb.extend(v);
  }

  bool indices_valid() const {
    const int n = static_cast<int>(vertices.size());
    for (const auto& t : triangles)
      for (int i : t)
        if (i < 0 || i >= n) return false;
    return true;
  }
};

using TriMesh = TriMeshT<double>;

// ---------------------------------------------------------------------------
// CameraModel

/// Pinhole camera: rigid world->camera transform (camera frame: x right,
/// y down, z forward) plus focal lengths, principal point, and the output
/// resolution. Matches the KITTI camera convention so exports need no extra
/// rotation.
template <typename Scalar>
struct CameraModelT {
  IsometryT<Scalar> extrinsics = IsometryT<Scalar>::Identity();  // world -> camera
  Scalar fx = Scalar(2000), fy = Scalar(2000);
  Scalar cx = Scalar(1920), cy = Scalar(1080);
  int width = 3840, height = 2160;

  bool valid() const {
    return fx > Scalar(0) && fy > Scalar(0) && width >= 1 && height >= 1 && cx >= Scalar(0) &&
           cx < Scalar(width) && cy >= Scalar(0) && cy < Scalar(height);
  }

  Vec3T<Scalar> world_to_camera(const Vec3T<Scalar>& p) const { return extrinsics * p; }

  Vec3T<Scalar> camera_to_world(const Vec3T<Scalar>& p) const {
    return extrinsics.inverse() * p;
  }

  /// Camera center in world coordinates.
  Vec3T<Scalar> position() const { return extrinsics.inverse().translation(); }

  PixelRectT<Scalar> image_rect() const {
    return {Scalar(0), Scalar(0), Scalar(width), Scalar(height)};
  }

  /// Same viewpoint at a different resolution (intrinsics scale with it).
  CameraModelT scaled(int w, int h) const {
    CameraModelT out = *this;
    const Scalar sx = Scalar(w) / Scalar(width);
    const Scalar sy = Scalar(h) / Scalar(height);
    out.fx = fx * sx;
    out.fy = fy * sy;
    out.cx = cx * sx;
    out.cy = cy * sy;
    out.width = w;
    out.height = h;
    return out;
  }

  /// Builds a tripod rig: camera at `eye` (world, z-up), heading `yaw`
  /// (about world z, 0 = +x), tilted by `pitch` (negative looks down).
  /// The principal point defaults to the image center.
  static CameraModelT rig(const Vec3T<Scalar>& eye, Scalar yaw, Scalar pitch, Scalar focal_px,
                          int w, int h) {
    CameraModelT cam;
    cam.fx = cam.fy = focal_px;
    cam.width = w;
    cam.height = h;
    cam.cx = Scalar(w) / Scalar(2);
    cam.cy = Scalar(h) / Scalar(2);

    const Vec3T<Scalar> forward(std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch),
                                std::sin(pitch));
    // Horizontal right vector; stays well-defined at pitch = +-90 deg.
    const Vec3T<Scalar> right(std::sin(yaw), -std::cos(yaw), Scalar(0));
    const Vec3T<Scalar> down = forward.cross(right).normalized();

    Mat3T<Scalar> r_wc;
    r_wc.row(0) = right.transpose();
    r_wc.row(1) = down.transpose();
    r_wc.row(2) = forward.transpose();
    cam.extrinsics = IsometryT<Scalar>::Identity();
    cam.extrinsics.linear() = r_wc;
    cam.extrinsics.translation() = -(r_wc * eye);
    return cam;
  }
};

using CameraModel = CameraModelT<double>;

// ---------------------------------------------------------------------------
// Projection

template <typename Scalar>
struct PixelPointT {
  Scalar u = 0, v = 0;
  Scalar depth = 0;  // camera-frame Z, meters
};

using PixelPoint = PixelPointT<double>;

/// Projects a camera-frame point. Assumes z > 0.
template <typename Scalar>
PixelPointT<Scalar> project_camera_point(const Vec3T<Scalar>& pc, const CameraModelT<Scalar>& cam) {
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy, pc.z()};
}

/// Pinhole projection of a world point; nullopt marks behind-camera
/// (a normal outcome, not an error).
template <typename Scalar>
std::optional<PixelPointT<Scalar>> project_point(const Vec3T<Scalar>& p_world,
                                                 const CameraModelT<Scalar>& cam) {
  const Vec3T<Scalar> pc = cam.world_to_camera(p_world);
  if (pc.z() <= Scalar(kNearPlane)) return std::nullopt;
  return project_camera_point(pc, cam);
}

/// Clips a camera-frame triangle against z = near. Writes up to 4 vertices,
/// returns the count (0 when fully behind).
template <typename Scalar>
int clip_triangle_near(const std::array<Vec3T<Scalar>, 3>& tri, Scalar near_z,
                       std::array<Vec3T<Scalar>, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3T<Scalar>& a = tri[i];
    const Vec3T<Scalar>& b = tri[(i + 1) % 3];
    const bool a_in = a.z() > near_z;
    const bool b_in = b.z() > near_z;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const Scalar t = (near_z - a.z()) / (b.z() - a.z());
      Vec3T<Scalar> p = a + t * (b - a);
      p.z() = near_z;  // exact, guards against roundoff below the plane
      out[n++] = p;
    }
  }
  return n;
}

/// Unclipped (amodal) screen-space bounds of a posed mesh: min/max over the
/// projections of all vertices in front of the near plane, with straddling
/// triangles clipped to it first. nullopt when nothing lies in front.
template <typename Scalar>
std::optional<PixelRectT<Scalar>> project_mesh_amodal(const TriMeshT<Scalar>& mesh,
                                                      const PoseT<Scalar>& pose,
                                                      const CameraModelT<Scalar>& cam) {
  const IsometryT<Scalar> local_to_cam = cam.extrinsics * pose.to_world();
  const Scalar near_z = Scalar(kNearPlane);

  std::vector<Vec3T<Scalar>> pc(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) pc[i] = local_to_cam * mesh.vertices[i];

  bool any = false;
  PixelRectT<Scalar> rect{std::numeric_limits<Scalar>::max(), std::numeric_limits<Scalar>::max(),
                          std::numeric_limits<Scalar>::lowest(),
                          std::numeric_limits<Scalar>::lowest()};
  auto extend = [&](const PixelPointT<Scalar>& p) {
    rect.left = std::min(rect.left, p.u);
    rect.top = std::min(rect.top, p.v);
    rect.right = std::max(rect.right, p.u);
    rect.bottom = std::max(rect.bottom, p.v);
    any = true;
  };

  for (const auto& v : pc)
    if (v.z() > near_z) extend(project_camera_point(v, cam));

  std::array<Vec3T<Scalar>, 4> clipped;
  for (const auto& t : mesh.triangles) {
    const std::array<Vec3T<Scalar>, 3> tri{pc[t[0]], pc[t[1]], pc[t[2]]};
    const bool straddles = (tri[0].z() > near_z || tri[1].z() > near_z || tri[2].z() > near_z) &&
                           (tri[0].z() <= near_z || tri[1].z() <= near_z || tri[2].z() <= near_z);
    if (!straddles) continue;
    const int n = clip_triangle_near(tri, near_z, clipped);
    for (int i = 0; i < n; ++i)
      if (clipped[i].z() >= near_z) extend(project_camera_point(clipped[i], cam));
  }

  if (!any) return std::nullopt;
  return rect;
}

/// KITTI observation angle: object yaw relative to the viewing ray,
/// alpha = rotation_y - atan2(X, Z), wrapped to [-pi, pi). The camera-frame
/// location must be in front of the camera.
template <typename Scalar>
Scalar alpha_angle(const Vec3T<Scalar>& location_cam, Scalar rotation_y) {
  if (location_cam.z() <= Scalar(0))
    throw std::invalid_argument("alpha_angle: location must be in front of the camera");
  return wrap_to_pi(rotation_y - std::atan2(location_cam.x(), location_cam.z()));
}

}  // namespace streetsim
