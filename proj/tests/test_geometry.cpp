#include <doctest.h>

#include <array>
#include <cmath>

#include "streetsim/geometry.hpp"
#include "streetsim/rng.hpp"
#include "support.hpp"

using namespace streetsim;
using doctest::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// Angle normalization

TEST_CASE("geometry: wrap_to_pi pins the half-open interval") {
  CHECK(wrap_to_pi(0.0) == 0.0);
  CHECK(wrap_to_pi(-kPi) == Approx(-kPi));
  // +pi belongs to the *next* period, so it folds to the low end.
  CHECK(wrap_to_pi(kPi) == Approx(-kPi));
  CHECK(wrap_to_pi(2.0 * kPi) == Approx(0.0));
  // Frozen spot values (shift by one / minus one full period).
  CHECK(wrap_to_pi(3.5) == Approx(-2.7831853071795862).epsilon(1e-12));
  CHECK(wrap_to_pi(-4.0) == Approx(2.2831853071795862).epsilon(1e-12));
}

TEST_CASE("geometry: wrap_to_pi fuzz against the shifting oracle") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_to_pi(a);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(w == Approx(testsupport::oracle_wrap(a)).epsilon(1e-9));
    // Same direction on the unit circle.
    CHECK(std::sin(w) == Approx(std::sin(a)).epsilon(1e-9));
    CHECK(std::cos(w) == Approx(std::cos(a)).epsilon(1e-9));
  }
}

// ---------------------------------------------------------------------------
// Poses

TEST_CASE("geometry: pose yaw round-trips and rotations stay orthonormal") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const double yaw = rng.uniform(-kPi, kPi);
    const Pose pose = Pose::from_position_yaw(
        {rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0), rng.uniform(0.0, 5.0)}, yaw);
    CHECK(pose.rotation_orthonormal());
    CHECK(pose.yaw() == Approx(yaw).epsilon(1e-12));
  }
}

TEST_CASE("geometry: to_world rotates about +z and then translates") {
  const Pose pose = Pose::from_position_yaw({5.0, -2.0, 1.0}, kPi / 2.0);
  const Vec3 p = pose.to_world() * Vec3(1.0, 0.0, 0.0);  // +x (forward) -> +y
  CHECK(p.x() == Approx(5.0).epsilon(1e-12));
  CHECK(p.y() == Approx(-1.0).epsilon(1e-12));
  CHECK(p.z() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("geometry: world->camera->world round-trips within 1e-9") {
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) {
    const CameraModel cam = CameraModel::rig(
        {rng.uniform(-80.0, 80.0), rng.uniform(-80.0, 80.0), rng.uniform(1.0, 60.0)},
        rng.uniform(-kPi, kPi), rng.uniform(-1.5, 1.5), rng.uniform(500.0, 4000.0), 3840, 2160);
    const Vec3 p(rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0),
                 rng.uniform(-50.0, 50.0));
    const Vec3 back = cam.camera_to_world(cam.world_to_camera(p));
    CHECK((back - p).norm() < 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Pixel rectangles

TEST_CASE("geometry: rect_iou on hand cases") {
  const PixelRect a{0.0, 0.0, 2.0, 1.0};
  CHECK(rect_iou(a, a) == Approx(1.0));
  CHECK(rect_iou(a, PixelRect{10.0, 10.0, 12.0, 11.0}) == 0.0);
  // Half of `a`: intersection 1, union 2.
  CHECK(rect_iou(a, PixelRect{0.0, 0.0, 1.0, 1.0}) == Approx(0.5).epsilon(1e-12));
  // Degenerate boxes never match anything.
  CHECK(rect_iou(PixelRect{3.0, 3.0, 3.0, 8.0}, PixelRect{3.0, 3.0, 3.0, 8.0}) == 0.0);
}

TEST_CASE("geometry: rect_iou fuzz (symmetry and range)") {
  Rng rng(14);
  auto random_rect = [&] {
    const double l = rng.uniform(-50.0, 50.0), t = rng.uniform(-50.0, 50.0);
    return PixelRect{l, t, l + rng.uniform(0.0, 40.0), t + rng.uniform(0.0, 40.0)};
  };
  for (int i = 0; i < 10000; ++i) {
    const PixelRect a = random_rect(), b = random_rect();
    const double iou = rect_iou(a, b);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0 + 1e-12);
    CHECK(iou == Approx(rect_iou(b, a)).epsilon(1e-12));
    CHECK(a.intersect(b).area() <= std::min(a.area(), b.area()) + 1e-9);
    CHECK(a.united(b).contains(a, 1e-12));
    CHECK(a.united(b).contains(b, 1e-12));
  }
}

// ---------------------------------------------------------------------------
// Projection

TEST_CASE("geometry: a point on the optical axis projects to the principal point") {
  const CameraModel cam;  // identity extrinsics, f = 2000, c = (1920, 1080)
  const auto p = project_point(Vec3(0.0, 0.0, 10.0), cam);
  REQUIRE(p.has_value());
  CHECK(p->u == Approx(1920.0));
  CHECK(p->v == Approx(1080.0));
  CHECK(p->depth == Approx(10.0));
}

TEST_CASE("geometry: behind-camera points are reported, not thrown") {
  const CameraModel cam;
  CHECK_FALSE(project_point(Vec3(0.0, 0.0, -5.0), cam).has_value());
  CHECK_FALSE(project_point(Vec3(0.0, 0.0, 0.0), cam).has_value());
  // Exactly at the near plane counts as behind; just past it does not.
  CHECK_FALSE(project_point(Vec3(0.0, 0.0, kNearPlane), cam).has_value());
  CHECK(project_point(Vec3(0.0, 0.0, kNearPlane + 1e-6), cam).has_value());
}

TEST_CASE("geometry: rig puts the camera at the eye looking along yaw/pitch") {
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    const Vec3 eye(rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), rng.uniform(2.0, 50.0));
    const double yaw = rng.uniform(-kPi, kPi);
    const double pitch = rng.uniform(-1.4, 1.4);
    const CameraModel cam = CameraModel::rig(eye, yaw, pitch, 2000.0, 3840, 2160);

    CHECK((cam.position() - eye).norm() < 1e-9);
    CHECK(cam.extrinsics.linear().transpose().isApprox(cam.extrinsics.linear().inverse(), 1e-9));

    // A point straight ahead lands on the principal point.
    const Vec3 forward(std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch),
                       std::sin(pitch));
    const auto center = project_point(Vec3(eye + 20.0 * forward), cam);
    REQUIRE(center.has_value());
    CHECK(center->u == Approx(cam.cx).epsilon(1e-9));
    CHECK(center->v == Approx(cam.cy).epsilon(1e-9));
    CHECK(center->depth == Approx(20.0).epsilon(1e-9));

    // A point nudged toward the horizontal right vector moves +u.
    const Vec3 right(std::sin(yaw), -std::cos(yaw), 0.0);
    const auto off = project_point(Vec3(eye + 20.0 * forward + right), cam);
    REQUIRE(off.has_value());
    CHECK(off->u > cam.cx);
    CHECK(off->v == Approx(cam.cy).epsilon(1e-6));
  }
}

TEST_CASE("geometry: scaled cameras project to proportionally scaled pixels") {
  const CameraModel cam = CameraModel::rig({-30.0, -30.0, 40.0}, 0.7, -0.7, 2000.0, 3840, 2160);
  const CameraModel small = cam.scaled(960, 540);
  CHECK(small.width == 960);
  CHECK(small.fx == Approx(2000.0 * 960.0 / 3840.0));
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(rng.uniform(-60.0, 60.0), rng.uniform(-60.0, 60.0), rng.uniform(0.0, 10.0));
    const auto full = project_point(p, cam);
    const auto quarter = project_point(p, small);
    REQUIRE(full.has_value() == quarter.has_value());
    if (!full) continue;
    CHECK(quarter->u == Approx(full->u * 0.25).epsilon(1e-9));
    CHECK(quarter->v == Approx(full->v * 0.25).epsilon(1e-9));
    CHECK(quarter->depth == Approx(full->depth).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------
// Near-plane clipping

TEST_CASE("geometry: clip_triangle_near by vertex count") {
  std::array<Vec3, 4> out;

  const std::array<Vec3, 3> front{Vec3(0, 0, 1), Vec3(1, 0, 2), Vec3(0, 1, 3)};
  REQUIRE(clip_triangle_near(front, kNearPlane, out) == 3);
  CHECK((out[0] - front[0]).norm() < 1e-12);
  CHECK((out[1] - front[1]).norm() < 1e-12);
  CHECK((out[2] - front[2]).norm() < 1e-12);

  const std::array<Vec3, 3> behind{Vec3(0, 0, -1), Vec3(1, 0, -2), Vec3(0, 1, 0.0)};
  CHECK(clip_triangle_near(behind, kNearPlane, out) == 0);

  // One vertex behind -> quad; two behind -> triangle.
  const std::array<Vec3, 3> one_behind{Vec3(0, 0, -1), Vec3(1, 0, 2), Vec3(0, 1, 2)};
  CHECK(clip_triangle_near(one_behind, kNearPlane, out) == 4);
  const std::array<Vec3, 3> two_behind{Vec3(0, 0, -1), Vec3(1, 0, -1), Vec3(0, 1, 2)};
  CHECK(clip_triangle_near(two_behind, kNearPlane, out) == 3);
}

TEST_CASE("geometry: clipped vertices sit exactly on the near plane") {
  Rng rng(17);
  std::array<Vec3, 4> out;
  for (int i = 0; i < 5000; ++i) {
    const std::array<Vec3, 3> tri{
        Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0)),
        Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0)),
        Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-2.0, 2.0))};
    const int n = clip_triangle_near(tri, kNearPlane, out);
    CHECK(n <= 4);
    for (int k = 0; k < n; ++k) {
      CHECK(out[k].z() >= kNearPlane - 1e-12);
      // Every output vertex is an original front vertex or a new vertex on
      // the plane itself.
      const bool original = (out[k] - tri[0]).norm() < 1e-12 ||
                            (out[k] - tri[1]).norm() < 1e-12 ||
                            (out[k] - tri[2]).norm() < 1e-12;
      if (!original) CHECK(out[k].z() == Approx(kNearPlane).epsilon(1e-12));
    }
  }
}

// ---------------------------------------------------------------------------
// Amodal mesh bounds

TEST_CASE("geometry: amodal rect of a centered unit cube (frozen oracle)") {
  // Unit cube centered at camera-frame (0, 0, 10); the near face at z = 9.5
  // bounds the projection: 2000 * 0.5 / 9.5 = 105.26315789473684 px.
  // box_mesh spans [0, 1] in z and is already centered in x/y.
  TriMesh cube = testsupport::box_mesh(1.0, 1.0, 1.0);
  for (Vec3& v : cube.vertices) v = Vec3(v.x(), v.y(), v.z() + 9.5);
  cube.recompute_aabb();

  const CameraModel cam;  // identity extrinsics
  const auto rect = project_mesh_amodal(cube, Pose{}, cam);
  REQUIRE(rect.has_value());
  CHECK(rect->left == Approx(1814.7368421052631).epsilon(1e-12));
  CHECK(rect->top == Approx(974.7368421052631).epsilon(1e-12));
  CHECK(rect->right == Approx(2025.2631578947369).epsilon(1e-12));
  CHECK(rect->bottom == Approx(1185.2631578947369).epsilon(1e-12));
}

TEST_CASE("geometry: amodal rect equals the 8-corner brute force when fully in front") {
  Rng rng(18);
  int checked = 0;
  while (checked < 1000) {
    const TriMesh mesh = testsupport::box_mesh(rng.uniform(0.3, 6.0), rng.uniform(0.3, 6.0),
                                               rng.uniform(0.3, 6.0));
    const Pose pose = Pose::from_position_yaw(
        {rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), 0.0}, rng.uniform(-kPi, kPi));
    const CameraModel cam = CameraModel::rig({-60.0, 0.0, 15.0}, rng.uniform(-0.4, 0.4),
                                             rng.uniform(-0.5, -0.1), 2000.0, 3840, 2160);
    // Keep only samples with the whole box well in front of the camera.
    bool in_front = true;
    for (const Vec3& v : mesh.vertices)
      in_front = in_front && cam.world_to_camera(pose.to_world() * v).z() > 1.0;
    if (!in_front) continue;
    ++checked;

    const auto rect = project_mesh_amodal(mesh, pose, cam);
    REQUIRE(rect.has_value());
    const PixelRect oracle = testsupport::brute_force_rect(mesh, pose, cam);
    CHECK(rect->left == Approx(oracle.left).epsilon(1e-9));
    CHECK(rect->top == Approx(oracle.top).epsilon(1e-9));
    CHECK(rect->right == Approx(oracle.right).epsilon(1e-9));
    CHECK(rect->bottom == Approx(oracle.bottom).epsilon(1e-9));
  }
}

TEST_CASE("geometry: amodal rect handles near-plane straddling and full rejection") {
  const CameraModel cam;
  TriMesh cube = testsupport::box_mesh(1.0, 1.0, 1.0);

  // Straddling: half the cube behind the camera still yields finite bounds
  // covering the visible half.
  TriMesh straddle = cube;
  for (Vec3& v : straddle.vertices) v = Vec3(v.x(), v.y(), v.z() - 0.5);
  straddle.recompute_aabb();
  const auto rect = project_mesh_amodal(straddle, Pose{}, cam);
  REQUIRE(rect.has_value());
  CHECK(std::isfinite(rect->left));
  CHECK(std::isfinite(rect->right));
  CHECK(rect->right > rect->left);

  // Fully behind -> nothing to report.
  TriMesh behind = cube;
  for (Vec3& v : behind.vertices) v = Vec3(v.x(), v.y(), v.z() - 10.0);
  behind.recompute_aabb();
  CHECK_FALSE(project_mesh_amodal(behind, Pose{}, cam).has_value());
}

// ---------------------------------------------------------------------------
// Observation angle

TEST_CASE("geometry: alpha_angle hand cases and frozen value") {
  // Straight ahead, facing along the ray: zero by construction.
  CHECK(alpha_angle(Vec3(0.0, 1.5, 20.0), 0.0) == Approx(0.0));
  // Frozen: ry = 0.3, atan2(3, 10) = 0.29145679..., difference 0.00854320...
  CHECK(alpha_angle(Vec3(3.0, 0.0, 10.0), 0.3) == Approx(0.00854320552213289).epsilon(1e-12));
  // Wraps: both terms near +-pi land back in range.
  const double a = alpha_angle(Vec3(-1.0, 0.0, 0.01), kPi - 0.05);
  CHECK(a >= -kPi);
  CHECK(a < kPi);
  CHECK_THROWS_AS(alpha_angle(Vec3(1.0, 0.0, 0.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_angle(Vec3(1.0, 0.0, -3.0), 0.0), std::invalid_argument);
}
