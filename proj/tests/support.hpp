#pragma once

// Shared test scaffolding: independent oracles (hand-derived math, not the
// library internals), scene builders for randomized visibility checks, and
// helpers for driving the installed CLI binary.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "streetsim/annotate.hpp"
#include "streetsim/export.hpp"
#include "streetsim/rng.hpp"
#include "streetsim/scene.hpp"
#include "streetsim/traffic.hpp"
#include "streetsim/visibility.hpp"

namespace testsupport {

using namespace streetsim;

// ---------------------------------------------------------------------------
// Geometry oracles

/// Brute-force amodal rectangle: project every vertex with positive depth
/// through the pinhole equations directly. Valid only when the whole mesh is
/// comfortably in front of the camera (no clipping involved).
inline PixelRect brute_force_rect(const TriMesh& mesh, const Pose& pose,
                                  const CameraModel& cam) {
  PixelRect rect{1e30, 1e30, -1e30, -1e30};
  const Isometry3 to_cam = cam.extrinsics * pose.to_world();
  for (const Vec3& v : mesh.vertices) {
    const Vec3 p = to_cam * v;
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    const double w = cam.fy * p.y() / p.z() + cam.cy;
    rect.left = std::min(rect.left, u);
    rect.top = std::min(rect.top, w);
    rect.right = std::max(rect.right, u);
    rect.bottom = std::max(rect.bottom, w);
  }
  return rect;
}

/// Independent angle normalization into [-pi, pi) by repeated shifting.
inline double oracle_wrap(double a) {
  const double two_pi = 6.283185307179586476925286766559;
  while (a >= 3.14159265358979323846) a -= two_pi;
  while (a < -3.14159265358979323846) a += two_pi;
  return a;
}

// ---------------------------------------------------------------------------
// Traffic-light oracle

/// Closed-form phase colors, written as direct window tests on t mod period
/// rather than mirroring the library's branch structure.
struct LightOracle {
  LightColor ns, ew;
};

inline LightOracle light_oracle(double t, double g, double y, double r) {
  const double period = 2.0 * (g + y + r);
  double p = t - period * std::floor(t / period);
  LightOracle o{LightColor::Red, LightColor::Red};
  if (p >= 0.0 && p < g) o.ns = LightColor::Green;
  if (p >= g && p < g + y) o.ns = LightColor::Yellow;
  if (p >= g + y + r && p < 2.0 * g + y + r) o.ew = LightColor::Green;
  if (p >= 2.0 * g + y + r && p < 2.0 * g + 2.0 * y + r) o.ew = LightColor::Yellow;
  return o;
}

// ---------------------------------------------------------------------------
// Average-precision oracle

/// Textbook all-points interpolated AP over an explicit PR curve: sum of
/// (recall step) x (max precision at or beyond that recall). Independent of
/// the library's single-division formulation.
inline double oracle_average_precision(const std::vector<char>& tp_desc_conf, long n_gt) {
  if (n_gt <= 0) return 0.0;
  std::vector<double> recall, precision;
  long tp = 0;
  for (size_t i = 0; i < tp_desc_conf.size(); ++i) {
    if (tp_desc_conf[i]) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < recall.size(); ++i) {
    if (recall[i] <= prev_recall) continue;
    double best = 0.0;
    for (size_t j = i; j < precision.size(); ++j) best = std::max(best, precision[j]);
    ap += (recall[i] - prev_recall) * best;
    prev_recall = recall[i];
  }
  return ap;
}

// ---------------------------------------------------------------------------
// Random visibility scenes

/// A free-standing box mesh (w x l footprint, h tall, origin at bottom-face
/// center), used to improvise actors and occluders without the scene module.
inline TriMesh box_mesh(double length, double width, double height) {
  TriMesh m;
  const double hl = length / 2.0, hw = width / 2.0;
  m.vertices = {{-hl, -hw, 0.0}, {hl, -hw, 0.0}, {hl, hw, 0.0},     {-hl, hw, 0.0},
                {-hl, -hw, height}, {hl, -hw, height}, {hl, hw, height}, {-hl, hw, height}};
  m.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                 {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  m.recompute_aabb();
  return m;
}

/// Owns the meshes its snapshot refers to (SceneSnapshot borrows).
struct RandomScene {
  std::vector<TriMesh> meshes;
  SceneSnapshot snapshot;
  CameraModel camera;
};

/// Seeded scene in the acceptance-criterion shape: 5-15 box actors plus 4
/// larger building-like occluders, viewed by a medium-altitude camera.
inline RandomScene random_scene(uint64_t seed) {
  Rng rng(seed);
  RandomScene scene;
  const int actors = 5 + static_cast<int>(rng.uniform_index(11));
  const int buildings = 4;
  scene.meshes.reserve(static_cast<size_t>(actors + buildings));

  for (int i = 0; i < buildings; ++i) {
    scene.meshes.push_back(
        box_mesh(rng.uniform(6.0, 18.0), rng.uniform(6.0, 18.0), rng.uniform(4.0, 16.0)));
  }
  for (int i = 0; i < actors; ++i) {
    if (rng.uniform() < 0.5)
      scene.meshes.push_back(box_mesh(4.5, 1.8, 1.5));  // car-sized
    else
      scene.meshes.push_back(box_mesh(0.5, 0.5, 1.8));  // pedestrian-sized
  }

  for (int i = 0; i < buildings; ++i) {
    Pose pose = Pose::from_position_yaw(
        {rng.uniform(-25.0, 25.0), rng.uniform(-25.0, 25.0), 0.0},
        rng.uniform(-3.14, 3.14));
    scene.snapshot.instances.push_back({kStaticId, &scene.meshes[static_cast<size_t>(i)],
                                        pose.to_world()});
  }
  for (int i = 0; i < actors; ++i) {
    Pose pose = Pose::from_position_yaw(
        {rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), 0.0},
        rng.uniform(-3.14, 3.14));
    scene.snapshot.instances.push_back(
        {i + 1, &scene.meshes[static_cast<size_t>(buildings + i)], pose.to_world()});
  }

  scene.camera = CameraModel::rig({rng.uniform(-60.0, -40.0), rng.uniform(-60.0, -40.0),
                                   rng.uniform(20.0, 45.0)},
                                  rng.uniform(0.5, 1.1), rng.uniform(-0.9, -0.4), 2000.0,
                                  3840, 2160);
  return scene;
}

// ---------------------------------------------------------------------------
// Filesystem + CLI helpers

/// Fresh directory under the system temp root; removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
};

/// Path of the CLI binary: $STREETSIM_CLI (set by ctest) or the build-tree
/// location relative to the test binary.
inline std::string cli_path() {
  if (const char* env = std::getenv("STREETSIM_CLI")) return env;
  return "../tools/streetsim";
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

inline CommandResult run_command(const std::string& command) {
  CommandResult res;
  const std::string full = command + " 2>&1";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) return res;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) res.output.append(buf, n);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  return res;
}

/// Hash of every regular file in a tree, keyed by relative path — the
/// byte-identity fingerprint used by the determinism checks.
inline std::map<std::string, uint64_t> tree_fingerprint(const std::filesystem::path& root) {
  std::map<std::string, uint64_t> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[std::filesystem::relative(entry.path(), root).string()] =
        fnv1a64(read_text_file(entry.path()));
  }
  return out;
}

}  // namespace testsupport
