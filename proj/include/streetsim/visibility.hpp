#pragma once

#include <cstdint>
#include <vector>

#include "streetsim/geometry.hpp"

namespace streetsim {

// Reserved ids in the id/depth buffer.
inline constexpr int32_t kEmptyId = -1;   // no geometry at this pixel
inline constexpr int32_t kStaticId = 0;   // props: occlude but are not annotated

/// One posed mesh to draw. The mesh is borrowed, not owned; snapshots are
/// frame-scoped and must not outlive the catalog/map that backs them.
struct MeshInstance {
  int32_t id = kStaticId;
  const TriMesh* mesh = nullptr;
  Isometry3 object_to_world = Isometry3::Identity();
};

/// Everything the rasterizer needs for one frame, in draw-independent form.
struct SceneSnapshot {
  std::vector<MeshInstance> instances;
};

struct IdDepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<int32_t> id;    // kEmptyId where nothing was hit
  std::vector<double> depth;  // camera-frame z in meters; +inf where empty

  static IdDepthBuffer make(int width, int height);
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

struct VisibilityStats {
  int32_t id = 0;
  int64_t solo_pixels = 0;     // covered ignoring all other geometry
  int64_t visible_pixels = 0;  // won in the full buffer
  double visible_fraction = 0.0;
  // Inclusive pixel bounds of the winning pixels; valid when visible_pixels > 0.
  int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
};

/// Rasterizes every instance at the given resolution: pixel-center sampling,
/// perspective-correct depth, near-plane clipping, depth ties broken toward
/// the lower id. Intrinsics are rescaled internally when the resolution
/// differs from the camera's native one.
IdDepthBuffer rasterize_ids(const SceneSnapshot& snapshot, const CameraModel& cam,
                            int width, int height);

/// Per-pixel ray casting with identical winner semantics; the slow reference
/// implementation the rasterizer is validated against. Intended for small
/// resolutions.
IdDepthBuffer raycast_oracle(const SceneSnapshot& snapshot, const CameraModel& cam,
                             int width, int height);

/// Rasterizes the full snapshot plus each annotatable actor alone, and
/// reports per-actor coverage. One entry per distinct id > kStaticId,
/// ascending, including all-zero entries for fully off-screen actors.
std::vector<VisibilityStats> visibility_stats(const SceneSnapshot& snapshot,
                                              const CameraModel& cam, int width, int height);

}  // namespace streetsim
