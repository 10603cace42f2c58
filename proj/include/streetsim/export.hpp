#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "streetsim/annotate.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Small utilities shared by serialization and the manifest

/// FNV-1a over the raw bytes; used to fingerprint the effective config.
uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

// ---------------------------------------------------------------------------
// Class mapping

/// Pedestrian -> YOLO 0 / "Pedestrian"; vehicle -> YOLO 1 / "Car" ("Car"
/// because KITTI defines no generic "Vehicle" type).
struct ClassMap {
  int yolo_id(ActorKind k) const { return k == ActorKind::Pedestrian ? 0 : 1; }
  const char* kitti_type(ActorKind k) const {
    return k == ActorKind::Pedestrian ? "Pedestrian" : "Car";
  }
  std::optional<ActorKind> from_yolo(int id) const;
  std::optional<ActorKind> from_kitti(const std::string& type) const;
};

// ---------------------------------------------------------------------------
// Label lines

/// A parsed KITTI label line (the 15 standard fields).
struct KittiRecord {
  ActorKind kind = ActorKind::Vehicle;
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  PixelRect bbox;  // left top right bottom, clipped amodal
  double height = 0.0, width = 0.0, length = 0.0;
  Vec3 location = Vec3::Zero();
  double rotation_y = 0.0;
};

/// A parsed (extended-)YOLO line; confidence present only for predictions.
struct YoloLine {
  int class_id = 0;
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;  // normalized, in [0, 1]
  std::optional<double> confidence;
};

/// Formatting: every float at 2 decimals, LF-terminated, 15 fields.
std::string format_kitti_line(const KittiRecord& rec, const ClassMap& classes);
std::string write_kitti_line(const ObjectAnnotation& obj, const ClassMap& classes);

/// Formatting: 5 fields (6 with confidence) at 6 decimals, LF-terminated.
std::string format_yolo_line(const YoloLine& rec);
/// Empty string for a zero-area box (such boxes produce no line).
std::string write_yolo_line(const ObjectAnnotation& obj, int image_width, int image_height,
                            const ClassMap& classes);

/// Inverse of the writers up to the printed quantization. Throw
/// std::invalid_argument citing the line number and field index.
KittiRecord parse_kitti_line(const std::string& line, const ClassMap& classes, int line_no = 1);
YoloLine parse_yolo_line(const std::string& line, int line_no = 1,
                         bool expect_confidence = false);

// ---------------------------------------------------------------------------
// Debug renderer

struct DebugPalette {
  std::array<uint8_t, 3> sky{150, 190, 230};
  std::array<uint8_t, 3> ground{95, 100, 105};
  std::array<uint8_t, 3> prop{130, 125, 120};
  std::array<uint8_t, 3> pedestrian{230, 120, 40};
  std::array<uint8_t, 3> vehicle{60, 120, 220};
  double shade_range_m = 300.0;  // depth shading falls off over this range
  // Backdrop tint per weather (rgb multipliers); night is the dark row.
  std::array<std::array<double, 3>, kWeatherCount> backdrop_tint{{{1.00, 1.00, 1.00},
                                                                  {0.55, 0.60, 0.70},
                                                                  {0.95, 0.95, 1.00},
                                                                  {0.90, 0.75, 0.55},
                                                                  {1.05, 0.95, 0.85},
                                                                  {0.18, 0.20, 0.30}}};
};

/// Flat-shaded binary PPM (P6) of an id/depth buffer: class colors with depth
/// shading over a weather-tinted backdrop. `kinds` maps actor ids to classes;
/// ids it does not list are drawn in the prop color.
std::string render_debug_image(const IdDepthBuffer& buffer, const EnvironmentState& env,
                               const std::unordered_map<int32_t, ActorKind>& kinds,
                               const DebugPalette& palette = {});

// ---------------------------------------------------------------------------
// Dataset tree

struct DatasetLayout {
  std::filesystem::path root;

  std::filesystem::path labels_kitti() const { return root / "labels_kitti"; }
  std::filesystem::path labels_yolo() const { return root / "labels_yolo"; }
  std::filesystem::path meta() const { return root / "meta"; }
  std::filesystem::path images() const { return root / "images"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }

  /// Zero-padded 6-digit frame stem shared across subdirectories.
  static std::string stem(long frame_index);
};

struct ExportOptions {
  bool kitti = true;
  bool yolo = true;
  bool meta = true;
  bool images = false;  // debug PPM per frame
  std::string out_dir = "dataset";
};

/// Writes one file per frame per enabled format plus a final manifest.
/// write_frame may be called from several threads; each frame touches only
/// its own files. Until finalize() runs, the manifest on disk says
/// complete=false, so an interrupted run is recognizable.
class DatasetWriter {
 public:
  /// Creates the directory tree and the incomplete manifest stub.
  /// `effective_config_json` is the post-override config (stored verbatim and
  /// hashed into config_hash).
  DatasetWriter(DatasetLayout layout, ExportOptions options, std::string effective_config_json,
                uint64_t seed, long total_frames);

  void write_frame(const CaptureResult& res,
                   const std::unordered_map<int32_t, ActorKind>& kinds);
  void finalize();

  const DatasetLayout& layout() const { return layout_; }

 private:
  struct FrameEntry {
    long index = 0;
    double time_of_day = 0.0;
    Weather weather = Weather::Clear;
    int pedestrians = 0;
    int vehicles = 0;
  };

  void write_manifest(bool complete) const;

  DatasetLayout layout_;
  ExportOptions options_;
  std::string config_json_;
  uint64_t seed_ = 0;
  long total_frames_ = 0;
  ClassMap classes_;
  std::mutex mutex_;
  std::vector<FrameEntry> entries_;
};

/// Writes `content` atomically enough for our purposes (single open/write),
/// throwing std::runtime_error with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Whole-file read; throws std::runtime_error with the path on failure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace streetsim
