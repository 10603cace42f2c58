#include "streetsim/export.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace streetsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void parse_fail(int line_no, int field, const std::string& what) {
  throw std::invalid_argument("line " + std::to_string(line_no) + ", field " +
                           std::to_string(field) + ": " + what);
}

double number_field(const std::vector<std::string>& fields, int line_no, int field) {
  const std::string& tok = fields[static_cast<size_t>(field - 1)];
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
    parse_fail(line_no, field, "not a number: '" + tok + "'");
  return v;
}

int int_field(const std::vector<std::string>& fields, int line_no, int field) {
  const std::string& tok = fields[static_cast<size_t>(field - 1)];
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
    parse_fail(line_no, field, "not an integer: '" + tok + "'");
  return static_cast<int>(v);
}

double unit_field(const std::vector<std::string>& fields, int line_no, int field) {
  const double v = number_field(fields, line_no, field);
  if (!(v >= 0.0 && v <= 1.0))
    parse_fail(line_no, field, "value out of [0, 1]: '" + fields[static_cast<size_t>(field - 1)] + "'");
  return v;
}

ordered_json rect_json(const PixelRect& r) {
  return ordered_json::array({r.left, r.top, r.right, r.bottom});
}

ordered_json vec3_json(const Vec3& v) {
  return ordered_json::array({v.x(), v.y(), v.z()});
}

ordered_json environment_json(const EnvironmentState& env) {
  ordered_json j;
  j["time_of_day"] = env.time_of_day;
  j["weather"] = to_string(env.weather);
  j["sun_dir"] = vec3_json(env.sun_dir);
  if (std::isinf(env.visibility_limit_m))
    j["visibility_limit_m"] = nullptr;
  else
    j["visibility_limit_m"] = env.visibility_limit_m;
  return j;
}

ordered_json camera_json(const CameraModel& cam) {
  ordered_json j;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < 3; ++i)
    rows.push_back(ordered_json::array({cam.extrinsics(i, 0), cam.extrinsics(i, 1),
                                        cam.extrinsics(i, 2), cam.extrinsics.translation()(i)}));
  j["extrinsics"] = rows;
  return j;
}

ordered_json meta_json(const FrameAnnotation& f, const ClassMap& classes) {
  ordered_json j;
  j["frame_index"] = f.frame_index;
  j["capture_time_s"] = f.capture_time_s;
  j["camera"] = camera_json(f.camera);
  j["environment"] = environment_json(f.environment);
  ordered_json objs = ordered_json::array();
  for (const ObjectAnnotation& o : f.objects) {
    ordered_json oj;
    oj["actor_id"] = o.actor_id;
    oj["class"] = classes.kitti_type(o.kind);
    oj["rect_modal"] = rect_json(o.rect_modal);
    oj["rect_amodal"] = rect_json(o.rect_amodal);
    oj["rect_unclipped"] = rect_json(o.rect_unclipped);
    oj["visible_fraction"] = o.visible_fraction;
    oj["truncation"] = o.truncation;
    oj["occlusion_level"] = o.occlusion_level;
    ordered_json bj;
    bj["location"] = vec3_json(o.bbox3d.location);
    bj["height"] = o.bbox3d.height;
    bj["width"] = o.bbox3d.width;
    bj["length"] = o.bbox3d.length;
    bj["rotation_y"] = o.bbox3d.rotation_y;
    bj["alpha"] = o.bbox3d.alpha;
    oj["bbox3d"] = bj;
    objs.push_back(oj);
  }
  j["objects"] = objs;
  return j;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (const char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<ActorKind> ClassMap::from_yolo(int id) const {
  if (id == 0) return ActorKind::Pedestrian;
  if (id == 1) return ActorKind::Vehicle;
  return std::nullopt;
}

std::optional<ActorKind> ClassMap::from_kitti(const std::string& type) const {
  if (type == "Pedestrian") return ActorKind::Pedestrian;
  if (type == "Car") return ActorKind::Vehicle;
  return std::nullopt;
}

std::string format_kitti_line(const KittiRecord& rec, const ClassMap& classes) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f\n",
                classes.kitti_type(rec.kind), rec.truncated, rec.occluded, rec.alpha,
                rec.bbox.left, rec.bbox.top, rec.bbox.right, rec.bbox.bottom, rec.height,
                rec.width, rec.length, rec.location.x(), rec.location.y(), rec.location.z(),
                rec.rotation_y);
  return buf;
}

std::string write_kitti_line(const ObjectAnnotation& obj, const ClassMap& classes) {
  KittiRecord rec;
  rec.kind = obj.kind;
  rec.truncated = obj.truncation;
  rec.occluded = obj.occlusion_level;
  rec.alpha = obj.bbox3d.alpha;
  rec.bbox = obj.rect_amodal;
  rec.height = obj.bbox3d.height;
  rec.width = obj.bbox3d.width;
  rec.length = obj.bbox3d.length;
  rec.location = obj.bbox3d.location;
  rec.rotation_y = obj.bbox3d.rotation_y;
  return format_kitti_line(rec, classes);
}

std::string format_yolo_line(const YoloLine& rec) {
  char buf[160];
  if (rec.confidence)
    std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f\n", rec.class_id, rec.cx,
                  rec.cy, rec.w, rec.h, *rec.confidence);
  else
    std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", rec.class_id, rec.cx, rec.cy,
                  rec.w, rec.h);
  return buf;
}

std::string write_yolo_line(const ObjectAnnotation& obj, int image_width, int image_height,
                            const ClassMap& classes) {
  const PixelRect& r = obj.rect_amodal;
  if (!(r.area() > 0.0)) return {};
  YoloLine rec;
  rec.class_id = classes.yolo_id(obj.kind);
  rec.cx = 0.5 * (r.left + r.right) / image_width;
  rec.cy = 0.5 * (r.top + r.bottom) / image_height;
  rec.w = r.width() / image_width;
  rec.h = r.height() / image_height;
  return format_yolo_line(rec);
}

KittiRecord parse_kitti_line(const std::string& line, const ClassMap& classes, int line_no) {
  const std::vector<std::string> fields = split_fields(line);
  if (fields.size() != 15)
    throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 15 fields, got " +
                                std::to_string(fields.size()));
  KittiRecord rec;
  const auto kind = classes.from_kitti(fields[0]);
  if (!kind) parse_fail(line_no, 1, "unknown object type: '" + fields[0] + "'");
  rec.kind = *kind;
  rec.truncated = unit_field(fields, line_no, 2);
  rec.occluded = int_field(fields, line_no, 3);
  if (rec.occluded < 0 || rec.occluded > 3)
    parse_fail(line_no, 3, "occlusion level out of {0..3}: '" + fields[2] + "'");
  rec.alpha = number_field(fields, line_no, 4);
  rec.bbox.left = number_field(fields, line_no, 5);
  rec.bbox.top = number_field(fields, line_no, 6);
  rec.bbox.right = number_field(fields, line_no, 7);
  rec.bbox.bottom = number_field(fields, line_no, 8);
  rec.height = number_field(fields, line_no, 9);
  rec.width = number_field(fields, line_no, 10);
  rec.length = number_field(fields, line_no, 11);
  rec.location.x() = number_field(fields, line_no, 12);
  rec.location.y() = number_field(fields, line_no, 13);
  rec.location.z() = number_field(fields, line_no, 14);
  rec.rotation_y = number_field(fields, line_no, 15);
  return rec;
}

YoloLine parse_yolo_line(const std::string& line, int line_no, bool expect_confidence) {
  const std::vector<std::string> fields = split_fields(line);
  const size_t expected = expect_confidence ? 6 : 5;
  if (fields.size() != expected)
    throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                std::to_string(expected) + " fields, got " +
                                std::to_string(fields.size()));
  YoloLine rec;
  rec.class_id = int_field(fields, line_no, 1);
  ClassMap classes;
  if (!classes.from_yolo(rec.class_id))
    parse_fail(line_no, 1, "unknown class id: '" + fields[0] + "'");
  rec.cx = unit_field(fields, line_no, 2);
  rec.cy = unit_field(fields, line_no, 3);
  rec.w = unit_field(fields, line_no, 4);
  rec.h = unit_field(fields, line_no, 5);
  if (expect_confidence) rec.confidence = unit_field(fields, line_no, 6);
  return rec;
}

std::string render_debug_image(const IdDepthBuffer& buffer, const EnvironmentState& env,
                               const std::unordered_map<int32_t, ActorKind>& kinds,
                               const DebugPalette& palette) {
  const int w = buffer.width;
  const int h = buffer.height;
  if (w < 1 || h < 1) throw std::invalid_argument("debug render: buffer is empty");

  char header[64];
  std::snprintf(header, sizeof header, "P6\n%d %d\n255\n", w, h);
  std::string out = header;
  out.reserve(out.size() + static_cast<size_t>(w) * h * 3);

  const auto& tint = palette.backdrop_tint[static_cast<size_t>(env.weather)];
  const int horizon = static_cast<int>(h * 0.45);
  const auto emit = [&out](double v) {
    out.push_back(static_cast<char>(static_cast<uint8_t>(std::clamp(v, 0.0, 255.0))));
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t at = buffer.index(x, y);
      const int32_t id = buffer.id[at];
      if (id == kEmptyId) {
        const auto& base = y < horizon ? palette.sky : palette.ground;
        emit(base[0] * tint[0]);
        emit(base[1] * tint[1]);
        emit(base[2] * tint[2]);
      } else {
        const std::array<uint8_t, 3>* base = &palette.prop;
        if (id > kStaticId) {
          const auto it = kinds.find(id);
          if (it != kinds.end())
            base = it->second == ActorKind::Pedestrian ? &palette.pedestrian
                                                       : &palette.vehicle;
        }
        const double shade =
            std::clamp(1.0 - buffer.depth[at] / palette.shade_range_m, 0.30, 1.0);
        emit((*base)[0] * shade);
        emit((*base)[1] * shade);
        emit((*base)[2] * shade);
      }
    }
  }
  return out;
}

std::string DatasetLayout::stem(long frame_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06ld", frame_index);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw std::runtime_error("read failed: " + path.string());
  return content;
}

DatasetWriter::DatasetWriter(DatasetLayout layout, ExportOptions options,
                             std::string effective_config_json, uint64_t seed,
                             long total_frames)
    : layout_(std::move(layout)),
      options_(std::move(options)),
      config_json_(std::move(effective_config_json)),
      seed_(seed),
      total_frames_(total_frames) {
  ensure_directory(layout_.root);
  if (options_.kitti) ensure_directory(layout_.labels_kitti());
  if (options_.yolo) ensure_directory(layout_.labels_yolo());
  if (options_.meta) ensure_directory(layout_.meta());
  if (options_.images) ensure_directory(layout_.images());
  write_manifest(false);
}

void DatasetWriter::write_frame(const CaptureResult& res,
                                const std::unordered_map<int32_t, ActorKind>& kinds) {
  const FrameAnnotation& f = res.frame;
  const std::string stem = DatasetLayout::stem(f.frame_index);

  if (options_.kitti) {
    std::string text;
    for (const ObjectAnnotation& obj : f.objects) text += write_kitti_line(obj, classes_);
    write_text_file(layout_.labels_kitti() / (stem + ".txt"), text);
  }
  if (options_.yolo) {
    std::string text;
    for (const ObjectAnnotation& obj : f.objects)
      text += write_yolo_line(obj, f.camera.width, f.camera.height, classes_);
    write_text_file(layout_.labels_yolo() / (stem + ".txt"), text);
  }
  if (options_.meta)
    write_text_file(layout_.meta() / (stem + ".json"),
                    meta_json(f, classes_).dump(2) + "\n");
  if (options_.images)
    write_text_file(layout_.images() / (stem + ".ppm"),
                    render_debug_image(res.buffer, f.environment, kinds));

  FrameEntry entry;
  entry.index = f.frame_index;
  entry.time_of_day = f.environment.time_of_day;
  entry.weather = f.environment.weather;
  for (const ObjectAnnotation& obj : f.objects)
    (obj.kind == ActorKind::Pedestrian ? entry.pedestrians : entry.vehicles) += 1;

  const std::lock_guard<std::mutex> lock(mutex_);
  entries_.push_back(entry);
}

void DatasetWriter::write_manifest(bool complete) const {
  ordered_json j;
  j["format_version"] = 1;
  j["seed"] = seed_;
  j["config_hash"] = "fnv1a64:" + hex64(fnv1a64(config_json_));
  j["config"] = config_json_.empty() ? ordered_json::object()
                                     : ordered_json::parse(config_json_);
  j["class_map"] = {
      {"pedestrian", {{"yolo_id", 0}, {"kitti_type", "Pedestrian"}}},
      {"vehicle", {{"yolo_id", 1}, {"kitti_type", "Car"}}},
  };
  j["formats"] = {{"kitti", options_.kitti},
                  {"yolo", options_.yolo},
                  {"meta", options_.meta},
                  {"images", options_.images}};
  j["frame_count"] = total_frames_;
  j["frames_written"] = entries_.size();
  j["complete"] = complete && static_cast<long>(entries_.size()) == total_frames_;
  ordered_json frames = ordered_json::array();
  for (const FrameEntry& e : entries_) {
    ordered_json fe;
    fe["index"] = e.index;
    fe["stem"] = DatasetLayout::stem(e.index);
    fe["time_of_day"] = e.time_of_day;
    fe["weather"] = to_string(e.weather);
    fe["pedestrians"] = e.pedestrians;
    fe["vehicles"] = e.vehicles;
    frames.push_back(fe);
  }
  j["frames"] = frames;
  write_text_file(layout_.manifest(), j.dump(2) + "\n");
}

void DatasetWriter::finalize() {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::sort(entries_.begin(), entries_.end(),
            [](const FrameEntry& a, const FrameEntry& b) { return a.index < b.index; });
  write_manifest(true);
}

}  // namespace streetsim
