#include "streetsim/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace streetsim {

using ordered_json = nlohmann::ordered_json;

namespace {

PixelRect denormalize(const YoloLine& rec, int image_width, int image_height) {
  PixelRect r;
  r.left = (rec.cx - 0.5 * rec.w) * image_width;
  r.right = (rec.cx + 0.5 * rec.w) * image_width;
  r.top = (rec.cy - 0.5 * rec.h) * image_height;
  r.bottom = (rec.cy + 0.5 * rec.h) * image_height;
  return r;
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = text.find('\n', start);
    const std::string line =
        text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return lines;
}

const char* class_name(int class_id) {
  return class_id == 0 ? "pedestrian" : class_id == 1 ? "vehicle" : "unknown";
}

template <typename LoadFile, typename Out>
void load_dir(const std::filesystem::path& dir, LoadFile&& load_file, Out& out) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) out[path.stem().string()] = load_file(path);
}

}  // namespace

MatchOutcome match_detections(const std::vector<GtBox>& gt, const std::vector<Detection>& preds,
                              double iou_thr) {
  MatchOutcome out;
  out.tp.assign(preds.size(), 0);
  out.matched_gt.assign(preds.size(), -1);

  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&preds](size_t a, size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  std::vector<char> gt_taken(gt.size(), 0);
  for (const size_t pi : order) {
    const Detection& p = preds[pi];
    int best = -1;
    double best_iou = 0.0;
    for (size_t gi = 0; gi < gt.size(); ++gi) {
      if (gt_taken[gi] || gt[gi].class_id != p.class_id) continue;
      const double iou = rect_iou(p.rect, gt[gi].rect);
      if (iou >= iou_thr && iou > best_iou) {
        best = static_cast<int>(gi);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      gt_taken[static_cast<size_t>(best)] = 1;
      out.tp[pi] = 1;
      out.matched_gt[pi] = best;
    }
  }
  out.fn = static_cast<long>(gt.size()) -
           std::count(out.tp.begin(), out.tp.end(), static_cast<char>(1));
  return out;
}

double average_precision(const std::vector<char>& tp_flags, long n_gt) {
  if (n_gt <= 0) return 0.0;

  // Precision after each prediction, then the monotone envelope from the
  // right; AP sums the envelope at each TP over recall steps of 1/n_gt.
  std::vector<double> precision(tp_flags.size());
  long tp = 0;
  for (size_t i = 0; i < tp_flags.size(); ++i) {
    if (tp_flags[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  double envelope = 0.0;
  double sum = 0.0;
  for (size_t i = tp_flags.size(); i-- > 0;) {
    envelope = std::max(envelope, precision[i]);
    if (tp_flags[i]) sum += envelope;
  }
  return sum / static_cast<double>(n_gt);
}

EvalReport map_at_50(const GroundTruth& gt, const Predictions& preds, double iou_thr) {
  std::vector<std::string> unknown;
  for (const auto& [stem, boxes] : preds)
    if (gt.find(stem) == gt.end()) unknown.push_back(stem);
  if (!unknown.empty()) {
    std::string msg = "predictions reference frames absent from the ground truth:";
    for (const std::string& s : unknown) msg += " " + s;
    throw std::invalid_argument(msg);
  }

  struct Scored {
    double confidence;
    char tp;
  };
  std::map<int, std::vector<Scored>> scored_by_class;
  std::map<int, long> gt_by_class;
  EvalReport report;

  static const std::vector<Detection> kNoDetections;
  for (const auto& [stem, gt_boxes] : gt) {
    const auto pit = preds.find(stem);
    const std::vector<Detection>& frame_preds =
        pit == preds.end() ? kNoDetections : pit->second;

    for (const GtBox& box : gt_boxes) gt_by_class[box.class_id] += 1;

    const MatchOutcome outcome = match_detections(gt_boxes, frame_preds, iou_thr);
    for (size_t pi = 0; pi < frame_preds.size(); ++pi) {
      scored_by_class[frame_preds[pi].class_id].push_back(
          {frame_preds[pi].confidence, outcome.tp[pi]});
      if (outcome.tp[pi])
        report.matches.push_back({stem, frame_preds[pi].class_id, static_cast<int>(pi),
                                  outcome.matched_gt[pi]});
    }
  }

  std::set<int> classes;
  for (const auto& [c, n] : gt_by_class) classes.insert(c);
  for (const auto& [c, s] : scored_by_class) classes.insert(c);

  double ap_sum = 0.0;
  long ap_classes = 0;
  for (const int c : classes) {
    auto& scored = scored_by_class[c];  // may create an empty list; fine
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });
    std::vector<char> flags(scored.size());
    for (size_t i = 0; i < scored.size(); ++i) flags[i] = scored[i].tp;

    ClassEval ce;
    ce.class_id = c;
    ce.n_gt = gt_by_class.count(c) ? gt_by_class[c] : 0;
    ce.tp = std::count(flags.begin(), flags.end(), static_cast<char>(1));
    ce.fp = static_cast<long>(flags.size()) - ce.tp;
    ce.fn = ce.n_gt - ce.tp;
    if (ce.n_gt > 0) {
      ce.ap_percent = 100.0 * average_precision(flags, ce.n_gt);
      ap_sum += *ce.ap_percent;
      ++ap_classes;
    } else if (!flags.empty()) {
      ce.ap_percent = 0.0;  // predictions for a class absent from ground truth
    }
    report.per_class.push_back(std::move(ce));
  }
  report.map_percent = ap_classes > 0 ? ap_sum / static_cast<double>(ap_classes) : 0.0;
  return report;
}

std::string report_json(const EvalReport& report) {
  ordered_json j;
  ordered_json classes = ordered_json::array();
  for (const ClassEval& ce : report.per_class) {
    ordered_json cj;
    cj["class_id"] = ce.class_id;
    cj["class"] = class_name(ce.class_id);
    if (ce.ap_percent)
      cj["ap_percent"] = *ce.ap_percent;
    else
      cj["ap_percent"] = nullptr;
    cj["ground_truth"] = ce.n_gt;
    cj["tp"] = ce.tp;
    cj["fp"] = ce.fp;
    cj["fn"] = ce.fn;
    classes.push_back(cj);
  }
  j["per_class"] = classes;
  j["map_percent"] = report.map_percent;
  ordered_json matches = ordered_json::array();
  for (const MatchedPair& m : report.matches) {
    ordered_json mj;
    mj["stem"] = m.stem;
    mj["class_id"] = m.class_id;
    mj["pred_index"] = m.pred_index;
    mj["gt_index"] = m.gt_index;
    matches.push_back(mj);
  }
  j["matches"] = matches;
  return j.dump(2) + "\n";
}

std::string format_report(const EvalReport& report) {
  std::string out;
  char line[128];
  for (const ClassEval& ce : report.per_class) {
    if (ce.ap_percent)
      std::snprintf(line, sizeof line, "%-10s AP@0.5: %5.1f  (gt %ld, tp %ld, fp %ld, fn %ld)\n",
                    class_name(ce.class_id), *ce.ap_percent, ce.n_gt, ce.tp, ce.fp, ce.fn);
    else
      std::snprintf(line, sizeof line, "%-10s AP@0.5:   n/a  (gt %ld, tp %ld, fp %ld, fn %ld)\n",
                    class_name(ce.class_id), ce.n_gt, ce.tp, ce.fp, ce.fn);
    out += line;
  }
  std::snprintf(line, sizeof line, "mAP@0.5: %.1f\n", report.map_percent);
  out += line;
  return out;
}

std::vector<GtBox> load_ground_truth_file(const std::filesystem::path& path, int image_width,
                                          int image_height) {
  const std::string text = read_text_file(path);
  std::vector<GtBox> boxes;
  int line_no = 0;
  for (const std::string& line : nonempty_lines(text)) {
    ++line_no;
    try {
      const YoloLine rec = parse_yolo_line(line, line_no, false);
      GtBox box;
      box.class_id = rec.class_id;
      box.rect = denormalize(rec, image_width, image_height);
      if (!(box.rect.area() > 0.0))
        throw std::invalid_argument("line " + std::to_string(line_no) + ": zero-area box");
      boxes.push_back(box);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ": " + e.what());
    }
  }
  return boxes;
}

std::vector<Detection> load_predictions_file(const std::filesystem::path& path,
                                             int image_width, int image_height) {
  const std::string text = read_text_file(path);
  std::vector<Detection> dets;
  int line_no = 0;
  for (const std::string& line : nonempty_lines(text)) {
    ++line_no;
    try {
      const YoloLine rec = parse_yolo_line(line, line_no, true);
      Detection det;
      det.class_id = rec.class_id;
      det.rect = denormalize(rec, image_width, image_height);
      det.confidence = *rec.confidence;
      if (!(det.rect.area() > 0.0))
        throw std::invalid_argument("line " + std::to_string(line_no) + ": zero-area box");
      dets.push_back(det);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ": " + e.what());
    }
  }
  return dets;
}

GroundTruth load_ground_truth_dir(const std::filesystem::path& dir, int image_width,
                                  int image_height) {
  GroundTruth gt;
  load_dir(dir, [&](const std::filesystem::path& p) {
    return load_ground_truth_file(p, image_width, image_height);
  }, gt);
  return gt;
}

Predictions load_predictions_dir(const std::filesystem::path& dir, int image_width,
                                 int image_height) {
  Predictions preds;
  load_dir(dir, [&](const std::filesystem::path& p) {
    return load_predictions_file(p, image_width, image_height);
  }, preds);
  return preds;
}

}  // namespace streetsim
