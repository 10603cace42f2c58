#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streetsim/export.hpp"

namespace streetsim {

// ---------------------------------------------------------------------------
// Inputs

struct GtBox {
  int class_id = 0;
  PixelRect rect;  // pixels, positive area
};

struct Detection {
  int class_id = 0;
  PixelRect rect;            // pixels, positive area
  double confidence = 1.0;   // [0, 1]
};

// Keyed by frame stem; std::map keeps iteration (and later tie-breaks)
// deterministic.
using GroundTruth = std::map<std::string, std::vector<GtBox>>;
using Predictions = std::map<std::string, std::vector<Detection>>;

// ---------------------------------------------------------------------------
// Matching and AP

struct MatchOutcome {
  std::vector<char> tp;         // parallel to the prediction list (input order)
  std::vector<int> matched_gt;  // ground-truth index or -1, parallel to preds
  long fn = 0;                  // ground-truth boxes left unmatched
};

/// Greedy matching for one frame, all classes at once: predictions sorted by
/// confidence descending (ties keep input order), each taking the unmatched
/// same-class ground-truth box of highest IoU >= iou_thr (ties toward the
/// lower index). Every ground-truth box matches at most once.
MatchOutcome match_detections(const std::vector<GtBox>& gt,
                              const std::vector<Detection>& preds, double iou_thr = 0.5);

/// Area under the precision-recall curve with all-points (monotone-envelope)
/// interpolation. `tp_flags` must be in confidence-descending order.
/// Zero ground truth yields 0.
double average_precision(const std::vector<char>& tp_flags, long n_gt);

// ---------------------------------------------------------------------------
// Dataset-level report

struct ClassEval {
  int class_id = 0;
  long n_gt = 0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  /// Percent. Absent only for a class with no ground truth and no
  /// predictions; zero when predictions exist without ground truth.
  std::optional<double> ap_percent;
};

struct MatchedPair {
  std::string stem;
  int class_id = 0;
  int pred_index = 0;  // input order within the frame's prediction list
  int gt_index = 0;
};

struct EvalReport {
  std::vector<ClassEval> per_class;  // ascending class id
  double map_percent = 0.0;          // unweighted mean over classes with ground truth
  std::vector<MatchedPair> matches;
};

/// Pools matches across all frames, then builds one PR curve per class.
/// Throws std::invalid_argument listing the offending stems when predictions
/// reference frames absent from the ground truth. A ground-truth stem with
/// no prediction file simply contributes zero detections.
EvalReport map_at_50(const GroundTruth& gt, const Predictions& preds, double iou_thr = 0.5);

std::string report_json(const EvalReport& report);

/// Plain-text summary: one AP line per class, then `mAP@0.5: <x.y>`.
std::string format_report(const EvalReport& report);

// ---------------------------------------------------------------------------
// Loading

/// YOLO labels as written by the export module, denormalized to pixels.
std::vector<GtBox> load_ground_truth_file(const std::filesystem::path& path,
                                          int image_width, int image_height);

/// Extended-YOLO predictions: `<class> <cx> <cy> <w> <h> <conf>` per line.
std::vector<Detection> load_predictions_file(const std::filesystem::path& path,
                                             int image_width, int image_height);

/// Every *.txt in the directory, keyed by file stem.
GroundTruth load_ground_truth_dir(const std::filesystem::path& dir, int image_width,
                                  int image_height);
Predictions load_predictions_dir(const std::filesystem::path& dir, int image_width,
                                 int image_height);

}  // namespace streetsim
