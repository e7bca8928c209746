// Copyright 2026 The objexplore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "objexplore/records.hpp"

namespace objexplore {

/// Default detector confidence cutoff.
inline constexpr double kDefaultConfidenceCutoff = 0.25;

/// Keeps detections with confidence >= cutoff, order preserved.
std::vector<Detection> filter_by_confidence(std::span<const Detection> dets,
                                            double cutoff);

/// Indices of `preds` by descending confidence, ties by ascending id.
std::vector<std::size_t> ranking_order(std::span<const Detection> preds);

struct MatchResult {
  std::size_t pred = 0;               // index into preds
  std::optional<std::size_t> gt;      // index into gts
  double iou = 0;                     // IoU with the matched gt, else 0
};

/// Greedy matching: predictions are visited in ranking_order(); each takes
/// the still-unmatched ground truth on the same artwork with the highest
/// positive IoU >= iou_threshold (lowest index on IoU ties). Results are in
/// visiting order. Labels are not compared: callers pass one class.
std::vector<MatchResult> match_detections(std::span<const Detection> preds,
                                          std::span<const GroundTruthBox> gts,
                                          double iou_threshold);

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

struct PrCurve {
  double average_precision = 0;
  std::vector<PrPoint> points;  // one per ranked prediction, raw (no envelope)
};

/// All-points interpolated AP: the area under the monotone precision
/// envelope. 1 when both inputs are empty, 0 when exactly one is.
PrCurve precision_recall(std::span<const Detection> preds,
                         std::span<const GroundTruthBox> gts,
                         double iou_threshold);

double average_precision(std::span<const Detection> preds,
                         std::span<const GroundTruthBox> gts,
                         double iou_threshold);

struct ThresholdResult {
  double threshold = 0;
  double ap = 0;
  std::vector<PrPoint> pr_points;
};

struct EvalReport {
  std::vector<ThresholdResult> per_threshold;
  double mean_ap = 0;
};

/// {0.50, 0.55, ..., 0.95}
const std::vector<double>& coco_iou_thresholds();

EvalReport coco_ap(std::span<const Detection> preds,
                   std::span<const GroundTruthBox> gts);

/// Multi-class evaluation: one EvalReport per ground-truth label, plus their
/// per-threshold mean. Predictions whose label has no ground truth are
/// ignored.
struct LabelledEvalReport {
  std::map<std::string, EvalReport> per_label;
  EvalReport overall;
};

LabelledEvalReport evaluate_by_label(std::span<const Detection> preds,
                                     std::span<const GroundTruthBox> gts);

/// Line-delimited ground truth: {"artwork_id","label","x_min","y_min",
/// "x_max","y_max"} per line.
std::vector<GroundTruthBox> read_ground_truth(const std::filesystem::path& path);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const LabelledEvalReport& r);
std::string format_report(const LabelledEvalReport& r);

}  // namespace objexplore
