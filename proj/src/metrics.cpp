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

#include "objexplore/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "objexplore/error.hpp"
#include "util.hpp"

namespace objexplore {

std::vector<Detection> filter_by_confidence(std::span<const Detection> dets,
                                            double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff outside [0,1]");
  }
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [cutoff](const Detection& d) { return d.confidence >= cutoff; });
  return out;
}

std::vector<std::size_t> ranking_order(std::span<const Detection> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (preds[a].confidence != preds[b].confidence) {
      return preds[a].confidence > preds[b].confidence;
    }
    if (preds[a].id != preds[b].id) return preds[a].id < preds[b].id;
    return a < b;
  });
  return order;
}

std::vector<MatchResult> match_detections(std::span<const Detection> preds,
                                          std::span<const GroundTruthBox> gts,
                                          double iou_threshold) {
  std::unordered_map<std::string, std::vector<std::size_t>> gts_by_artwork;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gts_by_artwork[gts[g].artwork_id].push_back(g);
  }
  std::vector<bool> used(gts.size(), false);

  std::vector<MatchResult> out;
  out.reserve(preds.size());
  for (std::size_t p : ranking_order(preds)) {
    MatchResult m{p, std::nullopt, 0.0};
    auto it = gts_by_artwork.find(preds[p].artwork_id);
    if (it != gts_by_artwork.end()) {
      double best = -1.0;
      for (std::size_t g : it->second) {
        if (used[g]) continue;
        double v = iou(preds[p].box, gts[g].box);
        if (v > 0.0 && v >= iou_threshold && v > best) {
          best = v;
          m.gt = g;
          m.iou = v;
        }
      }
      if (m.gt) used[*m.gt] = true;
    }
    out.push_back(m);
  }
  return out;
}

PrCurve precision_recall(std::span<const Detection> preds,
                         std::span<const GroundTruthBox> gts,
                         double iou_threshold) {
  PrCurve curve;
  if (gts.empty()) {
    curve.average_precision = preds.empty() ? 1.0 : 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      curve.points.push_back({0.0, 0.0});
    }
    return curve;
  }

  const double n_gt = static_cast<double>(gts.size());
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (const auto& m : match_detections(preds, gts, iou_threshold)) {
    ++seen;
    if (m.gt) ++tp;
    curve.points.push_back({static_cast<double>(tp) / n_gt,
                            static_cast<double>(tp) / static_cast<double>(seen)});
  }

  std::vector<double> envelope(curve.points.size());
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    ap += (curve.points[i].recall - prev_recall) * envelope[i];
    prev_recall = curve.points[i].recall;
  }
  curve.average_precision = std::clamp(ap, 0.0, 1.0);
  return curve;
}

double average_precision(std::span<const Detection> preds,
                         std::span<const GroundTruthBox> gts,
                         double iou_threshold) {
  return precision_recall(preds, gts, iou_threshold).average_precision;
}

const std::vector<double>& coco_iou_thresholds() {
  static const std::vector<double> kThresholds = [] {
    std::vector<double> t;
    for (int pct = 50; pct <= 95; pct += 5) t.push_back(pct / 100.0);
    return t;
  }();
  return kThresholds;
}

namespace {

double mean_of(const std::vector<ThresholdResult>& rs) {
  double sum = 0.0;
  for (const auto& r : rs) sum += r.ap;
  return rs.empty() ? 0.0 : sum / static_cast<double>(rs.size());
}

}  // namespace

EvalReport coco_ap(std::span<const Detection> preds,
                   std::span<const GroundTruthBox> gts) {
  EvalReport report;
  for (double t : coco_iou_thresholds()) {
    PrCurve c = precision_recall(preds, gts, t);
    report.per_threshold.push_back({t, c.average_precision, std::move(c.points)});
  }
  report.mean_ap = mean_of(report.per_threshold);
  return report;
}

LabelledEvalReport evaluate_by_label(std::span<const Detection> preds,
                                     std::span<const GroundTruthBox> gts) {
  std::map<std::string, std::vector<GroundTruthBox>> gt_by_label;
  for (const auto& g : gts) gt_by_label[g.label].push_back(g);
  std::map<std::string, std::vector<Detection>> pred_by_label;
  for (const auto& p : preds) pred_by_label[p.label].push_back(p);

  LabelledEvalReport out;
  for (const auto& [label, label_gts] : gt_by_label) {
    const auto& label_preds = pred_by_label[label];
    out.per_label.emplace(label, coco_ap(label_preds, label_gts));
  }

  for (double t : coco_iou_thresholds()) {
    out.overall.per_threshold.push_back({t, 0.0, {}});
  }
  if (out.per_label.empty()) {
    // No ground truth: defined by the single-class rule on the whole input.
    out.overall = coco_ap(preds, gts);
    return out;
  }
  for (std::size_t i = 0; i < out.overall.per_threshold.size(); ++i) {
    double sum = 0.0;
    for (const auto& [label, r] : out.per_label) sum += r.per_threshold[i].ap;
    out.overall.per_threshold[i].ap = sum / static_cast<double>(out.per_label.size());
  }
  if (out.per_label.size() == 1) out.overall = out.per_label.begin()->second;
  out.overall.mean_ap = mean_of(out.overall.per_threshold);
  return out;
}

std::vector<GroundTruthBox> read_ground_truth(const std::filesystem::path& path) {
  std::vector<GroundTruthBox> out;
  std::string text = detail::read_text(path);
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      GroundTruthBox g;
      g.artwork_id = j.at("artwork_id").get<std::string>();
      g.label = j.at("label").get<std::string>();
      if (g.label.empty()) throw Error(ErrorCode::kEmptyName, "empty label");
      g.box = BoundingBox::make(j.at("x_min").get<double>(), j.at("y_min").get<double>(),
                                j.at("x_max").get<double>(), j.at("y_max").get<double>());
      out.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& t : r.per_threshold) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : t.pr_points) pts.push_back({p.recall, p.precision});
    per.push_back({{"iou_threshold", t.threshold}, {"ap", t.ap}, {"pr_points", pts}});
  }
  return {{"per_threshold", per}, {"mean_ap", r.mean_ap}};
}

nlohmann::json to_json(const LabelledEvalReport& r) {
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [label, rep] : r.per_label) labels[label] = to_json(rep);
  nlohmann::json j = to_json(r.overall);
  j["per_label"] = labels;
  return j;
}

std::string format_report(const LabelledEvalReport& r) {
  std::ostringstream out;
  char buf[96];
  out << "IoU      AP\n";
  for (const auto& t : r.overall.per_threshold) {
    std::snprintf(buf, sizeof buf, "%.2f  %.6f\n", t.threshold, t.ap);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean AP@[0.50:0.95] = %.6f\n", r.overall.mean_ap);
  out << buf;
  if (r.per_label.size() > 1) {
    for (const auto& [label, rep] : r.per_label) {
      std::snprintf(buf, sizeof buf, "  %-20s %.6f\n", label.c_str(), rep.mean_ap);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace objexplore
