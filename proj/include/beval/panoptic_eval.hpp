#pragma once

#include <map>
#include <string>
#include <vector>

#include "beval/detection_eval.hpp"  // IouMeasure
#include "beval/panoptic_map.hpp"

#include <nlohmann/json_fwd.hpp>

namespace beval {

struct PqConfig {
  IouMeasure iou_measure = IouMeasure::Mask;
  double dilation_ratio = 0.02;
  int threads = 1;
};

struct PqCategoryStats {
  double iou_sum = 0.0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  bool isthing = false;

  double sq() const { return tp > 0 ? iou_sum / static_cast<double>(tp) : 0.0; }
  double rq() const {
    const double den = static_cast<double>(tp) + 0.5 * fp + 0.5 * fn;
    return den > 0.0 ? static_cast<double>(tp) / den : 0.0;
  }
  double pq() const { return sq() * rq(); }
  bool present() const { return tp + fp + fn > 0; }
};

struct PqSummary {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  long long categories = 0;
};

struct PqReport {
  PqSummary overall, things, stuff;
  std::map<int, PqCategoryStats> per_category;
};

void to_json(nlohmann::json& j, const PqReport& r);

struct SegmentMatch {
  int gt_id = 0;
  int pred_id = 0;
  int category_id = 0;
  double iou = 0.0;
};

struct PanopticMatchResult {
  std::vector<SegmentMatch> matches;
  std::vector<SegmentInfo> unmatched_gt;    // false negatives
  std::vector<SegmentInfo> unmatched_pred;  // false positives (void-dominated removed)
};

/// Matches same-category GT/prediction segments at measure-IoU > 0.5. Void
/// pixels are excluded from every numerator and denominator; unmatched
/// predictions with more than half their area on GT void are dropped.
PanopticMatchResult match_segments(const PanopticLabelMap& gt, const PanopticLabelMap& pred,
                                   IouMeasure measure, int d);

PqReport compute_pq(const std::vector<PanopticMatchResult>& per_image,
                    const std::vector<const PanopticLabelMap*>& gts,
                    const std::vector<const PanopticLabelMap*>& preds);

/// End-to-end over in-memory maps paired by position.
PqReport evaluate_panoptic(const std::vector<PanopticLabelMap>& gts,
                           const std::vector<PanopticLabelMap>& preds, const PqConfig& cfg);

/// File front end over the panoptic JSON format.
PqReport evaluate_panoptic_files(const std::string& gt_path, const std::string& pred_path,
                                 const PqConfig& cfg);

/// Maps keyed by image id, parsed from the JSON format (inline id grids or
/// COCO-style PNG paths resolved relative to `base_dir`).
std::map<int, PanopticLabelMap> load_panoptic_file(const std::string& path);
nlohmann::json panoptic_to_json(const std::map<int, PanopticLabelMap>& maps);

}  // namespace beval
