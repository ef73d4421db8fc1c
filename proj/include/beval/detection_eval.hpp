#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beval/mask.hpp"

#include <nlohmann/json_fwd.hpp>

namespace beval {

class ReferentialIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Segmentation payload of an annotation or detection: uncompressed RLE or a
/// list of polygons (union of their fills).
struct SegmentationSpec {
  std::optional<RleMask> rle;
  std::vector<Polygon> polygons;

  BinaryMask decode(int height, int width) const;
};

struct InstanceAnnotation {
  long long id = 0;
  int image_id = 0;
  int category_id = 0;
  SegmentationSpec segmentation;
  double area = 0.0;
  bool iscrowd = false;
};

struct DetectionResult {
  int image_id = 0;
  int category_id = 0;
  SegmentationSpec segmentation;
  double score = 0.0;
};

struct ImageRecord {
  int id = 0;
  int height = 0;
  int width = 0;
};

struct CategoryRecord {
  int id = 0;
  std::string name;
};

struct DetectionDataset {
  std::vector<ImageRecord> images;
  std::vector<InstanceAnnotation> annotations;
  std::vector<CategoryRecord> categories;
};

enum class IouMeasure { Mask, BoundaryCombined };

struct ApConfig {
  IouMeasure iou_measure = IouMeasure::Mask;
  double dilation_ratio = 0.02;
  std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                        0.75, 0.80, 0.85, 0.90, 0.95};
  int max_detections_per_image = 100;
  int recall_points = 101;
  int threads = 1;
};

struct ApReport {
  std::optional<double> ap, ap50, ap75, ap_s, ap_m, ap_l;
  // Per-category AP over all areas / all thresholds; nullopt when the
  // category has no ground truth.
  std::map<int, std::optional<double>> per_category;
};

void to_json(nlohmann::json& j, const ApReport& r);

/// Entry (i, j) is the configured IoU of detection i against GT j; crowd GT
/// rows use intersection-over-detection-area regardless of the measure.
std::vector<std::vector<double>> pairwise_iou_matrix(
    const std::vector<const InstanceAnnotation*>& gts,
    const std::vector<BinaryMask>& det_masks, const ApConfig& cfg, int frame_h, int frame_w);

/// Greedy COCO matching for one image/category at one threshold and area
/// range. Returns, per detection (score-descending order), the matched GT
/// index (-1 if none) and an ignore flag; plus per-GT ignore flags.
struct MatchResult {
  std::vector<int> det_match;    // index into gts, or -1
  std::vector<bool> det_ignore;
  std::vector<bool> gt_ignore;
};

MatchResult match_image_category(const std::vector<const InstanceAnnotation*>& gts,
                                 const std::vector<double>& det_scores,
                                 const std::vector<double>& det_areas,
                                 const std::vector<std::vector<double>>& iou,
                                 double threshold, double area_lo, double area_hi,
                                 const ApConfig& cfg);

/// Full pipeline over in-memory inputs.
ApReport evaluate_detections(const DetectionDataset& gt,
                             const std::vector<DetectionResult>& detections,
                             const ApConfig& cfg);

/// File front end: paths per the JSON formats in the README.
ApReport evaluate_detection_files(const std::string& gt_path, const std::string& det_path,
                                  const ApConfig& cfg);

DetectionDataset load_detection_gt(const std::string& path);
std::vector<DetectionResult> load_detections(const std::string& path);
DetectionDataset parse_detection_gt(const nlohmann::json& j);
std::vector<DetectionResult> parse_detections(const nlohmann::json& j);
nlohmann::json detection_gt_to_json(const DetectionDataset& ds);
nlohmann::json detections_to_json(const std::vector<DetectionResult>& dets);

}  // namespace beval
