#pragma once

#include <vector>

#include "beval/mask.hpp"

#include <nlohmann/json_fwd.hpp>

namespace beval {

struct MeasureConfig {
  double dilation_ratio = 0.02;
  // Threshold ladder for the mean F-measure, as fractions of the image diagonal.
  std::vector<double> mf_ratios = {0.001, 0.005, 0.009, 0.013, 0.017, 0.021};
};

struct MeasureReport {
  double pixel_accuracy = 0.0;
  double mask_iou = 0.0;
  double trimap_iou = 0.0;
  double f_measure = 0.0;
  double mf_measure = 0.0;
  double boundary_iou = 0.0;
  double combined_iou = 0.0;
  int d_pixels = 1;
};

void to_json(nlohmann::json& j, const MeasureReport& r);

/// |G ∩ P| / |G|. Empty G: 1.0 if P is also empty, else 0.0.
double pixel_accuracy(const BinaryMask& gt, const BinaryMask& pred);

/// |G ∩ P| / |G ∪ P|; 1.0 when both masks are empty.
double mask_iou(const BinaryMask& gt, const BinaryMask& pred);

/// IoU restricted to the two-sided band of width d around the GT contour.
/// Vacuously 1.0 when the band intersects neither mask.
double trimap_iou(const BinaryMask& gt, const BinaryMask& pred, int d);

/// Approximate boundary F-measure with duplicate matches allowed within
/// Chebyshev distance d between contour pixel sets.
double f_measure(const BinaryMask& gt, const BinaryMask& pred, int d);

/// Mean of f_measure over the d values resolved from cfg.mf_ratios.
double mf_measure(const BinaryMask& gt, const BinaryMask& pred, const MeasureConfig& cfg);

/// IoU of the two boundary regions (mask pixels within distance d of each
/// mask's own contour). 1.0 when both masks are empty, 0.0 when exactly one is.
double boundary_iou(const BinaryMask& gt, const BinaryMask& pred, int d);

/// min(mask_iou, boundary_iou); the measure behind Boundary AP / Boundary PQ.
double combined_iou(const BinaryMask& gt, const BinaryMask& pred, int d);

MeasureReport measure_all(const BinaryMask& gt, const BinaryMask& pred,
                          const MeasureConfig& cfg = {});

}  // namespace beval
