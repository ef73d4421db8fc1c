#include "beval/measures.hpp"

#include <nlohmann/json.hpp>

namespace beval {

void to_json(nlohmann::json& j, const MeasureReport& r) {
  j = nlohmann::json{{"pixel_accuracy", r.pixel_accuracy},
                     {"mask_iou", r.mask_iou},
                     {"trimap_iou", r.trimap_iou},
                     {"f_measure", r.f_measure},
                     {"mf_measure", r.mf_measure},
                     {"boundary_iou", r.boundary_iou},
                     {"combined_iou", r.combined_iou},
                     {"d_pixels", r.d_pixels}};
}

double pixel_accuracy(const BinaryMask& gt, const BinaryMask& pred) {
  require_same_frame(gt, pred);
  const long long g = gt.area();
  if (g == 0) return pred.area() == 0 ? 1.0 : 0.0;
  return static_cast<double>(count_and(gt, pred)) / static_cast<double>(g);
}

double mask_iou(const BinaryMask& gt, const BinaryMask& pred) {
  require_same_frame(gt, pred);
  const long long uni = count_or(gt, pred);
  if (uni == 0) return 1.0;
  return static_cast<double>(count_and(gt, pred)) / static_cast<double>(uni);
}

double trimap_iou(const BinaryMask& gt, const BinaryMask& pred, int d) {
  require_same_frame(gt, pred);
  const BinaryMask band = band_region(gt, d);
  const long long den = count_and(band, mask_or(gt, pred));
  if (den == 0) return 1.0;  // no evaluable band
  const long long num = count_and(band, mask_and(gt, pred));
  return static_cast<double>(num) / static_cast<double>(den);
}

double f_measure(const BinaryMask& gt, const BinaryMask& pred, int d) {
  require_same_frame(gt, pred);
  const BinaryMask g1 = contour_mask(gt);
  const BinaryMask p1 = contour_mask(pred);
  const long long g1n = g1.area();
  const long long p1n = p1.area();
  if (g1n == 0 && p1n == 0) return 1.0;  // both masks empty
  if (g1n == 0 || p1n == 0) return 0.0;
  const double precision =
      static_cast<double>(count_and(p1, dilate(g1, d))) / static_cast<double>(p1n);
  const double recall =
      static_cast<double>(count_and(g1, dilate(p1, d))) / static_cast<double>(g1n);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double mf_measure(const BinaryMask& gt, const BinaryMask& pred, const MeasureConfig& cfg) {
  require_same_frame(gt, pred);
  double sum = 0.0;
  for (double ratio : cfg.mf_ratios)
    sum += f_measure(gt, pred, pixel_distance(gt.height, gt.width, ratio));
  return sum / static_cast<double>(cfg.mf_ratios.size());
}

double boundary_iou(const BinaryMask& gt, const BinaryMask& pred, int d) {
  require_same_frame(gt, pred);
  const bool ge = gt.empty();
  const bool pe = pred.empty();
  if (ge && pe) return 1.0;
  if (ge || pe) return 0.0;
  const BinaryMask bg = boundary_region(gt, d);
  const BinaryMask bp = boundary_region(pred, d);
  const long long uni = count_or(bg, bp);
  return static_cast<double>(count_and(bg, bp)) / static_cast<double>(uni);
}

double combined_iou(const BinaryMask& gt, const BinaryMask& pred, int d) {
  return std::min(mask_iou(gt, pred), boundary_iou(gt, pred, d));
}

MeasureReport measure_all(const BinaryMask& gt, const BinaryMask& pred,
                          const MeasureConfig& cfg) {
  require_same_frame(gt, pred);
  MeasureReport r;
  r.d_pixels = pixel_distance(gt.height, gt.width, cfg.dilation_ratio);
  r.pixel_accuracy = pixel_accuracy(gt, pred);
  r.mask_iou = mask_iou(gt, pred);
  r.trimap_iou = trimap_iou(gt, pred, r.d_pixels);
  r.f_measure = f_measure(gt, pred, r.d_pixels);
  r.mf_measure = mf_measure(gt, pred, cfg);
  r.boundary_iou = boundary_iou(gt, pred, r.d_pixels);
  r.combined_iou = std::min(r.mask_iou, r.boundary_iou);
  return r;
}

}  // namespace beval
