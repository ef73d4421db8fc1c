#include "beval/sensitivity.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "beval/parallel.hpp"

namespace beval {

MeasureKind parse_measure_kind(const std::string& name) {
  if (name == "pixel_accuracy") return MeasureKind::PixelAccuracy;
  if (name == "mask_iou") return MeasureKind::MaskIoU;
  if (name == "trimap_iou") return MeasureKind::TrimapIoU;
  if (name == "f_measure") return MeasureKind::FMeasure;
  if (name == "mf_measure") return MeasureKind::MFMeasure;
  if (name == "boundary_iou") return MeasureKind::BoundaryIoU;
  if (name == "combined_iou") return MeasureKind::CombinedIoU;
  throw std::invalid_argument("unknown measure: " + name);
}

std::string measure_kind_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::PixelAccuracy: return "pixel_accuracy";
    case MeasureKind::MaskIoU: return "mask_iou";
    case MeasureKind::TrimapIoU: return "trimap_iou";
    case MeasureKind::FMeasure: return "f_measure";
    case MeasureKind::MFMeasure: return "mf_measure";
    case MeasureKind::BoundaryIoU: return "boundary_iou";
    case MeasureKind::CombinedIoU: return "combined_iou";
  }
  throw std::invalid_argument("invalid measure kind value");
}

double evaluate_measure(MeasureKind kind, const BinaryMask& gt, const BinaryMask& pred,
                        int d, const MeasureConfig& cfg) {
  switch (kind) {
    case MeasureKind::PixelAccuracy: return pixel_accuracy(gt, pred);
    case MeasureKind::MaskIoU: return mask_iou(gt, pred);
    case MeasureKind::TrimapIoU: return trimap_iou(gt, pred, d);
    case MeasureKind::FMeasure: return f_measure(gt, pred, d);
    case MeasureKind::MFMeasure: return mf_measure(gt, pred, cfg);
    case MeasureKind::BoundaryIoU: return boundary_iou(gt, pred, d);
    case MeasureKind::CombinedIoU: return combined_iou(gt, pred, d);
  }
  throw std::invalid_argument("invalid measure kind value");
}

AreaBinning AreaBinning::side16_increments(int bins) {
  AreaBinning binning;
  for (int k = 1; k <= bins; ++k)
    binning.edges.push_back(static_cast<long long>(16 * k) * (16 * k));
  return binning;
}

BinaryMask apply_error(const GtObject& obj, ErrorKind kind, double severity, RngStream& rng) {
  switch (kind) {
    case ErrorKind::ScaleDilation:
      return scale_error(obj.mask, static_cast<int>(std::llround(severity)), true);
    case ErrorKind::ScaleErosion:
      return scale_error(obj.mask, static_cast<int>(std::llround(severity)), false);
    case ErrorKind::ObjectLocalization:
      return object_localization_error(obj.mask, severity, rng);
    case ErrorKind::InnerMask:
      return inner_mask_error(obj.mask, static_cast<int>(std::llround(severity)), rng);
    case ErrorKind::BoundaryLocalization: {
      if (!obj.polygon)
        throw std::invalid_argument("boundary_localization requires polygon inputs");
      if (severity == 0.0) return obj.mask;  // exact identity at severity 0
      const Polygon noisy = boundary_localization_error(*obj.polygon, severity, rng);
      return rasterize_polygon(noisy, obj.mask.height, obj.mask.width);
    }
    case ErrorKind::BoundaryApproximation: {
      if (!obj.polygon)
        throw std::invalid_argument("boundary_approximation requires polygon inputs");
      if (severity == 0.0) return obj.mask;
      const Polygon simplified = boundary_approximation_error(*obj.polygon, severity);
      return rasterize_polygon(simplified, obj.mask.height, obj.mask.width);
    }
  }
  throw std::invalid_argument("invalid error kind value");
}

namespace {

CurvePoint aggregate(double x, const std::vector<double>& values) {
  CurvePoint p;
  p.x = x;
  p.n = static_cast<long long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / static_cast<double>(p.n);
  double sq = 0.0;
  for (double v : values) sq += (v - p.mean) * (v - p.mean);
  p.stddev = std::sqrt(sq / static_cast<double>(p.n));
  return p;
}

}  // namespace

std::vector<SensitivityCurve> run_severity_sweep(const std::vector<GtObject>& gts,
                                                 ErrorKind kind,
                                                 const std::vector<double>& severities,
                                                 const std::vector<MeasureKind>& measures,
                                                 double d_ratio, std::uint64_t base_seed,
                                                 int threads) {
  if (gts.empty()) throw std::invalid_argument("severity sweep: no ground truth objects");
  if (severities.empty()) throw std::invalid_argument("severity sweep: no severities");

  const std::size_t n_gt = gts.size();
  const std::size_t n_sev = severities.size();
  const std::size_t n_meas = measures.size();
  // values[(sev * n_gt + gt) * n_meas + meas]
  std::vector<double> values(n_sev * n_gt * n_meas, 0.0);
  MeasureConfig cfg;
  cfg.dilation_ratio = d_ratio;

  parallel_for(n_sev * n_gt, threads, [&](std::size_t job) {
    const std::size_t si = job / n_gt;
    const std::size_t gi = job % n_gt;
    const GtObject& obj = gts[gi];
    RngStream rng(derive_seed(base_seed, gi, si));
    const BinaryMask pred = apply_error(obj, kind, severities[si], rng);
    const int d = pixel_distance(obj.mask.height, obj.mask.width, d_ratio);
    for (std::size_t mi = 0; mi < n_meas; ++mi)
      values[job * n_meas + mi] = evaluate_measure(measures[mi], obj.mask, pred, d, cfg);
  });

  std::vector<SensitivityCurve> curves;
  for (std::size_t mi = 0; mi < n_meas; ++mi) {
    SensitivityCurve curve;
    curve.error_kind = error_kind_name(kind);
    curve.measure = measure_kind_name(measures[mi]);
    curve.axis = "severity";
    for (std::size_t si = 0; si < n_sev; ++si) {
      std::vector<double> pts(n_gt);
      for (std::size_t gi = 0; gi < n_gt; ++gi)
        pts[gi] = values[(si * n_gt + gi) * n_meas + mi];
      curve.points.push_back(aggregate(severities[si], pts));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<SensitivityCurve> run_size_sweep(const std::vector<GtObject>& gts, ErrorKind kind,
                                             double fixed_severity,
                                             const std::vector<MeasureKind>& measures,
                                             const AreaBinning& binning, double d_ratio,
                                             std::uint64_t base_seed, int threads) {
  if (gts.empty()) throw std::invalid_argument("size sweep: no ground truth objects");
  if (fixed_severity < 0.0) throw std::invalid_argument("size sweep: negative severity");
  if (binning.edges.empty()) throw std::invalid_argument("size sweep: no bin edges");

  const std::size_t n_gt = gts.size();
  const std::size_t n_meas = measures.size();
  std::vector<double> values(n_gt * n_meas, 0.0);
  MeasureConfig cfg;
  cfg.dilation_ratio = d_ratio;

  parallel_for(n_gt, threads, [&](std::size_t gi) {
    const GtObject& obj = gts[gi];
    RngStream rng(derive_seed(base_seed, gi, 0));
    const BinaryMask pred = apply_error(obj, kind, fixed_severity, rng);
    const int d = pixel_distance(obj.mask.height, obj.mask.width, d_ratio);
    for (std::size_t mi = 0; mi < n_meas; ++mi)
      values[gi * n_meas + mi] = evaluate_measure(measures[mi], obj.mask, pred, d, cfg);
  });

  // Bin membership by GT area; bin i covers (edges[i-1], edges[i]].
  std::vector<int> bin_of(n_gt, -1);
  for (std::size_t gi = 0; gi < n_gt; ++gi) {
    const long long area = gts[gi].mask.area();
    for (std::size_t b = 0; b < binning.edges.size(); ++b) {
      const long long lo = b == 0 ? -1 : binning.edges[b - 1];
      if (area > lo && area <= binning.edges[b]) {
        bin_of[gi] = static_cast<int>(b);
        break;
      }
    }
  }

  std::vector<SensitivityCurve> curves;
  for (std::size_t mi = 0; mi < n_meas; ++mi) {
    SensitivityCurve curve;
    curve.error_kind = error_kind_name(kind);
    curve.measure = measure_kind_name(measures[mi]);
    curve.axis = "size";
    for (std::size_t b = 0; b < binning.edges.size(); ++b) {
      std::vector<double> pts;
      for (std::size_t gi = 0; gi < n_gt; ++gi)
        if (bin_of[gi] == static_cast<int>(b)) pts.push_back(values[gi * n_meas + mi]);
      if (pts.empty()) continue;  // empty bin -> point omitted
      curve.points.push_back(aggregate(static_cast<double>(binning.edges[b]), pts));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

void emit_curves_csv(const std::vector<SensitivityCurve>& curves, std::ostream& out) {
  out << "error_kind,measure,axis,x_value,mean,std,n\n";
  out << std::fixed << std::setprecision(6);
  for (const SensitivityCurve& curve : curves) {
    for (const CurvePoint& p : curve.points) {
      out << curve.error_kind << ',' << curve.measure << ',' << curve.axis << ',' << p.x
          << ',' << p.mean << ',' << p.stddev << ',' << p.n << '\n';
    }
  }
}

}  // namespace beval
