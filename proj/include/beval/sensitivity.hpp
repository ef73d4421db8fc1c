#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "beval/error_sim.hpp"
#include "beval/measures.hpp"
#include "beval/shapes.hpp"

namespace beval {

enum class MeasureKind {
  PixelAccuracy,
  MaskIoU,
  TrimapIoU,
  FMeasure,
  MFMeasure,
  BoundaryIoU,
  CombinedIoU,
};

MeasureKind parse_measure_kind(const std::string& name);
std::string measure_kind_name(MeasureKind kind);

double evaluate_measure(MeasureKind kind, const BinaryMask& gt, const BinaryMask& pred,
                        int d, const MeasureConfig& cfg);

struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  long long n = 0;
};

struct SensitivityCurve {
  std::string error_kind;
  std::string measure;
  std::string axis;  // "severity" or "size"
  std::vector<CurvePoint> points;
};

/// Area bins delimited by ascending pixel-area edges; bin i covers
/// (edges[i-1], edges[i]] and bin 0 covers [0, edges[0]]. Objects above the
/// last edge are not binned.
struct AreaBinning {
  std::vector<long long> edges;

  /// Edges at (16k)^2 for k = 1..bins.
  static AreaBinning side16_increments(int bins);
};

/// Generates a pseudo-prediction for one object. Polygon-based kinds rasterize
/// the perturbed polygon into the object's frame and require obj.polygon.
BinaryMask apply_error(const GtObject& obj, ErrorKind kind, double severity, RngStream& rng);

std::vector<SensitivityCurve> run_severity_sweep(const std::vector<GtObject>& gts,
                                                 ErrorKind kind,
                                                 const std::vector<double>& severities,
                                                 const std::vector<MeasureKind>& measures,
                                                 double d_ratio, std::uint64_t base_seed,
                                                 int threads = 1);

std::vector<SensitivityCurve> run_size_sweep(const std::vector<GtObject>& gts, ErrorKind kind,
                                             double fixed_severity,
                                             const std::vector<MeasureKind>& measures,
                                             const AreaBinning& binning, double d_ratio,
                                             std::uint64_t base_seed, int threads = 1);

/// CSV columns: error_kind, measure, axis, x_value, mean, std, n.
/// Floating values carry 6 decimal digits; row order is deterministic.
void emit_curves_csv(const std::vector<SensitivityCurve>& curves, std::ostream& out);

}  // namespace beval
