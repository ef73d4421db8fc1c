#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "beval/mask.hpp"
#include "beval/panoptic_map.hpp"

namespace beval {

enum class ErrorKind {
  ScaleDilation,
  ScaleErosion,
  BoundaryLocalization,
  ObjectLocalization,
  BoundaryApproximation,
  InnerMask,
};

ErrorKind parse_error_kind(const std::string& name);
std::string error_kind_name(ErrorKind kind);

struct ErrorSpec {
  ErrorKind kind = ErrorKind::ScaleDilation;
  double severity = 0.0;
  std::uint64_t seed = 0;
};

/// Seeded random stream with a fixed, standard-specified engine (mt19937_64)
/// and a Box-Muller Gaussian, so identical seeds produce identical values on
/// every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double gaussian();  // N(0, 1), Box-Muller

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Child-stream seed from a base seed plus indices (splitmix64 mixing), so
/// per-mask streams are independent of generation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Scale error: morphological dilation (grow = true) or erosion of the mask.
BinaryMask scale_error(const BinaryMask& mask, int radius, bool grow);

/// Adds N(0, std^2) noise independently to every vertex coordinate.
Polygon boundary_localization_error(const Polygon& poly, double stddev, RngStream& rng);

/// Translates the mask by the integer vector nearest to `offset` pixels in a
/// uniformly random direction; pixels shifted out of frame are dropped.
BinaryMask object_localization_error(const BinaryMask& mask, double offset, RngStream& rng);

/// Douglas-Peucker simplification; the closed polygon is split at its two most
/// distant vertices and each chain is simplified to the tolerance. The result
/// is a subsequence of the input vertices and may degenerate to the two chord
/// endpoints at extreme tolerances.
Polygon boundary_approximation_error(const Polygon& poly, double tolerance);

/// Subtracts `holes` random elliptical regions. Centers are uniform over the
/// input's true pixels; semi-axes uniform in [2%, 10%] of the bounding-box
/// diagonal; orientation uniform.
BinaryMask inner_mask_error(const BinaryMask& mask, int holes, RngStream& rng);

/// Simulates a capped mask-head resolution: crop to the tight bounding box,
/// bilinearly resample to res x res and back, binarize at 0.5, paste back.
/// Empty masks are returned unchanged.
BinaryMask cap_resolution_instance(const BinaryMask& mask, int res);

/// Nearest-neighbor downscale of the id grid by `ratio` and upscale back.
/// Segments whose pixels vanish are dropped from the metadata.
PanopticLabelMap cap_resolution_panoptic(const PanopticLabelMap& labels, int ratio);

}  // namespace beval
