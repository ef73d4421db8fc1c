#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beval {

// Thrown when two masks that must share a frame have different dimensions.
class FrameMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an encoded mask (RLE, file record) is internally inconsistent.
class MalformedEncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rectangular grid of boolean pixels, row-major. The universal currency of
/// every measure in this library.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // row-major, values 0 or 1

  BinaryMask() = default;
  BinaryMask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w),
        pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("mask dimensions must be positive");
  }

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  bool at(int r, int c) const {
    return pixels[static_cast<std::size_t>(r) * width + c] != 0;
  }
  void set(int r, int c, bool v) {
    pixels[static_cast<std::size_t>(r) * width + c] = v ? 1 : 0;
  }
  long long area() const;
  bool empty() const { return area() == 0; }
  bool same_frame(const BinaryMask& o) const {
    return height == o.height && width == o.width;
  }

  bool operator==(const BinaryMask&) const = default;
};

/// COCO-compatible uncompressed run-length encoding: column-major pixel order,
/// first run counts false pixels.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<long long> counts;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Closed polygon in continuous pixel units; last vertex connects to first.
struct Polygon {
  std::vector<Point> vertices;
};

/// A set of pixel coordinates inside a reference frame.
struct PixelSet {
  int height = 0;
  int width = 0;
  std::vector<std::pair<int, int>> coords;  // (row, col), sorted row-major

  BinaryMask to_mask() const;
  std::size_t size() const { return coords.size(); }
};

BinaryMask decode_rle(const RleMask& rle);
RleMask encode_rle(const BinaryMask& mask);

/// Even-odd fill sampled at pixel centers (c+0.5, r+0.5). A center exactly on
/// an edge is resolved by the half-open convention: crossings at x <= center.x
/// count, and each edge spans the half-open vertical range [min(y), max(y)).
BinaryMask rasterize_polygon(const Polygon& poly, int height, int width);

/// Iterated 3x3 all-ones erosion; out-of-frame locations count as background.
/// Result pixel is true iff its whole Chebyshev ball of radius `iterations`
/// lies on true pixels.
BinaryMask erode(const BinaryMask& mask, int iterations);

/// Iterated 3x3 all-ones dilation, clipped at the frame border.
BinaryMask dilate(const BinaryMask& mask, int iterations);

/// True pixels with a false (or out-of-frame) 8-neighbor. Equals
/// mask \ erode(mask, 1).
PixelSet contour(const BinaryMask& mask);

/// contour() as a mask; what the F-measure contour sets are built from.
BinaryMask contour_mask(const BinaryMask& mask);

/// Mask pixels within Chebyshev distance d of background: mask \ erode(mask, d).
BinaryMask boundary_region(const BinaryMask& mask, int d);

/// Two-sided band around the mask/background interface:
/// dilate(mask, d) \ erode(mask, d).
BinaryMask band_region(const BinaryMask& mask, int d);

/// Resolve a diagonal ratio to an integer pixel distance: nearest integer,
/// ties up, never below 1.
int pixel_distance(int height, int width, double ratio);

// Pixelwise set algebra. All binary ops require matching frames.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);
long long count_and(const BinaryMask& a, const BinaryMask& b);
long long count_or(const BinaryMask& a, const BinaryMask& b);

/// Translate by (dr, dc); pixels shifted out of frame are dropped.
BinaryMask translate(const BinaryMask& mask, int dr, int dc);

void require_same_frame(const BinaryMask& a, const BinaryMask& b);

}  // namespace beval
