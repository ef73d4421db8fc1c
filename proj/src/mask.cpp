#include "beval/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace beval {

long long BinaryMask::area() const {
  return std::accumulate(pixels.begin(), pixels.end(), 0LL,
                         [](long long s, std::uint8_t v) { return s + (v != 0); });
}

BinaryMask PixelSet::to_mask() const {
  BinaryMask m(height, width);
  for (const auto& [r, c] : coords) m.set(r, c, true);
  return m;
}

void require_same_frame(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_frame(b)) {
    throw FrameMismatchError("frame mismatch: " + std::to_string(a.height) + "x" +
                             std::to_string(a.width) + " vs " + std::to_string(b.height) +
                             "x" + std::to_string(b.width));
  }
}

BinaryMask decode_rle(const RleMask& rle) {
  if (rle.height <= 0 || rle.width <= 0)
    throw MalformedEncodingError("rle: non-positive dimensions");
  const long long total = static_cast<long long>(rle.height) * rle.width;
  long long sum = 0;
  for (long long c : rle.counts) {
    if (c < 0) throw MalformedEncodingError("rle: negative run length");
    sum += c;
  }
  if (sum != total)
    throw MalformedEncodingError("rle: counts sum " + std::to_string(sum) +
                                 " != " + std::to_string(total) + " pixels");
  BinaryMask mask(rle.height, rle.width);
  long long idx = 0;
  bool value = false;  // first run counts false pixels
  for (long long run : rle.counts) {
    if (value) {
      for (long long k = 0; k < run; ++k) {
        const long long i = idx + k;
        // column-major index -> (row, col)
        mask.set(static_cast<int>(i % rle.height), static_cast<int>(i / rle.height), true);
      }
    }
    idx += run;
    value = !value;
  }
  return mask;
}

RleMask encode_rle(const BinaryMask& mask) {
  RleMask rle;
  rle.height = mask.height;
  rle.width = mask.width;
  const long long total = static_cast<long long>(mask.height) * mask.width;
  long long run = 0;
  bool value = false;
  for (long long i = 0; i < total; ++i) {
    const bool v = mask.at(static_cast<int>(i % mask.height), static_cast<int>(i / mask.height));
    if (v == value) {
      ++run;
    } else {
      rle.counts.push_back(run);
      value = v;
      run = 1;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rasterize_polygon(const Polygon& poly, int height, int width) {
  if (poly.vertices.size() < 2) return BinaryMask(height, width);
  BinaryMask mask(height, width);
  const std::size_t n = poly.vertices.size();
  std::vector<double> crossings;
  for (int r = 0; r < height; ++r) {
    const double cy = r + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = poly.vertices[i];
      const Point& b = poly.vertices[(i + 1) % n];
      const double ylo = std::min(a.y, b.y);
      const double yhi = std::max(a.y, b.y);
      if (cy < ylo || cy >= yhi) continue;  // half-open vertical span
      crossings.push_back(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end());
    for (int c = 0; c < width; ++c) {
      const double cx = c + 0.5;
      const auto it = std::upper_bound(crossings.begin(), crossings.end(), cx);
      if ((it - crossings.begin()) % 2 == 1) mask.set(r, c, true);
    }
  }
  return mask;
}

namespace {

// One 3x3 all-ones erosion, separable: horizontal min-of-3 then vertical.
// Out-of-frame is background.
BinaryMask erode_once(const BinaryMask& m) {
  BinaryMask tmp(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const bool v = m.at(r, c) && (c > 0 && m.at(r, c - 1)) &&
                     (c + 1 < m.width && m.at(r, c + 1));
      tmp.set(r, c, v);
    }
  }
  BinaryMask out(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const bool v = tmp.at(r, c) && (r > 0 && tmp.at(r - 1, c)) &&
                     (r + 1 < m.height && tmp.at(r + 1, c));
      out.set(r, c, v);
    }
  }
  return out;
}

BinaryMask dilate_once(const BinaryMask& m) {
  BinaryMask tmp(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const bool v = m.at(r, c) || (c > 0 && m.at(r, c - 1)) ||
                     (c + 1 < m.width && m.at(r, c + 1));
      tmp.set(r, c, v);
    }
  }
  BinaryMask out(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const bool v = tmp.at(r, c) || (r > 0 && tmp.at(r - 1, c)) ||
                     (r + 1 < m.height && tmp.at(r + 1, c));
      out.set(r, c, v);
    }
  }
  return out;
}

bool all_false(const BinaryMask& m) {
  return std::all_of(m.pixels.begin(), m.pixels.end(), [](std::uint8_t v) { return v == 0; });
}

bool all_true(const BinaryMask& m) {
  return std::all_of(m.pixels.begin(), m.pixels.end(), [](std::uint8_t v) { return v != 0; });
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int iterations) {
  if (iterations < 0) throw std::invalid_argument("erode: negative iterations");
  BinaryMask out = mask;
  for (int i = 0; i < iterations && !all_false(out); ++i) out = erode_once(out);
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  if (iterations < 0) throw std::invalid_argument("dilate: negative iterations");
  BinaryMask out = mask;
  for (int i = 0; i < iterations && !all_false(out) && !all_true(out); ++i)
    out = dilate_once(out);
  return out;
}

BinaryMask contour_mask(const BinaryMask& mask) {
  return mask_diff(mask, erode(mask, 1));
}

PixelSet contour(const BinaryMask& mask) {
  const BinaryMask cm = contour_mask(mask);
  PixelSet ps;
  ps.height = mask.height;
  ps.width = mask.width;
  for (int r = 0; r < cm.height; ++r)
    for (int c = 0; c < cm.width; ++c)
      if (cm.at(r, c)) ps.coords.emplace_back(r, c);
  return ps;
}

BinaryMask boundary_region(const BinaryMask& mask, int d) {
  if (d < 1) throw std::invalid_argument("boundary_region: d must be >= 1");
  return mask_diff(mask, erode(mask, d));
}

BinaryMask band_region(const BinaryMask& mask, int d) {
  if (d < 1) throw std::invalid_argument("band_region: d must be >= 1");
  return mask_diff(dilate(mask, d), erode(mask, d));
}

int pixel_distance(int height, int width, double ratio) {
  if (ratio <= 0.0) throw std::invalid_argument("pixel_distance: ratio must be > 0");
  const double diag = std::sqrt(static_cast<double>(height) * height +
                                static_cast<double>(width) * width);
  const int d = static_cast<int>(std::floor(ratio * diag + 0.5));  // ties round up
  return std::max(d, 1);
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_frame(a, b);
  BinaryMask out(a.height, a.width);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) out.pixels[i] = a.pixels[i] & b.pixels[i];
  return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_frame(a, b);
  BinaryMask out(a.height, a.width);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) out.pixels[i] = a.pixels[i] | b.pixels[i];
  return out;
}

BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b) {
  require_same_frame(a, b);
  BinaryMask out(a.height, a.width);
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    out.pixels[i] = a.pixels[i] & static_cast<std::uint8_t>(!b.pixels[i]);
  return out;
}

BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask out(a.height, a.width);
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(!a.pixels[i]);
  return out;
}

long long count_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_frame(a, b);
  long long n = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) n += (a.pixels[i] & b.pixels[i]) != 0;
  return n;
}

long long count_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_frame(a, b);
  long long n = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) n += (a.pixels[i] | b.pixels[i]) != 0;
  return n;
}

BinaryMask translate(const BinaryMask& mask, int dr, int dc) {
  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      const int nr = r + dr;
      const int nc = c + dc;
      if (out.in_bounds(nr, nc)) out.set(nr, nc, true);
    }
  }
  return out;
}

}  // namespace beval
