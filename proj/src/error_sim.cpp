#include "beval/error_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beval {

ErrorKind parse_error_kind(const std::string& name) {
  if (name == "scale_dilation") return ErrorKind::ScaleDilation;
  if (name == "scale_erosion") return ErrorKind::ScaleErosion;
  if (name == "boundary_localization") return ErrorKind::BoundaryLocalization;
  if (name == "object_localization") return ErrorKind::ObjectLocalization;
  if (name == "boundary_approximation") return ErrorKind::BoundaryApproximation;
  if (name == "inner_mask") return ErrorKind::InnerMask;
  throw std::invalid_argument("unknown error kind: " + name);
}

std::string error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ScaleDilation: return "scale_dilation";
    case ErrorKind::ScaleErosion: return "scale_erosion";
    case ErrorKind::BoundaryLocalization: return "boundary_localization";
    case ErrorKind::ObjectLocalization: return "object_localization";
    case ErrorKind::BoundaryApproximation: return "boundary_approximation";
    case ErrorKind::InnerMask: return "inner_mask";
  }
  throw std::invalid_argument("invalid error kind value");
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 shifted into (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ b);
}

BinaryMask scale_error(const BinaryMask& mask, int radius, bool grow) {
  if (radius < 0) throw std::invalid_argument("scale_error: negative radius");
  return grow ? dilate(mask, radius) : erode(mask, radius);
}

Polygon boundary_localization_error(const Polygon& poly, double stddev, RngStream& rng) {
  if (stddev < 0) throw std::invalid_argument("negative std");
  Polygon out = poly;
  for (Point& v : out.vertices) {
    v.x += stddev * rng.gaussian();
    v.y += stddev * rng.gaussian();
  }
  return out;
}

BinaryMask object_localization_error(const BinaryMask& mask, double offset, RngStream& rng) {
  if (offset < 0) throw std::invalid_argument("negative offset");
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const int dc = static_cast<int>(std::llround(offset * std::cos(angle)));
  const int dr = static_cast<int>(std::llround(offset * std::sin(angle)));
  return translate(mask, dr, dc);
}

namespace {

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::hypot(dx, dy);
}

void douglas_peucker(const std::vector<Point>& pts, std::size_t lo, std::size_t hi,
                     double tolerance, std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t worst_idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double dist = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (dist > worst) {
      worst = dist;
      worst_idx = i;
    }
  }
  if (worst > tolerance) {
    keep[worst_idx] = true;
    douglas_peucker(pts, lo, worst_idx, tolerance, keep);
    douglas_peucker(pts, worst_idx, hi, tolerance, keep);
  }
}

}  // namespace

Polygon boundary_approximation_error(const Polygon& poly, double tolerance) {
  if (tolerance < 0) throw std::invalid_argument("negative tolerance");
  const std::size_t n = poly.vertices.size();
  if (n < 3) return poly;

  // Split the closed ring at its two most distant vertices (dominant chord).
  std::size_t ia = 0, ib = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = poly.vertices[i].x - poly.vertices[j].x;
      const double dy = poly.vertices[i].y - poly.vertices[j].y;
      const double dist2 = dx * dx + dy * dy;
      if (dist2 > best) {
        best = dist2;
        ia = i;
        ib = j;
      }
    }
  }

  // Rotate so the ring starts at ia; ib splits it into two open chains.
  std::vector<Point> ring(n);
  for (std::size_t i = 0; i < n; ++i) ring[i] = poly.vertices[(ia + i) % n];
  const std::size_t split = (ib + n - ia) % n;

  std::vector<bool> keep(n, false);
  keep[0] = true;
  keep[split] = true;
  douglas_peucker(ring, 0, split, tolerance, keep);
  // Second chain wraps around; close it against the start vertex.
  std::vector<Point> tail(ring.begin() + static_cast<std::ptrdiff_t>(split), ring.end());
  tail.push_back(ring[0]);
  std::vector<bool> tail_keep(tail.size(), false);
  tail_keep.front() = true;
  tail_keep.back() = true;
  douglas_peucker(tail, 0, tail.size() - 1, tolerance, tail_keep);
  for (std::size_t i = 1; i + 1 < tail.size(); ++i)
    if (tail_keep[i]) keep[split + i] = true;

  Polygon out;
  // Restore the original vertex order.
  std::vector<bool> keep_orig(n, false);
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) keep_orig[(ia + i) % n] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (keep_orig[i]) out.vertices.push_back(poly.vertices[i]);
  return out;
}

BinaryMask inner_mask_error(const BinaryMask& mask, int holes, RngStream& rng) {
  if (holes < 0) throw std::invalid_argument("negative hole count");
  std::vector<std::pair<int, int>> true_pixels;
  int rmin = mask.height, rmax = -1, cmin = mask.width, cmax = -1;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      true_pixels.emplace_back(r, c);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
  }
  if (true_pixels.empty() || holes == 0) return mask;

  const double diag = std::hypot(rmax - rmin + 1, cmax - cmin + 1);
  BinaryMask out = mask;
  for (int h = 0; h < holes; ++h) {
    const auto& [cr, cc] = true_pixels[static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(true_pixels.size()))];
    const double semi_a = (0.02 + 0.08 * rng.uniform()) * diag;
    const double semi_b = (0.02 + 0.08 * rng.uniform()) * diag;
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double cos_phi = std::cos(phi);
    const double sin_phi = std::sin(phi);
    const int reach = static_cast<int>(std::ceil(std::max(semi_a, semi_b))) + 1;
    for (int r = std::max(0, cr - reach); r <= std::min(mask.height - 1, cr + reach); ++r) {
      for (int c = std::max(0, cc - reach); c <= std::min(mask.width - 1, cc + reach); ++c) {
        const double dr = r - cr;
        const double dc = c - cc;
        const double u = (dc * cos_phi + dr * sin_phi) / std::max(semi_a, 1e-9);
        const double v = (-dc * sin_phi + dr * cos_phi) / std::max(semi_b, 1e-9);
        if (u * u + v * v <= 1.0) out.set(r, c, false);
      }
    }
  }
  return out;
}

namespace {

// Bilinear resampling with pixel-center alignment.
std::vector<double> resize_bilinear(const std::vector<double>& src, int sh, int sw,
                                    int dh, int dw) {
  std::vector<double> dst(static_cast<std::size_t>(dh) * dw);
  const double sy = static_cast<double>(sh) / dh;
  const double sx = static_cast<double>(sw) / dw;
  for (int r = 0; r < dh; ++r) {
    const double fy = (r + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    const int ya = std::clamp(y0, 0, sh - 1);
    const int yb = std::clamp(y0 + 1, 0, sh - 1);
    for (int c = 0; c < dw; ++c) {
      const double fx = (c + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      const int xa = std::clamp(x0, 0, sw - 1);
      const int xb = std::clamp(x0 + 1, 0, sw - 1);
      const double top = src[static_cast<std::size_t>(ya) * sw + xa] * (1 - wx) +
                         src[static_cast<std::size_t>(ya) * sw + xb] * wx;
      const double bot = src[static_cast<std::size_t>(yb) * sw + xa] * (1 - wx) +
                         src[static_cast<std::size_t>(yb) * sw + xb] * wx;
      dst[static_cast<std::size_t>(r) * dw + c] = top * (1 - wy) + bot * wy;
    }
  }
  return dst;
}

}  // namespace

BinaryMask cap_resolution_instance(const BinaryMask& mask, int res) {
  if (res < 1) throw std::invalid_argument("cap_resolution_instance: res must be >= 1");
  int rmin = mask.height, rmax = -1, cmin = mask.width, cmax = -1;
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (!mask.at(r, c)) continue;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
  }
  if (rmax < 0) return mask;  // empty mask

  const int bh = rmax - rmin + 1;
  const int bw = cmax - cmin + 1;
  std::vector<double> crop(static_cast<std::size_t>(bh) * bw);
  for (int r = 0; r < bh; ++r)
    for (int c = 0; c < bw; ++c)
      crop[static_cast<std::size_t>(r) * bw + c] = mask.at(rmin + r, cmin + c) ? 1.0 : 0.0;

  const std::vector<double> small = resize_bilinear(crop, bh, bw, res, res);
  const std::vector<double> restored = resize_bilinear(small, res, res, bh, bw);

  BinaryMask out(mask.height, mask.width);
  for (int r = 0; r < bh; ++r)
    for (int c = 0; c < bw; ++c)
      if (restored[static_cast<std::size_t>(r) * bw + c] >= 0.5)
        out.set(rmin + r, cmin + c, true);
  return out;
}

PanopticLabelMap cap_resolution_panoptic(const PanopticLabelMap& labels, int ratio) {
  if (ratio < 1) throw std::invalid_argument("cap_resolution_panoptic: ratio must be >= 1");
  if (ratio == 1) return labels;

  const int sh = (labels.height + ratio - 1) / ratio;
  const int sw = (labels.width + ratio - 1) / ratio;
  std::vector<int> small(static_cast<std::size_t>(sh) * sw);
  for (int r = 0; r < sh; ++r)
    for (int c = 0; c < sw; ++c)
      small[static_cast<std::size_t>(r) * sw + c] =
          labels.id_at(std::min(r * ratio, labels.height - 1),
                       std::min(c * ratio, labels.width - 1));

  PanopticLabelMap out(labels.height, labels.width);
  for (int r = 0; r < labels.height; ++r)
    for (int c = 0; c < labels.width; ++c)
      out.set_id(r, c, small[static_cast<std::size_t>(r / ratio) * sw + c / ratio]);

  // Keep only segments that survived the resampling.
  std::vector<char> alive;
  int max_id = 0;
  for (int id : out.ids) max_id = std::max(max_id, id);
  alive.assign(static_cast<std::size_t>(max_id) + 1, 0);
  for (int id : out.ids)
    if (id > 0) alive[static_cast<std::size_t>(id)] = 1;
  for (const SegmentInfo& seg : labels.segments)
    if (seg.id <= max_id && alive[static_cast<std::size_t>(seg.id)])
      out.segments.push_back(seg);
  return out;
}

}  // namespace beval
