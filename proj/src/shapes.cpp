#include "beval/shapes.hpp"

#include <cmath>
#include <numbers>

#include "beval/error_sim.hpp"

namespace beval {

GtObject make_square_object(int frame_h, int frame_w, int side, int center_r, int center_c) {
  GtObject obj;
  obj.mask = BinaryMask(frame_h, frame_w);
  const int r0 = center_r - side / 2;
  const int c0 = center_c - side / 2;
  for (int r = std::max(0, r0); r < std::min(frame_h, r0 + side); ++r)
    for (int c = std::max(0, c0); c < std::min(frame_w, c0 + side); ++c)
      obj.mask.set(r, c, true);
  Polygon poly;
  poly.vertices = {{double(c0), double(r0)},
                   {double(c0 + side), double(r0)},
                   {double(c0 + side), double(r0 + side)},
                   {double(c0), double(r0 + side)}};
  obj.polygon = poly;
  return obj;
}

GtObject make_disc_object(int frame_h, int frame_w, double radius, double center_r,
                          double center_c) {
  GtObject obj;
  obj.mask = BinaryMask(frame_h, frame_w);
  for (int r = 0; r < frame_h; ++r) {
    for (int c = 0; c < frame_w; ++c) {
      const double dr = (r + 0.5) - center_r;
      const double dc = (c + 0.5) - center_c;
      if (dr * dr + dc * dc <= radius * radius) obj.mask.set(r, c, true);
    }
  }
  Polygon poly;
  const int segments = std::max(24, static_cast<int>(radius * 2));
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    poly.vertices.push_back({center_c + radius * std::cos(a), center_r + radius * std::sin(a)});
  }
  obj.polygon = poly;
  return obj;
}

GtObject make_blob_object(int frame_h, int frame_w, double radius, double center_r,
                          double center_c, double wobble, std::uint64_t seed) {
  RngStream rng(derive_seed(seed, 0x626c6f62ULL));
  // A few harmonics with random phases; frequencies chosen so the boundary
  // detail is finer than a 28x28 resampling grid can keep for large objects.
  struct Harmonic {
    int freq;
    double amp;
    double phase;
  };
  std::vector<Harmonic> harmonics;
  const int bands[] = {3, 7, 13};
  for (int freq : bands)
    harmonics.push_back({freq, wobble * (0.3 + 0.7 * rng.uniform()),
                         2.0 * std::numbers::pi * rng.uniform()});

  auto radius_at = [&](double angle) {
    double m = 1.0;
    for (const Harmonic& h : harmonics) m += h.amp * std::sin(h.freq * angle + h.phase);
    return radius * std::max(m, 0.1);
  };

  GtObject obj;
  obj.mask = BinaryMask(frame_h, frame_w);
  for (int r = 0; r < frame_h; ++r) {
    for (int c = 0; c < frame_w; ++c) {
      const double dr = (r + 0.5) - center_r;
      const double dc = (c + 0.5) - center_c;
      const double dist = std::hypot(dr, dc);
      if (dist <= radius_at(std::atan2(dr, dc))) obj.mask.set(r, c, true);
    }
  }
  Polygon poly;
  const int segments = std::max(48, static_cast<int>(radius * 4));
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    const double rr = radius_at(a);
    poly.vertices.push_back({center_c + rr * std::cos(a), center_r + rr * std::sin(a)});
  }
  obj.polygon = poly;
  return obj;
}

std::vector<GtObject> default_synthetic_objects(int frame_h, int frame_w, int count,
                                                std::uint64_t seed) {
  std::vector<GtObject> objects;
  objects.reserve(static_cast<std::size_t>(count));
  const int min_dim = std::min(frame_h, frame_w);
  for (int i = 0; i < count; ++i) {
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(i), 0x73686170ULL));
    // Sizes spread log-uniformly from tiny to about a third of the frame.
    const double extent = 8.0 * std::pow(static_cast<double>(min_dim) / 24.0, rng.uniform());
    const double margin = extent * 1.4 + 2.0;
    const double cr = margin + rng.uniform() * std::max(1.0, frame_h - 2.0 * margin);
    const double cc = margin + rng.uniform() * std::max(1.0, frame_w - 2.0 * margin);
    switch (i % 3) {
      case 0:
        objects.push_back(make_square_object(frame_h, frame_w, static_cast<int>(extent),
                                             static_cast<int>(cr), static_cast<int>(cc)));
        break;
      case 1:
        objects.push_back(make_disc_object(frame_h, frame_w, extent / 2.0, cr, cc));
        break;
      default:
        objects.push_back(make_blob_object(frame_h, frame_w, extent / 2.0, cr, cc, 0.12,
                                           derive_seed(seed, static_cast<std::uint64_t>(i))));
        break;
    }
    if (objects.back().mask.empty()) {
      // Degenerate draw (extent rounded to zero); replace with a small square.
      objects.back() = make_square_object(frame_h, frame_w, 4, frame_h / 2, frame_w / 2);
    }
  }
  return objects;
}

}  // namespace beval
