// Shared helpers and independent oracles for the test suites. Everything here
// is deliberately brute force and stays independent of the library's
// implementation paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "beval/error_sim.hpp"
#include "beval/mask.hpp"

namespace btest {

inline beval::BinaryMask random_mask(int h, int w, double density, beval::RngStream& rng) {
  beval::BinaryMask m(h, w);
  for (auto& px : m.pixels) px = rng.uniform() < density ? 1 : 0;
  return m;
}

// A random mask with spatial structure: union of a few random rectangles.
inline beval::BinaryMask random_blocky_mask(int h, int w, beval::RngStream& rng) {
  beval::BinaryMask m(h, w);
  const int blocks = 1 + static_cast<int>(rng.uniform() * 4);
  for (int b = 0; b < blocks; ++b) {
    const int r0 = static_cast<int>(rng.uniform() * h);
    const int c0 = static_cast<int>(rng.uniform() * w);
    const int bh = 1 + static_cast<int>(rng.uniform() * (h / 2));
    const int bw = 1 + static_cast<int>(rng.uniform() * (w / 2));
    for (int r = r0; r < std::min(h, r0 + bh); ++r)
      for (int c = c0; c < std::min(w, c0 + bw); ++c) m.set(r, c, true);
  }
  return m;
}

// Chebyshev distance from each pixel to the nearest false or out-of-frame
// location, by exhaustive scan. Out-of-frame is distance (to the frame edge
// plus one) in the Chebyshev sense.
inline int chebyshev_distance_to_background(const beval::BinaryMask& m, int r, int c) {
  int best = 1 + std::min({r, c, m.height - 1 - r, m.width - 1 - c});
  for (int rr = 0; rr < m.height; ++rr)
    for (int cc = 0; cc < m.width; ++cc)
      if (!m.at(rr, cc)) best = std::min(best, std::max(std::abs(rr - r), std::abs(cc - c)));
  return best;
}

// erode by brute-force Chebyshev-ball test: pixel survives iff every location
// in its radius-k ball (out-of-frame counts as false) is true.
inline beval::BinaryMask erode_oracle(const beval::BinaryMask& m, int k) {
  beval::BinaryMask out(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      bool keep = true;
      for (int dr = -k; dr <= k && keep; ++dr)
        for (int dc = -k; dc <= k && keep; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (!m.in_bounds(rr, cc) || !m.at(rr, cc)) keep = false;
        }
      out.set(r, c, keep);
    }
  }
  return out;
}

inline beval::BinaryMask dilate_oracle(const beval::BinaryMask& m, int k) {
  beval::BinaryMask out(m.height, m.width);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      bool hit = false;
      for (int dr = -k; dr <= k && !hit; ++dr)
        for (int dc = -k; dc <= k && !hit; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (m.in_bounds(rr, cc) && m.at(rr, cc)) hit = true;
        }
      out.set(r, c, hit);
    }
  }
  return out;
}

// Even-odd point-in-polygon test by ray casting from the point to the right;
// crossings at x <= px count (the library's documented tie convention).
inline bool point_in_polygon_oracle(const beval::Polygon& poly, double px, double py) {
  int crossings = 0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const beval::Point& a = poly.vertices[i];
    const beval::Point& b = poly.vertices[(i + 1) % n];
    const double ylo = std::min(a.y, b.y);
    const double yhi = std::max(a.y, b.y);
    if (py < ylo || py >= yhi) continue;
    const double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
    if (x <= px) ++crossings;
  }
  return crossings % 2 == 1;
}

inline beval::BinaryMask centered_square(int frame, int side) {
  beval::BinaryMask m(frame, frame);
  const int off = (frame - side) / 2;
  for (int r = off; r < off + side; ++r)
    for (int c = off; c < off + side; ++c) m.set(r, c, true);
  return m;
}

inline beval::BinaryMask euclidean_disc(int frame, double radius, double cr, double cc) {
  beval::BinaryMask m(frame, frame);
  for (int r = 0; r < frame; ++r)
    for (int c = 0; c < frame; ++c) {
      const double dr = (r + 0.5) - cr;
      const double dc = (c + 0.5) - cc;
      if (dr * dr + dc * dc <= radius * radius) m.set(r, c, true);
    }
  return m;
}

}  // namespace btest
