#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beval/mask.hpp"

namespace beval {

/// A ground-truth object for sweeps: a mask plus, when the shape family has a
/// natural vector form, the polygon it was rasterized from.
struct GtObject {
  BinaryMask mask;
  std::optional<Polygon> polygon;
};

GtObject make_square_object(int frame_h, int frame_w, int side, int center_r, int center_c);

GtObject make_disc_object(int frame_h, int frame_w, double radius, double center_r,
                          double center_c);

/// Star-shaped blob: a disc whose radius is modulated by a few random
/// sinusoidal harmonics. `wobble` is the relative amplitude of the modulation.
GtObject make_blob_object(int frame_h, int frame_w, double radius, double center_r,
                          double center_c, double wobble, std::uint64_t seed);

/// Mixed bundled family (squares, discs, blobs across sizes) for dataset-free
/// sweeps. Deterministic given the seed.
std::vector<GtObject> default_synthetic_objects(int frame_h, int frame_w, int count,
                                                std::uint64_t seed);

}  // namespace beval
