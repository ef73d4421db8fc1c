#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace beval {

class MalformedMapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SegmentInfo {
  int id = 0;  // > 0; 0 is void in the id grid
  int category_id = 0;
  bool isthing = false;
};

/// Per-pixel segment-id grid plus segment metadata. Id 0 marks void pixels.
struct PanopticLabelMap {
  int height = 0;
  int width = 0;
  std::vector<int> ids;  // row-major
  std::vector<SegmentInfo> segments;

  PanopticLabelMap() = default;
  PanopticLabelMap(int h, int w)
      : height(h), width(w), ids(static_cast<std::size_t>(h) * w, 0) {}

  int id_at(int r, int c) const { return ids[static_cast<std::size_t>(r) * width + c]; }
  void set_id(int r, int c, int id) { ids[static_cast<std::size_t>(r) * width + c] = id; }

  /// Checks segment-id uniqueness, orphan pixels, and empty segments.
  void validate() const;
};

}  // namespace beval
