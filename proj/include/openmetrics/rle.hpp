#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openmetrics/errors.hpp"

namespace openmetrics {

// Run-length encoded binary mask in column-major pixel order.
//
// counts alternate background/foreground runs and always start with the
// background run; a mask that begins with foreground therefore carries a
// leading zero count. Canonical form has no other zero runs.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  bool same_size(const RleMask& other) const {
    return height == other.height && width == other.width;
  }
};

// mask is column-major, one byte per pixel, nonzero = foreground.
RleMask rle_encode(std::span<const std::uint8_t> mask, int height, int width);

// Inverse of rle_encode; throws BadCounts when the counts do not sum to
// height*width.
std::vector<std::uint8_t> rle_decode(const RleMask& rle);

// Foreground pixel count.
std::int64_t rle_area(const RleMask& rle);

// Intersection / IoU computed directly on the run representation.
std::int64_t rle_intersection(const RleMask& a, const RleMask& b);
double rle_iou(const RleMask& a, const RleMask& b);

// Tight foreground bounding box as (x, y, w, h); all zeros for empty masks.
// Declared here, defined with the Box type available (instance.hpp).
struct RleBbox {
  double x = 0, y = 0, w = 0, h = 0;
};
RleBbox rle_bbox(const RleMask& rle);

// COCO compressed-counts codec. Runs from the fourth count onward are stored
// as deltas against the count two positions back; each value is emitted as
// little-endian 5-bit groups in one printable character each,
// (group | continuation<<5) + 48, with sign extension on the final group of a
// negative delta. Valid characters are codepoints 48..111.
std::string coco_counts_encode(const RleMask& rle);
RleMask coco_counts_decode(std::string_view text, int height, int width);

}  // namespace openmetrics
