#include "openmetrics/rle.hpp"

#include <algorithm>
#include <limits>

namespace openmetrics {

RleMask rle_encode(std::span<const std::uint8_t> mask, int height, int width) {
  if (static_cast<std::int64_t>(mask.size()) !=
      static_cast<std::int64_t>(height) * width) {
    throw ShapeMismatch("rle_encode: mask size does not match height*width");
  }
  RleMask out;
  out.height = height;
  out.width = width;
  std::uint8_t current = 0;  // background first
  std::uint32_t run = 0;
  for (std::uint8_t px : mask) {
    const std::uint8_t v = px ? 1 : 0;
    if (v != current) {
      out.counts.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  out.counts.push_back(run);
  if (mask.empty()) out.counts.clear();
  return out;
}

std::vector<std::uint8_t> rle_decode(const RleMask& rle) {
  const std::int64_t area =
      static_cast<std::int64_t>(rle.height) * rle.width;
  std::int64_t total = 0;
  for (std::uint32_t c : rle.counts) total += c;
  if (total != area) {
    throw BadCounts("rle_decode: counts sum " + std::to_string(total) +
                    " != raster area " + std::to_string(area));
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(area));
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (std::uint32_t c : rle.counts) {
    std::fill_n(mask.begin() + pos, c, value);
    pos += c;
    value ^= 1;
  }
  return mask;
}

std::int64_t rle_area(const RleMask& rle) {
  std::int64_t area = 0;
  for (std::size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

std::int64_t rle_intersection(const RleMask& a, const RleMask& b) {
  if (!a.same_size(b)) throw SizeMismatch("rle_intersection: raster sizes differ");
  // Walk both run lists as [start,end) intervals over the flat pixel index.
  std::int64_t inter = 0;
  std::size_t ia = 0, ib = 0;
  std::int64_t pa = 0, pb = 0;  // start position of the current run
  bool va = false, vb = false;  // value of the current run
  std::int64_t ea = ia < a.counts.size() ? pa + a.counts[ia] : 0;
  std::int64_t eb = ib < b.counts.size() ? pb + b.counts[ib] : 0;
  while (ia < a.counts.size() && ib < b.counts.size()) {
    if (va && vb) {
      const std::int64_t lo = std::max(pa, pb);
      const std::int64_t hi = std::min(ea, eb);
      if (hi > lo) inter += hi - lo;
    }
    if (ea <= eb) {
      pa = ea;
      va = !va;
      ++ia;
      if (ia < a.counts.size()) ea = pa + a.counts[ia];
    } else {
      pb = eb;
      vb = !vb;
      ++ib;
      if (ib < b.counts.size()) eb = pb + b.counts[ib];
    }
  }
  return inter;
}

double rle_iou(const RleMask& a, const RleMask& b) {
  const std::int64_t inter = rle_intersection(a, b);
  const std::int64_t uni = rle_area(a) + rle_area(b) - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

RleBbox rle_bbox(const RleMask& rle) {
  const int h = rle.height;
  std::int64_t min_x = rle.width, max_x = -1, min_y = h, max_y = -1;
  std::int64_t pos = 0;
  bool fg = false;
  for (std::uint32_t c : rle.counts) {
    if (fg && c > 0 && h > 0) {
      const std::int64_t first = pos, last = pos + c - 1;
      min_x = std::min(min_x, first / h);
      max_x = std::max(max_x, last / h);
      if (last / h > first / h) {
        min_y = 0;  // the run spans a column boundary
        max_y = h - 1;
      } else {
        min_y = std::min(min_y, first % h);
        max_y = std::max(max_y, last % h);
      }
    }
    pos += c;
    fg = !fg;
  }
  if (max_x < 0) return {};
  return {static_cast<double>(min_x), static_cast<double>(min_y),
          static_cast<double>(max_x - min_x + 1),
          static_cast<double>(max_y - min_y + 1)};
}

std::string coco_counts_encode(const RleMask& rle) {
  std::string out;
  out.reserve(rle.counts.size() * 2);
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    std::int64_t x = static_cast<std::int64_t>(rle.counts[i]);
    if (i > 2) x -= static_cast<std::int64_t>(rle.counts[i - 2]);
    bool more = true;
    while (more) {
      std::int64_t group = x & 0x1f;
      x >>= 5;
      more = (group & 0x10) ? x != -1 : x != 0;
      if (more) group |= 0x20;
      out.push_back(static_cast<char>(group + 48));
    }
  }
  return out;
}

RleMask coco_counts_decode(std::string_view text, int height, int width) {
  RleMask out;
  out.height = height;
  out.width = width;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::int64_t x = 0;
    int shift = 0;
    bool more = true;
    std::int64_t group = 0;
    while (more) {
      if (pos >= text.size()) {
        throw TruncatedPayload("coco_counts_decode: text ends mid-value");
      }
      const unsigned char ch = static_cast<unsigned char>(text[pos]);
      if (ch < 48 || ch > 111) {
        throw BadChar("coco_counts_decode: codepoint " + std::to_string(ch) +
                      " outside 48..111 at index " + std::to_string(pos));
      }
      group = ch - 48;
      if (shift >= 60) throw Overflow("coco_counts_decode: value too long");
      x |= (group & 0x1f) << shift;
      more = (group & 0x20) != 0;
      ++pos;
      shift += 5;
    }
    if (group & 0x10) x |= -1ll << shift;  // sign-extend negative delta
    if (out.counts.size() > 2) {
      x += static_cast<std::int64_t>(out.counts[out.counts.size() - 2]);
    }
    if (x < 0 || x > std::numeric_limits<std::uint32_t>::max()) {
      throw Overflow("coco_counts_decode: run length " + std::to_string(x) +
                     " out of range");
    }
    out.counts.push_back(static_cast<std::uint32_t>(x));
  }
  return out;
}

}  // namespace openmetrics
