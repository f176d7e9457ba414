#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "openmetrics/errors.hpp"

namespace openmetrics {

// SEGB raster: purpose-built id raster container.
//
// layout (little-endian):
//   magic   "SEGB"        4 bytes
//   version u8            must be 1
//   flags   u8            bit 0: 1 -> 32-bit ids, 0 -> 16-bit ids
//   reserved u16          written as 0
//   width   u32
//   height  u32
//   payload row-major ids, width*height * (2 or 4) bytes
//
// The all-ones id for the active width (0xFFFF / 0xFFFFFFFF) is the
// ignore/void sentinel.
struct SegbRaster {
  static constexpr std::uint32_t kSentinel16 = 0xFFFFu;
  static constexpr std::uint32_t kSentinel32 = 0xFFFFFFFFu;

  int width = 0;
  int height = 0;
  bool wide = false;  // 32-bit ids when true
  std::vector<std::uint32_t> ids;  // row-major

  std::uint32_t sentinel() const { return wide ? kSentinel32 : kSentinel16; }
  std::size_t pixels() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

SegbRaster segb_read(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> segb_write(const SegbRaster& raster);

SegbRaster segb_load(const std::filesystem::path& path);
void segb_save(const SegbRaster& raster, const std::filesystem::path& path);

}  // namespace openmetrics
