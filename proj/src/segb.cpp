#include "openmetrics/segb.hpp"

#include <cstring>
#include <fstream>

namespace openmetrics {

namespace {

constexpr std::size_t kHeaderSize = 16;
constexpr char kMagic[4] = {'S', 'E', 'G', 'B'};

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

}  // namespace

SegbRaster segb_read(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize ||
      std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw BadMagic("segb: missing SEGB magic");
  }
  if (bytes[4] != 1) {
    throw BadVersion("segb: unsupported version " + std::to_string(bytes[4]));
  }
  SegbRaster r;
  r.wide = (bytes[5] & 0x1) != 0;
  r.width = static_cast<int>(read_u32(bytes.data() + 8));
  r.height = static_cast<int>(read_u32(bytes.data() + 12));
  const std::size_t stride = r.wide ? 4 : 2;
  const std::size_t expect = kHeaderSize + r.pixels() * stride;
  if (bytes.size() != expect) {
    throw TruncatedPayload("segb: expected " + std::to_string(expect) +
                           " bytes, got " + std::to_string(bytes.size()));
  }
  r.ids.resize(r.pixels());
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < r.ids.size(); ++i, p += stride) {
    r.ids[i] = r.wide ? read_u32(p)
                      : static_cast<std::uint32_t>(p[0]) |
                            static_cast<std::uint32_t>(p[1]) << 8;
  }
  return r;
}

std::vector<std::uint8_t> segb_write(const SegbRaster& raster) {
  if (raster.ids.size() != raster.pixels()) {
    throw ShapeMismatch("segb: id count does not match width*height");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + raster.ids.size() * (raster.wide ? 4 : 2));
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(1);
  out.push_back(raster.wide ? 1 : 0);
  out.push_back(0);
  out.push_back(0);
  write_u32(out, static_cast<std::uint32_t>(raster.width));
  write_u32(out, static_cast<std::uint32_t>(raster.height));
  for (std::uint32_t id : raster.ids) {
    if (!raster.wide && id > SegbRaster::kSentinel16) {
      throw Overflow("segb: id " + std::to_string(id) +
                     " does not fit 16-bit payload");
    }
    out.push_back(static_cast<std::uint8_t>(id));
    out.push_back(static_cast<std::uint8_t>(id >> 8));
    if (raster.wide) {
      out.push_back(static_cast<std::uint8_t>(id >> 16));
      out.push_back(static_cast<std::uint8_t>(id >> 24));
    }
  }
  return out;
}

SegbRaster segb_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("segb: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return segb_read(bytes);
}

void segb_save(const SegbRaster& raster, const std::filesystem::path& path) {
  const auto bytes = segb_write(raster);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("segb: cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("segb: short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("segb: cannot rename " + tmp.string() + ": " + ec.message());
  }
}

}  // namespace openmetrics
