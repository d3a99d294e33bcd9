#ifndef V2XNOISE_IO_RASTER_HPP
#define V2XNOISE_IO_RASTER_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "v2xnoise/cfas.hpp"
#include "v2xnoise/errors.hpp"

namespace v2xnoise::io {

// Flat binary raster container:
//   magic "DVR1" (4 bytes)
//   uint32 LE width, height, channels
//   per channel: H*W float32 LE, row-major
//   per channel: packed validity bitmask, row-major, LSB-first,
//                (H*W + 7) / 8 bytes
inline constexpr char kRasterMagic[4] = {'D', 'V', 'R', '1'};

namespace detail {

inline void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32(std::ofstream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline float get_f32(const unsigned char* p) {
  std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

inline void write_raster(const std::vector<const DepthMap*>& channels,
                         const std::filesystem::path& path) {
  if (channels.empty()) {
    throw std::invalid_argument("write_raster: no channels");
  }
  int w = channels[0]->width;
  int h = channels[0]->height;
  for (const DepthMap* c : channels) {
    if (c->width != w || c->height != h) {
      throw std::invalid_argument("write_raster: channel size mismatch");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kRasterMagic, 4);
  detail::put_u32(out, static_cast<std::uint32_t>(w));
  detail::put_u32(out, static_cast<std::uint32_t>(h));
  detail::put_u32(out, static_cast<std::uint32_t>(channels.size()));
  for (const DepthMap* c : channels) {
    for (float v : c->depth) detail::put_f32(out, v);
  }
  std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<unsigned char> bits((n + 7) / 8);
  for (const DepthMap* c : channels) {
    std::fill(bits.begin(), bits.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (c->valid[i]) bits[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    }
    out.write(reinterpret_cast<const char*>(bits.data()),
              static_cast<std::streamsize>(bits.size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void write_raster(const DepthMap& map,
                         const std::filesystem::path& path) {
  write_raster(std::vector<const DepthMap*>{&map}, path);
}

inline void write_raster(const DepthVariationMap& map,
                         const std::filesystem::path& path) {
  std::vector<const DepthMap*> ptrs;
  for (const DepthMap& c : map.channels) ptrs.push_back(&c);
  write_raster(ptrs, path);
}

inline std::vector<DepthMap> read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  if (text.size() < 16 || std::memcmp(p, kRasterMagic, 4) != 0) {
    throw ParseError("bad raster magic in " + path.string(), 0);
  }
  std::uint32_t w = detail::get_u32(p + 4);
  std::uint32_t h = detail::get_u32(p + 8);
  std::uint32_t c = detail::get_u32(p + 12);
  if (w == 0 || h == 0 || c == 0) {
    throw ParseError("bad raster dimensions in " + path.string(), 4);
  }
  std::size_t n = static_cast<std::size_t>(w) * h;
  std::size_t need = 16 + c * (n * 4 + (n + 7) / 8);
  if (text.size() < need) {
    throw ParseError("truncated raster payload in " + path.string(),
                     text.size());
  }
  std::vector<DepthMap> out;
  out.reserve(c);
  const unsigned char* vp = p + 16;
  const unsigned char* mp = p + 16 + c * n * 4;
  for (std::uint32_t ch = 0; ch < c; ++ch) {
    DepthMap m(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < n; ++i, vp += 4) {
      m.depth[i] = detail::get_f32(vp);
    }
    for (std::size_t i = 0; i < n; ++i) {
      m.valid[i] = (mp[i / 8] >> (i % 8)) & 1u;
    }
    mp += (n + 7) / 8;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_RASTER_HPP
