#ifndef V2XNOISE_IO_PCD_HPP
#define V2XNOISE_IO_PCD_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "v2xnoise/errors.hpp"
#include "v2xnoise/geometry.hpp"

namespace v2xnoise::io {

enum class PcdEncoding { kAscii, kBinary };

// PCD-style container. Fields are x y z intensity with optional azimuth and
// timestamp channels, all stored as 8-byte doubles (SIZE 8 TYPE F) so the
// binary encoding round-trips bit-exactly. Little-endian payload.

namespace detail {

struct HeaderInfo {
  std::vector<std::string> fields;
  std::size_t points = 0;
  bool binary = false;
  std::size_t data_offset = 0;  // byte offset where the payload starts
};

inline HeaderInfo parse_pcd_header(const std::string& text,
                                   const std::filesystem::path& path) {
  HeaderInfo h;
  std::size_t pos = 0;
  bool have_points = false, have_data = false, have_fields = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) break;
    std::string line = text.substr(pos, eol - pos);
    std::size_t line_start = pos;
    pos = eol + 1;
    if (line.empty() || line[0] == '#') continue;

    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "FIELDS") {
      std::string f;
      while (ss >> f) h.fields.push_back(f);
      have_fields = true;
    } else if (key == "SIZE") {
      int s;
      while (ss >> s) {
        if (s != 8) {
          throw ParseError("unsupported field size " + std::to_string(s) +
                               " in " + path.string() + " (expected 8)",
                           line_start);
        }
      }
    } else if (key == "TYPE") {
      std::string t;
      while (ss >> t) {
        if (t != "F") {
          throw ParseError("unsupported field type '" + t + "' in " +
                               path.string(),
                           line_start);
        }
      }
    } else if (key == "POINTS" || key == "WIDTH") {
      long long n = -1;
      if (!(ss >> n) || n < 0) {
        throw ParseError("invalid " + key + " in " + path.string(),
                         line_start);
      }
      if (key == "POINTS") {
        h.points = static_cast<std::size_t>(n);
        have_points = true;
      }
    } else if (key == "DATA") {
      std::string mode;
      ss >> mode;
      if (mode == "binary") {
        h.binary = true;
      } else if (mode != "ascii") {
        throw ParseError("unsupported DATA mode '" + mode + "' in " +
                             path.string(),
                         line_start);
      }
      h.data_offset = pos;
      have_data = true;
      break;
    }
    // VERSION, COUNT, HEIGHT, VIEWPOINT are accepted and ignored.
  }
  if (!have_fields || !have_points || !have_data) {
    throw ParseError("incomplete PCD header in " + path.string());
  }
  bool ok = h.fields.size() >= 4 && h.fields[0] == "x" &&
            h.fields[1] == "y" && h.fields[2] == "z" &&
            h.fields[3] == "intensity";
  for (std::size_t i = 4; ok && i < h.fields.size(); ++i) {
    ok = h.fields[i] == "azimuth" || h.fields[i] == "timestamp";
  }
  if (!ok) {
    throw ParseError("unsupported field layout in " + path.string());
  }
  return h;
}

inline double load_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline void store_le_double(double d, unsigned char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(bits >> (8 * i));
}

}  // namespace detail

inline PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open point cloud: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  detail::HeaderInfo h = detail::parse_pcd_header(text, path);
  bool want_azimuth = false, want_timestamp = false;
  for (std::size_t i = 4; i < h.fields.size(); ++i) {
    if (h.fields[i] == "azimuth") want_azimuth = true;
    if (h.fields[i] == "timestamp") want_timestamp = true;
  }

  PointCloud cloud;
  cloud.points.reserve(h.points);
  if (want_azimuth) cloud.azimuth.reserve(h.points);
  if (want_timestamp) cloud.timestamp.reserve(h.points);

  auto record = [&](const std::vector<double>& vals, std::size_t offset) {
    Point p{vals[0], vals[1], vals[2], vals[3]};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw ParseError("non-finite coordinate in " + path.string(), offset);
    }
    cloud.points.push_back(p);
    std::size_t k = 4;
    for (std::size_t f = 4; f < h.fields.size(); ++f, ++k) {
      if (h.fields[f] == "azimuth") cloud.azimuth.push_back(vals[k]);
      if (h.fields[f] == "timestamp") cloud.timestamp.push_back(vals[k]);
    }
  };

  std::size_t n_fields = h.fields.size();
  if (h.binary) {
    std::size_t need = h.points * n_fields * 8;
    if (text.size() - h.data_offset < need) {
      throw ParseError("truncated binary payload in " + path.string(),
                       text.size());
    }
    const auto* p =
        reinterpret_cast<const unsigned char*>(text.data()) + h.data_offset;
    std::vector<double> vals(n_fields);
    for (std::size_t i = 0; i < h.points; ++i) {
      for (std::size_t f = 0; f < n_fields; ++f) {
        vals[f] = detail::load_le_double(p);
        p += 8;
      }
      record(vals, h.data_offset + i * n_fields * 8);
    }
  } else {
    std::istringstream body(text.substr(h.data_offset));
    std::vector<double> vals(n_fields);
    for (std::size_t i = 0; i < h.points; ++i) {
      for (std::size_t f = 0; f < n_fields; ++f) {
        if (!(body >> vals[f])) {
          std::streamoff at = body.tellg();
          throw ParseError(
              "truncated or malformed ASCII payload in " + path.string(),
              h.data_offset + static_cast<std::size_t>(at < 0 ? 0 : at));
        }
      }
      record(vals, h.data_offset);
    }
  }
  return cloud;
}

inline void write_point_cloud(const PointCloud& cloud,
                              const std::filesystem::path& path,
                              PcdEncoding encoding = PcdEncoding::kBinary) {
  cloud.check_consistent();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());

  std::string fields = "x y z intensity";
  std::size_t n_fields = 4;
  if (cloud.has_azimuth()) {
    fields += " azimuth";
    ++n_fields;
  }
  if (cloud.has_timestamp()) {
    fields += " timestamp";
    ++n_fields;
  }
  std::string sizes, types, counts;
  for (std::size_t i = 0; i < n_fields; ++i) {
    sizes += i ? " 8" : "8";
    types += i ? " F" : "F";
    counts += i ? " 1" : "1";
  }

  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION 0.7\n"
      << "FIELDS " << fields << "\n"
      << "SIZE " << sizes << "\n"
      << "TYPE " << types << "\n"
      << "COUNT " << counts << "\n"
      << "WIDTH " << cloud.size() << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << cloud.size() << "\n"
      << "DATA " << (encoding == PcdEncoding::kBinary ? "binary" : "ascii")
      << "\n";

  auto values_of = [&](std::size_t i, std::vector<double>& vals) {
    const Point& p = cloud.points[i];
    vals.clear();
    vals.insert(vals.end(), {p.x, p.y, p.z, p.intensity});
    if (cloud.has_azimuth()) vals.push_back(cloud.azimuth[i]);
    if (cloud.has_timestamp()) vals.push_back(cloud.timestamp[i]);
  };

  std::vector<double> vals;
  if (encoding == PcdEncoding::kBinary) {
    unsigned char buf[8];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      values_of(i, vals);
      for (double v : vals) {
        detail::store_le_double(v, buf);
        out.write(reinterpret_cast<const char*>(buf), 8);
      }
    }
  } else {
    char line[64];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      values_of(i, vals);
      for (std::size_t f = 0; f < vals.size(); ++f) {
        std::snprintf(line, sizeof(line), "%.6f", vals[f]);
        out << (f ? " " : "") << line;
      }
      out << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_PCD_HPP
