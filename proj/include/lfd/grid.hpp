#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lfd/common.hpp"

namespace lfd {

// Pixel-space point. x is the column index, y the row index, origin at the
// top-left corner. Every module uses this convention.
struct GridPoint {
  float x = 0.f;
  float y = 0.f;
};

inline float distance(const GridPoint& a, const GridPoint& b) {
  const float dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Row-major h x w grid of 32-bit floats (row 0 = top). Used for density
// maps, polygon drawings and saliency maps. Treated as an immutable value
// once an operation has returned it.
struct ScalarField {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<float> data;

  ScalarField() = default;
  ScalarField(uint32_t w, uint32_t h, float fill = 0.f)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
    require(w >= 1 && h >= 1, "ScalarField: dimensions must be >= 1");
  }

  float& at(uint32_t x, uint32_t y) { return data[static_cast<size_t>(y) * width + x]; }
  float at(uint32_t x, uint32_t y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const ScalarField&) const = default;
};

namespace detail {

inline void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline uint16_t get_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write: " + path);
}

}  // namespace detail

// F32GRID binary format:
//   bytes 0-3   magic "F32G"
//   bytes 4-5   version, u16 LE, = 1
//   bytes 6-9   width,   u32 LE
//   bytes 10-13 height,  u32 LE
//   then width*height IEEE-754 f32 LE, row-major, row 0 first.
inline void write_f32grid(const ScalarField& field, const std::string& path) {
  require(field.width >= 1 && field.height >= 1, "write_f32grid: empty dimension");
  require(field.data.size() == static_cast<size_t>(field.width) * field.height,
          "write_f32grid: data length mismatch");
  std::string out;
  out.reserve(14 + field.data.size() * 4);
  out += "F32G";
  detail::put_u16le(out, 1);
  detail::put_u32le(out, field.width);
  detail::put_u32le(out, field.height);
  for (float v : field.data) detail::put_u32le(out, std::bit_cast<uint32_t>(v));
  detail::write_file(path, out);
}

inline ScalarField read_f32grid(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 14) throw format_error("f32grid: truncated header in " + path);
  if (std::memcmp(p, "F32G", 4) != 0) throw format_error("f32grid: bad magic in " + path);
  const uint16_t version = detail::get_u16le(p + 4);
  if (version != 1) throw format_error("f32grid: unsupported version in " + path);
  const uint32_t w = detail::get_u32le(p + 6);
  const uint32_t h = detail::get_u32le(p + 10);
  if (w == 0) throw format_error("f32grid: zero width in " + path);
  if (h == 0) throw format_error("f32grid: zero height in " + path);
  const size_t count = static_cast<size_t>(w) * h;
  if (bytes.size() != 14 + count * 4)
    throw format_error("f32grid: truncated payload in " + path);
  ScalarField field(w, h);
  for (size_t i = 0; i < count; ++i)
    field.data[i] = std::bit_cast<float>(detail::get_u32le(p + 14 + i * 4));
  return field;
}

// Human-viewable export. Binary PGM (P5), maxval 255. Bytes are
// clamp(round-half-up(v), 0, 255); read maps byte v -> float v.
inline void write_pgm(const ScalarField& field, const std::string& path) {
  require(field.width >= 1 && field.height >= 1, "write_pgm: empty dimension");
  std::string out = "P5\n" + std::to_string(field.width) + " " +
                    std::to_string(field.height) + "\n255\n";
  out.reserve(out.size() + field.data.size());
  for (float v : field.data) {
    float c = v < 0.f ? 0.f : (v > 255.f ? 255.f : v);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::floor(c + 0.5f))));
  }
  detail::write_file(path, out);
}

inline ScalarField read_pgm(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw format_error("pgm: not a P5 file: " + path);
  uint32_t w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (!in) throw format_error("pgm: bad header in " + path);
  if (maxval != 255) throw format_error("pgm: maxval must be 255 in " + path);
  if (w == 0 || h == 0) throw format_error("pgm: zero dimension in " + path);
  in.get();  // single whitespace byte after maxval
  const size_t offset = static_cast<size_t>(in.tellg());
  const size_t count = static_cast<size_t>(w) * h;
  if (bytes.size() < offset + count) throw format_error("pgm: truncated payload in " + path);
  ScalarField field(w, h);
  for (size_t i = 0; i < count; ++i)
    field.data[i] = static_cast<float>(static_cast<unsigned char>(bytes[offset + i]));
  return field;
}

// Placement text format: UTF-8 lines "x y" (pixel coordinates), lines
// starting with '#' ignored. Order is kept for reproducibility only.
inline void write_placements(const std::vector<GridPoint>& points, const std::string& path) {
  std::ostringstream out;
  out.precision(9);  // enough digits for exact f32 round-trip
  for (const auto& p : points) out << p.x << " " << p.y << "\n";
  detail::write_file(path, out.str());
}

inline std::vector<GridPoint> read_placements(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  std::istringstream in(bytes);
  std::vector<GridPoint> points;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    GridPoint p;
    if (!(ls >> p.x >> p.y))
      throw format_error("placements: bad line " + std::to_string(lineno) + " in " + path);
    points.push_back(p);
  }
  return points;
}

}  // namespace lfd
