#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/grid.hpp"
#include "lfd/rng.hpp"

namespace lfd {

namespace geom {

// Cross product of (a-o) x (b-o). Inputs are pixel-scale floats, so the
// double-precision result is exact and usable as a predicate.
inline double cross(const GridPoint& o, const GridPoint& a, const GridPoint& b) {
  return (static_cast<double>(a.x) - o.x) * (static_cast<double>(b.y) - o.y) -
         (static_cast<double>(a.y) - o.y) * (static_cast<double>(b.x) - o.x);
}

// True iff the open segments p1p2 and q1q2 cross at a single interior point
// of both. Collinear overlap and endpoint contact are not proper crossings.
inline bool properly_cross(const GridPoint& p1, const GridPoint& p2,
                           const GridPoint& q1, const GridPoint& q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

inline bool on_segment(const GridPoint& p, const GridPoint& a, const GridPoint& b) {
  if (cross(a, b, p) != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace geom

// Simple polygon in pixel coordinates, counter-clockwise. Construction
// validates: >= 3 vertices, no repeated consecutive vertex, no
// self-intersection (O(n^2) segment test), positive signed area.
class Polygon {
 public:
  explicit Polygon(std::vector<GridPoint> vertices) : pts_(std::move(vertices)) {
    require(pts_.size() >= 3, "Polygon: needs at least 3 vertices");
    for (size_t i = 0; i < pts_.size(); ++i) {
      const GridPoint& a = pts_[i];
      const GridPoint& b = pts_[(i + 1) % pts_.size()];
      require(a.x != b.x || a.y != b.y, "Polygon: repeated consecutive vertex");
    }
    if (signed_area(pts_) < 0) std::reverse(pts_.begin(), pts_.end());
    require(signed_area(pts_) > 0, "Polygon: degenerate (zero area)");
    require(!self_intersects(pts_), "Polygon: self-intersecting");
  }

  const std::vector<GridPoint>& vertices() const { return pts_; }
  size_t size() const { return pts_.size(); }

  static double signed_area(const std::vector<GridPoint>& v) {
    double a = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      const GridPoint& p = v[i];
      const GridPoint& q = v[(i + 1) % v.size()];
      a += static_cast<double>(p.x) * q.y - static_cast<double>(q.x) * p.y;
    }
    return a / 2;
  }

  double area() const { return signed_area(pts_); }

  double perimeter() const {
    double len = 0;
    for (size_t i = 0; i < pts_.size(); ++i)
      len += distance(pts_[i], pts_[(i + 1) % pts_.size()]);
    return len;
  }

  static bool self_intersects(const std::vector<GridPoint>& v) {
    const size_t n = v.size();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // adjacent
        if (geom::properly_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
          return true;
      }
    return false;
  }

  // Strict point-in-polygon: boundary points count as outside.
  bool contains(const GridPoint& p) const {
    const size_t n = pts_.size();
    for (size_t i = 0; i < n; ++i)
      if (geom::on_segment(p, pts_[i], pts_[(i + 1) % n])) return false;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      const GridPoint& a = pts_[i];
      const GridPoint& b = pts_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double t = (static_cast<double>(p.y) - a.y) / (static_cast<double>(b.y) - a.y);
        const double xi = a.x + t * (static_cast<double>(b.x) - a.x);
        if (p.x < xi) inside = !inside;
      }
    }
    return inside;
  }

  // Minimum distance from p to the polygon boundary.
  double boundary_distance(const GridPoint& p) const {
    double best = 1e300;
    const size_t n = pts_.size();
    for (size_t i = 0; i < n; ++i) {
      const GridPoint& a = pts_[i];
      const GridPoint& b = pts_[(i + 1) % n];
      const double abx = static_cast<double>(b.x) - a.x, aby = static_cast<double>(b.y) - a.y;
      const double apx = static_cast<double>(p.x) - a.x, apy = static_cast<double>(p.y) - a.y;
      const double len2 = abx * abx + aby * aby;
      double t = len2 > 0 ? (apx * abx + apy * aby) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double dx = apx - t * abx, dy = apy - t * aby;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    return best;
  }

 private:
  std::vector<GridPoint> pts_;
};

enum class VisibilityDomain { interior, exterior };

// True iff the open segment pq does not properly cross any polygon edge.
// Grazing contact at a vertex or collinear overlap with an edge counts as
// visible; p and q are expected to lie in the stated domain.
inline bool visible(const GridPoint& p, const GridPoint& q, const Polygon& poly,
                    VisibilityDomain /*domain*/) {
  if (p.x == q.x && p.y == q.y) return true;
  const auto& v = poly.vertices();
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i)
    if (geom::properly_cross(p, q, v[i], v[(i + 1) % n])) return false;
  return true;
}

struct PixelBox {
  float x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive-exclusive corners
};

// Random simple polygon: n uniform points in the box, a random vertex order,
// then 2-opt uncrossing swaps until no two edges properly intersect. Each
// uncrossing shortens the perimeter, so the loop terminates; a swap budget
// of 10*n^2 guards against float stalls, with up to 20 fresh re-seeds.
inline Polygon random_polygon(int n_vertices, const PixelBox& box, uint64_t seed) {
  require(n_vertices >= 3 && n_vertices <= 64, "random_polygon: n out of [3,64]");
  require(box.x1 > box.x0 && box.y1 > box.y0, "random_polygon: empty box");
  for (int attempt = 0; attempt < 20; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(attempt)));
    std::vector<GridPoint> pts(n_vertices);
    for (auto& p : pts) {
      p.x = static_cast<float>(rng.uniform(box.x0, box.x1));
      p.y = static_cast<float>(rng.uniform(box.y0, box.y1));
    }
    shuffle(pts.data(), pts.size(), rng);

    const size_t n = pts.size();
    const long max_swaps = 10L * n_vertices * n_vertices;
    long swaps = 0;
    bool crossed = true;
    while (crossed && swaps <= max_swaps) {
      crossed = false;
      for (size_t i = 0; i < n && swaps <= max_swaps; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
          if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
          if (geom::properly_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) {
            std::reverse(pts.begin() + i + 1, pts.begin() + j + 1);
            ++swaps;
            crossed = true;
          }
        }
      }
    }
    if (swaps > max_swaps) continue;
    try {
      return Polygon(pts);
    } catch (const contract_error&) {
      continue;  // degenerate draw (collinear/zero area); re-seed
    }
  }
  throw generation_error("random_polygon: no simple polygon after 20 attempts");
}

// Draws the polygon boundary (1 px Bresenham per edge, value 255) onto a
// size x size map; everything else is 0.
inline ScalarField rasterize_polygon(const Polygon& poly, uint32_t size) {
  ScalarField field(size, size, 0.f);
  auto draw = [&](int x0, int y0, int x1, int y1) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
      if (x0 >= 0 && y0 >= 0 && x0 < static_cast<int>(size) && y0 < static_cast<int>(size))
        field.at(x0, y0) = 255.f;
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  };
  const auto& v = poly.vertices();
  for (size_t i = 0; i < v.size(); ++i) {
    const GridPoint& a = v[i];
    const GridPoint& b = v[(i + 1) % v.size()];
    draw(static_cast<int>(std::lround(a.x)), static_cast<int>(std::lround(a.y)),
         static_cast<int>(std::lround(b.x)), static_cast<int>(std::lround(b.y)));
  }
  return field;
}

enum class WitnessDomain { interior, perimeter };

// Coverage discretization for the greedy guard oracles. Interior witnesses
// are lattice points at integer multiples of `spacing` strictly inside the
// polygon; perimeter witnesses sit on the boundary at arc-length steps of
// `spacing` starting from vertex 0.
inline std::vector<GridPoint> sample_witnesses(const Polygon& poly,
                                               WitnessDomain domain, float spacing) {
  require(spacing >= 1.f, "sample_witnesses: spacing must be >= 1");
  std::vector<GridPoint> out;
  if (domain == WitnessDomain::interior) {
    float min_x = 1e30f, min_y = 1e30f, max_x = -1e30f, max_y = -1e30f;
    for (const auto& p : poly.vertices()) {
      min_x = std::min(min_x, p.x); max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y); max_y = std::max(max_y, p.y);
    }
    const long i0 = static_cast<long>(std::floor(min_x / spacing));
    const long i1 = static_cast<long>(std::ceil(max_x / spacing));
    const long j0 = static_cast<long>(std::floor(min_y / spacing));
    const long j1 = static_cast<long>(std::ceil(max_y / spacing));
    for (long j = j0; j <= j1; ++j)
      for (long i = i0; i <= i1; ++i) {
        const GridPoint p{static_cast<float>(i) * spacing, static_cast<float>(j) * spacing};
        if (poly.contains(p)) out.push_back(p);
      }
    if (out.empty())
      throw generation_error("sample_witnesses: polygon too thin for interior witnesses");
  } else {
    const auto& v = poly.vertices();
    const double total = poly.perimeter();
    double next = 0;            // arc length of the next witness to emit
    double walked = 0;          // arc length consumed so far
    for (size_t i = 0; i < v.size(); ++i) {
      const GridPoint& a = v[i];
      const GridPoint& b = v[(i + 1) % v.size()];
      const double len = distance(a, b);
      // outward edge normal: float rounding can drop an interpolated point
      // a hair inside the polygon, which would block its own sight lines,
      // so every witness is nudged 1e-3 px to the outside of its edge.
      const double nx = -(static_cast<double>(b.y) - a.y) / len;
      const double ny = (static_cast<double>(b.x) - a.x) / len;
      while (next < walked + len && next < total) {
        const double t = (next - walked) / len;
        const double wx = a.x + t * (static_cast<double>(b.x) - a.x);
        const double wy = a.y + t * (static_cast<double>(b.y) - a.y);
        GridPoint w{static_cast<float>(wx + 1e-3 * nx), static_cast<float>(wy + 1e-3 * ny)};
        if (poly.contains(w))
          w = {static_cast<float>(wx - 1e-3 * nx), static_cast<float>(wy - 1e-3 * ny)};
        out.push_back(w);
        next += spacing;
      }
      walked += len;
    }
    if (out.empty())
      throw generation_error("sample_witnesses: spacing exceeds perimeter");
  }
  return out;
}

// Polygon text format: UTF-8 lines "x y", CCW order, '#' comments.
inline void write_polygon(const Polygon& poly, const std::string& path) {
  write_placements(poly.vertices(), path);
}

inline Polygon read_polygon(const std::string& path) {
  return Polygon(read_placements(path));
}

}  // namespace lfd
