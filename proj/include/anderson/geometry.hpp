#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "anderson/rng.hpp"

namespace anderson {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double norm2(Point2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Point2 v) { return std::hypot(v.x, v.y); }

struct Box {
  Point2 lo;
  Point2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  Box inflated(double r) const {
    return {{lo.x - r, lo.y - r}, {hi.x + r, hi.y + r}};
  }
};

struct Rectangle {
  Point2 origin;  // lower-left corner
  double width = 1.0;
  double height = 1.0;
};

struct Disk {
  Point2 center;
  double radius = 1.0;
};

struct SimplePolygon {
  std::vector<Point2> vertices;  // counterclockwise, implicitly closed
};

struct KochPrefractal {
  int level = 0;
  double side = 1.0;
  Point2 origin;  // first vertex of the base triangle
};

class PolygonIndex;

// A bounded open planar region. Koch prefractals are expanded once into a
// polygon at construction; all queries are const and thread-safe.
class PlanarDomain {
 public:
  using Shape = std::variant<Rectangle, Disk, SimplePolygon, KochPrefractal>;

  static constexpr int kMaxKochLevel = 8;

  explicit PlanarDomain(Shape shape);
  ~PlanarDomain();
  PlanarDomain(const PlanarDomain&);
  PlanarDomain& operator=(const PlanarDomain&);
  PlanarDomain(PlanarDomain&&) noexcept;
  PlanarDomain& operator=(PlanarDomain&&) noexcept;

  static PlanarDomain rectangle(double width, double height, Point2 origin = {});
  static PlanarDomain disk(double radius, Point2 center = {});
  static PlanarDomain polygon(std::vector<Point2> vertices);
  static PlanarDomain koch(int level, double side, Point2 origin = {});

  const Shape& shape() const { return shape_; }
  // "rectangle", "disk", "polygon" or "koch".
  std::string kind() const;
  // Canonical one-line description, used in fingerprints and CSV headers.
  std::string describe() const;

  // Vertices of the polygonal boundary (empty for rectangle and disk).
  std::span<const Point2> vertices() const;

  bool contains(Point2 p) const;
  double signed_distance(Point2 p) const;
  // Unsigned distance to the boundary. Exact when the result is below cap;
  // otherwise some value >= cap is returned.
  double boundary_distance(Point2 p, double cap = INFINITY) const;

  double area() const { return area_; }
  double perimeter() const { return perimeter_; }
  const Box& bounding_box() const { return bbox_; }

  // Rejection sampling from the bounding box. Throws after
  // max_consecutive_rejections failed draws in a row.
  Point2 sample_uniform(RandomStream& rng,
                        std::size_t max_consecutive_rejections = 1'000'000) const;

 private:
  Shape shape_;
  std::vector<Point2> poly_;  // expanded polygon, if any
  std::unique_ptr<PolygonIndex> index_;
  Box bbox_;
  double area_ = 0.0;
  double perimeter_ = 0.0;

  void build();
};

// Koch snowflake vertices at a given level, counterclockwise, built outward
// from the equilateral triangle (origin, origin + (side,0), apex).
std::vector<Point2> koch_vertices(int level, double side, Point2 origin = {});

// Plain-text vertex file: one "x y" pair per line, '#' starts a comment.
std::vector<Point2> load_vertex_file(const std::string& path);

double polygon_signed_area(std::span<const Point2> vertices);

struct BoundaryNeighborhood {
  double r = 0.0;
  double area_estimate = 0.0;
  double std_error = 0.0;
};

// Hit-or-miss estimate of the area of {x : dist(x, boundary) < r}, sampling
// uniformly in the bounding box inflated by r.
BoundaryNeighborhood boundary_neighborhood_area(const PlanarDomain& domain,
                                                double r, std::size_t n_samples,
                                                RandomStream& rng);

// Number of hits among n uniform draws in the inflated bounding box. Building
// block for block-parallel estimates whose reduction is order independent.
std::size_t boundary_neighborhood_hits(const PlanarDomain& domain, double r,
                                       std::size_t n_samples, RandomStream& rng);

// Least-squares slope s of log A(r) against log r; returns 2 - s.
double minkowski_fit(std::span<const BoundaryNeighborhood> neighborhoods);

}  // namespace anderson
