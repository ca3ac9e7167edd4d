#include "anderson/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anderson/error.hpp"

namespace anderson {
namespace {

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
}

double segment_distance2(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const Point2 ap = p - a;
  const double len2 = norm2(ab);
  double s = len2 > 0.0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm2(p - (a + s * ab));
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

Box bounds_of(std::span<const Point2> v) {
  Box b{v.front(), v.front()};
  for (const Point2& p : v) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

}  // namespace

// Uniform-grid acceleration for polygon queries. Edges are bucketed into every
// cell their bounding box overlaps (distance queries, simplicity check) and
// into horizontal bands (winding-number containment).
class PolygonIndex {
 public:
  static constexpr std::size_t kBruteForceEdges = 1000;

  explicit PolygonIndex(std::span<const Point2> vertices)
      : v_(vertices.begin(), vertices.end()), box_(bounds_of(vertices)) {
    const std::size_t n = v_.size();
    const double w = std::max(box_.width(), 1e-300);
    const double h = std::max(box_.height(), 1e-300);

    n_bands_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(n))));
    band_h_ = h / double(n_bands_);
    std::vector<std::vector<std::uint32_t>> bands(n_bands_);
    for (std::size_t e = 0; e < n; ++e) {
      const auto [lo, hi] = band_range(edge_a(e).y, edge_b(e).y);
      for (std::size_t k = lo; k <= hi; ++k) bands[k].push_back(std::uint32_t(e));
    }
    flatten(bands, band_start_, band_edges_);

    // Roughly one edge per cell.
    const double cell = std::sqrt(w * h / double(std::max<std::size_t>(n, 1)));
    nx_ = std::clamp<long>(long(std::ceil(w / cell)), 1, 4096);
    ny_ = std::clamp<long>(long(std::ceil(h / cell)), 1, 4096);
    cw_ = w / double(nx_);
    ch_ = h / double(ny_);
    std::vector<std::vector<std::uint32_t>> cells(std::size_t(nx_ * ny_));
    for (std::size_t e = 0; e < n; ++e) {
      const Point2 a = edge_a(e), b = edge_b(e);
      const long x0 = cell_x(std::min(a.x, b.x)), x1 = cell_x(std::max(a.x, b.x));
      const long y0 = cell_y(std::min(a.y, b.y)), y1 = cell_y(std::max(a.y, b.y));
      for (long iy = y0; iy <= y1; ++iy)
        for (long ix = x0; ix <= x1; ++ix)
          cells[std::size_t(iy * nx_ + ix)].push_back(std::uint32_t(e));
    }
    flatten(cells, cell_start_, cell_edges_);
  }

  std::size_t edge_count() const { return v_.size(); }

  bool contains(Point2 p) const {
    if (p.y < box_.lo.y || p.y > box_.hi.y || p.x < box_.lo.x || p.x > box_.hi.x)
      return false;
    const std::size_t band = band_range(p.y, p.y).first;
    int winding = 0;
    for (std::size_t k = band_start_[band]; k < band_start_[band + 1]; ++k) {
      const std::size_t e = band_edges_[k];
      const Point2 a = edge_a(e), b = edge_b(e);
      const double side = cross(a, b, p);
      if (side == 0.0 && on_segment(p, a, b)) return false;  // boundary
      if (a.y <= p.y) {
        if (b.y > p.y && side > 0.0) ++winding;
      } else if (b.y <= p.y && side < 0.0) {
        --winding;
      }
    }
    return winding != 0;
  }

  double distance(Point2 p, double cap) const {
    if (v_.size() <= kBruteForceEdges) {
      double best2 = INFINITY;
      for (std::size_t e = 0; e < v_.size(); ++e)
        best2 = std::min(best2, segment_distance2(p, edge_a(e), edge_b(e)));
      return std::sqrt(best2);
    }
    const long cx = std::clamp(cell_x(p.x), 0L, nx_ - 1);
    const long cy = std::clamp(cell_y(p.y), 0L, ny_ - 1);
    double best2 = INFINITY;
    for (long ring = 0;; ++ring) {
      const long x0 = cx - ring, x1 = cx + ring, y0 = cy - ring, y1 = cy + ring;
      for (long iy = std::max(y0, 0L); iy <= std::min(y1, ny_ - 1); ++iy) {
        const bool edge_row = (iy == y0 || iy == y1);
        for (long ix = std::max(x0, 0L); ix <= std::min(x1, nx_ - 1); ++ix) {
          if (!edge_row && ix != x0 && ix != x1) continue;
          const std::size_t c = std::size_t(iy * nx_ + ix);
          for (std::size_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
            const std::size_t e = cell_edges_[k];
            best2 = std::min(best2, segment_distance2(p, edge_a(e), edge_b(e)));
          }
        }
      }
      // Lower bound on the distance to any edge outside the visited block.
      double bound = INFINITY;
      if (x0 > 0) bound = std::min(bound, p.x - (box_.lo.x + double(x0) * cw_));
      if (x1 < nx_ - 1) bound = std::min(bound, box_.lo.x + double(x1 + 1) * cw_ - p.x);
      if (y0 > 0) bound = std::min(bound, p.y - (box_.lo.y + double(y0) * ch_));
      if (y1 < ny_ - 1) bound = std::min(bound, box_.lo.y + double(y1 + 1) * ch_ - p.y);
      bound = std::max(bound, 0.0);
      if (bound == INFINITY) break;
      if (best2 <= bound * bound || bound >= cap) {
        if (best2 == INFINITY) return std::max(bound, cap);
        break;
      }
    }
    return std::sqrt(best2);
  }

  // Any pair of non-adjacent edges that touch shares a grid cell.
  bool is_simple() const {
    const std::size_t n = v_.size();
    const std::size_t ncell = std::size_t(nx_ * ny_);
    for (std::size_t c = 0; c < ncell; ++c) {
      for (std::size_t i = cell_start_[c]; i < cell_start_[c + 1]; ++i) {
        for (std::size_t j = i + 1; j < cell_start_[c + 1]; ++j) {
          const std::size_t e = cell_edges_[i], f = cell_edges_[j];
          const std::size_t d = e > f ? e - f : f - e;
          if (d == 1 || d == n - 1) continue;
          if (segments_intersect(edge_a(e), edge_b(e), edge_a(f), edge_b(f)))
            return false;
        }
      }
    }
    return true;
  }

 private:
  std::vector<Point2> v_;
  Box box_;
  std::size_t n_bands_ = 1;
  double band_h_ = 1.0;
  std::vector<std::size_t> band_start_;
  std::vector<std::uint32_t> band_edges_;
  long nx_ = 1, ny_ = 1;
  double cw_ = 1.0, ch_ = 1.0;
  std::vector<std::size_t> cell_start_;
  std::vector<std::uint32_t> cell_edges_;

  Point2 edge_a(std::size_t e) const { return v_[e]; }
  Point2 edge_b(std::size_t e) const { return v_[(e + 1) % v_.size()]; }

  std::pair<std::size_t, std::size_t> band_range(double ya, double yb) const {
    auto band_of = [&](double y) {
      const double k = std::floor((y - box_.lo.y) / band_h_);
      return std::size_t(std::clamp(k, 0.0, double(n_bands_ - 1)));
    };
    return {band_of(std::min(ya, yb)), band_of(std::max(ya, yb))};
  }
  long cell_x(double x) const {
    return long(std::clamp(std::floor((x - box_.lo.x) / cw_), 0.0, double(nx_ - 1)));
  }
  long cell_y(double y) const {
    return long(std::clamp(std::floor((y - box_.lo.y) / ch_), 0.0, double(ny_ - 1)));
  }

  static void flatten(const std::vector<std::vector<std::uint32_t>>& lists,
                      std::vector<std::size_t>& start,
                      std::vector<std::uint32_t>& items) {
    start.assign(lists.size() + 1, 0);
    for (std::size_t i = 0; i < lists.size(); ++i)
      start[i + 1] = start[i] + lists[i].size();
    items.clear();
    items.reserve(start.back());
    for (const auto& l : lists) items.insert(items.end(), l.begin(), l.end());
  }
};

std::vector<Point2> koch_vertices(int level, double side, Point2 origin) {
  require(level >= 0 && level <= PlanarDomain::kMaxKochLevel,
          "koch level must be in [0, " + std::to_string(PlanarDomain::kMaxKochLevel) + "]");
  require(side > 0.0, "koch side must be positive");
  const double h = side * std::sqrt(3.0) / 2.0;
  std::vector<Point2> v{origin, origin + Point2{side, 0.0},
                        origin + Point2{side / 2.0, h}};
  const double c = 0.5, s = -std::sqrt(3.0) / 2.0;  // rotation by -60 degrees
  for (int l = 0; l < level; ++l) {
    std::vector<Point2> next;
    next.reserve(v.size() * 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2 a = v[i], b = v[(i + 1) % v.size()];
      const Point2 d = (1.0 / 3.0) * (b - a);
      const Point2 p1 = a + d;
      const Point2 p3 = a + 2.0 * d;
      const Point2 bump{c * d.x - s * d.y, s * d.x + c * d.y};
      next.push_back(a);
      next.push_back(p1);
      next.push_back(p1 + bump);
      next.push_back(p3);
    }
    v = std::move(next);
  }
  return v;
}

std::vector<Point2> load_vertex_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open vertex file '" + path + "'");
  std::vector<Point2> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Point2 p;
    if (!(ls >> p.x)) continue;  // blank line
    std::string rest;
    if (!(ls >> p.y) || (ls >> rest))
      fail(ErrorCode::Schema, path + ":" + std::to_string(lineno) +
                                  ": expected exactly two numbers \"x y\"");
    v.push_back(p);
  }
  return v;
}

double polygon_signed_area(std::span<const Point2> v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i], b = v[(i + 1) % v.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

PlanarDomain::PlanarDomain(Shape shape) : shape_(std::move(shape)) { build(); }
PlanarDomain::~PlanarDomain() = default;
PlanarDomain::PlanarDomain(PlanarDomain&&) noexcept = default;
PlanarDomain& PlanarDomain::operator=(PlanarDomain&&) noexcept = default;
PlanarDomain::PlanarDomain(const PlanarDomain& other) : shape_(other.shape_) { build(); }
PlanarDomain& PlanarDomain::operator=(const PlanarDomain& other) {
  if (this != &other) *this = PlanarDomain(other);
  return *this;
}

PlanarDomain PlanarDomain::rectangle(double width, double height, Point2 origin) {
  return PlanarDomain(Rectangle{origin, width, height});
}
PlanarDomain PlanarDomain::disk(double radius, Point2 center) {
  return PlanarDomain(Disk{center, radius});
}
PlanarDomain PlanarDomain::polygon(std::vector<Point2> vertices) {
  return PlanarDomain(SimplePolygon{std::move(vertices)});
}
PlanarDomain PlanarDomain::koch(int level, double side, Point2 origin) {
  return PlanarDomain(KochPrefractal{level, side, origin});
}

void PlanarDomain::build() {
  auto finite = [](Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  if (const auto* r = std::get_if<Rectangle>(&shape_)) {
    require(r->width > 0.0 && r->height > 0.0 && finite(r->origin),
            "rectangle dimensions must be positive", ErrorCode::Domain);
    bbox_ = {r->origin, r->origin + Point2{r->width, r->height}};
    area_ = r->width * r->height;
    perimeter_ = 2.0 * (r->width + r->height);
    return;
  }
  if (const auto* d = std::get_if<Disk>(&shape_)) {
    require(d->radius > 0.0 && finite(d->center), "disk radius must be positive",
            ErrorCode::Domain);
    const Point2 r{d->radius, d->radius};
    bbox_ = {d->center - r, d->center + r};
    area_ = std::numbers::pi * d->radius * d->radius;
    perimeter_ = 2.0 * std::numbers::pi * d->radius;
    return;
  }
  if (const auto* k = std::get_if<KochPrefractal>(&shape_)) {
    require(finite(k->origin), "koch origin must be finite", ErrorCode::Domain);
    poly_ = koch_vertices(k->level, k->side, k->origin);
  } else {
    poly_ = std::get<SimplePolygon>(shape_).vertices;
    require(poly_.size() >= 3, "polygon needs at least 3 vertices", ErrorCode::Domain);
    for (std::size_t i = 0; i < poly_.size(); ++i) {
      require(finite(poly_[i]), "polygon vertices must be finite", ErrorCode::Domain);
      require(!(poly_[i] == poly_[(i + 1) % poly_.size()]),
              "polygon has repeated consecutive vertices", ErrorCode::Domain);
    }
  }
  area_ = polygon_signed_area(poly_);
  require(area_ > 0.0, "polygon must be counterclockwise with positive area",
          ErrorCode::Domain);
  perimeter_ = 0.0;
  for (std::size_t i = 0; i < poly_.size(); ++i)
    perimeter_ += norm(poly_[(i + 1) % poly_.size()] - poly_[i]);
  bbox_ = bounds_of(poly_);
  index_ = std::make_unique<PolygonIndex>(poly_);
  if (std::holds_alternative<SimplePolygon>(shape_))
    require(index_->is_simple(), "polygon is not simple (edges intersect)",
            ErrorCode::Domain);
}

std::string PlanarDomain::kind() const {
  switch (shape_.index()) {
    case 0: return "rectangle";
    case 1: return "disk";
    case 2: return "polygon";
    default: return "koch";
  }
}

std::string PlanarDomain::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* r = std::get_if<Rectangle>(&shape_)) {
    os << "rectangle width=" << r->width << " height=" << r->height
       << " origin=" << r->origin.x << ":" << r->origin.y;
  } else if (const auto* d = std::get_if<Disk>(&shape_)) {
    os << "disk radius=" << d->radius << " center=" << d->center.x << ":"
       << d->center.y;
  } else if (const auto* k = std::get_if<KochPrefractal>(&shape_)) {
    os << "koch level=" << k->level << " side=" << k->side
       << " origin=" << k->origin.x << ":" << k->origin.y;
  } else {
    // Vertex lists can be long; hash them.
    std::uint64_t h = 1469598103934665603ull;
    for (const Point2& p : poly_) {
      for (double c : {p.x, p.y}) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof c);
        std::memcpy(&bits, &c, sizeof c);
        for (int b = 0; b < 8; ++b) {
          h ^= (bits >> (8 * b)) & 0xffu;
          h *= 1099511628211ull;
        }
      }
    }
    os << "polygon n=" << poly_.size() << " vertex_hash=" << std::hex << h;
  }
  return os.str();
}

std::span<const Point2> PlanarDomain::vertices() const { return poly_; }

bool PlanarDomain::contains(Point2 p) const {
  if (const auto* r = std::get_if<Rectangle>(&shape_)) {
    return p.x > r->origin.x && p.x < r->origin.x + r->width &&
           p.y > r->origin.y && p.y < r->origin.y + r->height;
  }
  if (const auto* d = std::get_if<Disk>(&shape_))
    return norm2(p - d->center) < d->radius * d->radius;
  return index_->contains(p);
}

double PlanarDomain::boundary_distance(Point2 p, double cap) const {
  if (const auto* r = std::get_if<Rectangle>(&shape_)) {
    const double dx0 = p.x - r->origin.x, dx1 = r->origin.x + r->width - p.x;
    const double dy0 = p.y - r->origin.y, dy1 = r->origin.y + r->height - p.y;
    const double mx = std::min(dx0, dx1), my = std::min(dy0, dy1);
    if (mx >= 0.0 && my >= 0.0) return std::min(mx, my);
    const double ox = std::max(0.0, std::max(-dx0, -dx1));
    const double oy = std::max(0.0, std::max(-dy0, -dy1));
    if (ox == 0.0) return std::abs(my);
    if (oy == 0.0) return std::abs(mx);
    return std::hypot(ox, oy);
  }
  if (const auto* d = std::get_if<Disk>(&shape_))
    return std::abs(d->radius - norm(p - d->center));
  return index_->distance(p, cap);
}

double PlanarDomain::signed_distance(Point2 p) const {
  const double d = boundary_distance(p);
  return contains(p) ? d : -d;
}

Point2 PlanarDomain::sample_uniform(RandomStream& rng,
                                    std::size_t max_consecutive_rejections) const {
  for (std::size_t k = 0; k < max_consecutive_rejections; ++k) {
    const Point2 p{rng.uniform(bbox_.lo.x, bbox_.hi.x), rng.uniform(bbox_.lo.y, bbox_.hi.y)};
    if (contains(p)) return p;
  }
  fail(ErrorCode::Domain, "sample_uniform: rejection cap reached (degenerate domain?)");
}

std::size_t boundary_neighborhood_hits(const PlanarDomain& domain, double r,
                                       std::size_t n_samples, RandomStream& rng) {
  const Box box = domain.bounding_box().inflated(r);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point2 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
    if (domain.boundary_distance(p, r) < r) ++hits;
  }
  return hits;
}

BoundaryNeighborhood boundary_neighborhood_area(const PlanarDomain& domain,
                                                double r, std::size_t n_samples,
                                                RandomStream& rng) {
  require(r > 0.0, "boundary_neighborhood_area: r must be positive");
  require(n_samples >= 1000, "boundary_neighborhood_area: need at least 1000 samples");
  const double box_area = domain.bounding_box().inflated(r).area();
  const std::size_t hits = boundary_neighborhood_hits(domain, r, n_samples, rng);
  const double p = double(hits) / double(n_samples);
  return {r, box_area * p, box_area * std::sqrt(p * (1.0 - p) / double(n_samples))};
}

double minkowski_fit(std::span<const BoundaryNeighborhood> nb) {
  std::vector<double> rs;
  for (const auto& b : nb) {
    require(b.area_estimate > 0.0,
            "minkowski_fit: non-positive area estimate at r=" + std::to_string(b.r) +
                " (undersampled)");
    require(b.r > 0.0, "minkowski_fit: r must be positive");
    rs.push_back(b.r);
  }
  std::sort(rs.begin(), rs.end());
  require(std::unique(rs.begin(), rs.end()) - rs.begin() >= 3,
          "minkowski_fit: need at least 3 distinct r values");
  const double n = double(nb.size());
  double sx = 0, sy = 0;
  for (const auto& b : nb) {
    sx += std::log(b.r);
    sy += std::log(b.area_estimate);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (const auto& b : nb) {
    const double dx = std::log(b.r) - mx;
    sxy += dx * (std::log(b.area_estimate) - my);
    sxx += dx * dx;
  }
  return 2.0 - sxy / sxx;
}

}  // namespace anderson
