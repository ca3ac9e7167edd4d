#include "anderson/local_times.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anderson/error.hpp"

namespace anderson {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Pairs with |v|^2 > kCutoff * eps contribute less than e^{-20} p_eps(0).
constexpr double kCutoff = 40.0;

struct IndexRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

int grid_index(double time, double dt, int n_steps) {
  const double k = time / dt;
  const double r = std::round(k);
  require(std::abs(k - r) <= 1e-6 && r >= 0.0 && r <= double(n_steps),
          "region endpoint " + std::to_string(time) + " is not on the path time grid");
  return int(r);
}

// Trapezoidal weight of node k for the interval [lo, hi].
double weight(int k, IndexRange r, double dt) {
  if (k < r.lo || k > r.hi || r.lo == r.hi) return 0.0;
  return (k == r.lo || k == r.hi) ? 0.5 * dt : dt;
}

// Sorted cell list over a subset of path nodes.
class CellList {
 public:
  CellList(const std::vector<Point2>& pts, IndexRange range, double cell) : pts_(pts) {
    inv_h_ = 1.0 / cell;
    entries_.reserve(std::size_t(range.hi - range.lo + 1));
    for (int k = range.lo; k <= range.hi; ++k) {
      const auto [cx, cy] = cell_of(pts[std::size_t(k)]);
      entries_.push_back({cx, cy, k});
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.cx, a.cy, a.idx) < std::tie(b.cx, b.cy, b.idx);
    });
  }

  template <class F>
  void for_each_near(Point2 p, F&& f) const {
    const auto [cx, cy] = cell_of(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const Entry probe{cx + dx, cy + dy, -1};
        auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                                   [](const Entry& a, const Entry& b) {
                                     return std::tie(a.cx, a.cy) < std::tie(b.cx, b.cy);
                                   });
        for (; it != entries_.end() && it->cx == probe.cx && it->cy == probe.cy; ++it)
          f(it->idx);
      }
    }
  }

 private:
  struct Entry {
    std::int64_t cx, cy;
    int idx;
  };
  const std::vector<Point2>& pts_;
  double inv_h_ = 1.0;
  std::vector<Entry> entries_;

  std::pair<std::int64_t, std::int64_t> cell_of(Point2 p) const {
    return {std::int64_t(std::floor(p.x * inv_h_)), std::int64_t(std::floor(p.y * inv_h_))};
  }
};

// Sum over i in I, j in J (j > i when `ordered`) of w_i v_j exp(-|Z_i - W_j|^2 / 2 eps).
double pair_sum(const std::vector<Point2>& z, IndexRange ri, const std::vector<Point2>& w,
                IndexRange rj, double dt, double eps, bool ordered, bool truncation) {
  const double inv2e = 1.0 / (2.0 * eps);
  double sum = 0.0;
  if (!truncation) {
    for (int i = ri.lo; i <= ri.hi; ++i) {
      const double wi = weight(i, ri, dt);
      const Point2 zi = z[std::size_t(i)];
      double row = 0.0;
      for (int j = ordered ? std::max(i + 1, rj.lo) : rj.lo; j <= rj.hi; ++j)
        row += weight(j, rj, dt) * std::exp(-norm2(zi - w[std::size_t(j)]) * inv2e);
      sum += wi * row;
    }
    return sum;
  }
  const double cut2 = kCutoff * eps;
  const CellList cells(w, rj, std::sqrt(cut2));
  for (int i = ri.lo; i <= ri.hi; ++i) {
    const double wi = weight(i, ri, dt);
    const Point2 zi = z[std::size_t(i)];
    double row = 0.0;
    cells.for_each_near(zi, [&](int j) {
      if (ordered && j <= i) return;
      const double r2 = norm2(zi - w[std::size_t(j)]);
      if (r2 <= cut2) row += weight(j, rj, dt) * std::exp(-r2 * inv2e);
    });
    sum += wi * row;
  }
  return sum;
}

// Per-coordinate variance of Z(r2) - Z(r1) at lag s.
double increment_variance(PathKind kind, double t, double s) {
  return kind == PathKind::Motion ? s : s * (t - s) / t;
}

template <class F>
double integrate_segment(F&& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-13,
                                                                      &err);
}

// Adaptive quadrature on [lo, hi] with extra breakpoints geometrically
// clustered at both ends on the scale `scale`, where the integrands here are
// sharply peaked.
template <class F>
double integrate(F&& f, double lo, double hi, double scale) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi};
  const double len = hi - lo;
  for (double s = scale; s < len / 2.0; s *= 8.0) {
    cuts.push_back(lo + s);
    cuts.push_back(hi - s);
  }
  cuts.push_back(lo + len / 2.0);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += integrate_segment(f, cuts[k], cuts[k + 1]);
  return total;
}

// 0 log 0 = 0
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Antiderivative of log r - log(t - r).
double lemma_antiderivative(double t, double r) {
  return xlogx(r) - r + xlogx(t - r) - (t - r);
}

std::atomic<bool> g_resolution_warned{false};

}  // namespace

double TimeRegion::area() const {
  if (kind == Kind::Rect) return (b - a) * (d - c);
  return (b - a) * (b - a) / 2.0;
}

void TimeRegion::validate(double t) const {
  const double slack = 1e-12 * std::max(1.0, t);
  require(std::isfinite(a) && std::isfinite(b) && 0.0 <= a && a <= b,
          "time region: need 0 <= a <= b");
  if (kind == Kind::Rect) {
    require(std::isfinite(c) && std::isfinite(d) && b <= c && c <= d && d <= t + slack,
            "time region: rectangle needs a <= b <= c <= d <= t");
  } else {
    require(b <= t + slack, "time region: block must lie inside [0, t]");
    if (kind == Kind::Triangle) require(a == 0.0, "time region: triangle starts at 0");
  }
}

std::string TimeRegion::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind) {
    case Kind::Triangle: os << "triangle"; break;
    case Kind::DiagBlock: os << "diag:" << a << ':' << b; break;
    case Kind::Rect: os << "rect:" << a << ':' << b << ':' << c << ':' << d; break;
  }
  return os.str();
}

double gaussian_kernel(double eps, Point2 v) {
  require(eps > 0.0, "gaussian_kernel: eps must be positive");
  return std::exp(-norm2(v) / (2.0 * eps)) / (kTwoPi * eps);
}

bool resolution_ok(double dt, double eps) { return dt <= eps / 10.0 * (1.0 + 1e-12); }

void check_resolution(double dt, double eps) {
  if (resolution_ok(dt, eps)) return;
  std::ostringstream os;
  os << "time step " << dt << " exceeds eps/10 = " << eps / 10.0
     << "; near-diagonal local-time mass is under-resolved";
  warn(os.str());
}

double approx_silt(const DiscretePath& path, double eps, const TimeRegion& region,
                   bool truncation) {
  require(eps > 0.0, "approx_silt: eps must be positive");
  region.validate(path.horizon);
  const double dt = path.dt();
  if (!resolution_ok(dt, eps) && !g_resolution_warned.exchange(true)) check_resolution(dt, eps);

  const auto& z = path.positions;
  const double norm = 1.0 / (kTwoPi * eps);
  if (region.is_diagonal()) {
    const IndexRange r{grid_index(region.a, dt, path.n_steps),
                       grid_index(region.b, dt, path.n_steps)};
    double diag = 0.0;
    for (int k = r.lo; k <= r.hi; ++k) {
      const double w = weight(k, r, dt);
      diag += w * w / 2.0;
    }
    return norm * (pair_sum(z, r, z, r, dt, eps, true, truncation) + diag);
  }
  const IndexRange ri{grid_index(region.a, dt, path.n_steps),
                      grid_index(region.b, dt, path.n_steps)};
  const IndexRange rj{grid_index(region.c, dt, path.n_steps),
                      grid_index(region.d, dt, path.n_steps)};
  return norm * pair_sum(z, ri, z, rj, dt, eps, false, truncation);
}

double approx_milt(const DiscretePath& path1, const DiscretePath& path2, double eps,
                   bool truncation) {
  require(eps > 0.0, "approx_milt: eps must be positive");
  require(path1.n_steps == path2.n_steps && path1.horizon == path2.horizon,
          "approx_milt: paths must share horizon and time grid");
  // Canonical argument order makes the floating-point sum order independent
  // of how the caller passes the pair.
  const auto& p1 = path1.positions;
  const auto& p2 = path2.positions;
  const bool swap = std::lexicographical_compare(
      p2.begin(), p2.end(), p1.begin(), p1.end(),
      [](Point2 a, Point2 b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
  const auto& first = swap ? p2 : p1;
  const auto& second = swap ? p1 : p2;
  const IndexRange r{0, path1.n_steps};
  return pair_sum(first, r, second, r, path1.dt(), eps, false, truncation) /
         (kTwoPi * eps);
}

double silt_mean_exact(PathKind kind, double t, double eps, const TimeRegion& region,
                       std::optional<int> n_steps) {
  require(t > 0.0 && eps > 0.0, "silt_mean_exact: t and eps must be positive");
  region.validate(t);
  auto g = [&](double s) { return 1.0 / (kTwoPi * (eps + increment_variance(kind, t, s))); };

  if (n_steps) {
    require(*n_steps >= 1, "silt_mean_exact: n_steps must be positive");
    const double dt = t / double(*n_steps);
    if (region.is_diagonal()) {
      const IndexRange r{grid_index(region.a, dt, *n_steps), grid_index(region.b, dt, *n_steps)};
      double sum = 0.0;
      for (int i = r.lo; i <= r.hi; ++i) {
        const double wi = weight(i, r, dt);
        sum += wi * wi / 2.0 * g(0.0);
        for (int j = i + 1; j <= r.hi; ++j) sum += wi * weight(j, r, dt) * g(double(j - i) * dt);
      }
      return sum;
    }
    const IndexRange ri{grid_index(region.a, dt, *n_steps), grid_index(region.b, dt, *n_steps)};
    const IndexRange rj{grid_index(region.c, dt, *n_steps), grid_index(region.d, dt, *n_steps)};
    double sum = 0.0;
    for (int i = ri.lo; i <= ri.hi; ++i) {
      const double wi = weight(i, ri, dt);
      for (int j = rj.lo; j <= rj.hi; ++j) sum += wi * weight(j, rj, dt) * g(double(j - i) * dt);
    }
    return sum;
  }

  if (region.is_diagonal()) {
    const double len = region.b - region.a;
    if (len <= 0.0) return 0.0;
    if (kind == PathKind::Motion)
      return ((len + eps) * std::log1p(len / eps) - len) / kTwoPi;
    return integrate([&](double s) { return (len - s) * g(s); }, 0.0, len, eps);
  }
  // Lag density of the rectangle: h(s) = |{r1 in [a,b] : r1 + s in [c,d]}|.
  const auto [a, b, c, d] = std::tuple{region.a, region.b, region.c, region.d};
  auto h = [&](double s) { return std::max(0.0, std::min(b, d - s) - std::max(a, c - s)); };
  std::vector<double> knots{c - b, c - a, d - b, d - a};
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    total += integrate([&](double s) { return h(s) * g(s); }, knots[k], knots[k + 1], eps);
  return total;
}

double silt_mean_motion_exact(double t, double eps, const TimeRegion& region,
                              std::optional<int> n_steps) {
  return silt_mean_exact(PathKind::Motion, t, eps, region, n_steps);
}

double silt_mean_bridge_exact(double t, double eps, const TimeRegion& region,
                              std::optional<int> n_steps) {
  return silt_mean_exact(PathKind::Bridge, t, eps, region, n_steps);
}

double silt_mean_asymptotic(PathKind kind, double t, double eps, const TimeRegion& region) {
  require(t > 0.0 && eps > 0.0, "silt_mean_asymptotic: t and eps must be positive");
  region.validate(t);
  if (region.is_diagonal()) {
    const double len = region.b - region.a;
    require(len > 0.0, "silt_mean_asymptotic: empty block");
    if (kind == PathKind::Motion)
      return len / kTwoPi * (std::log(1.0 / eps) + std::log(len) - 1.0);
    return len / kTwoPi * (std::log(1.0 / eps) + std::log(t)) +
           (lemma_antiderivative(t, len) - lemma_antiderivative(t, 0.0)) / kTwoPi;
  }
  require(kind == PathKind::Bridge,
          "silt_mean_asymptotic: off-diagonal expansion is only available for bridges");
  auto G = [&](double r) { return lemma_antiderivative(t, r); };
  const auto [a, b, c, d] = std::tuple{region.a, region.b, region.c, region.d};
  return ((G(d - a) - G(c - a)) - (G(d - b) - G(c - b))) / kTwoPi;
}

LocalTimeValue renormalized_silt(const DiscretePath& path, double eps, double exact_mean,
                                 bool truncation) {
  LocalTimeValue v;
  v.epsilon = eps;
  v.region = TimeRegion::triangle(path.horizon);
  v.raw = approx_silt(path, eps, v.region, truncation);
  v.exact_mean = exact_mean;
  v.renormalized = v.raw - v.exact_mean;
  return v;
}

LocalTimeValue renormalized_silt(const DiscretePath& path, double eps, bool truncation) {
  const double mean = silt_mean_exact(path.kind, path.horizon, eps,
                                      TimeRegion::triangle(path.horizon), path.n_steps);
  return renormalized_silt(path, eps, mean, truncation);
}

double milt_mean_exact(PathKind kind, double t, double eps, std::optional<int> n_steps) {
  require(t > 0.0 && eps > 0.0, "milt_mean_exact: t and eps must be positive");
  // Z1(r1) - Z2(r2) has per-coordinate variance v(r1) + v(r2).
  auto v = [&](double r) { return kind == PathKind::Motion ? r : r * (t - r) / t; };
  if (n_steps) {
    require(*n_steps >= 1, "milt_mean_exact: n_steps must be positive");
    const double dt = t / double(*n_steps);
    const IndexRange r{0, *n_steps};
    double sum = 0.0;
    for (int i = 0; i <= *n_steps; ++i) {
      const double vi = v(double(i) * dt);
      double row = 0.0;
      for (int j = 0; j <= *n_steps; ++j)
        row += weight(j, r, dt) / (kTwoPi * (eps + vi + v(double(j) * dt)));
      sum += weight(i, r, dt) * row;
    }
    return sum;
  }
  // Inner integral in closed form: int_0^t dr / (a + v(r)) with a = eps + v(r1).
  auto inner = [&](double r1) {
    const double a = eps + v(r1);
    if (kind == PathKind::Motion) return std::log1p(t / a) / kTwoPi;
    // a + r (t - r) / t has roots (t +- sqrt(D)) / 2, D = t^2 + 4 a t
    const double sd = std::sqrt(t * t + 4.0 * a * t);
    return 4.0 * t / sd * std::log((t + sd) / (2.0 * std::sqrt(a * t))) / kTwoPi;
  };
  return integrate(inner, 0.0, t, eps);
}

double milt_mean_bridge_exact(double t, double eps, std::optional<int> n_steps) {
  return milt_mean_exact(PathKind::Bridge, t, eps, n_steps);
}

double renorm_constant(double kappa, double eps) {
  require(eps > 0.0, "renorm_constant: eps must be positive");
  return kappa * kappa / kTwoPi * std::log(1.0 / eps);
}

}  // namespace anderson
