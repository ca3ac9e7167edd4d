#include "anderson/paths.hpp"

#include <cmath>

#include "anderson/error.hpp"

namespace anderson {
namespace {

void check_args(double t, int n_steps, int min_steps) {
  require(t > 0.0 && std::isfinite(t), "path horizon must be positive");
  require(n_steps >= min_steps,
          "path needs at least " + std::to_string(min_steps) + " steps");
}

// Unit-horizon motion from the origin into out.positions.
void unit_motion(DiscretePath& out, int n_steps, RandomStream& rng) {
  out.positions.resize(std::size_t(n_steps) + 1);
  const double sd = std::sqrt(1.0 / double(n_steps));
  Point2 w{0.0, 0.0};
  out.positions[0] = w;
  for (int i = 1; i <= n_steps; ++i) {
    const double dx = rng.normal();
    const double dy = rng.normal();
    w = {w.x + sd * dx, w.y + sd * dy};
    out.positions[std::size_t(i)] = w;
  }
}

void place(DiscretePath& out, Point2 x, double t) {
  const double scale = std::sqrt(t);
  for (Point2& p : out.positions) p = {x.x + scale * p.x, x.y + scale * p.y};
}

}  // namespace

const char* to_string(PathKind kind) {
  return kind == PathKind::Motion ? "motion" : "bridge";
}

void sample_motion(DiscretePath& out, Point2 x, double t, int n_steps, RandomStream& rng) {
  check_args(t, n_steps, 1);
  out.kind = PathKind::Motion;
  out.start = x;
  out.horizon = t;
  out.n_steps = n_steps;
  unit_motion(out, n_steps, rng);
  place(out, x, t);
}

void sample_bridge(DiscretePath& out, Point2 x, double t, int n_steps, RandomStream& rng) {
  check_args(t, n_steps, 2);
  out.kind = PathKind::Bridge;
  out.start = x;
  out.horizon = t;
  out.n_steps = n_steps;
  unit_motion(out, n_steps, rng);
  const Point2 end = out.positions.back();
  for (int i = 0; i <= n_steps; ++i) {
    const double s = double(i) / double(n_steps);
    Point2& p = out.positions[std::size_t(i)];
    p = {p.x - s * end.x, p.y - s * end.y};
  }
  out.positions.back() = {0.0, 0.0};
  place(out, x, t);
}

DiscretePath sample_motion(Point2 x, double t, int n_steps, RandomStream& rng) {
  DiscretePath p;
  sample_motion(p, x, t, n_steps, rng);
  return p;
}

DiscretePath sample_bridge(Point2 x, double t, int n_steps, RandomStream& rng) {
  DiscretePath p;
  sample_bridge(p, x, t, n_steps, rng);
  return p;
}

SurvivalVerdict survives(const DiscretePath& path, const PlanarDomain& domain,
                         bool correction, RandomStream& rng) {
  const auto& pos = path.positions;
  if (!domain.contains(pos[0])) return {false, 0, false};
  if (!correction) {
    for (std::size_t i = 1; i < pos.size(); ++i)
      if (!domain.contains(pos[i])) return {false, int(i), false};
    return {};
  }
  const double inv_dt = 1.0 / path.dt();
  // Beyond this exponent the crossing probability is below e^-745 and the
  // draw is skipped. Capped distance queries are exact below `far`.
  constexpr double kNegligible = 745.0;
  const double far = std::sqrt(kNegligible * path.dt() / 2.0);
  double d_prev = domain.boundary_distance(pos[0], far);
  for (std::size_t i = 1; i < pos.size(); ++i) {
    if (!domain.contains(pos[i])) return {false, int(i), false};
    double d = domain.boundary_distance(pos[i], far);
    if (d_prev < far || d < far) {
      if (d_prev >= far) d_prev = domain.boundary_distance(pos[i - 1]);
      if (d >= far) d = domain.boundary_distance(pos[i]);
      const double exponent = 2.0 * d_prev * d * inv_dt;
      if (exponent < kNegligible && rng.uniform() < std::exp(-exponent))
        return {false, int(i), true};
    }
    d_prev = d;
  }
  return {};
}

void write_path_csv(const DiscretePath& path, std::ostream& os) {
  const auto old = os.precision(17);
  os << "i,time,x,y\n";
  for (int i = 0; i <= path.n_steps; ++i) {
    const Point2 p = path.positions[std::size_t(i)];
    os << i << ',' << path.time(i) << ',' << p.x << ',' << p.y << '\n';
  }
  os.precision(old);
}

}  // namespace anderson
