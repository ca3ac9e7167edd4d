#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "anderson/geometry.hpp"
#include "anderson/rng.hpp"

namespace anderson {

enum class PathKind { Motion, Bridge };

const char* to_string(PathKind kind);

// Positions of a planar Brownian motion or bridge on the uniform grid
// i * horizon / n_steps, i = 0..n_steps.
struct DiscretePath {
  PathKind kind = PathKind::Motion;
  Point2 start;
  double horizon = 1.0;
  int n_steps = 1;
  std::vector<Point2> positions;

  double dt() const { return horizon / double(n_steps); }
  double time(int i) const { return horizon * double(i) / double(n_steps); }
};

// Standard planar Brownian motion from x (generator one half of the
// Laplacian): per-coordinate increment variance t / n_steps.
DiscretePath sample_motion(Point2 x, double t, int n_steps, RandomStream& rng);

// Bridge from x back to x over [0, t]. Built as x + sqrt(t) * b where
// b(s) = W(s) - s W(1) is a unit bridge from a fresh motion W, so the same
// draws give B^{x,x}_t and B^{0,0}_1 related by exact Brownian scaling.
DiscretePath sample_bridge(Point2 x, double t, int n_steps, RandomStream& rng);

// Allocation-free variants for hot loops; `out` is resized as needed.
void sample_motion(DiscretePath& out, Point2 x, double t, int n_steps, RandomStream& rng);
void sample_bridge(DiscretePath& out, Point2 x, double t, int n_steps, RandomStream& rng);

struct SurvivalVerdict {
  bool survived = true;
  std::optional<int> first_exit_step;  // grid index of the first exit
  bool correction_applied = false;     // exit detected by the sub-step correction
};

// Dirichlet survival test. Without correction, the path survives iff every
// grid position is inside the domain. With correction, each segment whose
// endpoints are both inside is additionally killed with the half-plane bridge
// crossing probability exp(-2 d_i d_{i+1} / dt).
SurvivalVerdict survives(const DiscretePath& path, const PlanarDomain& domain,
                         bool correction, RandomStream& rng);

// Debug dump with header "i,time,x,y".
void write_path_csv(const DiscretePath& path, std::ostream& os);

}  // namespace anderson
