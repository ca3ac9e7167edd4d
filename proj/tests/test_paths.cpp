#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "anderson/geometry.hpp"
#include "anderson/paths.hpp"
#include "anderson/rng.hpp"

using namespace anderson;
using std::numbers::pi;

TEST_CASE("motion starts at x and has the right increment variance") {
  RandomStream rng(11);
  const double t = 0.5;
  const int n = 400;
  double sum_sq = 0.0;
  int count = 0;
  for (int k = 0; k < 200; ++k) {
    const auto p = sample_motion({1, 2}, t, n, rng);
    REQUIRE(p.positions.size() == std::size_t(n + 1));
    CHECK(p.positions[0] == Point2{1, 2});
    for (int i = 0; i < n; ++i) {
      const Point2 d = p.positions[i + 1] - p.positions[i];
      sum_sq += d.x * d.x + d.y * d.y;
      count += 2;
    }
  }
  const double var = sum_sq / count, dt = t / n;
  CHECK(std::abs(var - dt) < 4 * dt * std::sqrt(2.0 / count));
}

TEST_CASE("bridge returns exactly to its start") {
  RandomStream rng(12);
  const auto b = sample_bridge({0.3, -0.2}, 0.1, 64, rng);
  CHECK(b.positions.front() == Point2{0.3, -0.2});
  CHECK(b.positions.back() == Point2{0.3, -0.2});
  CHECK(b.kind == PathKind::Bridge);
}

TEST_CASE("shift equivariance under a coupled stream") {
  for (auto kind : {PathKind::Motion, PathKind::Bridge}) {
    RandomStream r1(99), r2(99);
    const Point2 x{0.25, 0.5}, v{3.0, -7.0};
    const auto a = kind == PathKind::Motion ? sample_motion(x, 0.2, 128, r1)
                                            : sample_bridge(x, 0.2, 128, r1);
    const auto b = kind == PathKind::Motion ? sample_motion(x + v, 0.2, 128, r2)
                                            : sample_bridge(x + v, 0.2, 128, r2);
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
      const Point2 d = b.positions[i] - a.positions[i];
      CHECK(std::abs(d.x - v.x) < 1e-14);
      CHECK(std::abs(d.y - v.y) < 1e-14);
    }
  }
}

TEST_CASE("bridge covariance matches its time reversal") {
  // Cov(B_s, B_u) = s (t - u) / t for s <= u; reversal maps s -> t - s.
  const double t = 1.0;
  const int n = 16, paths = 40000;
  const std::pair<int, int> pairs[] = {{2, 5}, {4, 12}, {7, 9}};
  double fwd[3] = {}, rev[3] = {}, fwd2[3] = {}, rev2[3] = {};
  RandomStream rng(13);
  DiscretePath p;
  for (int k = 0; k < paths; ++k) {
    sample_bridge(p, {0, 0}, t, n, rng);
    for (int j = 0; j < 3; ++j) {
      const auto [i1, i2] = pairs[j];
      const double f = p.positions[i1].x * p.positions[i2].x;
      const double r = p.positions[n - i1].x * p.positions[n - i2].x;
      fwd[j] += f;
      rev[j] += r;
      fwd2[j] += f * f;
      rev2[j] += r * r;
    }
  }
  for (int j = 0; j < 3; ++j) {
    const auto [i1, i2] = pairs[j];
    const double s = double(i1) / n, u = double(i2) / n;
    const double exact = s * (t - u) / t;
    const double mf = fwd[j] / paths, mr = rev[j] / paths;
    const double sef = std::sqrt((fwd2[j] / paths - mf * mf) / paths);
    const double ser = std::sqrt((rev2[j] / paths - mr * mr) / paths);
    CHECK(std::abs(mf - exact) < 3 * sef);
    CHECK(std::abs(mr - exact) < 3 * ser);
  }
}

TEST_CASE("survival") {
  const auto sq = PlanarDomain::rectangle(1, 1);
  SUBCASE("a grid point outside kills the path") {
    DiscretePath p{PathKind::Motion, {0.5, 0.5}, 1.0, 3, {{0.5, 0.5}, {0.6, 0.5}, {1.2, 0.5}, {0.5, 0.5}}};
    RandomStream rng(1);
    const auto v = survives(p, sq, false, rng);
    CHECK_FALSE(v.survived);
    REQUIRE(v.first_exit_step.has_value());
    CHECK(*v.first_exit_step == 2);
    CHECK_FALSE(v.correction_applied);
  }
  SUBCASE("paths far from the boundary are never killed by the correction") {
    // distances >= 10 sqrt(dt): kill probability per segment <= e^{-200}
    RandomStream rng(2);
    const double dt = 1e-6;
    for (int k = 0; k < 200; ++k) {
      auto p = sample_motion({0.5, 0.5}, 1e-6 * 32, 32, rng);
      bool far = true;
      for (const auto& x : p.positions) far = far && sq.boundary_distance(x) >= 10 * std::sqrt(dt);
      REQUIRE(far);
      CHECK(survives(p, sq, true, rng).survived);
    }
  }
  SUBCASE("the correction never rescues a killed path") {
    RandomStream paths(3);
    int corrected_kills = 0;
    for (int k = 0; k < 2000; ++k) {
      const auto p = sample_bridge({paths.uniform(), paths.uniform()}, 0.01, 64, paths);
      RandomStream a(k), b(k);
      const auto plain = survives(p, sq, false, a);
      const auto corr = survives(p, sq, true, b);
      if (!plain.survived) CHECK_FALSE(corr.survived);
      if (plain.survived && !corr.survived) {
        CHECK(corr.correction_applied);
        ++corrected_kills;
      }
    }
    CHECK(corrected_kills > 0);
  }
}

TEST_CASE("domain-averaged survival rises towards 1 as t decreases") {
  const auto sq = PlanarDomain::rectangle(1, 1);
  double prev = 0.0, prev_se = 0.0;
  for (double t : {0.04, 0.01, 0.0025}) {
    const int n = 20000;
    int alive = 0;
    for (int k = 0; k < n; ++k) {
      RandomStream rng = RandomStream::derive(5, std::uint64_t(k));
      const auto p = sample_bridge(sq.sample_uniform(rng), t, 128, rng);
      alive += survives(p, sq, true, rng).survived;
    }
    const double f = double(alive) / n, se = std::sqrt(f * (1 - f) / n);
    // bridge survival averaged over the square is 2 pi t T0(t) = 1 - sqrt(2 pi t) + pi t / 2
    const double exact = 1 - std::sqrt(2 * pi * t) + pi * t / 2;
    CHECK(std::abs(f - exact) < 3.5 * se + 0.01);
    CHECK(f > prev - 2 * std::hypot(se, prev_se));
    prev = f;
    prev_se = se;
  }
}

TEST_CASE("path csv dump") {
  RandomStream rng(4);
  const auto p = sample_motion({0, 0}, 1.0, 4, rng);
  std::ostringstream os;
  write_path_csv(p, os);
  const std::string s = os.str();
  CHECK(s.rfind("i,time,x,y\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 6);
}
