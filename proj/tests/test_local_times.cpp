#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "anderson/error.hpp"
#include "anderson/local_times.hpp"
#include "anderson/paths.hpp"
#include "anderson/rng.hpp"

using namespace anderson;
using std::numbers::pi;

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

// Mean and standard error of approx_silt - grid-matched mean.
std::pair<double, double> renormalized_mean(PathKind kind, double t, double eps, int n,
                                            int paths, std::uint64_t seed) {
  const double mean = silt_mean_exact(kind, t, eps, TimeRegion::triangle(t), n);
  double s = 0, s2 = 0;
  DiscretePath p;
  for (int k = 0; k < paths; ++k) {
    RandomStream rng = RandomStream::derive(seed, std::uint64_t(k));
    if (kind == PathKind::Motion)
      sample_motion(p, {0, 0}, t, n, rng);
    else
      sample_bridge(p, {0, 0}, t, n, rng);
    const double g = renormalized_silt(p, eps, mean).renormalized;
    s += g;
    s2 += g * g;
  }
  const double m = s / paths;
  return {m, std::sqrt((s2 / paths - m * m) / (paths - 1))};
}

}  // namespace

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(1.0, {0, 0}) == doctest::Approx(1 / (2 * pi)).epsilon(1e-15));
  CHECK(gaussian_kernel(0.5, {1, 0}) == doctest::Approx(std::exp(-1.0) / pi).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_kernel(0.0, {0, 0}), Error);
}

TEST_CASE("renormalisation constant") {
  CHECK(renorm_constant(1.0, std::exp(-1.0)) == doctest::Approx(1 / (2 * pi)).epsilon(1e-14));
  CHECK(renorm_constant(3.0, 1.0) == 0.0);
  CHECK(renorm_constant(2.0, 0.1) == doctest::Approx(4 / (2 * pi) * std::log(10.0)).epsilon(1e-14));
}

TEST_CASE("exact SILT means") {
  const double t = 0.05, eps = 1e-3;
  // ((t + eps) log(1 + t / eps) - t) / 2 pi
  CHECK(close(silt_mean_motion_exact(t, eps, TimeRegion::triangle(t)), 0.023956496571403505, 1e-12));
  // independent adaptive quadrature of (t - s) / (2 pi (eps + s (t - s) / t))
  CHECK(close(silt_mean_bridge_exact(t, eps, TimeRegion::triangle(t)), 0.030253205942856895, 1e-10));
  // flat-kernel limit: area / (2 pi eps)
  CHECK(close(silt_mean_motion_exact(1.0, 1e6, TimeRegion::triangle(1.0)), 7.957747154594767e-08, 1e-5));
  CHECK(close(milt_mean_exact(PathKind::Bridge, 1.0, 1e6), 1.5915494309189535e-07, 1e-5));
  CHECK(silt_mean_motion_exact(1.0, 0.1, TimeRegion::diag_block(0.3, 0.3)) == 0.0);
  CHECK(silt_mean_motion_exact(1.0, 0.1, TimeRegion::rect(0.1, 0.4, 0.5, 0.5)) == 0.0);
}

TEST_CASE("quadrature agrees with closed form for diagonal motion blocks") {
  // diag blocks use the closed form; a triangle split into two blocks and a
  // rectangle exercises the quadrature path
  const double t = 0.3, eps = 2e-3;
  const double whole = silt_mean_motion_exact(t, eps, TimeRegion::triangle(t));
  const double parts = silt_mean_motion_exact(t, eps, TimeRegion::diag_block(0, 0.1)) +
                       silt_mean_motion_exact(t, eps, TimeRegion::diag_block(0.1, t)) +
                       silt_mean_motion_exact(t, eps, TimeRegion::rect(0, 0.1, 0.1, t));
  CHECK(close(parts, whole, 1e-11));
  const double bw = silt_mean_bridge_exact(t, eps, TimeRegion::triangle(t));
  const double bp = silt_mean_bridge_exact(t, eps, TimeRegion::diag_block(0, 0.1)) +
                    silt_mean_bridge_exact(t, eps, TimeRegion::diag_block(0.1, t)) +
                    silt_mean_bridge_exact(t, eps, TimeRegion::rect(0, 0.1, 0.1, t));
  CHECK(close(bp, bw, 1e-11));
}

TEST_CASE("discrete means converge to the continuum") {
  const double t = 0.05, eps = 1e-3;
  for (auto kind : {PathKind::Motion, PathKind::Bridge}) {
    const double exact = silt_mean_exact(kind, t, eps, TimeRegion::triangle(t));
    double prev = INFINITY;
    for (int n : {64, 256, 1024}) {
      const double gap = std::abs(silt_mean_exact(kind, t, eps, TimeRegion::triangle(t), n) - exact);
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 1e-3 * exact);
  }
}

TEST_CASE("asymptotic mean") {
  CHECK(silt_mean_asymptotic(PathKind::Motion, 1.0, 1.0, TimeRegion::diag_block(0, 1)) ==
        doctest::Approx(-1 / (2 * pi)).epsilon(1e-14));
  CHECK_THROWS_AS(silt_mean_asymptotic(PathKind::Motion, 1.0, 0.1, TimeRegion::rect(0, 0.5, 0.5, 1)),
                  Error);
  for (auto kind : {PathKind::Motion, PathKind::Bridge}) {
    const double t = 0.1;
    double prev = INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const auto r = TimeRegion::triangle(t);
      const double gap = std::abs(silt_mean_asymptotic(kind, t, eps, r) - silt_mean_exact(kind, t, eps, r));
      CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_CASE("approx_silt invariants") {
  RandomStream rng(21);
  const double t = 0.05, eps = 1e-3;
  const int n = 512;
  const auto path = sample_bridge({0.2, 0.7}, t, n, rng);
  const auto tri = TimeRegion::triangle(t);

  SUBCASE("shift invariance") {
    DiscretePath shifted = path;
    for (auto& p : shifted.positions) p = p + Point2{-5.25, 13.5};
    CHECK(close(approx_silt(shifted, eps, tri), approx_silt(path, eps, tri), 1e-12));
  }
  SUBCASE("region additivity") {
    const double h = t / 2;
    const double whole = approx_silt(path, eps, tri, false);
    const double parts = approx_silt(path, eps, TimeRegion::diag_block(0, h), false) +
                         approx_silt(path, eps, TimeRegion::diag_block(h, t), false) +
                         approx_silt(path, eps, TimeRegion::rect(0, h, h, t), false);
    CHECK(close(parts, whole, 1e-12));
  }
  SUBCASE("truncation changes the value negligibly") {
    const double a = approx_silt(path, eps, tri, true), b = approx_silt(path, eps, tri, false);
    CHECK(a <= b);
    CHECK(close(a, b, 1e-8));
  }
  SUBCASE("positivity") {
    CHECK(approx_silt(path, eps, TimeRegion::rect(0, 0.0125, 0.0375, t)) >= 0.0);
    CHECK(approx_silt(path, 1e-9, tri) > 0.0);  // diagonal always contributes
  }
  SUBCASE("region must sit on the grid") {
    CHECK_THROWS_AS(approx_silt(path, eps, TimeRegion::diag_block(0, 0.01 + 1e-5)), Error);
    CHECK_THROWS_AS(approx_silt(path, eps, TimeRegion::triangle(2 * t)), Error);
    CHECK_THROWS_AS(approx_silt(path, 0.0, tri), Error);
  }
}

TEST_CASE("Brownian scaling couples horizons exactly") {
  // beta^eps over [0, t] of x + sqrt(t) b(./t) equals t beta^{eps/t} over [0, 1] of b
  for (auto kind : {PathKind::Motion, PathKind::Bridge}) {
    RandomStream r1(7), r2(7);
    const double t = 0.037, eps = 4e-4;
    const auto pt = kind == PathKind::Motion ? sample_motion({1, 1}, t, 256, r1)
                                             : sample_bridge({1, 1}, t, 256, r1);
    const auto p1 = kind == PathKind::Motion ? sample_motion({0, 0}, 1.0, 256, r2)
                                             : sample_bridge({0, 0}, 1.0, 256, r2);
    const double lhs = approx_silt(pt, eps, TimeRegion::triangle(t), false);
    const double rhs = t * approx_silt(p1, eps / t, TimeRegion::triangle(1.0), false);
    CHECK(close(lhs, rhs, 1e-12));
    CHECK(close(silt_mean_exact(kind, t, eps, TimeRegion::triangle(t), 256),
                t * silt_mean_exact(kind, 1.0, eps / t, TimeRegion::triangle(1.0), 256), 1e-12));
  }
}

TEST_CASE("MILT") {
  RandomStream rng(31);
  const auto a = sample_bridge({0, 0}, 0.05, 256, rng);
  const auto b = sample_bridge({0, 0}, 0.05, 256, rng);
  SUBCASE("symmetric bit for bit") {
    CHECK(approx_milt(a, b, 1e-3) == approx_milt(b, a, 1e-3));
    CHECK(approx_milt(a, b, 1e-3, false) == approx_milt(b, a, 1e-3, false));
  }
  SUBCASE("separated paths obey the kernel bound") {
    RandomStream r(32);
    auto p1 = sample_motion({0, 0}, 1.0, 200, r);
    auto p2 = sample_motion({0, 0}, 1.0, 200, r);
    for (auto& p : p1.positions) p = Point2{p.x * 0.01, p.y * 0.01};
    for (auto& p : p2.positions) p = Point2{3.0 + p.x * 0.01, p.y * 0.01};
    double theta = INFINITY;
    for (const auto& x : p1.positions)
      for (const auto& y : p2.positions) theta = std::min(theta, norm(x - y));
    REQUIRE(theta >= 1.0);
    const double bound = std::exp(-theta * theta / 0.02) / (2 * pi * 0.01);
    CHECK(approx_milt(p1, p2, 0.01, false) <= bound * (1 + 1e-12));
    CHECK(std::exp(-1 / 0.02) / (2 * pi * 0.01) <= 3.1e-20);
  }
  SUBCASE("mismatched grids are rejected") {
    const auto c = sample_bridge({0, 0}, 0.05, 128, rng);
    CHECK_THROWS_AS(approx_milt(a, c, 1e-3), Error);
  }
  SUBCASE("mean matches the discrete oracle") {
    const double t = 0.05, eps = 1e-3;
    const int n = 256, paths = 1500;
    const double exact = milt_mean_exact(PathKind::Bridge, t, eps, n);
    double s = 0, s2 = 0;
    for (int k = 0; k < paths; ++k) {
      RandomStream r = RandomStream::derive(33, std::uint64_t(k));
      const double v = approx_milt(sample_bridge({0, 0}, t, n, r), sample_bridge({0, 0}, t, n, r), eps);
      s += v;
      s2 += v * v;
    }
    const double m = s / paths, se = std::sqrt((s2 / paths - m * m) / paths);
    CHECK(std::abs(m - exact) < 3.5 * se);
    CHECK(close(milt_mean_exact(PathKind::Bridge, t, eps, 4096), milt_mean_exact(PathKind::Bridge, t, eps), 1e-2));
  }
}

TEST_CASE("renormalised SILT has zero mean at every resolution") {
  for (auto kind : {PathKind::Motion, PathKind::Bridge}) {
    for (auto [t, eps, n] : {std::tuple{0.05, 1e-3, 512}, std::tuple{0.01, 2e-4, 512},
                             std::tuple{0.05, 2e-3, 256}}) {
      const auto [m, se] = renormalized_mean(kind, t, eps, n, 1200, 40 + n);
      CHECK_MESSAGE(std::abs(m) < 3.5 * se, to_string(kind), " t=", t, " eps=", eps);
    }
  }
}

TEST_CASE("resolution rule") {
  CHECK(resolution_ok(1e-4, 1e-3));
  CHECK_FALSE(resolution_ok(2e-4, 1e-3));
  int calls = 0;
  set_warning_sink([](const char*, void* u) { ++*static_cast<int*>(u); }, &calls);
  check_resolution(2e-4, 1e-3);
  check_resolution(1e-5, 1e-3);
  set_warning_sink(nullptr, nullptr);
  CHECK(calls == 1);
}
