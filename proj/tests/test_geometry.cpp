#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "anderson/error.hpp"
#include "anderson/geometry.hpp"
#include "anderson/rng.hpp"

using namespace anderson;
using std::numbers::pi;

namespace {

std::vector<PlanarDomain> sample_domains() {
  return {PlanarDomain::rectangle(1, 1), PlanarDomain::rectangle(2, 0.5, {-1, 3}),
          PlanarDomain::disk(1), PlanarDomain::koch(3, 1),
          // L-shape
          PlanarDomain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}})};
}

}  // namespace

TEST_CASE("contains examples") {
  const auto sq = PlanarDomain::rectangle(1, 1);
  CHECK(sq.contains({0.5, 0.5}));
  CHECK_FALSE(sq.contains({1.5, 0.5}));
  CHECK_FALSE(sq.contains({1.0, 0.5}));
  CHECK_FALSE(PlanarDomain::disk(1).contains({1, 0}));
  CHECK(PlanarDomain::disk(1).contains({0.999, 0}));
}

TEST_CASE("signed distance examples") {
  CHECK(PlanarDomain::rectangle(1, 1).signed_distance({0.5, 0.5}) == doctest::Approx(0.5));
  CHECK(PlanarDomain::disk(1).signed_distance({0, 0}) == doctest::Approx(1.0));
  CHECK(PlanarDomain::rectangle(1, 1).signed_distance({2, 0.5}) == doctest::Approx(-1.0));
  // exterior near a corner measures to the corner
  CHECK(PlanarDomain::rectangle(1, 1).signed_distance({2, 2}) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("area and perimeter examples") {
  CHECK(PlanarDomain::rectangle(1, 1).area() == doctest::Approx(1.0));
  CHECK(PlanarDomain::disk(1).area() == doctest::Approx(pi));
  CHECK(PlanarDomain::koch(0, 1).area() == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-12));
  CHECK(PlanarDomain::rectangle(1, 1).perimeter() == doctest::Approx(4.0));
  CHECK(PlanarDomain::koch(1, 1).perimeter() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(PlanarDomain::koch(1, 1).vertices().size() == 12);
  CHECK(PlanarDomain::disk(1).perimeter() == doctest::Approx(2 * pi));
}

TEST_CASE("Koch area increases with level and stays below 8/5 of the triangle") {
  const double base = std::sqrt(3.0) / 4;
  double prev = 0.0;
  for (int level = 0; level <= 6; ++level) {
    const double a = PlanarDomain::koch(level, 1).area();
    CHECK(a > prev);
    CHECK(a < 1.6 * base);
    prev = a;
  }
  // perimeter grows by 4/3 per level
  CHECK(PlanarDomain::koch(4, 1).perimeter() ==
        doctest::Approx(3.0 * std::pow(4.0 / 3.0, 4)).epsilon(1e-12));
}

TEST_CASE("contains agrees with the sign of signed_distance on a grid") {
  for (const auto& d : sample_domains()) {
    const Box b = d.bounding_box().inflated(0.1);
    int inside = 0;
    for (int i = 0; i <= 120; ++i) {
      for (int j = 0; j <= 120; ++j) {
        const Point2 p{b.lo.x + b.width() * (i + 0.37) / 121.0,
                       b.lo.y + b.height() * (j + 0.61) / 121.0};
        const bool c = d.contains(p);
        const double s = d.signed_distance(p);
        CHECK_MESSAGE(c == (s > 0.0), d.describe());
        CHECK(d.boundary_distance(p) == doctest::Approx(std::abs(s)).epsilon(1e-12));
        inside += c;
      }
    }
    CHECK(inside > 0);
  }
}

TEST_CASE("capped boundary distance is exact below the cap") {
  const auto k = PlanarDomain::koch(4, 1);
  RandomStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Point2 p{rng.uniform(-0.2, 1.2), rng.uniform(-0.5, 1.1)};
    const double exact = k.boundary_distance(p);
    const double capped = k.boundary_distance(p, 0.05);
    if (exact < 0.05)
      CHECK(capped == exact);
    else
      CHECK(capped >= 0.05);
  }
}

TEST_CASE("sample_uniform") {
  SUBCASE("square points are inside") {
    const auto sq = PlanarDomain::rectangle(1, 1);
    RandomStream rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(sq.contains(sq.sample_uniform(rng)));
  }
  SUBCASE("disk mean within 3 SE of the centre") {
    const auto disk = PlanarDomain::disk(1);
    RandomStream rng(2);
    const int n = 100000;
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
      const Point2 p = disk.sample_uniform(rng);
      sx += p.x;
      sy += p.y;
    }
    const double se = std::sqrt(0.25 / n);  // E[x^2] = R^2 / 4
    CHECK(std::abs(sx / n) < 3 * se);
    CHECK(std::abs(sy / n) < 3 * se);
  }
  SUBCASE("Koch level 3 acceptance rate matches area over box area") {
    const auto k = PlanarDomain::koch(3, 1);
    const Box b = k.bounding_box();
    RandomStream rng(4);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
      hits += k.contains({rng.uniform(b.lo.x, b.hi.x), rng.uniform(b.lo.y, b.hi.y)});
    const double p = k.area() / b.area();
    CHECK(std::abs(double(hits) / n - p) < 3 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("boundary neighbourhood area") {
  SUBCASE("square tube, r = 0.01") {
    RandomStream rng(5);
    const auto nb = boundary_neighborhood_area(PlanarDomain::rectangle(1, 1), 0.01, 400000, rng);
    const double exact = 8 * 0.01 + (pi - 4) * 1e-4;
    CHECK(std::abs(nb.area_estimate - exact) < 3 * nb.std_error);
    CHECK(std::abs(nb.area_estimate - 0.08) < 3 * nb.std_error + 1e-4);
  }
  SUBCASE("disk annulus, r = 0.1") {
    RandomStream rng(6);
    const auto nb = boundary_neighborhood_area(PlanarDomain::disk(1), 0.1, 200000, rng);
    CHECK(std::abs(nb.area_estimate - 0.4 * pi) < 3 * nb.std_error);
  }
  SUBCASE("radius beyond the diameter stays finite") {
    RandomStream rng(7);
    const auto nb = boundary_neighborhood_area(PlanarDomain::rectangle(1, 1), 5.0, 10000, rng);
    CHECK(std::isfinite(nb.area_estimate));
    CHECK(nb.area_estimate <= 11.0 * 11.0);
  }
  SUBCASE("invalid input") {
    RandomStream rng(8);
    CHECK_THROWS_AS(boundary_neighborhood_area(PlanarDomain::disk(1), 0.0, 10000, rng), Error);
  }
}

TEST_CASE("minkowski_fit on exact power laws") {
  std::vector<BoundaryNeighborhood> smooth, fractal;
  const double d = std::log(4.0) / std::log(3.0);
  for (double r : {1e-3, 2e-3, 5e-3, 1e-2}) {
    smooth.push_back({r, 2 * 4.0 * r, 0.0});
    fractal.push_back({r, 0.37 * std::pow(r, 2 - d), 0.0});
  }
  CHECK(std::abs(minkowski_fit(smooth) - 1.0) < 1e-12);
  CHECK(std::abs(minkowski_fit(fractal) - d) < 1e-12);
  fractal[1].area_estimate = 0.0;
  CHECK_THROWS_AS(minkowski_fit(fractal), Error);
}

TEST_CASE("invalid domains are rejected") {
  CHECK_THROWS_AS(PlanarDomain::rectangle(0, 1), Error);
  CHECK_THROWS_AS(PlanarDomain::disk(-1), Error);
  CHECK_THROWS_AS(PlanarDomain::koch(PlanarDomain::kMaxKochLevel + 1, 1), Error);
  CHECK_THROWS_AS(PlanarDomain::polygon({{0, 0}, {1, 0}}), Error);
  // clockwise
  CHECK_THROWS_AS(PlanarDomain::polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), Error);
  // bow tie
  CHECK_THROWS_AS(PlanarDomain::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
}

TEST_CASE("vertex file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "anderson_vertices.txt";
  {
    std::ofstream f(path);
    f << "# unit square\n0 0\n1 0\n\n1 1\n0 1\n";
  }
  const auto v = load_vertex_file(path.string());
  REQUIRE(v.size() == 4);
  CHECK(PlanarDomain::polygon(v).area() == doctest::Approx(1.0));
  {
    std::ofstream f(path);
    f << "0 0\n1 zero\n";
  }
  CHECK_THROWS_AS(load_vertex_file(path.string()), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_vertex_file(path.string()), Error);
}
