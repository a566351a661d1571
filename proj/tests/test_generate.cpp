#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "circlefit/error.hpp"
#include "circlefit/generate.hpp"
#include "circlefit/geometry.hpp"
#include "doctest.h"

using namespace circlefit;

TEST_CASE("uniform square points lie in the unit square") {
    DataSet d = gen_uniform_square(500, 42);
    REQUIRE(d.size() == 500);
    for (const Point& p : d.points()) {
        CHECK(p.x > 0.0);
        CHECK(p.x < 1.0);
        CHECK(p.y > 0.0);
        CHECK(p.y < 1.0);
    }
    CHECK(d.centroid_x() == doctest::Approx(0.5).epsilon(0.1));
    CHECK(d.centroid_y() == doctest::Approx(0.5).epsilon(0.1));
    CHECK_THROWS_AS(gen_uniform_square(2, 1), Error);
}

TEST_CASE("generators are deterministic in the seed") {
    DataSet a = gen_uniform_square(50, 7);
    DataSet b = gen_uniform_square(50, 7);
    DataSet c = gen_uniform_square(50, 8);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < 50; ++i) {
        same = same && a.points()[i].x == b.points()[i].x && a.points()[i].y == b.points()[i].y;
        differ = differ || a.points()[i].x != c.points()[i].x;
    }
    CHECK(same);
    CHECK(differ);

    ArcSpec spec;
    spec.n = 40;
    spec.sigma = 0.05;
    DataSet u = gen_arc(spec, 9);
    DataSet v = gen_arc(spec, 9);
    DataSet w = gen_arc(spec, 10);
    same = true;
    differ = false;
    for (std::size_t i = 0; i < 40; ++i) {
        same = same && u.points()[i].x == v.points()[i].x && u.points()[i].y == v.points()[i].y;
        differ = differ || u.points()[i].x != w.points()[i].x;
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("full circles space points evenly without a seam duplicate") {
    ArcSpec spec;
    spec.n = 8;
    spec.arc_degrees = 360.0;
    DataSet d = gen_arc(spec, 1);
    REQUIRE(d.size() == 8);
    // Start angle defaults to 90 - 360/2 = -90 degrees; step 45 degrees.
    for (std::size_t i = 0; i < 8; ++i) {
        double t = (-90.0 + 45.0 * static_cast<double>(i)) * std::numbers::pi / 180.0;
        CHECK(d.points()[i].x == doctest::Approx(std::cos(t)).epsilon(1e-14));
        CHECK(d.points()[i].y == doctest::Approx(std::sin(t)).epsilon(1e-14));
    }
    // Every gap equals 45 degrees, including the wrap from last to first.
    for (std::size_t i = 0; i < 8; ++i) {
        const Point& p = d.points()[i];
        const Point& q = d.points()[(i + 1) % 8];
        double gap = std::acos(p.x * q.x + p.y * q.y);
        CHECK(gap == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("partial arcs span symmetric angles around the top") {
    ArcSpec spec;
    spec.n = 5;
    spec.arc_degrees = 180.0;
    spec.radius = 2.0;
    spec.center_x = 1.0;
    spec.center_y = -1.0;
    DataSet d = gen_arc(spec, 1);
    // Start 0, end 180 inclusive: (3,-1), (1,1), (-1,-1) among the points.
    CHECK(d.points()[0].x == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(d.points()[0].y == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(d.points()[2].x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.points()[2].y == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.points()[4].x == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(d.points()[4].y == doctest::Approx(-1.0).epsilon(1e-14));

    spec.start_degrees = 45.0;
    spec.arc_degrees = 90.0;
    DataSet e = gen_arc(spec, 1);
    CHECK(e.points()[0].x == doctest::Approx(1.0 + 2.0 * std::cos(std::numbers::pi / 4)));
    CHECK(e.points()[4].y == doctest::Approx(-1.0 + 2.0 * std::sin(3 * std::numbers::pi / 4)));
}

TEST_CASE("radial noise moves points along the ray, isotropic noise does not") {
    ArcSpec spec;
    spec.n = 400;
    spec.arc_degrees = 360.0;
    spec.sigma = 0.05;
    spec.center_x = 0.5;
    spec.center_y = -0.25;
    DataSet rad = gen_arc(spec, 77);
    // Radial displacement only: the angle of each point matches its grid slot.
    for (std::size_t i = 0; i < spec.n; ++i) {
        double t = (-90.0 + 360.0 / 400.0 * static_cast<double>(i)) * std::numbers::pi / 180.0;
        const Point& p = rad.points()[i];
        double ang = std::atan2(p.y - spec.center_y, p.x - spec.center_x);
        double diff = std::remainder(ang - t, 2.0 * std::numbers::pi);
        CHECK(std::abs(diff) < 1e-12);
    }

    spec.isotropic_noise = true;
    DataSet iso = gen_arc(spec, 77);
    int off_ray = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        double t = (-90.0 + 360.0 / 400.0 * static_cast<double>(i)) * std::numbers::pi / 180.0;
        const Point& p = iso.points()[i];
        double ang = std::atan2(p.y - spec.center_y, p.x - spec.center_x);
        if (std::abs(std::remainder(ang - t, 2.0 * std::numbers::pi)) > 1e-6) ++off_ray;
    }
    CHECK(off_ray > 350);
}

TEST_CASE("noise magnitude matches the half-normal mean") {
    ArcSpec spec;
    spec.n = 20000;
    spec.arc_degrees = 360.0;
    spec.sigma = 0.03;
    DataSet d = gen_arc(spec, 123);
    double mean_abs = 0.0;
    for (const Point& p : d.points()) mean_abs += std::abs(std::hypot(p.x, p.y) - 1.0);
    mean_abs /= static_cast<double>(d.size());
    double expected = spec.sigma * std::sqrt(2.0 / std::numbers::pi);
    CHECK(mean_abs == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("random angle placement stays inside the arc") {
    ArcSpec spec;
    spec.n = 2000;
    spec.arc_degrees = 90.0;
    spec.random_angles = true;
    DataSet d = gen_arc(spec, 5);
    // Arc spans 45..135 degrees; all angles must fall inside.
    double lo = 45.0 * std::numbers::pi / 180.0, hi = 135.0 * std::numbers::pi / 180.0;
    double mean_t = 0.0;
    for (const Point& p : d.points()) {
        double t = std::atan2(p.y, p.x);
        CHECK(t >= lo - 1e-12);
        CHECK(t <= hi + 1e-12);
        mean_t += t;
    }
    mean_t /= static_cast<double>(d.size());
    CHECK(mean_t == doctest::Approx(0.5 * (lo + hi)).epsilon(0.02));
}

TEST_CASE("arc argument validation") {
    ArcSpec spec;
    spec.n = 2;
    CHECK_THROWS_AS(gen_arc(spec, 1), Error);
    spec.n = 10;
    spec.radius = 0.0;
    CHECK_THROWS_AS(gen_arc(spec, 1), Error);
    spec.radius = 1.0;
    spec.arc_degrees = 0.0;
    CHECK_THROWS_AS(gen_arc(spec, 1), Error);
    spec.arc_degrees = 361.0;
    CHECK_THROWS_AS(gen_arc(spec, 1), Error);
    spec.arc_degrees = 360.0;
    spec.sigma = -0.1;
    CHECK_THROWS_AS(gen_arc(spec, 1), Error);
}

TEST_CASE("ambiguous dataset is the unit cross plus repeated origins") {
    DataSet d = gen_multi_minima(3);
    REQUIRE(d.size() == 7);
    CHECK(d.points()[0].x == 1.0);
    CHECK(d.points()[1].y == 1.0);
    CHECK(d.points()[2].x == -1.0);
    CHECK(d.points()[3].y == -1.0);
    for (std::size_t i = 4; i < 7; ++i) {
        CHECK(d.points()[i].x == 0.0);
        CHECK(d.points()[i].y == 0.0);
    }
    CHECK_THROWS_AS(gen_multi_minima(0), Error);
}

TEST_CASE("random initial guesses scatter around the centroid at best radius") {
    DataSet d = gen_uniform_square(30, 3);
    for (uint64_t s = 0; s < 40; ++s) {
        NaturalCircle g = gen_initial_guess(d, s);
        CHECK(std::abs(g.a - d.centroid_x()) <= 2.5);
        CHECK(std::abs(g.b - d.centroid_y()) <= 2.5);
        CHECK(g.r == doctest::Approx(optimal_radius(d, g.a, g.b)));
        CHECK(g.r > 0.0);
    }
    NaturalCircle g1 = gen_initial_guess(d, 4);
    NaturalCircle g2 = gen_initial_guess(d, 4);
    NaturalCircle g3 = gen_initial_guess(d, 5);
    CHECK(g1.a == g2.a);
    CHECK(g1.b == g2.b);
    CHECK(g1.a != g3.a);
}
