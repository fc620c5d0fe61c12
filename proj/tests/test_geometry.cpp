#include "doctest.h"

#include "weylscope/error.hpp"
#include "weylscope/geometry.hpp"
#include "weylscope/numerics.hpp"

#include <cmath>
#include <random>

using namespace weylscope;
using namespace weylscope::geometry;

namespace {

// Perimeter of the ellipse by composite Simpson on the parametric speed, independent of the support table.
double ellipse_perimeter_simpson(double a, double b, int n) {
    auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
    const double h = numerics::two_pi / n;
    double sum = speed(0) + speed(numerics::two_pi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * speed(i * h);
    return sum * h / 3.0;
}

} // namespace

TEST_CASE("disk area and perimeter") {
    const auto curve = build_domain(DomainSpec::disk(1.3));
    const auto ap = area_perimeter(curve);
    CHECK(ap.area == doctest::Approx(numerics::pi * 1.69).epsilon(1e-12));
    CHECK(ap.perimeter == doctest::Approx(numerics::two_pi * 1.3).epsilon(1e-12));
    CHECK(curve.perimeter() == doctest::Approx(numerics::two_pi * 1.3).epsilon(1e-12));
}

TEST_CASE("ellipse perimeter and area against parametric quadrature") {
    const double a = 1.0, b = 0.6;
    const auto curve = build_domain(DomainSpec::ellipse(a, b));
    CHECK(curve.area() == doctest::Approx(numerics::pi * a * b).epsilon(1e-11));
    CHECK(curve.perimeter() == doctest::Approx(ellipse_perimeter_simpson(a, b, 20000)).epsilon(1e-11));
}

TEST_CASE("ellipse curvature matches finite differences of the parametric curve") {
    const double a = 1.0, b = 0.7;
    const auto curve = build_domain(DomainSpec::ellipse(a, b));
    for (double t : {0.1, 0.7, 1.4, 2.9, 4.2, 5.5}) {
        const double hstep = 1e-4;
        auto p = [&](double u) { return Vec2(a * std::cos(u), b * std::sin(u)); };
        const Vec2 d1 = (p(t + hstep) - p(t - hstep)) / (2 * hstep);
        const Vec2 d2 = (p(t + hstep) - 2 * p(t) + p(t - hstep)) / (hstep * hstep);
        const double kappa_fd = (d1.x() * d2.y() - d1.y() * d2.x()) / std::pow(d1.norm(), 3);
        const double theta = std::atan2(a * std::sin(t), b * std::cos(t));
        const auto bp = curve.at_theta(theta);
        CHECK((bp.position - p(t)).norm() < 1e-12);
        CHECK(bp.curvature == doctest::Approx(kappa_fd).epsilon(1e-6));
    }
}

TEST_CASE("constant width domains have constant width and Barbier perimeter") {
    const auto curve = build_domain(DomainSpec::constant_width(0.5, {{3, 0.03, 0.0}, {5, 0.0, 0.004}}));
    const auto wp = width_profile(curve);
    CHECK(wp.min_width == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wp.max_width == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(curve.perimeter() == doctest::Approx(numerics::pi).epsilon(1e-12));
    REQUIRE(curve.width().has_value());
    CHECK(*curve.width() == doctest::Approx(1.0));
}

TEST_CASE("ellipse width profile") {
    const auto wp = width_profile(build_domain(DomainSpec::ellipse(1.0, 0.8)));
    CHECK(wp.min_width == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(wp.max_width == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("invalid domains are rejected") {
    CHECK_THROWS_AS(build_domain(DomainSpec::disk(-1.0)), Error);
    try {
        build_domain(DomainSpec::constant_width(0.5, {{3, 0.1, 0.0}}));
        FAIL("expected NonConvex");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConvex);
    }
    try {
        build_domain(DomainSpec::generic_support(0.3, {{1, 0.4, 0.0}}));
        FAIL("expected NotStarShaped");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotStarShaped);
    }
    CHECK_THROWS_AS(build_domain(DomainSpec::disk(1.0), 16), Error);
}

TEST_CASE("node weights integrate arclength and the Rellich weight") {
    const auto curve = build_domain(DomainSpec::generic_support(1.0, {{2, 0.05, 0.02}, {3, 0.0, 0.01}}), 512);
    double length = 0.0, twice_area = 0.0;
    for (int i = 0; i < curve.size(); ++i) {
        length += curve.node_weight()[i];
        twice_area += curve.node_weight()[i] * curve.node_rellich_weight()[i];
    }
    CHECK(length == doctest::Approx(curve.perimeter()).epsilon(1e-12));
    CHECK(twice_area == doctest::Approx(2.0 * curve.area()).epsilon(1e-12));
}

TEST_CASE("property: theta and arclength round trip") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, numerics::two_pi);
    const auto curve = build_domain(DomainSpec::generic_support(1.0, {{2, 0.08, -0.03}, {3, 0.02, 0.01}}));
    for (int i = 0; i < 500; ++i) {
        const double theta = angle(rng);
        const double s = curve.arclength_at(theta);
        CHECK(std::abs(numerics::angle_difference(curve.theta_at(s), theta)) < 1e-11);
        CHECK(curve.arclength_at(theta + numerics::two_pi) == doctest::Approx(s + curve.perimeter()).epsilon(1e-13));
    }
}

TEST_CASE("property: scaling the disk scales area and perimeter") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> radius(0.2, 5.0);
    for (int i = 0; i < 20; ++i) {
        const double r = radius(rng);
        const auto ap = area_perimeter(build_domain(DomainSpec::disk(r)));
        CHECK(ap.area / (r * r) == doctest::Approx(numerics::pi).epsilon(1e-12));
        CHECK(ap.perimeter / r == doctest::Approx(numerics::two_pi).epsilon(1e-12));
    }
}

TEST_CASE("higher-dimensional comparison domains") {
    const auto ball = HigherDomainSpec::ball(3, 2.0);
    CHECK(volume(ball) == doctest::Approx(4.0 / 3.0 * numerics::pi * 8.0));
    CHECK(boundary_volume(ball) == doctest::Approx(4.0 * numerics::pi * 4.0));
    CHECK(unit_sphere_area(2) == doctest::Approx(numerics::two_pi));
    CHECK(unit_sphere_area(4) == doctest::Approx(2.0 * numerics::pi * numerics::pi));
    const auto box = HigherDomainSpec::box({1.0, 2.0, 3.0});
    CHECK(volume(box) == doctest::Approx(6.0));
    CHECK(boundary_volume(box) == doctest::Approx(22.0));
    CHECK_FALSE(total_mean_curvature(box).has_value());
    CHECK_THROWS_AS(validate(HigherDomainSpec::box({1.0, -2.0})), Error);
}

TEST_CASE("spectral resolution grows with frequency") {
    CHECK(spectral_resolution(10.0, numerics::two_pi) == 256);
    CHECK(spectral_resolution(200.0, numerics::two_pi) >= 16 * 200);
}
