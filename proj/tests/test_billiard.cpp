#include "doctest.h"

#include "weylscope/billiard.hpp"
#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

using namespace weylscope;
using namespace weylscope::billiard;
using geometry::DomainSpec;
using geometry::build_domain;

namespace {

double circular(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

// Signed arclength difference, used to difference the map across the s = 0 seam.
double seam_difference(double a, double b, double period) {
    double d = std::fmod(a - b, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

struct PhaseGenerator {
    std::mt19937_64 rng;
    double perimeter;
    double eta_max;
    PhasePoint operator()() {
        std::uniform_real_distribution<double> s(0.0, perimeter), eta(-eta_max, eta_max);
        return {s(rng), eta(rng)};
    }
};

Matrix2 finite_difference_jacobian(const geometry::BoundaryCurve& curve, PhasePoint p) {
    const double h = 1e-6;
    const double perimeter = curve.perimeter();
    Matrix2 j;
    const auto sp = billiard_map(curve, {p.s + h, p.eta}).next;
    const auto sm = billiard_map(curve, {p.s - h, p.eta}).next;
    const auto ep = billiard_map(curve, {p.s, p.eta + h}).next;
    const auto em = billiard_map(curve, {p.s, p.eta - h}).next;
    j(0, 0) = seam_difference(sp.s, sm.s, perimeter) / (2 * h);
    j(1, 0) = (sp.eta - sm.eta) / (2 * h);
    j(0, 1) = seam_difference(ep.s, em.s, perimeter) / (2 * h);
    j(1, 1) = (ep.eta - em.eta) / (2 * h);
    return j;
}

} // namespace

TEST_CASE("circle map: chord, angle advance and conserved momentum") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    for (double eta : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
        const auto b = billiard_map(curve, {0.5, eta});
        CHECK(b.next.eta == doctest::Approx(eta).epsilon(1e-13));
        CHECK(b.chord == doctest::Approx(2.0 * std::sqrt(1 - eta * eta)).epsilon(1e-13));
        const double expected = numerics::wrap_two_pi(0.5 + 2.0 * std::acos(eta));
        CHECK(circular(b.next.s, expected, numerics::two_pi) < 1e-12);
    }
}

TEST_CASE("glancing inputs are refused") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    try {
        billiard_map(curve, {0.0, 1.0});
        FAIL("expected GlancingInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GlancingInput);
    }
}

TEST_CASE("bouncing ball on the unit circle has dβ² = [[1,-4],[0,1]]") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    const Matrix2 m = billiard_map_differential(curve, {0.3, 0.0}, 2);
    CHECK(m(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m(0, 1) == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(std::abs(m(1, 0)) < 1e-12);
    CHECK(m(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fixed_subspace_dimension(m) == 1);
}

TEST_CASE("ellipse major axis bounce matches the width/curvature formula") {
    // Along the major axis of x²/a² + y²/b²: chord W = 2a, radius of curvature R = b²/a.
    const double a = 1.0, b = 0.8;
    const auto curve = build_domain(DomainSpec::ellipse(a, b));
    const double w = 2 * a, r = b * b / a;
    const Matrix2 m = billiard_map_differential(curve, {0.0, 0.0}, 2);
    // Single bounce along a normal chord of length t between equal curvature radii R:
    // [[t/R − 1, −t], [2/R − t/R², t/R − 1]]; square it as the oracle.
    Matrix2 single;
    single << w / r - 1, -w, 2 / r - w / (r * r), w / r - 1;
    const Matrix2 oracle = single * single;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(m(i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-9));
}

TEST_CASE("analytic differential agrees with finite differences") {
    const auto curve = build_domain(DomainSpec::generic_support(1.0, {{2, 0.07, 0.02}, {3, -0.02, 0.015}}), 512);
    PhaseGenerator gen{std::mt19937_64(3), curve.perimeter(), 0.9};
    for (int i = 0; i < 50; ++i) {
        const PhasePoint p = gen();
        const Matrix2 exact = billiard_map_differential(curve, p, 1);
        const Matrix2 fd = finite_difference_jacobian(curve, p);
        CHECK((exact - fd).norm() < 1e-6 * std::max(1.0, exact.norm()));
    }
}

TEST_CASE("property: the differential is area preserving") {
    const auto curve = build_domain(DomainSpec::constant_width(0.5, {{3, 0.03, 0.01}}));
    PhaseGenerator gen{std::mt19937_64(17), curve.perimeter(), 0.98};
    for (int i = 0; i < 1000; ++i) {
        const PhasePoint p = gen();
        const Matrix2 m = billiard_map_differential(curve, p, 1 + i % 3);
        CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("property: time reversal") {
    const auto curve = build_domain(DomainSpec::ellipse(1.0, 0.75));
    PhaseGenerator gen{std::mt19937_64(5), curve.perimeter(), 0.95};
    for (int i = 0; i < 300; ++i) {
        const PhasePoint p = gen();
        const auto fwd = billiard_map(curve, p);
        const auto back = billiard_map(curve, {fwd.next.s, -fwd.next.eta});
        CHECK(circular(back.next.s, p.s, curve.perimeter()) < 1e-10);
        CHECK(back.next.eta == doctest::Approx(-p.eta).epsilon(1e-10));
        CHECK(back.chord == doctest::Approx(fwd.chord).epsilon(1e-12));
    }
}

TEST_CASE("circle periodic orbits form one-parameter families of regular polygons") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    for (auto [k, m] : {std::pair{2, 1}, {3, 1}, {5, 2}, {7, 3}}) {
        const auto fams = find_periodic_orbits(curve, k, m);
        REQUIRE(fams.size() == 1);
        CHECK(fams[0].kind == FamilyKind::one_parameter);
        CHECK(fams[0].dimension == 1);
        CHECK(fams[0].length == doctest::Approx(2.0 * k * std::sin(numerics::pi * m / k)).epsilon(1e-12));
        CHECK(fams[0].representatives.size() == 8);
    }
}

TEST_CASE("ellipse two-bounce orbits are the two isolated axes") {
    const auto curve = build_domain(DomainSpec::ellipse(1.0, 0.7));
    const auto fams = find_periodic_orbits(curve, 2, 1);
    REQUIRE(fams.size() == 2);
    CHECK(fams[0].length == doctest::Approx(2.8).epsilon(1e-12));
    CHECK(fams[1].length == doctest::Approx(4.0).epsilon(1e-12));
    for (const auto& f : fams) CHECK(f.kind == FamilyKind::isolated);
}

TEST_CASE("ellipse three-bounce orbits form a caustic family") {
    const auto curve = build_domain(DomainSpec::ellipse(1.0, 0.8));
    const auto fams = find_periodic_orbits(curve, 3, 1);
    REQUIRE(fams.size() == 1);
    CHECK(fams[0].kind == FamilyKind::one_parameter);
}

TEST_CASE("circle length spectrum below 6") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    const auto spec = length_spectrum(curve, 6.0);
    const auto lengths = spec.distinct_lengths();
    REQUIRE(lengths.size() == 4);
    CHECK(lengths[0] == doctest::Approx(4.0));
    CHECK(lengths[1] == doctest::Approx(3.0 * std::sqrt(3.0)));
    CHECK(lengths[2] == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(lengths[3] == doctest::Approx(10.0 * std::sin(numerics::pi / 5)));
    CHECK_FALSE(spec.incomplete);
}

TEST_CASE("family section of a constant width domain") {
    const auto curve = build_domain(DomainSpec::constant_width(0.5, {{3, 0.02, 0.0}}));
    const auto fams = find_periodic_orbits(curve, 2, 1);
    REQUIRE(fams.size() == 1);
    CHECK(fams[0].kind == FamilyKind::one_parameter);
    CHECK(fams[0].length == doctest::Approx(2.0).epsilon(1e-12));
    const auto section = family_section(curve, fams[0], curve.node_theta());
    for (const auto& p : section) CHECK(std::abs(p.eta) < 1e-10);
}

TEST_CASE("admissibility of the triangle family in the circle") {
    const auto curve = build_domain(DomainSpec::disk(1.0));
    const auto spec = length_spectrum(curve, 6.0);
    const auto fams = find_periodic_orbits(curve, 3, 1);
    const auto report = admissibility_check(curve, fams[0], spec, 0.6);
    CHECK(report.isolated);
    CHECK(report.clean);
    CHECK(report.non_glancing);
    CHECK(report.isolation_gap == doctest::Approx(4.0 * std::sqrt(2.0) - 3.0 * std::sqrt(3.0)).epsilon(1e-9));
    CHECK_THROWS_AS(admissibility_check(curve, fams[0], spec, 2.0), Error);
}
