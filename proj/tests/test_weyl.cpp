#include "doctest.h"

#include "weylscope/error.hpp"
#include "weylscope/geometry.hpp"
#include "weylscope/numerics.hpp"
#include "weylscope/spectra.hpp"
#include "weylscope/weyl.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <random>

using namespace weylscope;
using namespace weylscope::weyl;
using spectra::BoundaryCondition;

namespace {

const double pi = numerics::pi;

WeylContext square_context(BoundaryCondition bc) {
    return higher_context(geometry::HigherDomainSpec::box({pi, pi}), bc);
}

// Composite Simpson between consecutive eigenvalues, many nodes per piece.
double simpson_dyadic(const spectra::Spectrum& s, const WeylContext& ctx, double lambda, int per_piece) {
    std::vector<double> cuts{lambda};
    for (const auto& l : s.levels)
        if (l.lambda > lambda && l.lambda < 2 * lambda) cuts.push_back(l.lambda);
    cuts.push_back(2 * lambda);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        const double n = static_cast<double>(counting_function(s, a));
        auto f = [&](double t) { return std::abs(n - ctx.main_term(t)); };
        const double h = (b - a) / per_piece;
        double sum = f(a) + f(b);
        for (int k = 1; k < per_piece; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
        total += sum * h / 3.0;
    }
    return total / lambda;
}

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("square counting function and remainder at 5") {
    const auto s = spectra::box_spectrum({pi, pi}, 12.0, BoundaryCondition::dirichlet);
    const auto ctx = square_context(BoundaryCondition::dirichlet);
    CHECK(counting_function(s, 5.0) == 15);
    CHECK(counting_function(s, 0.5) == 0);
    CHECK(weyl_remainder(s, ctx, 5.0) == doctest::Approx(15.0 - 25.0 * pi / 4.0 + 5.0).epsilon(1e-13));
    CHECK(weyl_remainder(s, ctx, 5.0) == doctest::Approx(0.365046).epsilon(1e-6));
}

TEST_CASE("counting refuses to extrapolate") {
    const auto s = spectra::box_spectrum({pi, pi}, 12.0, BoundaryCondition::dirichlet);
    const auto ctx = square_context(BoundaryCondition::dirichlet);
    CHECK(code_of([&] { counting_function(s, 12.5); }) == ErrorCode::BeyondValidity);
    CHECK(code_of([&] { dyadic_average(s, ctx, 6.5); }) == ErrorCode::BeyondValidity);
    auto window = s;
    window.lambda_min = 4.0;
    CHECK(code_of([&] { counting_function(window, 5.0); }) == ErrorCode::BeyondValidity);
    CHECK(code_of([&] { weyl_remainder(s, square_context(BoundaryCondition::neumann), 5.0); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("Weyl coefficients in two and three dimensions") {
    CHECK(volume_coefficient(2) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-15));
    CHECK(boundary_coefficient(2) == doctest::Approx(1.0 / (4.0 * pi)).epsilon(1e-15));
    CHECK(volume_coefficient(3) == doctest::Approx(1.0 / (6.0 * pi * pi)).epsilon(1e-15));
    CHECK(boundary_coefficient(3) == doctest::Approx(1.0 / (16.0 * pi)).epsilon(1e-15));
    // c_n = ω_n/(2π)^n with ω_n the unit-ball volume
    for (int n = 1; n <= 6; ++n) {
        const double omega = std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1);
        CHECK(volume_coefficient(n) == doctest::Approx(omega / std::pow(2 * pi, n)).epsilon(1e-14));
    }
}

TEST_CASE("disk remainder matches a direct count of Bessel zeros") {
    const auto curve = geometry::build_domain(geometry::DomainSpec::disk(1.0));
    const auto ctx = planar_context(curve, BoundaryCondition::dirichlet);
    const auto s = spectra::disk_spectrum(1.0, 20.0, BoundaryCondition::dirichlet);
    CHECK(counting_function(s, 2.0) == 0);
    for (double lambda : {7.3, 10.0, 15.9}) {
        std::int64_t n = 0;
        for (int m = 0; m < 30; ++m)
            for (unsigned k = 1; boost::math::cyl_bessel_j_zero(double(m), k) <= lambda; ++k) n += m == 0 ? 1 : 2;
        const double oracle = static_cast<double>(n) - lambda * lambda / 4.0 + lambda / 2.0;
        CHECK(weyl_remainder(s, ctx, lambda) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("remainder series reassembles the count") {
    const auto s = spectra::box_spectrum({pi, 2.0}, 30.0, BoundaryCondition::neumann);
    const auto ctx = higher_context(geometry::HigherDomainSpec::box({pi, 2.0}), BoundaryCondition::neumann);
    std::vector<double> grid;
    for (double x = 0.25; x < 30.0; x += 0.37) grid.push_back(x);
    const auto r = remainder_series(s, ctx, grid);
    REQUIRE(r.lambda.size() == grid.size());
    CHECK(r.spectrum_hash == spectra::spectrum_hash(s));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.remainder[i] + r.main_term[i] == doctest::Approx(static_cast<double>(r.count[i])).epsilon(1e-12));
        CHECK(r.count[i] == counting_function(s, grid[i]));
    }
    const std::vector<double> bad{1.0, 1.0};
    CHECK(code_of([&] { remainder_series(s, ctx, bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("remainder is scale invariant on disks") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pick(1.0, 20.0);
    const auto unit = spectra::disk_spectrum(1.0, 45.0, BoundaryCondition::neumann);
    const auto unit_ctx = higher_context(geometry::HigherDomainSpec::ball(2, 1.0), BoundaryCondition::neumann);
    for (double radius : {0.5, 2.0}) {
        const auto s = spectra::disk_spectrum(radius, 45.0 / radius, BoundaryCondition::neumann);
        const auto ctx = higher_context(geometry::HigherDomainSpec::ball(2, radius), BoundaryCondition::neumann);
        for (int trial = 0; trial < 40; ++trial) {
            const double lambda = pick(rng) / radius;
            CHECK(weyl_remainder(s, ctx, lambda) ==
                  doctest::Approx(weyl_remainder(unit, unit_ctx, radius * lambda)).epsilon(1e-9));
        }
    }
}

TEST_CASE("dyadic average agrees with fine Simpson quadrature") {
    for (auto bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
        const auto s = spectra::box_spectrum({pi, pi}, 12.0, bc);
        const auto ctx = square_context(bc);
        for (double lambda : {0.5, 1.3, 5.0, 6.0})
            CHECK(dyadic_average(s, ctx, lambda) == doctest::Approx(simpson_dyadic(s, ctx, lambda, 40000)).epsilon(1e-8));
    }
}

TEST_CASE("dyadic average of an empty spectrum with zero main term vanishes") {
    spectra::Spectrum empty;
    empty.lambda_max = 10.0;
    WeylContext ctx;
    CHECK(dyadic_average(empty, ctx, 3.0) == 0.0);
    ctx.volume = 4.0 * pi;   // main term λ²
    CHECK(dyadic_average(empty, ctx, 2.0) == doctest::Approx((64.0 - 8.0) / 3.0 / 2.0).epsilon(1e-14));
}

TEST_CASE("disk dyadic average is not small at 50") {
    const auto s = spectra::disk_spectrum(1.0, 100.0, BoundaryCondition::dirichlet);
    const auto ctx = higher_context(geometry::HigherDomainSpec::ball(2, 1.0), BoundaryCondition::dirichlet);
    CHECK(dyadic_average(s, ctx, 50.0) >= 0.1 * std::sqrt(50.0));
}

TEST_CASE("dyadic windows are geometric") {
    const auto w = dyadic_windows(2.0, 20.0);
    REQUIRE(w.size() == 6);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] / w[i - 1] == doctest::Approx(1.5));
    CHECK(dyadic_windows(3.0, 3.0).size() == 1);
    CHECK(code_of([] { dyadic_windows(0.0, 3.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("exponent fit recovers planted exponents") {
    for (double alpha : {0.5, 1.5}) {
        std::vector<FitPoint> pts;
        for (double x : dyadic_windows(10.0, 1000.0)) pts.push_back({x, 3.0 * std::pow(x, alpha)});
        const auto fit = exponent_fit(pts);
        CHECK(fit.alpha == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(fit.weighted_alpha == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
        CHECK(fit.half_width < 1e-10);
    }
}

TEST_CASE("exponent fit error bar covers planted exponent under noise") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> exponent(0.1, 2.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    int covered = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const double alpha = exponent(rng);
        std::vector<FitPoint> pts;
        for (double x : dyadic_windows(5.0, 500.0, 1.3)) pts.push_back({x, 2.0 * std::pow(x, alpha) * std::exp(noise(rng))});
        const auto fit = exponent_fit(pts);
        CHECK(fit.half_width > 0.0);
        CHECK(std::abs(fit.alpha - alpha) < 5.0 * fit.half_width);
        if (std::abs(fit.alpha - alpha) < 2.0 * fit.half_width) ++covered;
    }
    CHECK(covered > trials * 8 / 10);
}

TEST_CASE("exponent fit rejects degenerate input") {
    std::vector<FitPoint> few{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
    CHECK(code_of([&] { exponent_fit(few); }) == ErrorCode::DegenerateFit);
    few.push_back({5, 0.0});
    CHECK(code_of([&] { exponent_fit(few); }) == ErrorCode::DegenerateFit);
    std::vector<FitPoint> same(6, FitPoint{2.0, 1.0});
    CHECK(code_of([&] { exponent_fit(same); }) == ErrorCode::DegenerateFit);
}

TEST_CASE("third-term data for balls and boxes") {
    for (double radius : {1.0, 2.5}) {
        const auto t = third_term_coefficients(geometry::HigherDomainSpec::ball(3, radius));
        REQUIRE(t.mean_curvature_integral.has_value());
        CHECK(*t.mean_curvature_integral == doctest::Approx(4.0 * pi * radius));
        CHECK(t.predicted_order == 1);
        CHECK(t.nonvanishing);
        CHECK_FALSE(t.polyhedral);
    }
    const auto box = third_term_coefficients(geometry::HigherDomainSpec::box({1.0, 2.0, 3.0}));
    CHECK(box.polyhedral);
    CHECK_FALSE(box.mean_curvature_integral.has_value());
    CHECK(box.predicted_order == 1);
}
