#include "doctest.h"

#include "weylscope/billiard.hpp"
#include "weylscope/error.hpp"
#include "weylscope/geometry.hpp"
#include "weylscope/numerics.hpp"
#include "weylscope/spectra.hpp"
#include "weylscope/trace.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <complex>
#include <random>

using namespace weylscope;
using namespace weylscope::trace;
using geometry::build_domain;
using geometry::DomainSpec;
using spectra::BoundaryCondition;
using cplx = std::complex<double>;

namespace {

const double pi = numerics::pi;

double psi_ratio(double u) { return std::abs(u) < 1 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

// ρ(x) = (1/2π)∫ρ̂(t)e^{itx}dt by double-exponential quadrature.
cplx rho_oracle(double period, double eps, double x) {
    boost::math::quadrature::tanh_sinh<double> q;
    auto part = [&](auto trig) {
        return q.integrate([&](double u) { return psi_ratio(u) * trig((period + eps * u) * x); }, -1.0, 1.0);
    };
    const double re = part([](double a) { return std::cos(a); });
    const double im = part([](double a) { return std::sin(a); });
    return eps / (2 * pi) * cplx(re, im);
}

// Trapezoid on 4096 intervals, summed over every eigenvalue with no tail cut.
class DenseRho {
public:
    DenseRho(double period, double eps) : period_(period), eps_(eps) {
        const int n = 4096;
        const double h = 2.0 / n;
        for (int k = 1; k < n; ++k) {
            u_.push_back(-1.0 + k * h);
            w_.push_back(h * psi_ratio(u_.back()));
        }
    }
    cplx operator()(double x) const {
        double g = 0.0;
        for (std::size_t k = 0; k < u_.size(); ++k) g += w_[k] * std::cos(eps_ * u_[k] * x);
        return eps_ / (2 * pi) * g * std::polar(1.0, period_ * x);
    }

private:
    double period_, eps_;
    std::vector<double> u_, w_;
};

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

TraceSeries planted(double lo, double hi, double step, double omega, double alpha, double phase, double period) {
    TraceSeries ts;
    ts.period = period;
    ts.lambda = uniform_grid(lo, hi, step);
    for (double l : ts.lambda) ts.value.push_back(std::pow(l, alpha) * std::polar(1.0, omega * l + phase));
    return ts;
}

billiard::OrbitFamily one_parameter_family(const geometry::BoundaryCurve& curve, int k, int m) {
    for (const auto& f : billiard::find_periodic_orbits(curve, k, m))
        if (f.kind == billiard::FamilyKind::one_parameter) return f;
    FAIL("no one-parameter family");
    return {};
}

} // namespace

TEST_CASE("test function support and normalization") {
    const auto tf = build_test_function(4.0, 0.9);
    CHECK(tf.fourier(4.0) == 1.0);
    CHECK(tf.fourier(3.05) == 0.0);
    CHECK(tf.fourier(4.95) == 0.0);
    CHECK(tf.fourier(3.2) > 0.0);
    CHECK(tf.fourier(0.0) == 0.0);
    const cplx at_zero = tf(0.0);
    CHECK(at_zero.real() > 0.0);
    CHECK(at_zero.imag() == 0.0);
    CHECK(at_zero.real() == doctest::Approx(rho_oracle(4.0, 0.9, 0.0).real()).epsilon(1e-12));
    CHECK(code_of([] { build_test_function(4.0, 4.1); }) == ErrorCode::EpsilonTooLarge);
    CHECK(code_of([] { build_test_function(4.0, 4.0); }) == ErrorCode::EpsilonTooLarge);
    CHECK(code_of([] { build_test_function(4.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tabulated test function matches quadrature of its transform") {
    std::mt19937_64 rng(11);
    for (auto [period, eps] : {std::pair{4.0, 0.9}, std::pair{2.0, 0.5}, std::pair{6.0, 1.7}}) {
        const auto tf = build_test_function(period, eps);
        std::uniform_real_distribution<double> pick(-60.0, 60.0);
        for (int trial = 0; trial < 40; ++trial) {
            const double x = pick(rng);
            const cplx oracle = rho_oracle(period, eps, x);
            CHECK(std::abs(tf(x) - oracle) < 1e-11);
        }
        const DenseRho dense(period, eps);
        std::uniform_real_distribution<double> far(tf.tail_radius(), 2.0 * tf.tail_radius());
        for (int trial = 0; trial < 20; ++trial) {
            const double x = far(rng);
            CHECK(std::abs(dense(x)) < tf.tail_tol());
            CHECK(tf(x) == cplx(0.0));
        }
    }
}

TEST_CASE("smoothed trace of trivial spectra") {
    const auto tf = build_test_function(4.0, 0.9);
    spectra::Spectrum empty;
    empty.lambda_max = 1000.0;
    const auto grid = uniform_grid(1.0, 20.0, 0.5);
    for (const cplx& v : smoothed_trace(empty, tf, grid).value) CHECK(v == cplx(0.0));

    spectra::Spectrum one = empty;
    one.levels = {{7.25, 1}};
    const auto ts = smoothed_trace(one, tf, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx expect = tf(7.25 - grid[i]);
        CHECK(std::abs(ts.value[i] - expect) <= 1e-15 * (1 + std::abs(expect)));
    }
}

TEST_CASE("disk smoothed trace matches the untruncated sum") {
    const auto tf = build_test_function(4.0, 0.9);
    const auto disk = spectra::disk_spectrum(1.0, 100.0 + tf.tail_radius() + 1.0, BoundaryCondition::dirichlet);
    const std::vector<double> grid{100.0};
    const auto ts = smoothed_trace(disk, tf, grid, 1);
    CHECK_FALSE(ts.truncated);
    const DenseRho rho(4.0, 0.9);
    cplx oracle = 0.0;
    for (const auto& l : disk.levels) oracle += static_cast<double>(l.multiplicity) * rho(l.lambda - 100.0);
    CHECK(std::abs(ts.value[0] - oracle) < 1e-8);
    CHECK(std::abs(ts.value[0] - oracle) < ts.truncation_bound + 1e-9);

    const auto short_spec = spectra::disk_spectrum(1.0, 150.0, BoundaryCondition::dirichlet);
    CHECK(smoothed_trace(short_spec, tf, grid).truncated);
    auto window = short_spec;
    window.lambda_min = 20.0;
    window.lambda_max = disk.lambda_max;
    CHECK(smoothed_trace(window, tf, grid).truncated);
}

TEST_CASE("smoothed trace does not depend on the thread count") {
    const auto tf = build_test_function(3.0, 0.7);
    const auto disk = spectra::disk_spectrum(1.0, 120.0, BoundaryCondition::neumann);
    const auto grid = uniform_grid(10.0, 60.0, 0.1);
    const auto a = smoothed_trace(disk, tf, grid, 1);
    const auto b = smoothed_trace(disk, tf, grid, 3);
    CHECK(a.value == b.value);
    CHECK(a.spectrum_hash == spectra::spectrum_hash(disk));
}

TEST_CASE("oscillation analysis of planted signals") {
    {
        const auto r = oscillation_analysis(planted(20.0, 200.0, 0.05, 4.0, 0.5, 0.3, 4.0), 1);
        CHECK(r.frequency == doctest::Approx(4.0).epsilon(r.frequency_resolution / 40));
        CHECK(r.signed_frequency > 0);
        CHECK(r.real_part_frequency == doctest::Approx(4.0).epsilon(r.frequency_resolution / 4));
        CHECK(r.exponent == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.plateau_lo == doctest::Approx(1.0));
        CHECK(r.plateau_hi == doctest::Approx(1.0));
    }
    {
        const auto r = oscillation_analysis(planted(20.0, 200.0, 0.05, -2.0, 1.5, 0.0, 2.0), 3);
        CHECK(r.frequency == doctest::Approx(2.0).epsilon(r.frequency_resolution / 20));
        CHECK(r.signed_frequency < 0);
        CHECK(r.exponent == doctest::Approx(1.5).epsilon(1e-9));
    }
}

TEST_CASE("planted frequency and exponent are recovered across random signals") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> freq(1.0, 8.0), expo(0.0, 2.0), phase(0.0, 2 * pi);
    for (int trial = 0; trial < 25; ++trial) {
        const double omega = freq(rng), alpha = expo(rng);
        const auto r = oscillation_analysis(planted(10.0, 80.0, 0.1, omega, alpha, phase(rng), omega), 2);
        CHECK(std::abs(r.frequency - omega) < 0.05 * r.frequency_resolution);
        CHECK(r.exponent == doctest::Approx(alpha).epsilon(1e-8));
    }
}

TEST_CASE("oscillation analysis rejects short grids") {
    CHECK(code_of([] { oscillation_analysis(planted(20.0, 200.0, 1.0, 4.0, 0.5, 0.0, 4.0), 1); }) ==
          ErrorCode::GridTooShort);
    CHECK(code_of([] { oscillation_analysis(planted(100.0, 300.0, 0.05, 4.0, 0.5, 0.0, 4.0), 1); }) ==
          ErrorCode::GridTooShort);
}

TEST_CASE("geometric amplitude of circle families") {
    for (double radius : {1.0, 2.0}) {
        const auto curve = build_domain(DomainSpec::disk(radius));
        const auto bb = one_parameter_family(curve, 2, 1);
        CHECK(geometric_amplitude(curve, bb, BoundaryCondition::dirichlet) ==
              doctest::Approx(4 * pi * radius * radius).epsilon(1e-10));
    }
    const auto unit = build_domain(DomainSpec::disk(1.0));
    // η = cos(πm/k) along a (k, m) circle family
    const auto tri = one_parameter_family(unit, 3, 1);
    CHECK(geometric_amplitude(unit, tri, BoundaryCondition::neumann) == doctest::Approx(2 * pi * std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("constant-width amplitude is four times the area") {
    for (double a3 : {0.02, 0.04}) {
        const auto curve = build_domain(DomainSpec::constant_width(0.5, {{3, a3, 0.0}}));
        const auto fam = one_parameter_family(curve, 2, 1);
        const double d = geometric_amplitude(curve, fam, BoundaryCondition::dirichlet);
        CHECK(d > 0);
        CHECK(d == doctest::Approx(4.0 * curve.area()).epsilon(1e-9));
        CHECK(geometric_amplitude(curve, fam, BoundaryCondition::neumann) == d);
        const auto fine = build_domain(DomainSpec::constant_width(0.5, {{3, a3, 0.0}}), 384);
        CHECK(geometric_amplitude(fine, one_parameter_family(fine, 2, 1), BoundaryCondition::dirichlet) ==
              doctest::Approx(d).epsilon(1e-10));
    }
}

TEST_CASE("amplitude is undefined for isolated orbits") {
    const auto ellipse = build_domain(DomainSpec::ellipse(1.0, 0.8));
    const auto fams = billiard::find_periodic_orbits(ellipse, 2, 1);
    REQUIRE_FALSE(fams.empty());
    CHECK(code_of([&] { geometric_amplitude(ellipse, fams[0], BoundaryCondition::dirichlet); }) ==
          ErrorCode::IsolatedFamily);
}

TEST_CASE("length spectrum peaks on the disk agree with billiard lengths") {
    const auto disk = spectra::disk_spectrum(1.0, 600.0, BoundaryCondition::dirichlet);
    const double width = 0.01;
    const auto peaks = length_spectrum_peaks(disk, 3.0, 6.4, width);
    auto near = [&](double length) {
        for (const auto& p : peaks)
            if (std::abs(p.t - length) < width) return true;
        return false;
    };
    for (double length : {4.0, 5.196, 5.657, 5.878}) CHECK(near(length));
    const auto curve = build_domain(DomainSpec::disk(1.0));
    const auto lengths = billiard::length_spectrum(curve, 6.05).distinct_lengths();
    REQUIRE(lengths.size() >= 5);
    for (double length : lengths)
        if (length > 3.0) CHECK(near(length));
    for (const auto& p : peaks) CHECK(p.prominence >= 4.0);
}

TEST_CASE("square length spectrum starts at the bouncing ball") {
    const auto square = spectra::box_spectrum({pi, pi}, 300.0, BoundaryCondition::dirichlet);
    const auto peaks = length_spectrum_peaks(square, 1.0, 9.5, 0.01);
    REQUIRE_FALSE(peaks.empty());
    CHECK(peaks.front().t == doctest::Approx(2 * pi).epsilon(0.01 / (2 * pi)));
}

TEST_CASE("peak detection edge cases") {
    spectra::Spectrum empty;
    empty.certificate = spectra::Certificate::exact;
    CHECK(length_spectrum_peaks(empty, 1.0, 5.0, 0.01).empty());
    auto unchecked = spectra::disk_spectrum(1.0, 50.0, BoundaryCondition::dirichlet);
    unchecked.certificate = spectra::Certificate::unchecked;
    CHECK(code_of([&] { length_spectrum_peaks(unchecked, 1.0, 5.0, 0.01); }) == ErrorCode::InvalidArgument);
}
