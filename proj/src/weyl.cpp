#include "weylscope/weyl.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace weylscope::weyl {

double volume_coefficient(int n) {
    return 1.0 / (std::pow(4.0 * numerics::pi, 0.5 * n) * std::tgamma(0.5 * n + 1.0));
}

double boundary_coefficient(int n) {
    return 1.0 / (std::pow(2.0, n + 1) * std::pow(numerics::pi, 0.5 * (n - 1)) * std::tgamma(0.5 * (n + 1)));
}

double WeylContext::leading() const { return volume_coefficient(dimension) * volume; }

double WeylContext::boundary() const { return sign() * boundary_coefficient(dimension) * boundary_volume; }

double WeylContext::main_term(double lambda) const {
    return leading() * std::pow(lambda, dimension) + boundary() * std::pow(lambda, dimension - 1);
}

WeylContext planar_context(const geometry::BoundaryCurve& curve, BoundaryCondition bc) {
    WeylContext ctx;
    ctx.dimension = 2;
    ctx.volume = curve.area();
    ctx.boundary_volume = curve.perimeter();
    ctx.bc = bc;
    ctx.total_mean_curvature = numerics::two_pi;   // ∮κ ds for a simple closed convex curve
    return ctx;
}

WeylContext higher_context(const geometry::HigherDomainSpec& spec, BoundaryCondition bc) {
    WeylContext ctx;
    ctx.dimension = spec.dimension;
    ctx.volume = geometry::volume(spec);
    ctx.boundary_volume = geometry::boundary_volume(spec);
    ctx.bc = bc;
    ctx.total_mean_curvature = geometry::total_mean_curvature(spec);
    return ctx;
}

// ---------------------------------------------------------------------------

CountingFunction::CountingFunction(const Spectrum& spectrum) : spectrum_(&spectrum) {
    cumulative_.reserve(spectrum.levels.size());
    std::int64_t total = 0;
    for (const auto& level : spectrum.levels) cumulative_.push_back(total += level.multiplicity);
}

std::int64_t CountingFunction::operator()(double lambda) const {
    const Spectrum& s = *spectrum_;
    if (lambda > s.lambda_max)
        throw Error(ErrorCode::BeyondValidity, "lambda = " + std::to_string(lambda) + " exceeds the spectrum ceiling " +
                                                   std::to_string(s.lambda_max));
    if (s.lambda_min > 0.0 && lambda >= s.lambda_min)
        throw Error(ErrorCode::BeyondValidity, "spectrum is a window starting at " + std::to_string(s.lambda_min) +
                                                   "; absolute counts are unavailable");
    const auto it = std::upper_bound(s.levels.begin(), s.levels.end(), lambda,
                                     [](double x, const spectra::Level& l) { return x < l.lambda; });
    if (it == s.levels.begin()) return 0;
    return cumulative_[static_cast<std::size_t>(it - s.levels.begin()) - 1];
}

std::int64_t counting_function(const Spectrum& spectrum, double lambda) { return CountingFunction(spectrum)(lambda); }

double weyl_remainder(const Spectrum& spectrum, const WeylContext& ctx, double lambda) {
    if (ctx.bc != spectrum.bc) throw Error(ErrorCode::InvalidArgument, "Weyl context and spectrum disagree on bc");
    return static_cast<double>(counting_function(spectrum, lambda)) - ctx.main_term(lambda);
}

RemainderSeries remainder_series(const Spectrum& spectrum, const WeylContext& ctx, std::span<const double> grid) {
    if (ctx.bc != spectrum.bc) throw Error(ErrorCode::InvalidArgument, "Weyl context and spectrum disagree on bc");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "lambda grid must be strictly increasing");
    const CountingFunction n(spectrum);
    RemainderSeries series;
    series.context = ctx;
    series.spectrum_hash = spectra::spectrum_hash(spectrum);
    for (double lambda : grid) {
        const std::int64_t count = n(lambda);
        const double main = ctx.main_term(lambda);
        series.lambda.push_back(lambda);
        series.count.push_back(count);
        series.main_term.push_back(main);
        series.remainder.push_back(static_cast<double>(count) - main);
    }
    return series;
}

namespace {

/// bᵏ − aᵏ = (b − a)·Σ b^i a^{k−1−i}, free of cancellation for nearby a, b.
double power_difference(double a, double b, int k) {
    if (k == 0) return 0.0;
    double sum = 1.0, apow = 1.0;
    for (int j = 1; j < k; ++j) {
        apow *= a;
        sum = b * sum + apow;
    }
    return (b - a) * sum;
}

/// Smooth part P(τ) = c₁τⁿ + c₂τ^{n−1} of the Weyl law together with its integral.
struct MainPolynomial {
    int n;
    double c1, c2;

    double value(double t) const { return c1 * std::pow(t, n) + c2 * std::pow(t, n - 1); }
    double derivative(double t) const {
        return n * c1 * std::pow(t, n - 1) + (n - 1) * c2 * (n >= 2 ? std::pow(t, n - 2) : 0.0);
    }
    double integral(double a, double b) const {
        return c1 / (n + 1) * power_difference(a, b, n + 1) + c2 / n * power_difference(a, b, n);
    }
};

/// ∫_a^b |c − P(τ)| dτ where P is monotone on [a, b].
double monotone_piece(const MainPolynomial& p, double c, double a, double b) {
    if (!(b > a)) return 0.0;
    const double fa = c - p.value(a), fb = c - p.value(b);
    auto signed_integral = [&](double x, double y) { return c * (y - x) - p.integral(x, y); };
    if ((fa >= 0) == (fb >= 0)) return std::abs(signed_integral(a, b));
    const double root = numerics::safeguarded_newton(
        [&](double t) { return std::pair{c - p.value(t), -p.derivative(t)}; }, a, b, 1e-14 * std::max(1.0, b));
    return std::abs(signed_integral(a, root)) + std::abs(signed_integral(root, b));
}

} // namespace

double dyadic_average(const Spectrum& spectrum, const WeylContext& ctx, double lambda) {
    if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "dyadic average needs lambda > 0");
    if (ctx.bc != spectrum.bc) throw Error(ErrorCode::InvalidArgument, "Weyl context and spectrum disagree on bc");
    if (2.0 * lambda > spectrum.lambda_max)
        throw Error(ErrorCode::BeyondValidity, "dyadic window [" + std::to_string(lambda) + ", " +
                                                   std::to_string(2 * lambda) + "] exceeds the spectrum ceiling");
    const CountingFunction count(spectrum);
    const MainPolynomial p{ctx.dimension, ctx.leading(), ctx.boundary()};
    // P′ vanishes at τ* = −(n−1)c₂/(n c₁) when the boundary term is negative.
    const double critical = p.c1 > 0 && p.c2 < 0 ? -(p.n - 1) * p.c2 / (p.n * p.c1) : -1.0;

    std::vector<double> cuts{lambda};
    const auto& levels = spectrum.levels;
    auto it = std::upper_bound(levels.begin(), levels.end(), lambda,
                               [](double x, const spectra::Level& l) { return x < l.lambda; });
    for (; it != levels.end() && it->lambda < 2.0 * lambda; ++it) cuts.push_back(it->lambda);
    cuts.push_back(2.0 * lambda);

    double total = 0.0;
    std::int64_t n = count(lambda);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (i > 0) n = count(a);
        const double c = static_cast<double>(n);
        if (critical > a && critical < b)
            total += monotone_piece(p, c, a, critical) + monotone_piece(p, c, critical, b);
        else
            total += monotone_piece(p, c, a, b);
    }
    return total / lambda;
}

std::vector<double> dyadic_windows(double first, double last, double ratio) {
    if (!(first > 0) || !(last >= first) || !(ratio > 1))
        throw Error(ErrorCode::InvalidArgument, "dyadic windows need 0 < first <= last and ratio > 1");
    std::vector<double> out;
    for (double x = first; x <= last * (1.0 + 1e-12); x *= ratio) out.push_back(x);
    return out;
}

ExponentFit exponent_fit(std::span<const FitPoint> points) {
    if (points.size() < 5) throw Error(ErrorCode::DegenerateFit, "exponent fit needs at least 5 points");
    const int n = static_cast<int>(points.size());
    std::vector<double> x(n), y(n), w(n);
    for (int i = 0; i < n; ++i) {
        if (!(points[i].value > 0) || !(points[i].lambda > 0))
            throw Error(ErrorCode::DegenerateFit, "exponent fit needs positive lambda and values");
        x[i] = std::log(points[i].lambda);
        y[i] = std::log(points[i].value);
    }
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? x[i] - x[i - 1] : x[1] - x[0];
        const double right = i + 1 < n ? x[i + 1] - x[i] : x[n - 1] - x[n - 2];
        w[i] = 0.5 * (std::abs(left) + std::abs(right));
    }
    auto fit = [&](const std::vector<double>& weight, double& slope, double& intercept, double& se) {
        double sw = 0, sx = 0, sy = 0;
        for (int i = 0; i < n; ++i) {
            sw += weight[i];
            sx += weight[i] * x[i];
            sy += weight[i] * y[i];
        }
        const double mx = sx / sw, my = sy / sw;
        double sxx = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            sxx += weight[i] * (x[i] - mx) * (x[i] - mx);
            sxy += weight[i] * (x[i] - mx) * (y[i] - my);
        }
        if (!(sxx > 0)) throw Error(ErrorCode::DegenerateFit, "exponent fit needs distinct lambda values");
        slope = sxy / sxx;
        intercept = my - slope * mx;
        double ssr = 0;
        for (int i = 0; i < n; ++i) {
            const double r = y[i] - intercept - slope * x[i];
            ssr += weight[i] * r * r;
        }
        // Effective-sample normalization keeps the weighted error comparable to the unweighted one.
        const double scale = n / sw;
        se = std::sqrt(std::max(0.0, ssr * scale / (n - 2)) / (sxx * scale));
    };
    ExponentFit out;
    out.points = n;
    fit(std::vector<double>(n, 1.0), out.alpha, out.intercept, out.half_width);
    double ignored = 0;
    fit(w, out.weighted_alpha, ignored, out.weighted_half_width);
    return out;
}

ThirdTerm third_term_coefficients(const geometry::HigherDomainSpec& spec) {
    geometry::validate(spec);
    ThirdTerm t;
    t.predicted_order = spec.dimension - 2;
    t.scalar_curvature_integral = 0.0;
    if (spec.kind == geometry::HigherKind::box) {
        t.polyhedral = true;
        t.nonvanishing = true;
        return t;
    }
    t.mean_curvature_integral = geometry::total_mean_curvature(spec);
    t.nonvanishing = t.scalar_curvature_integral + 2.0 * spec.dimension * *t.mean_curvature_integral != 0.0;
    return t;
}

}  // namespace weylscope::weyl
