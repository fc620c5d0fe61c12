#include "weylscope/trace.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"
#include "weylscope/parallel.hpp"
#include "weylscope/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace weylscope::trace {

namespace {

constexpr double table_step = 0.01;
constexpr int half_nodes = 512;          // trapezoid nodes on [0, 1); 1024 intervals over (−1, 1)
constexpr double table_limit = 20000.0;

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

using cplx = std::complex<double>;

} // namespace

TestFunction::TestFunction(double period, double half_width, double tail_tol)
    : period_(period), half_width_(half_width), tail_tol_(tail_tol) {
    if (!(half_width > 0))
        throw Error(ErrorCode::InvalidArgument, "test function half-width must be positive");
    if (!(half_width < period))
        throw Error(ErrorCode::EpsilonTooLarge, "half-width " + std::to_string(half_width) +
                                                    " puts 0 inside the support around T = " + std::to_string(period));
    if (!(tail_tol > 0)) throw Error(ErrorCode::InvalidArgument, "tail_tol must be positive");

    const double h = 1.0 / half_nodes;
    std::vector<double> u(half_nodes), w(half_nodes);
    for (int k = 0; k < half_nodes; ++k) {
        u[k] = k * h;
        w[k] = (k == 0 ? h : 2.0 * h) * bump(u[k]);
    }
    // |ρ| = (ε/2π)|G|, so the tail is where |G| falls below this.
    const double threshold = tail_tol * numerics::two_pi / half_width;
    double last_above = 0.0;
    for (int i = 0;; ++i) {
        const double y = i * table_step;
        double g = 0.0, dg = 0.0;
        for (int k = 0; k < half_nodes; ++k) {
            const double a = u[k] * y;
            g += w[k] * std::cos(a);
            dg -= w[k] * u[k] * std::sin(a);
        }
        g_.push_back(g);
        dg_.push_back(dg);
        if (std::abs(g) >= threshold) last_above = y;
        if (y > 10.0 && y - last_above > 4.0 * numerics::pi) break;
        if (y > table_limit)
            throw Error(ErrorCode::InvalidArgument, "tail_tol is below the attainable quadrature floor");
    }
    x_tail_ = (last_above + table_step) / half_width;
}

double TestFunction::fourier(double t) const { return bump((t - period_) / half_width_); }

double TestFunction::envelope(double x) const {
    const double y = half_width_ * std::abs(x) / table_step;
    const auto i = static_cast<std::size_t>(y);
    if (i + 1 >= g_.size()) return 0.0;
    const double t = y - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    const double value = (2 * t3 - 3 * t2 + 1) * g_[i] + (t3 - 2 * t2 + t) * table_step * dg_[i] +
                         (-2 * t3 + 3 * t2) * g_[i + 1] + (t3 - t2) * table_step * dg_[i + 1];
    return half_width_ / numerics::two_pi * value;
}

cplx TestFunction::operator()(double x) const {
    if (std::abs(x) > x_tail_) return 0.0;
    return std::polar(envelope(x), period_ * x);
}

TestFunction build_test_function(double period, double half_width, double tail_tol) {
    return TestFunction(period, half_width, tail_tol);
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    if (!(hi > lo) || !(step > 0)) throw Error(ErrorCode::InvalidArgument, "grid needs lo < hi and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step * (1 + 1e-12))) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

TraceSeries smoothed_trace(const Spectrum& spectrum, const TestFunction& tf, std::span<const double> grid,
                           int threads) {
    TraceSeries ts;
    ts.period = tf.period();
    ts.half_width = tf.half_width();
    ts.tail_tol = tf.tail_tol();
    ts.tail_radius = tf.tail_radius();
    ts.spectrum_hash = spectra::spectrum_hash(spectrum);
    ts.lambda.assign(grid.begin(), grid.end());
    ts.value.assign(grid.size(), 0.0);

    const auto& levels = spectrum.levels;
    const double radius = tf.tail_radius(), period = tf.period();
    std::vector<cplx> carrier(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j)
        carrier[j] = static_cast<double>(levels[j].multiplicity) * std::polar(1.0, period * levels[j].lambda);

    auto first_at_or_above = [&](double x) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), x,
                             [](const spectra::Level& l, double v) { return l.lambda < v; }) -
            levels.begin());
    };
    parallel::for_each_index(
        grid.size(),
        [&](std::size_t i) {
            const double lambda = grid[i];
            cplx sum = 0.0;
            for (std::size_t j = first_at_or_above(lambda - radius);
                 j < levels.size() && levels[j].lambda <= lambda + radius; ++j)
                sum += carrier[j] * tf.envelope(levels[j].lambda - lambda);
            ts.value[i] = sum * std::polar(1.0, -period * lambda);
        },
        threads);

    double top = 0.0;
    for (double lambda : grid) {
        if (lambda + radius > spectrum.lambda_max) ts.truncated = true;
        if (spectrum.lambda_min > 0 && lambda - radius < spectrum.lambda_min) ts.truncated = true;
        top = std::max(top, lambda + radius);
    }
    std::int64_t counted = 0;
    for (const auto& l : levels)
        if (l.lambda <= top) counted += l.multiplicity;
    ts.truncation_bound = tf.tail_tol() * static_cast<double>(counted);
    return ts;
}

namespace {

/// |Σ c_i e^{−iωλ_i}| maximized near the best coarse-grid frequency in [lo, hi].
double dft_peak(std::span<const double> lambda, std::span<const cplx> c, double lo, double hi, double step) {
    auto magnitude = [&](double omega) {
        cplx sum = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i) sum += c[i] * std::polar(1.0, -omega * lambda[i]);
        return std::abs(sum);
    };
    double best = lo, best_value = -1.0;
    for (double omega = lo; omega <= hi; omega += step) {
        const double v = magnitude(omega);
        if (v > best_value) {
            best_value = v;
            best = omega;
        }
    }
    const auto refined = numerics::golden_section([&](double w) { return -magnitude(w); }, best - step, best + step, 1e-10);
    return refined.x;
}

} // namespace

OscillationReport oscillation_analysis(const TraceSeries& series, int expected_dimension) {
    const auto& lambda = series.lambda;
    const std::size_t n = lambda.size();
    if (n < 200) throw Error(ErrorCode::GridTooShort, "oscillation analysis needs at least 200 grid points");
    if (!(lambda.front() > 0) || lambda.back() < 4.0 * lambda.front())
        throw Error(ErrorCode::GridTooShort, "grid must span a factor of 4 in lambda");
    for (std::size_t i = 1; i < n; ++i)
        if (!(lambda[i] > lambda[i - 1])) throw Error(ErrorCode::InvalidArgument, "grid must be strictly increasing");

    const double half_d = 0.5 * expected_dimension;
    const double span = lambda.back() - lambda.front();
    std::vector<double> steps(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) steps[i] = lambda[i + 1] - lambda[i];
    std::nth_element(steps.begin(), steps.begin() + static_cast<long>(steps.size() / 2), steps.end());
    const double nyquist = numerics::pi / steps[steps.size() / 2];

    std::vector<cplx> full(n), real(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? lambda[i] - lambda[i - 1] : 0.0;
        const double right = i + 1 < n ? lambda[i + 1] - lambda[i] : 0.0;
        const double hann = 0.5 - 0.5 * std::cos(numerics::two_pi * (lambda[i] - lambda.front()) / span);
        const double weight = 0.5 * (left + right) * hann * std::pow(lambda[i], -half_d);
        full[i] = weight * series.value[i];
        real[i] = weight * series.value[i].real();
    }

    OscillationReport report;
    report.frequency_resolution = numerics::two_pi / span;
    const double coarse = 0.5 * report.frequency_resolution;
    report.signed_frequency = dft_peak(lambda, full, -nyquist, nyquist, coarse);
    report.frequency = std::abs(report.signed_frequency);
    report.real_part_frequency = dft_peak(lambda, real, coarse, nyquist, coarse);

    const double window = numerics::two_pi / series.period;
    std::vector<weyl::FitPoint> envelope;
    std::size_t i = 0;
    for (double start = lambda.front(); i < n; start += window) {
        weyl::FitPoint best{0.0, -1.0};
        for (; i < n && lambda[i] < start + window; ++i) {
            const double a = std::abs(series.value[i]);
            if (a > best.value) best = {lambda[i], a};
        }
        if (best.value >= 0) envelope.push_back(best);
    }
    const auto fit = weyl::exponent_fit(envelope);
    report.exponent = fit.alpha;
    report.exponent_half_width = fit.half_width;
    report.envelope_points = fit.points;

    report.plateau_lo = std::numeric_limits<double>::infinity();
    report.plateau_hi = 0.0;
    for (std::size_t k = n / 2; k < n; ++k) {
        const double r = std::abs(series.value[k]) / std::pow(lambda[k], half_d);
        report.plateau_lo = std::min(report.plateau_lo, r);
        report.plateau_hi = std::max(report.plateau_hi, r);
    }
    return report;
}

double geometric_amplitude(const geometry::BoundaryCurve& curve, const billiard::OrbitFamily& family,
                           BoundaryCondition /*bc*/) {
    if (family.kind != billiard::FamilyKind::one_parameter || family.dimension != 1)
        throw Error(ErrorCode::IsolatedFamily, "amplitude integral needs a one-parameter family");
    const auto phases = billiard::family_section(curve, family, curve.node_theta());
    const auto weight = curve.node_weight();
    const auto rellich = curve.node_rellich_weight();
    double sum = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i)
        sum += weight[i] * rellich[i] * std::sqrt(1.0 - phases[i].eta * phases[i].eta);
    return 2.0 * sum;
}

std::vector<Peak> length_spectrum_peaks(const Spectrum& spectrum, double t_lo, double t_hi, double smoothing,
                                        const PeakOptions& options) {
    if (spectrum.certificate == spectra::Certificate::unchecked)
        throw Error(ErrorCode::InvalidArgument, "peak detection needs a certified spectrum");
    if (!(t_hi > t_lo) || !(smoothing > 0) || options.samples_per_width < 2)
        throw Error(ErrorCode::InvalidArgument, "peak scan needs t_lo < t_hi, smoothing > 0, 2+ samples per width");
    if (spectrum.levels.empty()) return {};

    const double scale = std::min(1.0 / smoothing, spectrum.lambda_max / 6.0);
    std::vector<double> freq, weight;
    for (const auto& l : spectrum.levels) {
        const double w = l.multiplicity * std::exp(-0.5 * (l.lambda / scale) * (l.lambda / scale));
        if (w < 1e-300) break;
        freq.push_back(l.lambda);
        weight.push_back(w);
    }
    const double step = smoothing / options.samples_per_width;
    const auto t = uniform_grid(t_lo, t_hi, step);
    std::vector<double> magnitude(t.size());
    parallel::for_each_index(
        t.size(),
        [&](std::size_t i) {
            cplx sum = 0.0;
            for (std::size_t j = 0; j < freq.size(); ++j) sum += weight[j] * std::polar(1.0, freq[j] * t[i]);
            magnitude[i] = std::abs(sum);
        },
        options.threads);

    auto sorted = magnitude;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double floor = sorted[sorted.size() / 2];

    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const double a = magnitude[i - 1], b = magnitude[i], c = magnitude[i + 1];
        if (!(b >= a && b > c) || b < options.prominence_ratio * floor) continue;
        const double curvature = a - 2 * b + c;
        const double offset = curvature < 0 ? 0.5 * (a - c) / curvature : 0.0;
        peaks.push_back({t[i] + offset * step, b, floor > 0 ? b / floor : std::numeric_limits<double>::infinity()});
    }
    return peaks;
}

} // namespace weylscope::trace
