#pragma once

#include "weylscope/billiard.hpp"
#include "weylscope/geometry.hpp"
#include "weylscope/spectra.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace weylscope::trace {

using spectra::BoundaryCondition;
using spectra::Spectrum;

/// ρ̂(t) = ψ((t − T)/ε)/ψ(0) with ψ(x) = exp(−1/(1 − x²)) on (−1, 1), and its inverse
/// transform ρ(x) = (1/2π)∫ρ̂(t)e^{itx}dt = (ε/2π)·e^{iTx}·G(εx).
/// G is tabulated at Δy = 0.01 and interpolated with cubic Hermite splines.
class TestFunction {
public:
    TestFunction(double period, double half_width, double tail_tol = 1e-10);

    double period() const { return period_; }
    double half_width() const { return half_width_; }
    double tail_tol() const { return tail_tol_; }
    /// |ρ(x)| < tail_tol for every |x| > tail_radius().
    double tail_radius() const { return x_tail_; }

    double fourier(double t) const;
    std::complex<double> operator()(double x) const;
    /// Real even envelope (ε/2π)·G(εx), so that ρ(x) = e^{iTx}·envelope(x).
    double envelope(double x) const;

private:
    double period_, half_width_, tail_tol_;
    double x_tail_ = 0.0;
    std::vector<double> g_, dg_;
};

/// Throws EpsilonTooLarge unless 0 < ε < T.
TestFunction build_test_function(double period, double half_width, double tail_tol = 1e-10);

struct TraceSeries {
    std::vector<double> lambda;
    std::vector<std::complex<double>> value;   // S(λ) = Σ_j mult_j ρ(λ_j − λ)
    double period = 0.0;
    double half_width = 0.0;
    double tail_tol = 0.0;
    double tail_radius = 0.0;
    std::uint64_t spectrum_hash = 0;
    bool truncated = false;          // some grid point lies within the tail radius of a spectrum edge
    double truncation_bound = 0.0;   // tail_tol·N(max λ + tail radius)
};

TraceSeries smoothed_trace(const Spectrum& spectrum, const TestFunction& tf, std::span<const double> grid,
                           int threads = 0);

std::vector<double> uniform_grid(double lo, double hi, double step);

struct OscillationReport {
    double frequency = 0.0;            // |ω| at the DFT maximum of S·λ^{−d/2}
    double signed_frequency = 0.0;
    double real_part_frequency = 0.0;  // same from Re S, ω > 0
    double frequency_resolution = 0.0; // 2π over the grid span
    double exponent = 0.0;
    double exponent_half_width = 0.0;
    int envelope_points = 0;
    double plateau_lo = 0.0;           // range of |S|/λ^{d/2} over the upper half of the grid
    double plateau_hi = 0.0;
};

/// Needs ≥ 200 points spanning a factor ≥ 4 in λ (GridTooShort otherwise).
/// The envelope takes max |S| in consecutive windows of width 2π/T.
OscillationReport oscillation_analysis(const TraceSeries& series, int expected_dimension);

/// 2·Σ w_i F(q_i)·sqrt(1 − η_i²) over the family's invariant circle, sampled at the curve nodes.
/// Throws IsolatedFamily for d = 0. The Neumann value coincides with the Dirichlet one.
double geometric_amplitude(const geometry::BoundaryCurve& curve, const billiard::OrbitFamily& family,
                           BoundaryCondition bc);

struct Peak {
    double t = 0.0;
    double magnitude = 0.0;
    double prominence = 0.0;   // magnitude over the median of |D| on the scan
};

struct PeakOptions {
    double prominence_ratio = 4.0;
    int samples_per_width = 8;
    int threads = 0;
};

/// Local maxima of |D(t)|, D(t) = Σ_j mult_j w(λ_j) e^{iλ_j t}, with a Gaussian window w of
/// width min(1/smoothing, λ_max/6). Refuses uncertified spectra.
std::vector<Peak> length_spectrum_peaks(const Spectrum& spectrum, double t_lo, double t_hi, double smoothing,
                                        const PeakOptions& options = {});

} // namespace weylscope::trace
