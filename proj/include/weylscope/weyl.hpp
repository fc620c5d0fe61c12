#pragma once

#include "weylscope/geometry.hpp"
#include "weylscope/spectra.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace weylscope::weyl {

using spectra::BoundaryCondition;
using spectra::Spectrum;

/// Coefficients of the two-term law N(λ) ≈ c_n·vol·λⁿ ± c′_n·vol(∂Ω)·λ^{n−1}.
struct WeylContext {
    int dimension = 2;
    double volume = 0.0;
    double boundary_volume = 0.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    std::optional<double> total_mean_curvature;
    double scalar_curvature_integral = 0.0;   // flat domains

    /// +1 Neumann, −1 Dirichlet.
    double sign() const { return bc == BoundaryCondition::neumann ? 1.0 : -1.0; }
    double leading() const;    // c_n·vol
    double boundary() const;   // ±c′_n·vol(∂Ω)
    double main_term(double lambda) const;
};

/// c_n = ω_n/(2π)^n, the volume term.
double volume_coefficient(int n);
/// c′_n = ω_{n−1}/(4(2π)^{n−1}), the boundary term.
double boundary_coefficient(int n);

WeylContext planar_context(const geometry::BoundaryCurve& curve, BoundaryCondition bc);
WeylContext higher_context(const geometry::HigherDomainSpec& spec, BoundaryCondition bc);

/// Cumulative view of a spectrum for repeated counting.
class CountingFunction {
public:
    explicit CountingFunction(const Spectrum& spectrum);

    /// N(λ) = #{λ_j ≤ λ} with multiplicity.
    std::int64_t operator()(double lambda) const;
    const Spectrum& spectrum() const { return *spectrum_; }

private:
    const Spectrum* spectrum_;
    std::vector<std::int64_t> cumulative_;
};

std::int64_t counting_function(const Spectrum& spectrum, double lambda);

/// R(λ) = N(λ) − main term.
double weyl_remainder(const Spectrum& spectrum, const WeylContext& ctx, double lambda);

struct RemainderSeries {
    std::vector<double> lambda;
    std::vector<std::int64_t> count;
    std::vector<double> main_term;
    std::vector<double> remainder;
    std::uint64_t spectrum_hash = 0;
    WeylContext context;
};

RemainderSeries remainder_series(const Spectrum& spectrum, const WeylContext& ctx, std::span<const double> grid);

/// (1/λ)∫_λ^{2λ}|R(τ)|dτ, integrated exactly between eigenvalues.
double dyadic_average(const Spectrum& spectrum, const WeylContext& ctx, double lambda);

/// Geometric window centres first·ratioᵏ up to last.
std::vector<double> dyadic_windows(double first, double last, double ratio = 1.5);

struct FitPoint {
    double lambda = 0.0;
    double value = 0.0;
};

struct ExponentFit {
    double alpha = 0.0;
    double intercept = 0.0;     // natural log of the prefactor
    double half_width = 0.0;    // one standard error of the slope
    double weighted_alpha = 0.0;
    double weighted_half_width = 0.0;
    int points = 0;
};

/// Least-squares slope of log(value) against log(λ).
ExponentFit exponent_fit(std::span<const FitPoint> points);

struct ThirdTerm {
    double scalar_curvature_integral = 0.0;
    std::optional<double> mean_curvature_integral;
    int predicted_order = 0;
    bool polyhedral = false;
    /// ∫𝒦 + 2n∫H ≠ 0; polyhedra are admitted by the order statement alone.
    bool nonvanishing = false;
};

ThirdTerm third_term_coefficients(const geometry::HigherDomainSpec& spec);

}  // namespace weylscope::weyl
