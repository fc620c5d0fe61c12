#pragma once

#include "weylscope/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weylscope::spectra {

enum class BoundaryCondition { dirichlet, neumann };
enum class Certificate { exact, weyl_corridor_checked, unchecked };

std::string to_string(BoundaryCondition bc);
std::string to_string(Certificate c);
BoundaryCondition parse_boundary_condition(const std::string& text);
Certificate parse_certificate(const std::string& text);

/// λ is a frequency: the square root of the Laplace eigenvalue.
struct Level {
    double lambda = 0.0;
    int multiplicity = 1;
};

struct Spectrum {
    std::vector<Level> levels;   // strictly increasing λ
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    std::string generator;
    double lambda_max = 0.0;     // every eigenvalue ≤ lambda_max is listed
    double lambda_min = 0.0;     // and none below lambda_min is claimed
    Certificate certificate = Certificate::unchecked;

    std::int64_t total_multiplicity() const;
};

/// Content hash over λ bits, multiplicities, bc and λ_max.
std::uint64_t spectrum_hash(const Spectrum& spectrum);

/// Dimension of degree-l spherical harmonics on S^{n−1}.
std::int64_t harmonic_dimension(int l, int n);

Spectrum disk_spectrum(double radius, double lambda_max, BoundaryCondition bc);
Spectrum ball_spectrum(int dimension, double radius, double lambda_max, BoundaryCondition bc);
Spectrum box_spectrum(const std::vector<double>& sides, double lambda_max, BoundaryCondition bc);

/// Dispatches on the comparison-domain kind.
Spectrum closed_form_spectrum(const geometry::HigherDomainSpec& spec, double lambda_max, BoundaryCondition bc);

// ---------------------------------------------------------------------------
// Boundary traces

/// One eigenfunction sampled at the boundary-curve nodes, before normalization.
/// Dirichlet traces carry ∂_νφ, Neumann traces carry φ and ∂_Tφ.
struct BoundaryTrace {
    double lambda = 0.0;
    std::vector<double> normal_derivative;
    std::vector<double> value;
    std::vector<double> tangential_derivative;
    double interior_norm = 0.0;   // ‖φ‖_{L²(Ω)}; nonpositive means unknown
};

struct EigenBoundaryData {
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    std::vector<double> s;        // arclength of each sample (curve nodes)
    std::vector<BoundaryTrace> modes;

    /// u^b = (1/λ)∂_νφ/‖φ‖ (Dirichlet) or φ/‖φ‖ (Neumann) for mode i.
    std::vector<double> normalized_trace(std::size_t i) const;
};

/// Closed-form modes J_m(λr)cos(mφ), J_m(λr)sin(mφ) of a centered disk, smallest `count` of them.
/// Norms use ∫₀^R J_m(λr)²r dr in closed form.
EigenBoundaryData disk_modes(const geometry::BoundaryCurve& disk, BoundaryCondition bc, int count);

struct RellichResidual {
    double lambda = 0.0;
    double integral = 0.0;    // should equal 2
    double residual = 0.0;    // |integral − 2|
    double allowance = 0.0;   // O(1/λ) remainder allowance (Neumann only)
};

std::vector<RellichResidual> rellich_check(const geometry::BoundaryCurve& curve, const EigenBoundaryData& data,
                                           BoundaryCondition bc);

// ---------------------------------------------------------------------------
// Method of particular solutions

struct MpsOptions {
    double lambda_cap = 80.0;            // refuse windows above this
    int extra_orders = 16;               // m_max = ⌈λ r_max⌉ + extra_orders
    int max_extra_orders = 112;          // retry ceiling when a subwindow looks basis-deficient
    double points_per_wavelength = 12.0;
    double max_grid_step = 0.01;
    double refine_tol = 1e-11;
    double accept_sigma = 1e-6;          // minima below this are eigenvalues
    double reject_sigma = 1e-2;          // minima in [accept, reject) signal a deficient basis
    double multiplicity_factor = 10.0;
    double subwindow = 4.0;              // basis size is fixed within each subwindow
    bool boundary_data = true;
    bool check_corridor = true;
};

struct MpsResult {
    Spectrum spectrum;
    EigenBoundaryData data;              // sampled at the curve nodes
    std::vector<double> sigma;           // σ₁ at each located level
    int grid_points = 0;
};

/// Smallest subspace angle σ₁(λ) between boundary-condition-satisfying functions and the basis span.
double mps_sigma(const geometry::BoundaryCurve& curve, double lambda, BoundaryCondition bc,
                 const MpsOptions& options = {});

MpsResult mps_spectrum(const geometry::BoundaryCurve& curve, double lambda_lo, double lambda_hi,
                       BoundaryCondition bc, const MpsOptions& options = {});

/// Two-term Weyl count for a planar domain.
double planar_weyl_count(double area, double perimeter, double lambda, BoundaryCondition bc);

/// |N(λ_j) − W(λ_j)| must stay within this band for an MPS spectrum to be certified.
double weyl_corridor_halfwidth(double lambda);

/// Throws MissedEigenvalueSuspicion if the count leaves the corridor.
void check_weyl_corridor(const Spectrum& spectrum, double area, double perimeter);

// ---------------------------------------------------------------------------
// Persistence

/// Writes <stem>.csv (lambda, multiplicity) and <stem>.json (generator, bc, lambda_max, ...).
void write_spectrum(const Spectrum& spectrum, const std::filesystem::path& stem);
Spectrum read_spectrum(const std::filesystem::path& stem);

/// One CSV per mode: (s, u_b_real) for the normalized trace.
void write_boundary_data(const EigenBoundaryData& data, const std::filesystem::path& directory);

}  // namespace weylscope::spectra
