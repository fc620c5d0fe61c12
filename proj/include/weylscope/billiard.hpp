#pragma once

#include "weylscope/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace weylscope::billiard {

using geometry::BoundaryCurve;
using Matrix2 = Eigen::Matrix2d;

/// Point of the open co-ball bundle: arclength s and tangential momentum η, |η| < 1.
/// η is the component of the unit outgoing velocity along the counter-clockwise tangent.
struct PhasePoint {
    double s = 0.0;
    double eta = 0.0;
};

/// Inputs with |η| > 1 − glancing_guard are refused.
inline constexpr double glancing_guard = 1e-9;

struct Bounce {
    PhasePoint next;
    double chord = 0.0;   // first impact time
};

/// Same map in support-angle coordinates; `theta` is unreduced, in (θ₀, θ₀ + 2π).
struct ThetaBounce {
    double theta = 0.0;
    double eta = 0.0;
    double chord = 0.0;
};

ThetaBounce bounce_from_theta(const BoundaryCurve& curve, double theta, double eta);

/// Single-bounce Jacobian ∂(s₁, η₁)/∂(s₀, η₀).
Matrix2 bounce_jacobian(const BoundaryCurve& curve, double theta0, double eta0, const ThetaBounce& hit);

Bounce billiard_map(const BoundaryCurve& curve, PhasePoint p);

/// Jacobian of β^k in (s, η), chained from the analytic per-bounce differentials.
Matrix2 billiard_map_differential(const BoundaryCurve& curve, PhasePoint p, int k);

// ---------------------------------------------------------------------------
// Periodic orbits

enum class FamilyKind { isolated, one_parameter };

struct PeriodicOrbit {
    std::vector<double> vertex_theta;   // increasing, spans 2π·winding
    std::vector<PhasePoint> phase;      // (s_i, η_i) at every vertex
    double length = 0.0;
};

/// A family Λ_T of periodic orbits with common length T.
struct OrbitFamily {
    int bounces = 0;
    int winding = 0;
    double length = 0.0;
    int dimension = 0;   // 0 isolated, 1 one-parameter (planar)
    FamilyKind kind = FamilyKind::isolated;
    int iterate = 1;     // r-fold traversal of a primitive orbit
    std::vector<PeriodicOrbit> representatives;
};

struct OrbitSearchOptions {
    int starts = 64;
    std::uint64_t seed = 0;
    int representatives = 8;
    int continuation_steps = 256;
    double family_eigen_tol = 1e-6;   // relative Hessian eigenvalue marking a family
    double merge_tol = 1e-7;          // vertex arclength coincidence
};

struct OrbitSearchStats {
    int starts = 0;
    int converged = 0;
};

/// Critical points of the Birkhoff length functional with `bounces` vertices and
/// winding `winding` (coprime, 1 ≤ winding ≤ bounces/2), merged into families.
std::vector<OrbitFamily> find_periodic_orbits(const BoundaryCurve& curve, int bounces, int winding,
                                              const OrbitSearchOptions& options = {},
                                              OrbitSearchStats* stats = nullptr);

/// For a one-parameter family, the orbit of the family having a vertex at each support angle.
/// Returns the phase point of that vertex.
std::vector<PhasePoint> family_section(const BoundaryCurve& curve, const OrbitFamily& family,
                                       std::span<const double> thetas);

struct SweepOptions {
    int max_bounces = 24;
    bool include_iterates = true;
    OrbitSearchOptions search;
};

struct LengthSpectrum {
    std::vector<OrbitFamily> entries;   // sorted by length
    double max_length = 0.0;            // lengths are collected in [0, max_length)
    bool incomplete = false;            // (k, m) cap reached before the pruning bound
    std::vector<double> distinct_lengths(double tol = 1e-9) const;
};

LengthSpectrum length_spectrum(const BoundaryCurve& curve, double max_length, const SweepOptions& options = {});

// ---------------------------------------------------------------------------
// Admissibility

struct AdmissibilityReport {
    double isolation_gap = 0.0;
    std::vector<int> kernel_dimensions;
    std::vector<Matrix2> monodromy;   // dβ^k at each representative
    double glancing_margin = 0.0;
    bool isolated = false;
    bool clean = false;
    bool non_glancing = false;

    bool admissible() const { return isolated && clean && non_glancing; }
};

/// dim ker(M − I), counting singular values below tol·max(1, ‖M‖).
int fixed_subspace_dimension(const Matrix2& monodromy, double tol = 1e-6);

AdmissibilityReport admissibility_check(const BoundaryCurve& curve, const OrbitFamily& family,
                                        const LengthSpectrum& spectrum, double epsilon_search);

} // namespace weylscope::billiard
