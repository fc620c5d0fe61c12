#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace weylscope::geometry {

using Vec2 = Eigen::Vector2d;

/// One Fourier mode a·cos(kθ) + b·sin(kθ) of a support function.
struct Harmonic {
    int k = 0;
    double a = 0.0;
    double b = 0.0;
};

enum class DomainKind { disk, ellipse, constant_width, generic_support };

/// Smooth convex planar domain, described through its support function
/// h(θ) = max over the body of ⟨x, (cos θ, sin θ)⟩ after the center shift.
struct DomainSpec {
    DomainKind kind = DomainKind::disk;
    double radius = 1.0;          // disk
    double semi_major = 1.0;      // ellipse, along x
    double semi_minor = 1.0;      // ellipse, along y
    double h0 = 0.5;              // constant term (constant_width, generic_support)
    std::vector<Harmonic> harmonics;
    Vec2 center = Vec2::Zero();

    static DomainSpec disk(double radius);
    static DomainSpec ellipse(double semi_major, double semi_minor);
    static DomainSpec constant_width(double half_width, std::vector<Harmonic> odd_harmonics);
    static DomainSpec generic_support(double h0, std::vector<Harmonic> harmonics);
};

/// h and its first three θ-derivatives.
struct SupportJet {
    double h = 0.0;
    double dh = 0.0;
    double d2h = 0.0;
    double d3h = 0.0;
};

struct BoundaryPoint {
    double s = 0.0;          // arclength from the θ = 0 point, counter-clockwise
    double theta = 0.0;      // support angle (direction of the outward normal)
    Vec2 position;
    Vec2 tangent;            // unit, counter-clockwise
    Vec2 normal;             // unit, outward
    double curvature = 0.0;  // 1 / (h + h'')
};

/// Immutable tabulation of a convex boundary. Internally parameterized by the
/// support angle θ; arclength is obtained from a per-panel Gauss–Legendre table.
class BoundaryCurve {
public:
    BoundaryCurve(DomainSpec spec, int resolution);

    const DomainSpec& spec() const { return spec_; }
    int size() const { return static_cast<int>(theta_.size()); }

    double perimeter() const { return perimeter_; }
    double area() const { return area_; }
    std::optional<double> width() const { return width_; }
    double max_radius() const { return max_radius_; }
    double min_radius() const { return min_radius_; }

    // Nodes are equispaced in θ. weight_i integrates f ds with the periodic trapezoid rule.
    std::span<const double> node_theta() const { return theta_; }
    std::span<const double> node_s() const { return s_; }
    std::span<const double> node_weight() const { return weight_; }
    std::span<const double> node_curvature() const { return curvature_; }
    std::span<const double> node_rellich_weight() const { return rellich_; }
    std::span<const Vec2> node_position() const { return position_; }
    std::span<const Vec2> node_tangent() const { return tangent_; }
    std::span<const Vec2> node_normal() const { return normal_; }

    SupportJet support(double theta) const;
    double curvature_radius(double theta) const;
    /// d(curvature radius)/dθ
    double curvature_radius_derivative(double theta) const;
    Vec2 position(double theta) const;
    BoundaryPoint at_theta(double theta) const;

    /// Arclength of the point with support angle θ; continuous in θ, s(θ + 2π) = s(θ) + L.
    double arclength_at(double theta) const;
    /// Support angle in [0, 2π) of the point at arclength s (reduced mod L).
    double theta_at(double s) const;

private:
    double panel_integral(double from, double to) const;

    DomainSpec spec_;
    std::vector<double> theta_, s_, weight_, curvature_, rellich_;
    std::vector<Vec2> position_, tangent_, normal_;
    double perimeter_ = 0.0;
    double area_ = 0.0;
    double max_radius_ = 0.0;
    double min_radius_ = 0.0;
    std::optional<double> width_;
};

/// Validates the spec (convexity, star-shapedness about the origin) and tabulates it.
BoundaryCurve build_domain(const DomainSpec& spec, int resolution = 256);

BoundaryPoint boundary_point(const BoundaryCurve& curve, double s);

/// F(q) = ⟨q, ν_q⟩ at arclength s.
double rellich_weight(const BoundaryCurve& curve, double s);

struct AreaPerimeter {
    double area = 0.0;
    double perimeter = 0.0;
};

/// Adaptive (doubling) periodic quadrature to relative accuracy 1e-10 or better.
AreaPerimeter area_perimeter(const BoundaryCurve& curve);

struct WidthProfile {
    double min_width = 0.0;
    double max_width = 0.0;
};

WidthProfile width_profile(const BoundaryCurve& curve);

/// Node count giving at least 16 samples per wavelength up to lambda_max.
int spectral_resolution(double lambda_max, double perimeter);

// ---------------------------------------------------------------------------
// n-dimensional comparison domains

enum class HigherKind { ball, box };

struct HigherDomainSpec {
    HigherKind kind = HigherKind::ball;
    int dimension = 3;
    double radius = 1.0;          // ball
    std::vector<double> sides;    // box

    static HigherDomainSpec ball(int dimension, double radius);
    static HigherDomainSpec box(std::vector<double> sides);
};

void validate(const HigherDomainSpec& spec);
double volume(const HigherDomainSpec& spec);
double boundary_volume(const HigherDomainSpec& spec);
/// ∫_{∂Ω} H with H the mean of the principal curvatures; empty for boxes.
std::optional<double> total_mean_curvature(const HigherDomainSpec& spec);

/// Area of the unit sphere S^{n-1} ⊂ R^n.
double unit_sphere_area(int n);

} // namespace weylscope::geometry
