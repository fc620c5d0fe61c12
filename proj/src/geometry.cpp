#include "weylscope/geometry.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace weylscope::geometry {

using numerics::two_pi;

namespace {

const numerics::GaussRule& panel_rule() {
    static const numerics::GaussRule rule = numerics::gauss_legendre(16);
    return rule;
}

void add_harmonic(SupportJet& jet, int k, double a, double b, double theta) {
    const double c = std::cos(k * theta);
    const double s = std::sin(k * theta);
    const double kk = static_cast<double>(k);
    jet.h += a * c + b * s;
    jet.dh += kk * (-a * s + b * c);
    jet.d2h += -kk * kk * (a * c + b * s);
    jet.d3h += kk * kk * kk * (a * s - b * c);
}

SupportJet evaluate_support(const DomainSpec& spec, double theta) {
    SupportJet jet;
    switch (spec.kind) {
    case DomainKind::disk:
        jet.h = spec.radius;
        break;
    case DomainKind::ellipse: {
        // h² = g = (a²+b²)/2 + (a²−b²)/2 cos 2θ
        const double a2 = spec.semi_major * spec.semi_major;
        const double b2 = spec.semi_minor * spec.semi_minor;
        const double c2 = std::cos(2 * theta), s2 = std::sin(2 * theta);
        const double g = 0.5 * (a2 + b2) + 0.5 * (a2 - b2) * c2;
        const double g1 = -(a2 - b2) * s2;
        const double g2 = -2.0 * (a2 - b2) * c2;
        const double g3 = 4.0 * (a2 - b2) * s2;
        const double h = std::sqrt(g);
        const double h1 = g1 / (2.0 * h);
        const double h2 = (0.5 * g2 - h1 * h1) / h;
        const double h3 = (0.5 * g3 - 3.0 * h1 * h2) / h;
        jet = {h, h1, h2, h3};
        break;
    }
    case DomainKind::constant_width:
    case DomainKind::generic_support:
        jet.h = spec.h0;
        for (const auto& mode : spec.harmonics) add_harmonic(jet, mode.k, mode.a, mode.b, theta);
        break;
    }
    add_harmonic(jet, 1, spec.center.x(), spec.center.y(), theta);
    return jet;
}

void check_spec(const DomainSpec& spec) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!spec.center.allFinite()) fail("center must be finite");
    switch (spec.kind) {
    case DomainKind::disk:
        if (!(spec.radius > 0)) fail("disk radius must be positive");
        break;
    case DomainKind::ellipse:
        if (!(spec.semi_minor > 0) || !(spec.semi_major >= spec.semi_minor))
            fail("ellipse requires a >= b > 0");
        break;
    case DomainKind::constant_width:
        if (!(spec.h0 > 0)) fail("constant-width half-width must be positive");
        for (const auto& mode : spec.harmonics)
            if (mode.k < 3 || mode.k % 2 == 0) fail("constant-width harmonics must be odd with k >= 3");
        break;
    case DomainKind::generic_support:
        if (!(spec.h0 > 0)) fail("support constant term must be positive");
        for (const auto& mode : spec.harmonics)
            if (mode.k < 1) fail("support harmonics require k >= 1");
        break;
    }
}

} // namespace

DomainSpec DomainSpec::disk(double radius) {
    DomainSpec spec;
    spec.kind = DomainKind::disk;
    spec.radius = radius;
    return spec;
}

DomainSpec DomainSpec::ellipse(double semi_major, double semi_minor) {
    DomainSpec spec;
    spec.kind = DomainKind::ellipse;
    spec.semi_major = semi_major;
    spec.semi_minor = semi_minor;
    return spec;
}

DomainSpec DomainSpec::constant_width(double half_width, std::vector<Harmonic> odd_harmonics) {
    DomainSpec spec;
    spec.kind = DomainKind::constant_width;
    spec.h0 = half_width;
    spec.harmonics = std::move(odd_harmonics);
    return spec;
}

DomainSpec DomainSpec::generic_support(double h0, std::vector<Harmonic> harmonics) {
    DomainSpec spec;
    spec.kind = DomainKind::generic_support;
    spec.h0 = h0;
    spec.harmonics = std::move(harmonics);
    return spec;
}

BoundaryCurve::BoundaryCurve(DomainSpec spec, int resolution) : spec_(std::move(spec)) {
    const int n = resolution;
    theta_.resize(n);
    s_.resize(n);
    weight_.resize(n);
    curvature_.resize(n);
    rellich_.resize(n);
    position_.resize(n);
    tangent_.resize(n);
    normal_.resize(n);

    const double step = two_pi / n;
    double s = 0.0;
    double area2 = 0.0;
    max_radius_ = 0.0;
    min_radius_ = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double theta = i * step;
        const BoundaryPoint p = at_theta(theta);
        theta_[i] = theta;
        s_[i] = s;
        const double rho = curvature_radius(theta);
        weight_[i] = rho * step;
        curvature_[i] = p.curvature;
        position_[i] = p.position;
        tangent_[i] = p.tangent;
        normal_[i] = p.normal;
        rellich_[i] = p.position.dot(p.normal);
        area2 += rellich_[i] * weight_[i];
        max_radius_ = std::max(max_radius_, p.position.norm());
        min_radius_ = std::min(min_radius_, p.position.norm());
        s += panel_integral(theta, theta + step);
    }
    perimeter_ = s;
    area_ = 0.5 * area2;
    if (spec_.kind == DomainKind::constant_width) width_ = 2.0 * spec_.h0;
    if (spec_.kind == DomainKind::disk) width_ = 2.0 * spec_.radius;
}

SupportJet BoundaryCurve::support(double theta) const { return evaluate_support(spec_, theta); }

double BoundaryCurve::curvature_radius(double theta) const {
    const SupportJet jet = support(theta);
    return jet.h + jet.d2h;
}

double BoundaryCurve::curvature_radius_derivative(double theta) const {
    const SupportJet jet = support(theta);
    return jet.dh + jet.d3h;
}

Vec2 BoundaryCurve::position(double theta) const {
    const SupportJet jet = support(theta);
    const double c = std::cos(theta), s = std::sin(theta);
    return Vec2(jet.h * c - jet.dh * s, jet.h * s + jet.dh * c);
}

BoundaryPoint BoundaryCurve::at_theta(double theta) const {
    const SupportJet jet = support(theta);
    const double c = std::cos(theta), s = std::sin(theta);
    BoundaryPoint p;
    p.theta = theta;
    p.normal = Vec2(c, s);
    p.tangent = Vec2(-s, c);
    p.position = jet.h * p.normal + jet.dh * p.tangent;
    p.curvature = 1.0 / (jet.h + jet.d2h);
    p.s = s_.empty() ? 0.0 : arclength_at(theta);
    return p;
}

double BoundaryCurve::panel_integral(double from, double to) const {
    return numerics::integrate(panel_rule(), from, to, [this](double t) { return curvature_radius(t); });
}

double BoundaryCurve::arclength_at(double theta) const {
    const int n = size();
    const double step = two_pi / n;
    const double turns = std::floor(theta / two_pi);
    const double reduced = theta - turns * two_pi;
    int panel = std::clamp(static_cast<int>(reduced / step), 0, n - 1);
    const double start = panel * step;
    return turns * perimeter_ + s_[panel] + panel_integral(start, reduced);
}

double BoundaryCurve::theta_at(double s) const {
    double reduced = std::fmod(s, perimeter_);
    if (reduced < 0) reduced += perimeter_;
    const auto it = std::upper_bound(s_.begin(), s_.end(), reduced);
    const int panel = static_cast<int>(std::distance(s_.begin(), it)) - 1;
    const double step = two_pi / size();
    double theta = theta_[panel] + (reduced - s_[panel]) / curvature_radius(theta_[panel]);
    for (int it2 = 0; it2 < 50; ++it2) {
        const double residual = arclength_at(theta) - reduced;
        const double delta = residual / curvature_radius(theta);
        theta -= delta;
        theta = std::clamp(theta, theta_[panel] - step, theta_[panel] + 2 * step);
        if (std::abs(delta) < 1e-15) break;
    }
    return numerics::wrap_two_pi(theta);
}

BoundaryCurve build_domain(const DomainSpec& spec, int resolution) {
    if (resolution < 64) throw Error(ErrorCode::InvalidArgument, "resolution must be at least 64");
    check_spec(spec);

    // Convexity and star-shapedness on a grid 8x finer than the nodes.
    const int dense = 8 * resolution;
    double scale = 0.0;
    for (int i = 0; i < dense; ++i) scale = std::max(scale, std::abs(evaluate_support(spec, two_pi * i / dense).h));
    for (int i = 0; i < dense; ++i) {
        const double theta = two_pi * i / dense;
        const SupportJet jet = evaluate_support(spec, theta);
        if (jet.h + jet.d2h <= 1e-12 * scale)
            throw Error(ErrorCode::NonConvex, "curvature radius h + h'' = " + std::to_string(jet.h + jet.d2h) +
                                                  " at theta = " + std::to_string(theta));
    }
    BoundaryCurve curve(spec, resolution);
    const auto rellich = curve.node_rellich_weight();
    for (int i = 0; i < curve.size(); ++i) {
        if (rellich[i] <= 1e-8)
            throw Error(ErrorCode::NotStarShaped, "<q, nu> = " + std::to_string(rellich[i]) + " at node " +
                                                      std::to_string(i));
    }
    return curve;
}

BoundaryPoint boundary_point(const BoundaryCurve& curve, double s) {
    BoundaryPoint p = curve.at_theta(curve.theta_at(s));
    double reduced = std::fmod(s, curve.perimeter());
    if (reduced < 0) reduced += curve.perimeter();
    p.s = reduced;
    return p;
}

double rellich_weight(const BoundaryCurve& curve, double s) {
    const BoundaryPoint p = boundary_point(curve, s);
    return p.position.dot(p.normal);
}

AreaPerimeter area_perimeter(const BoundaryCurve& curve) {
    auto trapezoid = [&curve](int n) {
        AreaPerimeter out;
        const double step = two_pi / n;
        for (int i = 0; i < n; ++i) {
            const double theta = i * step;
            const SupportJet jet = curve.support(theta);
            const double rho = jet.h + jet.d2h;
            out.perimeter += rho * step;
            out.area += 0.5 * jet.h * rho * step;
        }
        return out;
    };
    AreaPerimeter previous = trapezoid(64);
    for (int n = 128; n <= (1 << 22); n *= 2) {
        const AreaPerimeter current = trapezoid(n);
        const bool converged = std::abs(current.area - previous.area) <= 1e-13 * std::abs(current.area) &&
                               std::abs(current.perimeter - previous.perimeter) <= 1e-13 * current.perimeter;
        previous = current;
        if (converged) {
            if (const auto w = curve.width(); w && curve.spec().kind == DomainKind::constant_width) {
                if (std::abs(current.perimeter - numerics::pi * *w) > 1e-9)
                    throw Error(ErrorCode::QuadratureFailure, "perimeter differs from pi * width");
            }
            return current;
        }
    }
    throw Error(ErrorCode::QuadratureFailure, "area/perimeter quadrature did not reach tolerance");
}

WidthProfile width_profile(const BoundaryCurve& curve) {
    auto width = [&curve](double theta) {
        return curve.support(theta).h + curve.support(theta + numerics::pi).h;
    };
    const int samples = 4 * curve.size();
    const double step = numerics::pi / samples;
    int imin = 0, imax = 0;
    std::vector<double> values(samples);
    for (int i = 0; i < samples; ++i) {
        values[i] = width(i * step);
        if (values[i] < values[imin]) imin = i;
        if (values[i] > values[imax]) imax = i;
    }
    const auto lo = numerics::golden_section(width, (imin - 1) * step, (imin + 1) * step, 1e-12);
    const auto hi = numerics::golden_section([&](double t) { return -width(t); }, (imax - 1) * step,
                                             (imax + 1) * step, 1e-12);
    return {std::min(lo.value, values[imin]), std::max(-hi.value, values[imax])};
}

int spectral_resolution(double lambda_max, double perimeter) {
    const double wavelengths = std::ceil(lambda_max * perimeter / two_pi);
    return std::max(256, static_cast<int>(16.0 * wavelengths));
}

// ---------------------------------------------------------------------------

HigherDomainSpec HigherDomainSpec::ball(int dimension, double radius) {
    HigherDomainSpec spec;
    spec.kind = HigherKind::ball;
    spec.dimension = dimension;
    spec.radius = radius;
    return spec;
}

HigherDomainSpec HigherDomainSpec::box(std::vector<double> sides) {
    HigherDomainSpec spec;
    spec.kind = HigherKind::box;
    spec.dimension = static_cast<int>(sides.size());
    spec.sides = std::move(sides);
    return spec;
}

void validate(const HigherDomainSpec& spec) {
    if (spec.dimension < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
    if (spec.kind == HigherKind::ball && !(spec.radius > 0))
        throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    if (spec.kind == HigherKind::box) {
        if (static_cast<int>(spec.sides.size()) != spec.dimension)
            throw Error(ErrorCode::InvalidArgument, "box needs one side length per dimension");
        for (double side : spec.sides)
            if (!(side > 0)) throw Error(ErrorCode::InvalidArgument, "box sides must be positive");
    }
}

double unit_sphere_area(int n) {
    return 2.0 * std::pow(numerics::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double volume(const HigherDomainSpec& spec) {
    validate(spec);
    if (spec.kind == HigherKind::ball)
        return std::pow(numerics::pi, 0.5 * spec.dimension) / std::tgamma(0.5 * spec.dimension + 1.0) *
               std::pow(spec.radius, spec.dimension);
    double v = 1.0;
    for (double side : spec.sides) v *= side;
    return v;
}

double boundary_volume(const HigherDomainSpec& spec) {
    validate(spec);
    if (spec.kind == HigherKind::ball)
        return unit_sphere_area(spec.dimension) * std::pow(spec.radius, spec.dimension - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.sides.size(); ++i) {
        double face = 1.0;
        for (std::size_t j = 0; j < spec.sides.size(); ++j)
            if (j != i) face *= spec.sides[j];
        total += 2.0 * face;
    }
    return total;
}

std::optional<double> total_mean_curvature(const HigherDomainSpec& spec) {
    validate(spec);
    if (spec.kind == HigherKind::box) return std::nullopt;
    return unit_sphere_area(spec.dimension) * std::pow(spec.radius, spec.dimension - 2);
}

} // namespace weylscope::geometry
