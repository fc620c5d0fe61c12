#include "weylscope/billiard.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace weylscope::billiard {

using geometry::Vec2;
using numerics::two_pi;

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec2 tangent_at(double theta) { return Vec2(-std::sin(theta), std::cos(theta)); }

double reduce_s(const BoundaryCurve& curve, double s) {
    double r = std::fmod(s, curve.perimeter());
    if (r < 0) r += curve.perimeter();
    return r;
}

} // namespace

ThetaBounce bounce_from_theta(const BoundaryCurve& curve, double theta0, double eta) {
    if (!(std::abs(eta) <= 1.0 - glancing_guard))
        throw Error(ErrorCode::GlancingInput, "|eta| = " + std::to_string(std::abs(eta)) + " too close to 1");
    const double c0 = std::sqrt(1.0 - eta * eta);
    const Vec2 q0 = curve.position(theta0);
    const Vec2 inward(-std::cos(theta0), -std::sin(theta0));
    const Vec2 v = eta * tangent_at(theta0) + c0 * inward;

    // Signed side of the boundary point relative to the ray: negative on the
    // forward arc (θ₀, θ₁), positive on (θ₁, θ₀ + 2π). Convexity gives one crossing.
    auto side = [&](double theta) { return cross(v, curve.position(theta) - q0); };
    auto side_derivative = [&](double theta) { return curve.curvature_radius(theta) * cross(v, tangent_at(theta)); };

    double lo = theta0, hi = theta0 + two_pi;
    double x = theta0 + 2.0 * std::acos(std::clamp(eta, -1.0, 1.0));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        const double g = side(x);
        if (g < 0) lo = x; else hi = x;
        const double dg = side_derivative(x);
        double next = dg != 0.0 ? x - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step < 1e-14 * (1.0 + std::abs(x)) || hi - lo < 4e-15 * (1.0 + std::abs(x))) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(ErrorCode::IntersectionFailure, "forward boundary intersection did not converge");

    ThetaBounce hit;
    hit.theta = x;
    hit.chord = (curve.position(x) - q0).norm();
    hit.eta = v.dot(tangent_at(x));
    return hit;
}

Matrix2 bounce_jacobian(const BoundaryCurve& curve, double theta0, double eta0, const ThetaBounce& hit) {
    const double c0 = std::sqrt(1.0 - eta0 * eta0);
    const double c1 = std::sqrt(std::max(0.0, 1.0 - hit.eta * hit.eta));
    const double k0 = 1.0 / curve.curvature_radius(theta0);
    const double k1 = 1.0 / curve.curvature_radius(hit.theta);
    const double t = hit.chord;
    Matrix2 j;
    j(0, 0) = (t * k0 - c0) / c1;
    j(0, 1) = -t / (c0 * c1);
    j(1, 0) = c1 * k0 - k1 * (t * k0 - c0);
    j(1, 1) = (k1 * t - c1) / c0;
    return j;
}

Bounce billiard_map(const BoundaryCurve& curve, PhasePoint p) {
    const double theta0 = curve.theta_at(p.s);
    const ThetaBounce hit = bounce_from_theta(curve, theta0, p.eta);
    return {{reduce_s(curve, curve.arclength_at(hit.theta)), hit.eta}, hit.chord};
}

Matrix2 billiard_map_differential(const BoundaryCurve& curve, PhasePoint p, int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "iterate count must be positive");
    Matrix2 total = Matrix2::Identity();
    double theta = curve.theta_at(p.s);
    double eta = p.eta;
    for (int i = 0; i < k; ++i) {
        const ThetaBounce hit = bounce_from_theta(curve, theta, eta);
        total = bounce_jacobian(curve, theta, eta, hit) * total;
        theta = numerics::wrap_two_pi(hit.theta);
        eta = hit.eta;
    }
    return total;
}

// ---------------------------------------------------------------------------

int fixed_subspace_dimension(const Matrix2& monodromy, double tol) {
    const Matrix2 shifted = monodromy - Matrix2::Identity();
    const Eigen::JacobiSVD<Matrix2> svd(shifted);
    const double scale = std::max(1.0, monodromy.norm());
    int kernel = 0;
    for (int i = 0; i < 2; ++i)
        if (svd.singularValues()(i) < tol * scale) ++kernel;
    return kernel;
}

AdmissibilityReport admissibility_check(const BoundaryCurve& curve, const OrbitFamily& family,
                                        const LengthSpectrum& spectrum, double epsilon_search) {
    if (!(epsilon_search > 0)) throw Error(ErrorCode::InvalidArgument, "epsilon search radius must be positive");
    if (spectrum.max_length < family.length + epsilon_search)
        throw Error(ErrorCode::SpectrumTooShort, "length spectrum collected to " +
                                                     std::to_string(spectrum.max_length) + " < T + eps = " +
                                                     std::to_string(family.length + epsilon_search));
    AdmissibilityReport report;

    // (i) isolation: the family itself (and its time reversal) share T; anything else is foreign.
    double gap = epsilon_search;
    for (const auto& entry : spectrum.entries) {
        const bool same = entry.bounces == family.bounces && entry.winding == family.winding &&
                          entry.iterate == family.iterate &&
                          std::abs(entry.length - family.length) <= 1e-9 * std::max(1.0, family.length);
        if (same) continue;
        gap = std::min(gap, std::abs(entry.length - family.length));
    }
    report.isolation_gap = gap;
    report.isolated = gap > 1e-9;

    // (ii) cleanliness at every representative; (iii) distance from |η| = 1.
    const int k = family.bounces;
    double max_eta = 0.0;
    report.clean = !family.representatives.empty();
    for (const auto& orbit : family.representatives) {
        const Matrix2 m = billiard_map_differential(curve, orbit.phase.front(), k);
        const int kernel = fixed_subspace_dimension(m);
        report.monodromy.push_back(m);
        report.kernel_dimensions.push_back(kernel);
        if (kernel != family.dimension) report.clean = false;
        for (const auto& p : orbit.phase) max_eta = std::max(max_eta, std::abs(p.eta));
    }
    report.glancing_margin = 1.0 - max_eta;
    report.non_glancing = report.glancing_margin > 0.0;
    return report;
}

} // namespace weylscope::billiard
