#include "weylscope/spectra.hpp"

#include "weylscope/bessel.hpp"
#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace weylscope::spectra {

std::string to_string(BoundaryCondition bc) { return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann"; }

std::string to_string(Certificate c) {
    switch (c) {
    case Certificate::exact: return "exact";
    case Certificate::weyl_corridor_checked: return "weyl_corridor_checked";
    case Certificate::unchecked: return "unchecked";
    }
    return "unchecked";
}

BoundaryCondition parse_boundary_condition(const std::string& text) {
    if (text == "dirichlet" || text == "Dirichlet") return BoundaryCondition::dirichlet;
    if (text == "neumann" || text == "Neumann") return BoundaryCondition::neumann;
    throw Error(ErrorCode::InvalidArgument, "unknown boundary condition '" + text + "'");
}

Certificate parse_certificate(const std::string& text) {
    if (text == "exact") return Certificate::exact;
    if (text == "weyl_corridor_checked") return Certificate::weyl_corridor_checked;
    if (text == "unchecked") return Certificate::unchecked;
    throw Error(ErrorCode::InvalidArgument, "unknown certificate '" + text + "'");
}

std::int64_t Spectrum::total_multiplicity() const {
    std::int64_t n = 0;
    for (const auto& level : levels) n += level.multiplicity;
    return n;
}

std::uint64_t spectrum_hash(const Spectrum& spectrum) {
    std::string bytes;
    bytes.reserve(spectrum.levels.size() * 12 + 32);
    auto put = [&bytes](const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); };
    for (const auto& level : spectrum.levels) {
        put(&level.lambda, sizeof level.lambda);
        put(&level.multiplicity, sizeof level.multiplicity);
    }
    const int bc = static_cast<int>(spectrum.bc);
    put(&bc, sizeof bc);
    put(&spectrum.lambda_max, sizeof spectrum.lambda_max);
    put(&spectrum.lambda_min, sizeof spectrum.lambda_min);
    return numerics::fnv1a(bytes);
}

namespace {

std::int64_t binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < k) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Sorts (λ, multiplicity) pairs and merges coincident values.
std::vector<Level> merge_levels(std::vector<Level> raw, double rel_tol) {
    std::sort(raw.begin(), raw.end(), [](const Level& a, const Level& b) { return a.lambda < b.lambda; });
    std::vector<Level> out;
    for (const auto& level : raw) {
        if (!out.empty() && level.lambda - out.back().lambda <= rel_tol * std::max(1.0, level.lambda))
            out.back().multiplicity += level.multiplicity;
        else
            out.push_back(level);
    }
    return out;
}

void require_positive(double value, const char* what) {
    if (!(value > 0) || !std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}

} // namespace

std::int64_t harmonic_dimension(int l, int n) {
    if (l < 0 || n < 2) throw Error(ErrorCode::InvalidArgument, "harmonic dimension needs l >= 0, n >= 2");
    return binomial(l + n - 1, n - 1) - binomial(l + n - 3, n - 1);
}

Spectrum ball_spectrum(int dimension, double radius, double lambda_max, BoundaryCondition bc) {
    if (dimension < 2) throw Error(ErrorCode::InvalidArgument, "ball dimension must be at least 2");
    require_positive(radius, "radius");
    require_positive(lambda_max, "lambda_max");
    const auto condition =
        bc == BoundaryCondition::dirichlet ? bessel::RadialCondition::dirichlet : bessel::RadialCondition::neumann;
    const double x_max = lambda_max * radius;
    std::vector<Level> raw;
    if (bc == BoundaryCondition::neumann) raw.push_back({0.0, 1});
    for (int l = 0;; ++l) {
        if (std::sqrt(static_cast<double>(l) * (l + dimension - 2)) >= x_max) break;
        const auto zeros = bessel::radial_zeros(l, dimension, condition, x_max);
        if (zeros.empty() && l > 0 && l + 0.5 * dimension - 1.0 > x_max) break;
        const int mult = static_cast<int>(harmonic_dimension(l, dimension));
        for (double z : zeros) raw.push_back({z / radius, mult});
    }
    Spectrum s;
    s.levels = merge_levels(std::move(raw), 1e-12);
    s.bc = bc;
    s.generator = dimension == 2 ? "disk_bessel" : "ball_bessel";
    s.lambda_max = lambda_max;
    s.certificate = Certificate::exact;
    return s;
}

Spectrum disk_spectrum(double radius, double lambda_max, BoundaryCondition bc) {
    return ball_spectrum(2, radius, lambda_max, bc);
}

Spectrum box_spectrum(const std::vector<double>& sides, double lambda_max, BoundaryCondition bc) {
    if (sides.empty()) throw Error(ErrorCode::InvalidArgument, "box needs at least one side");
    for (double side : sides) require_positive(side, "box side");
    require_positive(lambda_max, "lambda_max");
    const int start = bc == BoundaryCondition::dirichlet ? 1 : 0;
    const double cap = lambda_max * lambda_max * (1.0 + 1e-14);
    std::vector<double> squares;
    const std::size_t n = sides.size();
    // remaining[i] = smallest contribution from axes i..n−1
    std::vector<double> floor_rest(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        const double k = numerics::pi * start / sides[i];
        floor_rest[i] = floor_rest[i + 1] + k * k;
    }
    std::function<void(std::size_t, double)> recurse = [&](std::size_t axis, double partial) {
        if (axis == n) {
            squares.push_back(partial);
            return;
        }
        for (int m = start;; ++m) {
            const double k = numerics::pi * m / sides[axis];
            const double next = partial + k * k;
            if (next + floor_rest[axis + 1] > cap) break;
            recurse(axis + 1, next);
        }
    };
    recurse(0, 0.0);
    std::sort(squares.begin(), squares.end());
    std::vector<Level> levels;
    for (double sq : squares) {
        const double lambda = std::sqrt(sq);
        if (!levels.empty() && lambda - levels.back().lambda <= 1e-12 * std::max(1.0, lambda))
            ++levels.back().multiplicity;
        else
            levels.push_back({lambda, 1});
    }
    Spectrum s;
    s.levels = std::move(levels);
    s.bc = bc;
    s.generator = "box_lattice";
    s.lambda_max = lambda_max;
    s.certificate = Certificate::exact;
    return s;
}

Spectrum closed_form_spectrum(const geometry::HigherDomainSpec& spec, double lambda_max, BoundaryCondition bc) {
    geometry::validate(spec);
    if (spec.kind == geometry::HigherKind::ball) return ball_spectrum(spec.dimension, spec.radius, lambda_max, bc);
    return box_spectrum(spec.sides, lambda_max, bc);
}

// ---------------------------------------------------------------------------

std::vector<double> EigenBoundaryData::normalized_trace(std::size_t i) const {
    const BoundaryTrace& mode = modes.at(i);
    if (!(mode.interior_norm > 0) || !std::isfinite(mode.interior_norm))
        throw Error(ErrorCode::MissingNormalization, "mode has no interior normalization");
    std::vector<double> out;
    if (bc == BoundaryCondition::dirichlet) {
        for (double d : mode.normal_derivative) out.push_back(d / (mode.lambda * mode.interior_norm));
    } else {
        for (double v : mode.value) out.push_back(v / mode.interior_norm);
    }
    return out;
}

EigenBoundaryData disk_modes(const geometry::BoundaryCurve& disk, BoundaryCondition bc, int count) {
    const auto& spec = disk.spec();
    if (spec.kind != geometry::DomainKind::disk || spec.center.norm() != 0.0)
        throw Error(ErrorCode::InvalidArgument, "closed-form modes need a centered disk");
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "mode count must be positive");
    const double radius = spec.radius;
    const auto condition =
        bc == BoundaryCondition::dirichlet ? bessel::RadialCondition::dirichlet : bessel::RadialCondition::neumann;

    struct Mode {
        double lambda;
        int m;
        bool sine;
    };
    std::vector<Mode> modes;
    // Enough candidates: the count-th eigenvalue lies below the Weyl estimate plus a margin.
    double x_max = 2.0 * std::sqrt(4.0 * count) + 10.0;
    for (int m = 0; m <= static_cast<int>(x_max) + 1; ++m) {
        for (double z : bessel::radial_zeros(m, 2, condition, x_max)) {
            modes.push_back({z / radius, m, false});
            if (m > 0) modes.push_back({z / radius, m, true});
        }
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.lambda < b.lambda; });
    if (static_cast<int>(modes.size()) < count) throw Error(ErrorCode::InvalidArgument, "too many disk modes requested");
    modes.resize(count);

    EigenBoundaryData data;
    data.bc = bc;
    data.s.assign(disk.node_s().begin(), disk.node_s().end());
    for (const auto& mode : modes) {
        const double x = mode.lambda * radius;
        const double jm = bessel::j(mode.m, x);
        const double jp = bessel::j_prime(mode.m, x);
        // ∫₀^R J_m(λr)² r dr
        const double radial = bc == BoundaryCondition::dirichlet
                                  ? 0.5 * radius * radius * jp * jp
                                  : 0.5 * radius * radius * (1.0 - mode.m * mode.m / (x * x)) * jm * jm;
        const double angular = mode.m == 0 ? numerics::two_pi : numerics::pi;
        BoundaryTrace trace;
        trace.lambda = mode.lambda;
        trace.interior_norm = std::sqrt(radial * angular);
        for (double theta : disk.node_theta()) {
            const double c = mode.sine ? std::sin(mode.m * theta) : std::cos(mode.m * theta);
            const double dc = mode.sine ? mode.m * std::cos(mode.m * theta) : -mode.m * std::sin(mode.m * theta);
            trace.normal_derivative.push_back(mode.lambda * jp * c);
            trace.value.push_back(jm * c);
            trace.tangential_derivative.push_back(jm * dc / radius);
        }
        data.modes.push_back(std::move(trace));
    }
    return data;
}

std::vector<RellichResidual> rellich_check(const geometry::BoundaryCurve& curve, const EigenBoundaryData& data,
                                           BoundaryCondition bc) {
    if (data.bc != bc) throw Error(ErrorCode::InvalidArgument, "boundary data carries a different boundary condition");
    const auto weights = curve.node_weight();
    const auto f = curve.node_rellich_weight();
    const std::size_t n = weights.size();
    std::vector<RellichResidual> out;
    for (const auto& mode : data.modes) {
        if (!(mode.interior_norm > 0) || !std::isfinite(mode.interior_norm))
            throw Error(ErrorCode::MissingNormalization, "eigenfunction at lambda = " + std::to_string(mode.lambda) +
                                                             " has no interior normalization");
        const double norm2 = mode.interior_norm * mode.interior_norm;
        const double lambda2 = mode.lambda * mode.lambda;
        double integral = 0.0;
        if (bc == BoundaryCondition::dirichlet) {
            if (mode.normal_derivative.size() != n)
                throw Error(ErrorCode::InvalidArgument, "boundary samples do not match the curve nodes");
            for (std::size_t i = 0; i < n; ++i)
                integral += weights[i] * f[i] * mode.normal_derivative[i] * mode.normal_derivative[i];
            integral /= lambda2 * norm2;
        } else {
            if (mode.value.size() != n || mode.tangential_derivative.size() != n)
                throw Error(ErrorCode::InvalidArgument, "boundary samples do not match the curve nodes");
            for (std::size_t i = 0; i < n; ++i) {
                const double t = mode.tangential_derivative[i];
                integral += weights[i] * f[i] * (mode.value[i] * mode.value[i] - t * t / lambda2);
            }
            integral /= norm2;
        }
        RellichResidual r;
        r.lambda = mode.lambda;
        r.integral = integral;
        r.residual = std::abs(integral - 2.0);
        r.allowance = bc == BoundaryCondition::neumann ? curve.max_radius() / std::max(mode.lambda, 1.0) : 0.0;
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------

double planar_weyl_count(double area, double perimeter, double lambda, BoundaryCondition bc) {
    const double sign = bc == BoundaryCondition::neumann ? 1.0 : -1.0;
    return area * lambda * lambda / (4.0 * numerics::pi) + sign * perimeter * lambda / (4.0 * numerics::pi);
}

double weyl_corridor_halfwidth(double lambda) { return 3.0 + std::pow(std::max(lambda, 0.0), 2.0 / 3.0); }

void check_weyl_corridor(const Spectrum& spectrum, double area, double perimeter) {
    // A listing that starts at λ = 0 is compared in absolute terms; a partial window only by increments.
    const bool absolute = spectrum.lambda_min <= 0.0;
    const double band_scale = absolute ? 1.0 : 2.0;
    double count = 0.0;
    double offset = 0.0;
    for (std::size_t i = 0; i < spectrum.levels.size(); ++i) {
        const auto& level = spectrum.levels[i];
        const double w = planar_weyl_count(area, perimeter, level.lambda, spectrum.bc);
        const double before = count;
        count += level.multiplicity;
        if (!absolute && i == 0) offset = 0.5 * (before + count) - w;
        const double lo = before - w - offset;
        const double hi = count - w - offset;
        const double band = band_scale * weyl_corridor_halfwidth(level.lambda);
        if (lo > band || hi < -band)
            throw Error(ErrorCode::MissedEigenvalueSuspicion,
                        "count leaves the Weyl corridor near lambda = " + std::to_string(level.lambda) +
                            " (N - W in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], band " +
                            std::to_string(band) + ")");
    }
}

}  // namespace weylscope::spectra
