#include "weylscope/billiard.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace weylscope::billiard {

using geometry::Vec2;
using numerics::two_pi;

namespace {

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

struct VertexJet {
    Vec2 q, dq, d2q;
};

VertexJet vertex_jet(const BoundaryCurve& curve, double theta) {
    const Vec2 n(std::cos(theta), std::sin(theta));
    const Vec2 t(-n.y(), n.x());
    const double rho = curve.curvature_radius(theta);
    const double drho = curve.curvature_radius_derivative(theta);
    return {curve.position(theta), rho * t, drho * t - rho * n};
}

/// Birkhoff length functional on k vertices; vertex k is vertex 0 shifted by 2πm.
struct LengthFunctional {
    const BoundaryCurve& curve;
    int k;
    int m;

    double theta(const VectorX& x, int i) const { return i == k ? x(0) + two_pi * m : x(i); }

    double value(const VectorX& x) const {
        double total = 0.0;
        for (int i = 0; i < k; ++i) total += (curve.position(theta(x, i + 1)) - curve.position(theta(x, i))).norm();
        return total;
    }

    void derivatives(const VectorX& x, VectorX& g, MatrixX* h) const {
        g.setZero(k);
        if (h) h->setZero(k, k);
        std::vector<VertexJet> jets(k);
        for (int i = 0; i < k; ++i) jets[i] = vertex_jet(curve, x(i));
        for (int i = 0; i < k; ++i) {
            const int a = i, b = (i + 1) % k;
            const VertexJet& ja = jets[a];
            VertexJet jb = jets[b];
            if (i + 1 == k) jb.q = curve.position(theta(x, k));
            const Vec2 chord = jb.q - ja.q;
            const double d = chord.norm();
            const Vec2 u = chord / d;
            g(a) -= ja.dq.dot(u);
            g(b) += jb.dq.dot(u);
            if (!h) continue;
            const Eigen::Matrix2d p = Eigen::Matrix2d::Identity() - u * u.transpose();
            (*h)(a, a) += -ja.d2q.dot(u) + ja.dq.dot(p * ja.dq) / d;
            (*h)(b, b) += jb.d2q.dot(u) + jb.dq.dot(p * jb.dq) / d;
            const double mixed = -ja.dq.dot(p * jb.dq) / d;
            (*h)(a, b) += mixed;
            (*h)(b, a) += mixed;
        }
    }
};

/// Consecutive gaps must stay inside (0, 2π); collapsed configurations are not billiard orbits.
bool well_separated(const VectorX& x, int k, int m, double min_gap) {
    for (int i = 0; i < k; ++i) {
        const double next = i + 1 == k ? x(0) + two_pi * m : x(i + 1);
        const double gap = next - x(i);
        if (!(gap > min_gap && gap < two_pi - min_gap)) return false;
    }
    return true;
}

VectorX pseudo_inverse_solve(const MatrixX& h, const VectorX& rhs) {
    const Eigen::SelfAdjointEigenSolver<MatrixX> eig(h);
    const VectorX& values = eig.eigenvalues();
    const double cut = 1e-10 * values.cwiseAbs().maxCoeff();
    const VectorX proj = eig.eigenvectors().transpose() * rhs;
    VectorX scaled = VectorX::Zero(values.size());
    for (int i = 0; i < values.size(); ++i)
        if (std::abs(values(i)) > cut) scaled(i) = proj(i) / values(i);
    return eig.eigenvectors() * scaled;
}

/// Newton on the free variables with a backtracking line search on |∇L|.
/// When `fix_first` is set, x(0) is held and only the remaining k − 1 equations are solved.
bool newton_critical_point(const LengthFunctional& f, VectorX& x, bool fix_first, double tol, int max_iterations) {
    const int k = f.k;
    const int offset = fix_first ? 1 : 0;
    const int n = k - offset;
    VectorX g;
    MatrixX h;
    auto residual = [&](const VectorX& y) {
        VectorX gy;
        f.derivatives(y, gy, nullptr);
        return gy.tail(n).norm();
    };
    for (int it = 0; it < max_iterations; ++it) {
        f.derivatives(x, g, &h);
        const double r0 = g.tail(n).norm();
        if (r0 < tol) return true;
        const VectorX step = pseudo_inverse_solve(h.bottomRightCorner(n, n), -g.tail(n));
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            VectorX trial = x;
            trial.tail(n) += alpha * step;
            if (well_separated(trial, k, f.m, 1e-9)) {
                const double r1 = residual(trial);
                if (std::isfinite(r1) && r1 < (1.0 - 1e-4 * alpha) * r0) {
                    x = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) return residual(x) < tol;
    }
    return residual(x) < tol;
}

PeriodicOrbit make_orbit(const BoundaryCurve& curve, const LengthFunctional& f, const VectorX& x) {
    PeriodicOrbit orbit;
    orbit.vertex_theta.assign(x.data(), x.data() + x.size());
    orbit.length = f.value(x);
    const double perimeter = curve.perimeter();
    for (int i = 0; i < f.k; ++i) {
        const double th = f.theta(x, i);
        const Vec2 u = (curve.position(f.theta(x, i + 1)) - curve.position(th)).normalized();
        double s = std::fmod(curve.arclength_at(th), perimeter);
        if (s < 0) s += perimeter;
        orbit.phase.push_back({s, u.dot(Vec2(-std::sin(th), std::cos(th)))});
    }
    return orbit;
}

double circular_distance(double a, double b, double period) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

bool same_vertex_set(const PeriodicOrbit& a, const PeriodicOrbit& b, double period, double tol) {
    if (a.phase.size() != b.phase.size()) return false;
    for (const auto& pa : a.phase) {
        bool hit = false;
        for (const auto& pb : b.phase)
            if (circular_distance(pa.s, pb.s, period) < tol && std::abs(pa.eta - pb.eta) < 1e-5) {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

/// β^k applied to the first vertex must return to it.
bool closes_under_map(const BoundaryCurve& curve, const PeriodicOrbit& orbit, int k) {
    PhasePoint p = orbit.phase.front();
    try {
        for (int i = 0; i < k; ++i) p = billiard_map(curve, p).next;
    } catch (const Error&) {
        return false;
    }
    const double scale = std::max(1.0, curve.perimeter());
    return circular_distance(p.s, orbit.phase.front().s, curve.perimeter()) < 1e-7 * scale &&
           std::abs(p.eta - orbit.phase.front().eta) < 1e-7;
}

/// Natural-parameter continuation in the first vertex angle from `start` to `target`.
/// Returns the configuration at `target`, or nothing if some step fails to converge.
std::optional<VectorX> continue_first_vertex(const LengthFunctional& f, VectorX x, double target, int steps_per_turn,
                                             VectorX* previous = nullptr) {
    const double max_step = two_pi / steps_per_turn;
    const double start = x(0);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(target - start) / max_step - 1e-12)));
    const double h = (target - start) / steps;
    VectorX prev = x;
    bool have_prev = previous != nullptr;
    if (have_prev) prev = *previous;
    for (int j = 1; j <= steps; ++j) {
        VectorX guess = x;
        if (have_prev && std::abs(x(0) - prev(0)) > 1e-14) {
            guess += (x - prev) * (h / (x(0) - prev(0)));
        } else {
            guess.array() += h;
        }
        guess(0) = start + j * h;
        if (!newton_critical_point(f, guess, true, 1e-12, 40)) return std::nullopt;
        prev = x;
        have_prev = true;
        x = guess;
    }
    if (previous) *previous = prev;
    return x;
}

/// Attempts to follow a degenerate critical point once around the boundary.
/// On success it returns `count` orbits evenly spaced in the first vertex angle.
std::optional<std::vector<VectorX>> trace_family(const LengthFunctional& f, const VectorX& x0, int steps,
                                                 int count) {
    std::vector<VectorX> path;
    path.reserve(steps + 1);
    path.push_back(x0);
    const double step = two_pi / steps;
    VectorX x = x0;
    VectorX prev = x0;
    bool have_prev = false;
    VectorX g;
    for (int j = 1; j <= steps; ++j) {
        VectorX guess = x;
        if (have_prev) guess += x - prev; else guess.array() += step;
        guess(0) = x0(0) + j * step;
        if (!newton_critical_point(f, guess, true, 1e-12, 40)) return std::nullopt;
        f.derivatives(guess, g, nullptr);
        if (std::abs(g(0)) > 1e-9) return std::nullopt;
        prev = x;
        x = guess;
        have_prev = true;
        path.push_back(x);
    }
    VectorX closed = x0;
    closed.array() += two_pi;
    if ((x - closed).cwiseAbs().maxCoeff() > 1e-7) return std::nullopt;

    std::vector<VectorX> reps;
    for (int r = 0; r < count; ++r) reps.push_back(path[static_cast<std::size_t>(r) * steps / count]);
    return reps;
}

std::uint64_t mix_seed(std::uint64_t seed, int k, int m) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k * 1009 + m);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

OrbitFamily iterate_family(const OrbitFamily& base, int r) {
    OrbitFamily fam = base;
    fam.bounces = base.bounces * r;
    fam.winding = base.winding * r;
    fam.length = base.length * r;
    fam.iterate = base.iterate * r;
    for (auto& orbit : fam.representatives) {
        PeriodicOrbit rep;
        for (int j = 0; j < r; ++j) {
            for (double th : orbit.vertex_theta) rep.vertex_theta.push_back(th + two_pi * base.winding * j);
            rep.phase.insert(rep.phase.end(), orbit.phase.begin(), orbit.phase.end());
        }
        rep.length = orbit.length * r;
        orbit = std::move(rep);
    }
    return fam;
}

} // namespace

std::vector<OrbitFamily> find_periodic_orbits(const BoundaryCurve& curve, int bounces, int winding,
                                              const OrbitSearchOptions& options, OrbitSearchStats* stats) {
    if (bounces < 2 || winding < 1 || 2 * winding > bounces)
        throw Error(ErrorCode::InvalidArgument, "need bounces >= 2 and 1 <= winding <= bounces/2");
    if (std::gcd(bounces, winding) != 1)
        throw Error(ErrorCode::InvalidArgument, "bounces and winding must be coprime");
    if (options.starts < 1 || options.representatives < 1 || options.continuation_steps < 8)
        throw Error(ErrorCode::InvalidArgument, "orbit search options out of range");

    const int k = bounces, m = winding;
    const LengthFunctional f{curve, k, m};
    const double perimeter = curve.perimeter();
    const double grad_tol = 1e-11 * std::max(1.0, curve.max_radius());
    const double mean_gap = two_pi * m / k;

    std::mt19937_64 rng(mix_seed(options.seed, k, m));
    std::uniform_real_distribution<double> jitter(-0.3 * mean_gap, 0.3 * mean_gap);
    const double golden = 0.6180339887498949;

    std::vector<OrbitFamily> families;
    OrbitSearchStats local;
    VectorX g;
    MatrixX h;

    for (int start = 0; start < options.starts; ++start) {
        ++local.starts;
        VectorX x(k);
        const double base = two_pi * std::fmod(0.5 + golden * start, 1.0);
        for (int i = 0; i < k; ++i) x(i) = base + mean_gap * i + (start == 0 ? 0.0 : jitter(rng));
        if (!well_separated(x, k, m, 1e-6)) continue;
        if (!newton_critical_point(f, x, false, grad_tol, 100)) continue;
        if (!well_separated(x, k, m, 1e-6 * mean_gap)) continue;
        // Normalize so that the first vertex lies in [0, 2π).
        const double shift = numerics::wrap_two_pi(x(0)) - x(0);
        x.array() += shift;

        const PeriodicOrbit orbit = make_orbit(curve, f, x);
        if (!closes_under_map(curve, orbit, k)) continue;
        ++local.converged;

        const double length_tol = 1e-8 * std::max(1.0, orbit.length);
        bool known = false;
        for (const auto& fam : families) {
            if (fam.kind == FamilyKind::one_parameter && std::abs(fam.length - orbit.length) < length_tol) known = true;
            if (fam.kind == FamilyKind::isolated && std::abs(fam.length - orbit.length) < length_tol &&
                same_vertex_set(fam.representatives.front(), orbit, perimeter, options.merge_tol * perimeter))
                known = true;
            if (known) break;
        }
        if (known) continue;

        f.derivatives(x, g, &h);
        const Eigen::SelfAdjointEigenSolver<MatrixX> eig(h);
        const VectorX abs_values = eig.eigenvalues().cwiseAbs();
        const bool degenerate = abs_values.minCoeff() < options.family_eigen_tol * abs_values.maxCoeff();

        OrbitFamily fam;
        fam.bounces = k;
        fam.winding = m;
        fam.length = orbit.length;
        if (degenerate) {
            if (auto reps = trace_family(f, x, options.continuation_steps, options.representatives)) {
                fam.kind = FamilyKind::one_parameter;
                fam.dimension = 1;
                for (const auto& xr : *reps) fam.representatives.push_back(make_orbit(curve, f, xr));
                // Drop any isolated entries that were in fact members of this family.
                std::erase_if(families, [&](const OrbitFamily& other) {
                    return other.kind == FamilyKind::isolated &&
                           std::abs(other.length - fam.length) < length_tol;
                });
                families.push_back(std::move(fam));
                continue;
            }
        }
        fam.kind = FamilyKind::isolated;
        fam.dimension = 0;
        fam.representatives.push_back(orbit);
        families.push_back(std::move(fam));
    }
    if (stats) *stats = local;
    std::sort(families.begin(), families.end(),
              [](const OrbitFamily& a, const OrbitFamily& b) { return a.length < b.length; });
    if (families.empty())
        throw Error(ErrorCode::NoOrbitFound, "no periodic orbit found for (k, m) = (" + std::to_string(k) + ", " +
                                                 std::to_string(m) + ")");
    return families;
}

std::vector<PhasePoint> family_section(const BoundaryCurve& curve, const OrbitFamily& family,
                                       std::span<const double> thetas) {
    if (family.kind != FamilyKind::one_parameter || family.representatives.empty())
        throw Error(ErrorCode::IsolatedFamily, "family section requires a one-parameter family");
    if (family.iterate != 1) {
        OrbitFamily primitive = family;
        primitive.bounces /= family.iterate;
        primitive.winding /= family.iterate;
        primitive.length /= family.iterate;
        primitive.iterate = 1;
        for (auto& rep : primitive.representatives) {
            rep.vertex_theta.resize(primitive.bounces);
            rep.phase.resize(primitive.bounces);
            rep.length /= family.iterate;
        }
        return family_section(curve, primitive, thetas);
    }
    const LengthFunctional f{curve, family.bounces, family.winding};
    const auto& rep = family.representatives.front();
    VectorX x0 = Eigen::Map<const VectorX>(rep.vertex_theta.data(), static_cast<Eigen::Index>(rep.vertex_theta.size()));
    const double base = x0(0);

    // Sweep targets in increasing angle from the representative so each solve is a short continuation.
    std::vector<std::size_t> order(thetas.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> unwrapped(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) unwrapped[i] = base + numerics::wrap_two_pi(thetas[i] - base);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return unwrapped[a] < unwrapped[b]; });

    std::vector<PhasePoint> out(thetas.size());
    VectorX x = x0;
    VectorX prev;
    VectorX* prev_ptr = nullptr;
    for (std::size_t idx : order) {
        auto next = continue_first_vertex(f, x, unwrapped[idx], 256, prev_ptr);
        if (!next) throw Error(ErrorCode::NoOrbitFound, "family continuation failed");
        if (!prev_ptr) {
            prev = x;
            prev_ptr = &prev;
        }
        x = *next;
        out[idx] = make_orbit(curve, f, x).phase.front();
    }
    return out;
}

std::vector<double> LengthSpectrum::distinct_lengths(double tol) const {
    std::vector<double> lengths;
    for (const auto& e : entries) lengths.push_back(e.length);
    std::sort(lengths.begin(), lengths.end());
    std::vector<double> out;
    for (double l : lengths)
        if (out.empty() || l - out.back() > tol * std::max(1.0, l)) out.push_back(l);
    return out;
}

LengthSpectrum length_spectrum(const BoundaryCurve& curve, double max_length, const SweepOptions& options) {
    if (!(max_length > 0)) throw Error(ErrorCode::InvalidArgument, "maximum length must be positive");
    if (options.max_bounces < 2) throw Error(ErrorCode::InvalidArgument, "max_bounces must be at least 2");
    LengthSpectrum spectrum;
    spectrum.max_length = max_length;
    const double cutoff = max_length - 1e-9;
    std::vector<OrbitFamily> primitive;

    for (int m = 1; 2 * m <= options.max_bounces; ++m) {
        bool first_k = true;
        bool stop_m = false;
        bool bound_reached = false;
        for (int k = 2 * m; k <= options.max_bounces; ++k) {
            if (std::gcd(k, m) != 1) continue;
            const auto found = find_periodic_orbits(curve, k, m, options.search);
            const double shortest = found.front().length;
            for (const auto& fam : found)
                if (fam.length < cutoff) primitive.push_back(fam);
            if (shortest >= cutoff) {
                bound_reached = true;
                stop_m = first_k;
                break;
            }
            first_k = false;
        }
        if (!bound_reached) spectrum.incomplete = true;
        if (stop_m) break;
    }

    spectrum.entries = primitive;
    if (options.include_iterates) {
        for (const auto& fam : primitive)
            for (int r = 2; r * fam.length < cutoff; ++r) spectrum.entries.push_back(iterate_family(fam, r));
    }
    std::stable_sort(spectrum.entries.begin(), spectrum.entries.end(),
                     [](const OrbitFamily& a, const OrbitFamily& b) { return a.length < b.length; });
    return spectrum;
}

} // namespace weylscope::billiard
