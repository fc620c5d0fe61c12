#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace weylscope::numerics {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2π).
inline double wrap_two_pi(double angle) {
    double r = std::fmod(angle, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Signed angular difference a − b reduced into (−π, π].
inline double angle_difference(double a, double b) {
    double d = wrap_two_pi(a - b);
    return d > pi ? d - two_pi : d;
}

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss–Legendre rule of the given order, nodes ascending.
GaussRule gauss_legendre(int order);

/// Integrate f over [a, b] with a fixed Gauss–Legendre rule.
double integrate(const GaussRule& rule, double a, double b, const std::function<double(double)>& f);

struct Minimum {
    double x;
    double value;
};

/// Golden-section search for a local minimum of a unimodal f on [a, b].
Minimum golden_section(const std::function<double(double)>& f, double a, double b, double tol);

/// Root of f on a sign-changing bracket [a, b], Newton steps safeguarded by bisection.
/// `f_and_df` returns (f(x), f'(x)). Converges to |Δx| < tol.
double safeguarded_newton(const std::function<std::pair<double, double>(double)>& f_and_df,
                          double a, double b, double tol, int max_iterations = 200);

/// 64-bit FNV-1a hash of a byte string.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace weylscope::numerics
