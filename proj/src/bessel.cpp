#include "weylscope/bessel.hpp"

#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include <algorithm>
#include <cmath>

namespace weylscope::bessel {

double j(double nu, double x) { return boost::math::cyl_bessel_j(nu, x); }

double j_prime(double nu, double x) { return boost::math::cyl_bessel_j_prime(nu, x); }

RadialValue radial_condition(int l, int dimension, RadialCondition condition, double x) {
    const double nu = l + 0.5 * dimension - 1.0;
    const double jv = j(nu, x);
    const double jp = j_prime(nu, x);
    if (condition == RadialCondition::dirichlet) return {jv, jp};
    // x J″ = −J′ − (x − ν²/x) J
    const double c = 1.0 - 0.5 * dimension;
    return {c * jv + x * jp, c * jp - (x - nu * nu / x) * jv};
}

std::vector<double> radial_zeros(int l, int dimension, RadialCondition condition, double x_max) {
    if (l < 0 || dimension < 2) throw Error(ErrorCode::InvalidArgument, "radial zeros need l >= 0, n >= 2");
    std::vector<double> zeros;
    const double turning = std::sqrt(static_cast<double>(l) * (l + dimension - 2));
    double a = std::max(turning, 0.25);
    if (a >= x_max) return zeros;
    const double step = 0.5;
    const double nu = l + 0.5 * dimension - 1.0;
    auto eval = [&](double x) {
        const RadialValue v = radial_condition(l, dimension, condition, x);
        return std::pair{v.f, v.df};
    };
    auto value = [&](double x) {
        return condition == RadialCondition::dirichlet ? j(nu, x) : radial_condition(l, dimension, condition, x).f;
    };
    double fa = value(a);
    while (a < x_max) {
        const double b = std::min(a + step, x_max);
        const double fb = value(b);
        if (fa == 0.0) {
            zeros.push_back(a);
        } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
            zeros.push_back(numerics::safeguarded_newton(eval, a, b, 1e-15 * b));
        }
        a = b;
        fa = fb;
    }
    if (fa == 0.0 && (zeros.empty() || zeros.back() != a)) zeros.push_back(a);
    // The polished root may sit a hair above x_max.
    while (!zeros.empty() && zeros.back() > x_max) zeros.pop_back();
    return zeros;
}

void integer_order_array(int order, double x, std::vector<double>& out) {
    if (order < 0) throw Error(ErrorCode::InvalidArgument, "Bessel array order must be non-negative");
    out.assign(order + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return;
    }
    const double ax = std::abs(x);
    const int reach = std::max(order, static_cast<int>(ax));
    const int top = 2 * ((reach + 32 + static_cast<int>(std::sqrt(40.0 * reach))) / 2);
    constexpr double big = 1e250;
    double next = 0.0, current = 1e-300, sum = 0.0;
    for (int k = top; k > 0; --k) {
        const double prev = 2.0 * k / ax * current - next;
        next = current;
        current = prev;
        if (std::abs(current) > big) {
            current /= big;
            next /= big;
            sum /= big;
            for (int i = k; i <= order; ++i) out[i] /= big;
        }
        // current now holds the unnormalized J_{k−1}
        if (k - 1 <= order) out[k - 1] = current;
        if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * current;
    }
    sum += current;
    for (double& v : out) v /= sum;
    if (x < 0)
        for (int i = 1; i <= order; i += 2) out[i] = -out[i];
}

}  // namespace weylscope::bessel
