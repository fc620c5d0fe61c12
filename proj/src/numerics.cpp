#include "weylscope/numerics.hpp"

#include "weylscope/error.hpp"

#include <algorithm>

namespace weylscope::numerics {

GaussRule gauss_legendre(int order) {
    if (order < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be positive");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

double integrate(const GaussRule& rule, double a, double b, const std::function<double(double)>& f) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

Minimum golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? Minimum{c, fc} : Minimum{d, fd};
}

double safeguarded_newton(const std::function<std::pair<double, double>(double)>& f_and_df,
                          double a, double b, double tol, int max_iterations) {
    auto [fa, dfa] = f_and_df(a);
    auto [fb, dfb] = f_and_df(b);
    (void)dfa;
    (void)dfb;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw Error(ErrorCode::InvalidArgument, "root bracket without sign change");
    // orient so that f(lo) < 0 < f(hi)
    double lo = a, hi = b;
    if (fa > 0) std::swap(lo, hi);
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iterations; ++it) {
        auto [fx, dfx] = f_and_df(x);
        if (fx == 0.0) return x;
        if (fx < 0) lo = x; else hi = x;
        double next = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
        const double lower = std::min(lo, hi), upper = std::max(lo, hi);
        if (!(next > lower && next < upper)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < tol) return next;
        x = next;
    }
    throw Error(ErrorCode::IntersectionFailure, "safeguarded Newton did not converge");
}

} // namespace weylscope::numerics
