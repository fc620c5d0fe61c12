#pragma once

#include <vector>

namespace weylscope::bessel {

/// J_ν(x) for real order ν ≥ 0 and x ≥ 0.
double j(double nu, double x);

/// J_ν′(x).
double j_prime(double nu, double x);

/// Radial boundary condition whose zeros give ball eigenvalues in dimension n.
/// Dirichlet: J_ν(x). Neumann: (1 − n/2)J_ν(x) + x J_ν′(x), which is J_ν′ up to a factor when n = 2.
enum class RadialCondition { dirichlet, neumann };

/// All positive zeros of the radial condition below x_max, ascending.
/// Zeros are bracketed by a 0.5-step scan starting from the turning point √(l(l+n−2))
/// and polished by safeguarded Newton.
std::vector<double> radial_zeros(int l, int dimension, RadialCondition condition, double x_max);

/// Value of the radial condition function and its x-derivative.
struct RadialValue {
    double f = 0.0;
    double df = 0.0;
};
RadialValue radial_condition(int l, int dimension, RadialCondition condition, double x);

/// J_0(x) ... J_{order}(x) by Miller's backward recurrence with the Neumann-sum normalization.
/// Accurate in both the oscillatory and the evanescent regime; never underflows to garbage.
void integer_order_array(int order, double x, std::vector<double>& out);

}  // namespace weylscope::bessel
