#include "weylscope/spectra.hpp"

#include "weylscope/bessel.hpp"
#include "weylscope/error.hpp"
#include "weylscope/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace weylscope::spectra {

using geometry::BoundaryCurve;
using geometry::Vec2;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Sample {
    Vec2 position;
    double nx = 0.0, ny = 0.0;   // outward normal (boundary samples only)
};

/// Fourier–Bessel basis J_m(λr){cos, sin}(mφ), m ≤ order, about the origin.
/// Column 0 is m = 0; columns 2m−1, 2m are the cosine and sine of order m.
class Basis {
public:
    explicit Basis(int order) : order_(order) {}
    int order() const { return order_; }
    int columns() const { return 2 * order_ + 1; }

    /// Values (and optionally the gradient) of every basis function at p.
    void evaluate(double lambda, const Vec2& p, double* value, double* gx, double* gy) const {
        const double r = p.norm();
        const double phi = std::atan2(p.y(), p.x());
        bessel::integer_order_array(order_ + 1, lambda * r, jbuf_);
        const double c1 = std::cos(phi), s1 = std::sin(phi);
        double cm = 1.0, sm = 0.0;
        for (int m = 0; m <= order_; ++m) {
            const double jm = jbuf_[m];
            // d/dx J_m = (J_{m−1} − J_{m+1})/2, with J_{−1} = −J_1
            const double jm_prev = m == 0 ? -jbuf_[1] : jbuf_[m - 1];
            const double djm = 0.5 * (jm_prev - jbuf_[m + 1]);
            if (value) {
                if (m == 0) {
                    value[0] = jm;
                } else {
                    value[2 * m - 1] = jm * cm;
                    value[2 * m] = jm * sm;
                }
            }
            if (gx) {
                // ∇ = e_r ∂_r + e_φ (1/r)∂_φ; (1/r)·m J_m(λr) = λ (J_{m−1} + J_{m+1})/2
                const double radial = lambda * djm;
                const double jm_over_r = m == 0 ? 0.0 : 0.5 * lambda * (jm_prev + jbuf_[m + 1]);
                auto store = [&](int col, double ang, double dang) {
                    const double dr = radial * ang;
                    const double dt = jm_over_r * dang;
                    gx[col] = dr * c1 - dt * s1;
                    gy[col] = dr * s1 + dt * c1;
                };
                if (m == 0) {
                    store(0, 1.0, 0.0);
                } else {
                    store(2 * m - 1, cm, -sm);
                    store(2 * m, sm, cm);
                }
            }
            const double cn = cm * c1 - sm * s1;
            sm = sm * c1 + cm * s1;
            cm = cn;
        }
    }

private:
    int order_;
    mutable std::vector<double> jbuf_;
};

/// Collocation layout for one subwindow.
struct Layout {
    Basis basis;
    std::vector<Sample> boundary;
    std::vector<Vec2> interior;
};

int round_up(int n, int multiple) { return ((n + multiple - 1) / multiple) * multiple; }

Layout make_layout(const BoundaryCurve& curve, double lambda_top, const MpsOptions& options) {
    const int order = static_cast<int>(std::ceil(lambda_top * curve.max_radius())) + options.extra_orders;
    Layout layout{Basis(order), {}, {}};
    const int cols = layout.basis.columns();
    const double wavelengths = lambda_top * curve.perimeter() / numerics::two_pi;
    const int nb = round_up(std::max(2 * cols, static_cast<int>(std::ceil(options.points_per_wavelength * wavelengths))), 12);
    for (int i = 0; i < nb; ++i) {
        const double theta = curve.theta_at(curve.perimeter() * i / nb);
        Sample s;
        s.position = curve.position(theta);
        s.nx = std::cos(theta);
        s.ny = std::sin(theta);
        layout.boundary.push_back(s);
    }
    const int ni = round_up(nb / 2, 12);
    for (double fraction : {0.45, 0.8}) {
        const double radius = fraction * curve.min_radius();
        for (int i = 0; i < ni; ++i) {
            const double phi = numerics::two_pi * (i + 0.5) / ni;
            layout.interior.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
        }
    }
    return layout;
}

/// Column-normalized collocation matrix; boundary rows first.
struct System {
    MatrixXd a;
    VectorXd column_scale;
    int boundary_rows = 0;
};

System assemble(const Layout& layout, double lambda, BoundaryCondition bc) {
    const int cols = layout.basis.columns();
    const int nb = static_cast<int>(layout.boundary.size());
    const int rows = nb + static_cast<int>(layout.interior.size());
    System sys;
    sys.a.resize(rows, cols);
    sys.boundary_rows = nb;
    std::vector<double> value(cols), gx(cols), gy(cols);
    for (int i = 0; i < nb; ++i) {
        const Sample& s = layout.boundary[i];
        if (bc == BoundaryCondition::dirichlet) {
            layout.basis.evaluate(lambda, s.position, value.data(), nullptr, nullptr);
            for (int j = 0; j < cols; ++j) sys.a(i, j) = value[j];
        } else {
            layout.basis.evaluate(lambda, s.position, nullptr, gx.data(), gy.data());
            for (int j = 0; j < cols; ++j) sys.a(i, j) = (gx[j] * s.nx + gy[j] * s.ny) / lambda;
        }
    }
    for (std::size_t i = 0; i < layout.interior.size(); ++i) {
        layout.basis.evaluate(lambda, layout.interior[i], value.data(), nullptr, nullptr);
        for (int j = 0; j < cols; ++j) sys.a(nb + static_cast<int>(i), j) = value[j];
    }
    sys.column_scale = sys.a.colwise().norm().transpose();
    for (int j = 0; j < cols; ++j) {
        if (!(sys.column_scale(j) > 0)) sys.column_scale(j) = 1.0;
        sys.a.col(j) /= sys.column_scale(j);
    }
    return sys;
}

struct Factored {
    Eigen::ColPivHouseholderQR<MatrixXd> qr;
    MatrixXd q_boundary;
    int rank = 0;
};

Factored factor(const System& sys) {
    Factored f;
    f.qr.setThreshold(1e-13);
    f.qr.compute(sys.a);
    f.rank = static_cast<int>(f.qr.rank());
    const MatrixXd q = f.qr.householderQ() * MatrixXd::Identity(sys.a.rows(), f.rank);
    f.q_boundary = q.topRows(sys.boundary_rows);
    return f;
}

VectorXd singular_values(const Factored& f) {
    Eigen::BDCSVD<MatrixXd> svd(f.q_boundary);
    VectorXd s = svd.singularValues();
    std::sort(s.data(), s.data() + s.size());
    return s;
}

double sigma_min(const Layout& layout, double lambda, BoundaryCondition bc) {
    const System sys = assemble(layout, lambda, bc);
    return singular_values(factor(sys))(0);
}

struct Located {
    double lambda;
    double sigma;
    int multiplicity;
};

double weyl_density(const BoundaryCurve& curve, double lambda, BoundaryCondition bc) {
    const double sign = bc == BoundaryCondition::neumann ? 1.0 : -1.0;
    return curve.area() * lambda / numerics::two_pi + sign * curve.perimeter() / (4.0 * numerics::pi);
}

/// Lower bound below which no nonzero eigenvalue exists (Faber–Krahn, Payne–Weinberger with diam ≤ 2 r_max).
double spectral_floor(const BoundaryCurve& curve, BoundaryCondition bc) {
    if (bc == BoundaryCondition::dirichlet) return 2.404825557695773 * std::sqrt(numerics::pi / curve.area());
    return numerics::pi / (2.0 * curve.max_radius());
}

/// Interior L² norms and boundary samples of the eigenfunctions with coefficient columns `coeffs`.
void sample_modes(const BoundaryCurve& curve, const Basis& basis, double lambda, const MatrixXd& coeffs,
                  EigenBoundaryData& data) {
    const int cols = basis.columns();
    const int modes = static_cast<int>(coeffs.cols());
    std::vector<double> value(cols), gx(cols), gy(cols);
    std::vector<BoundaryTrace> traces(modes);
    for (auto& t : traces) t.lambda = lambda;

    const auto thetas = curve.node_theta();
    const auto positions = curve.node_position();
    const auto normals = curve.node_normal();
    const auto tangents = curve.node_tangent();
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        basis.evaluate(lambda, positions[i], value.data(), gx.data(), gy.data());
        const Eigen::Map<const VectorXd> v(value.data(), cols), x(gx.data(), cols), y(gy.data(), cols);
        for (int k = 0; k < modes; ++k) {
            const double u = v.dot(coeffs.col(k));
            const double ux = x.dot(coeffs.col(k)), uy = y.dot(coeffs.col(k));
            traces[k].value.push_back(u);
            traces[k].normal_derivative.push_back(ux * normals[i].x() + uy * normals[i].y());
            traces[k].tangential_derivative.push_back(ux * tangents[i].x() + uy * tangents[i].y());
        }
    }

    // ∫_Ω u² = ∫₀^{2π}∫₀¹ u(t q(θ))² t h(θ) ρ(θ) dt dθ
    const int nt = static_cast<int>(std::ceil(0.5 * lambda * curve.max_radius())) + 24;
    const auto rule = numerics::gauss_legendre(nt);
    const auto weights = curve.node_weight();
    const auto support = curve.node_rellich_weight();
    std::vector<double> norm2(modes, 0.0);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double wt = weights[i] * support[i];
        for (int q = 0; q < nt; ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double w = 0.5 * rule.weights[q] * t * wt;
            basis.evaluate(lambda, t * positions[i], value.data(), nullptr, nullptr);
            const Eigen::Map<const VectorXd> v(value.data(), cols);
            for (int k = 0; k < modes; ++k) {
                const double u = v.dot(coeffs.col(k));
                norm2[k] += w * u * u;
            }
        }
    }
    for (int k = 0; k < modes; ++k) {
        traces[k].interior_norm = std::sqrt(norm2[k]);
        data.modes.push_back(std::move(traces[k]));
    }
}

}  // namespace

double mps_sigma(const BoundaryCurve& curve, double lambda, BoundaryCondition bc, const MpsOptions& options) {
    if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
    return sigma_min(make_layout(curve, lambda, options), lambda, bc);
}

MpsResult mps_spectrum(const BoundaryCurve& curve, double lambda_lo, double lambda_hi, BoundaryCondition bc,
                       const MpsOptions& options) {
    if (!(lambda_lo >= 0) || !(lambda_hi > lambda_lo))
        throw Error(ErrorCode::InvalidArgument, "MPS window must satisfy 0 <= lo < hi");
    if (lambda_hi > options.lambda_cap)
        throw Error(ErrorCode::InvalidArgument, "MPS window exceeds the lambda cap " + std::to_string(options.lambda_cap));

    const double floor = 0.99 * spectral_floor(curve, bc);
    const bool from_zero = lambda_lo <= floor;
    const double scan_lo = std::max(lambda_lo, floor);

    MpsResult result;
    result.data.bc = bc;
    result.data.s.assign(curve.node_s().begin(), curve.node_s().end());
    std::vector<Located> found;

    struct Pending {
        double lambda;
        int multiplicity;
        MatrixXd coeffs;
        int order;
    };
    std::vector<Pending> pending;

    MpsOptions local = options;   // an enlarged basis carries over to later subwindows
    for (double a = scan_lo; a < lambda_hi; a += options.subwindow) {
        const double b = std::min(a + options.subwindow, lambda_hi);
        const std::size_t rollback = found.size();
        for (;;) {
            try {
                const Layout layout = make_layout(curve, b, local);

                std::vector<double> grid, sigma;
                double x = a;
                const auto step_at = [&](double lam) {
                    const double density = weyl_density(curve, lam, bc);
                    const double spacing_half = density > 0 ? 0.5 / density : options.max_grid_step;
                    return std::min(options.max_grid_step, spacing_half);
                };
                grid.push_back(a - step_at(a));
                while (x < b) {
                    grid.push_back(x);
                    x += step_at(x);
                }
                grid.push_back(b);
                grid.push_back(b + step_at(b));
                for (double lam : grid) sigma.push_back(sigma_min(layout, lam, bc));
                result.grid_points += static_cast<int>(grid.size());

                // Records a refined minimum; returns the singular value just above its multiplicity block.
                const auto record = [&](const numerics::Minimum& best) {
                    const System sys = assemble(layout, best.x, bc);
                    const Factored f = factor(sys);
                    Eigen::JacobiSVD<MatrixXd> svd(f.q_boundary, Eigen::ComputeThinV);
                    const VectorXd& sv = svd.singularValues();   // descending
                    const int n = static_cast<int>(sv.size());
                    const double threshold = options.multiplicity_factor * std::max(sv(n - 1), 1e-12);
                    int mult = 0;
                    for (int k = n - 1; k >= 0 && sv(k) < threshold; --k) ++mult;
                    mult = std::max(mult, 1);

                    Pending p;
                    p.lambda = best.x;
                    p.multiplicity = mult;
                    p.order = layout.basis.order();
                    if (options.boundary_data) {
                        // Columns of V for the smallest singular values, mapped back to basis coefficients.
                        const MatrixXd c = svd.matrixV().rightCols(mult);
                        const auto r11 = f.qr.matrixR().topLeftCorner(f.rank, f.rank).triangularView<Eigen::Upper>();
                        const MatrixXd y = r11.solve(c);
                        MatrixXd full = MatrixXd::Zero(sys.a.cols(), mult);
                        full.topRows(f.rank) = y;
                        MatrixXd coeffs = f.qr.colsPermutation() * full;
                        for (int j = 0; j < coeffs.rows(); ++j) coeffs.row(j) /= sys.column_scale(j);
                        p.coeffs = std::move(coeffs);
                    }
                    found.push_back({best.x, best.value, mult});
                    pending.push_back(std::move(p));
                    return n - 1 - mult >= 0 ? sv(n - 1 - mult) : std::numeric_limits<double>::infinity();
                };
                const auto accept = [&](const numerics::Minimum& best) {
                    if (best.value >= options.accept_sigma)
                        throw Error(ErrorCode::BasisDeficiency, "subspace angle floor " + std::to_string(best.value) +
                                                                    " at lambda = " + std::to_string(best.x) +
                                                                    "; increase the basis");
                };

                for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
                    if (!(sigma[i] < sigma[i - 1] && sigma[i] <= sigma[i + 1])) continue;
                    if (sigma[i] > 0.2) continue;
                    const auto sigma_at = [&](double lam) { return sigma_min(layout, lam, bc); };
                    const auto best = numerics::golden_section(sigma_at, grid[i - 1], grid[i + 1], options.refine_tol);
                    const auto inside = [&](double lam) { return lam >= a && (lam < b || (b == lambda_hi && lam <= b)); };
                    if (!inside(best.x)) continue;
                    if (best.value >= options.reject_sigma) continue;
                    accept(best);
                    const double next = record(best);

                    // A split pair closer than the scan step shows up as one minimum with a small second singular
                    // value. Deflate the located root and look for its partner on geometric offsets.
                    const double slope = std::max(sigma[i - 1], sigma[i + 1]) / (grid[i + 1] - grid[i - 1]) * 2.0;
                    if (!(slope > 0) || next > 4.0 * slope * (grid[i + 1] - grid[i - 1])) continue;
                    const double reach = std::max(3.0 * next / slope, grid[i + 1] - grid[i - 1]);
                    constexpr int samples = 48;
                    double best_g = std::numeric_limits<double>::infinity(), near = 0.0, far = 0.0;
                    for (int side : {-1, 1}) {
                        double prev = 0.0;
                        for (int k = 0; k < samples; ++k) {
                            const double d = 1e-7 * std::pow(reach / 1e-7, static_cast<double>(k) / (samples - 1));
                            const double g = sigma_at(best.x + side * d) / d;
                            if (g < best_g) {
                                best_g = g;
                                near = best.x + side * prev;
                                far = best.x + side * 1e-7 * std::pow(reach / 1e-7, static_cast<double>(k + 1) / (samples - 1));
                            }
                            prev = d;
                        }
                    }
                    if (!(best_g < 0.5 * slope)) continue;
                    const auto partner = numerics::golden_section(sigma_at, std::min(near, far), std::max(near, far),
                                                                  options.refine_tol);
                    if (partner.value >= options.accept_sigma || std::abs(partner.x - best.x) < 1e-7 || !inside(partner.x))
                        continue;
                    record(partner);
                }
                break;
            } catch (const Error& e) {
                // A deficient basis is retried with more Bessel orders before giving up.
                if (e.code() != ErrorCode::BasisDeficiency || local.extra_orders >= options.max_extra_orders) throw;
                found.resize(rollback);
                pending.resize(rollback);
                local.extra_orders += 16;
            }
        }
    }

    // Merge duplicates from neighbouring subwindows, keeping the sharper minimum.
    std::vector<std::size_t> order(found.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return found[i].lambda < found[j].lambda; });
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        if (!kept.empty() && found[idx].lambda - found[kept.back()].lambda < 1e-7) {
            if (found[idx].sigma < found[kept.back()].sigma) kept.back() = idx;
            continue;
        }
        kept.push_back(idx);
    }

    Spectrum& spec = result.spectrum;
    spec.bc = bc;
    spec.generator = "mps_fourier_bessel";
    spec.lambda_max = lambda_hi;
    spec.lambda_min = lambda_lo;
    if (lambda_lo == 0.0 && bc == BoundaryCondition::neumann) spec.levels.push_back({0.0, 1});
    for (std::size_t idx : kept) {
        if (found[idx].lambda < lambda_lo || found[idx].lambda > lambda_hi) continue;
        spec.levels.push_back({found[idx].lambda, found[idx].multiplicity});
        result.sigma.push_back(found[idx].sigma);
        if (options.boundary_data)
            sample_modes(curve, Basis(pending[idx].order), pending[idx].lambda, pending[idx].coeffs, result.data);
    }
    spec.certificate = Certificate::unchecked;
    if (options.check_corridor) {
        // Below the spectral floor nothing is missing, so the count can be compared in absolute terms.
        Spectrum counted = spec;
        if (from_zero) {
            counted.lambda_min = 0.0;
            if (bc == BoundaryCondition::neumann && lambda_lo > 0.0) counted.levels.insert(counted.levels.begin(), {0.0, 1});
        }
        check_weyl_corridor(counted, curve.area(), curve.perimeter());
        spec.certificate = Certificate::weyl_corridor_checked;
    }
    return result;
}

}  // namespace weylscope::spectra
