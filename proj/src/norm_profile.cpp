#include "nlt/norm_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace nlt {

NormProfile::NormProfile(const PotentialModel& model, const MomentumGrid& grid)
    : model_(model) {
    // Unit-amplitude kernel: the x-profile carries v0.
    CMatrix p(grid.size(), grid.size());
    for (int j = 0; j < grid.size(); ++j)
        for (int i = 0; i < grid.size(); ++i)
            p(i, j) = model_.p_profile(grid.p()[i] - grid.p()[j]) * grid.weights()[j] / (2.0 * kPi);
    kernel_norm_ = operator_norm(p, grid).value;
}

double NormProfile::operator()(double x) const { return std::abs(model_.x_profile(x)) * kernel_norm_; }

namespace {

double simpson(const ScalarFunction& f, double sa, double sb, int intervals) {
    const double h = (sb - sa) / intervals;
    double acc = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double s = i == intervals ? sb : sa + i * h;
        const double x = std::sinh(s);
        const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += c * f(x) * std::cosh(s);
    }
    return acc * h / 3.0;
}

}  // namespace

double integrate(const ScalarFunction& f, double a, double b, const QuadratureOptions& opts) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("integrate: infinite limit");
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    const double sa = std::asinh(std::min(a, b));
    const double sb = std::asinh(std::max(a, b));
    int n = std::max(2, opts.initial_intervals);
    if (n % 2) ++n;
    double prev = simpson(f, sa, sb, n);
    while (2 * n <= opts.max_intervals) {
        n *= 2;
        const double next = simpson(f, sa, sb, n);
        const double change = std::abs(next - prev);
        prev = next;
        if (change <= opts.rel_tol * std::abs(next) || change == 0.0) break;
    }
    return sign * prev;
}

double f_plus(const NormProfile& norm, const ScalarFunction& zeta_norm, double u, double u0,
              const QuadratureOptions& opts) {
    return integrate([&](double x) { return norm(x) * zeta_norm(x); }, u0, u, opts);
}

double f_minus(const NormProfile& norm, const ScalarFunction& zeta_norm, double u, double u0,
               const QuadratureOptions& opts) {
    return integrate([&](double x) { return std::abs(u - x) * norm(x) * zeta_norm(x); }, u0, u,
                     opts);
}

double g_functional(const NormProfile& norm, double u, double u0, const QuadratureOptions& opts) {
    return integrate([&](double x) { return std::abs(x - u0) * norm(x); }, u0, u, opts);
}

double f_ell(const NormProfile& norm, int ell, double u, double u0, const QuadratureOptions& opts) {
    if (ell != 0 && ell != 1) throw std::invalid_argument("f_ell: ell must be 0 or 1");
    return integrate([&](double x) { return (ell == 1 ? std::abs(x) : 1.0) * norm(x); }, u0, u,
                     opts);
}

double dyson_tail_bound(double f, double g, int n) {
    if (n < 1) throw std::invalid_argument("dyson_tail_bound: n must be positive");
    if (f == 0.0) return 0.0;
    // sum_{j >= n-1} g^j / j!, summed until the terms stop contributing.
    double term = 1.0;
    for (int j = 1; j <= n - 1; ++j) term *= g / j;
    double acc = 0.0;
    for (int j = n - 1; j < n + 10000; ++j) {
        if (j > n - 1) term *= g / j;
        acc += term;
        if (j > g && term <= 1e-17 * acc) break;
    }
    return f * acc;
}

}  // namespace nlt
