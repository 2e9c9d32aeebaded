#pragma once

// Integrals of x -> ||vhat_k(x)||_0 used by the convergence certificates:
//
//     F+(u,u0) = int_{u0}^{u} ||vhat(x')|| Z(x') dx'
//     F-(u,u0) = int_{u0}^{u} |u - x'| ||vhat(x')|| Z(x') dx'
//     G(u,u0)  = int_{u0}^{u} |x' - u0| ||vhat(x')|| dx'
//     f_l(u,u0) = int_{u0}^{u} |x'|^l ||vhat(x')|| dx'
//
// Integrals are oriented: swapping the limits flips the sign.

#include <functional>

#include "nlt/potential.hpp"

namespace nlt {

using ScalarFunction = std::function<double(double)>;

/// x -> ||vhat_k(x)||_0. Builtin kernels are separable, so the norm is
/// |x_profile(x)| times the norm of the p-kernel (dense SVD, computed once).
class NormProfile {
public:
    NormProfile(const PotentialModel& model, const MomentumGrid& grid);

    double operator()(double x) const;
    double kernel_norm() const noexcept { return kernel_norm_; }

private:
    PotentialModel model_;
    double kernel_norm_;
};

struct QuadratureOptions {
    double rel_tol = 1e-6;
    int initial_intervals = 64;
    int max_intervals = 1 << 20;
};

/// Oriented integral of f over [a, b]. Composite Simpson on a mesh uniform in
/// asinh(x); the interval count doubles until the relative change is below rel_tol.
double integrate(const ScalarFunction& f, double a, double b, const QuadratureOptions& opts = {});

double f_plus(const NormProfile& norm, const ScalarFunction& zeta_norm, double u, double u0,
              const QuadratureOptions& opts = {});
double f_minus(const NormProfile& norm, const ScalarFunction& zeta_norm, double u, double u0,
               const QuadratureOptions& opts = {});
double g_functional(const NormProfile& norm, double u, double u0,
                    const QuadratureOptions& opts = {});
double f_ell(const NormProfile& norm, int ell, double u, double u0,
             const QuadratureOptions& opts = {});

/// F * sum_{m >= n} G^{m-1} / (m-1)!, the tail of the Dyson bound from order n on.
double dyson_tail_bound(double f, double g, int n);

}  // namespace nlt
