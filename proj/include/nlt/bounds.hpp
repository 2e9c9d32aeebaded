#pragma once

// Sampled certificates for the operator-norm inequalities behind the
// existence of U(x, x0) and of the transfer matrix.

#include <vector>

#include "nlt/certificate.hpp"
#include "nlt/evolution.hpp"
#include "nlt/norm_profile.hpp"

namespace nlt {

/// `count` log-spaced |x| in [alpha, x_max] with alternating signs.
std::vector<double> envelope_samples(double alpha, int count = 20, double x_max = 1e3);

/// ||vhat(x)|| <= 2 pi beta / (1+|x|)^sigma for |x| >= alpha.
BoundCertificate certify_lemma2(const PotentialModel& model, GridPtr grid,
                                const std::vector<double>& x_samples);

/// ||B(x1)|| <= ||vhat(x1)|| and
/// ||B(xn..x1)|| <= ||vhat(xn)|| prod_m |x_{m+1} - x_m| ||vhat(x_m)||.
BoundCertificate certify_lemma5(const PotentialModel& model, GridPtr grid,
                                const std::vector<std::vector<double>>& tuples);

/// Partial sums sum_{n<=K} ||Phi_n|| <= ||Phi0|| + F+ sum_{n=1}^{K} G^{n-1}/(n-1)!.
BoundCertificate certify_theorem3(const StateEvolution& evolution);

/// Per-order bound ||Phi_n|| <= f0 F- (-G(x0,x))^{n-2} / (n-2)! for n >= 2.
BoundCertificate certify_refined_orders(const PotentialModel& model, const MomentumGrid& grid,
                                        const StateEvolution& evolution);

/// F+(x+, alpha) <= gamma, G(x+, alpha) <= delta, F-(-alpha, x-) and the
/// minus-side G integral against their closed-form bounds, with x- = -x+.
BoundCertificate certify_theorem4(const PotentialModel& model, GridPtr grid,
                                  const StateVector& phi0, const std::vector<double>& x_plus);

/// ||H(x)^2|| <= 1e-12 ||H(x)||^2.
BoundCertificate certify_nilpotency(const PotentialModel& model, GridPtr grid,
                                    const std::vector<double>& x_samples);

/// ||zeta(x)|| <= a + b|x| at each sample.
BoundCertificate certify_zeta_growth(const StateVector& phi0, const std::vector<double>& x_samples);

/// Samples x_plus = alpha * 2^m up to x_max.
std::vector<double> widening_sequence(double alpha, double x_max);

}  // namespace nlt
