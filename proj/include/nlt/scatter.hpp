#pragma once

// Transfer matrix M = s-lim U(x+, x-) by truncation at |x| = X, and the
// scattering amplitude f(theta0, theta) read off its blocks.

#include <string>
#include <vector>

#include "nlt/evolution.hpp"

namespace nlt {

/// Envelope tail int_{|x| > X} (1+|x|) 2 pi beta (1+|x|)^{-sigma} dx.
double tail_envelope(const PotentialModel& model, double X);

struct TruncationBounds {
    double x_minus = 0.0;
    double x_plus = 0.0;
    double tail_estimate = 0.0;
    double gamma = 0.0;          ///< bound on F+(x+, alpha)
    double delta = 0.0;          ///< bound on G(x+, alpha)
    double f_minus_bound = 0.0;  ///< bound on F-(-alpha, x-)
    double zeta_a = 1.0;
    double zeta_b = 0.0;
};

/// Symmetric truncation X >= alpha with tail_envelope(X) <= eps. (zeta_a, zeta_b)
/// are the growth constants ||zeta(x)|| <= a + b|x| entering gamma.
TruncationBounds truncation_bounds(const PotentialModel& model, double eps, double zeta_a = 1.0,
                                   double zeta_b = 0.0);

struct TransferMatrix {
    GridPtr grid;
    BlockOperator T;  ///< M = I + T
    double x_minus = 0.0;
    double x_plus = 0.0;
    double tail_estimate = 0.0;
    Scheme scheme = Scheme::Product;
    bool converged = true;
    double error_estimate = 0.0;
    long steps = 0;

    BlockOperator M() const;
};

/// T-form product: (I + a)(I + b) = I + (a + b + a b).
CMatrix compose(const CMatrix& a, const CMatrix& b);

TransferMatrix assemble_transfer(const PotentialModel& model, GridPtr grid, double eps,
                                 const EvolutionOptions& options = {});

/// U(x+, x-) composed across (x-, -alpha, alpha, x+) when the interval covers them.
TransferMatrix assemble_transfer(const Hamiltonian& hamiltonian, double x_minus, double x_plus,
                                 const EvolutionOptions& options = {});

/// M(X) for an increasing list of symmetric truncations, built shell by shell.
std::vector<TransferMatrix> transfer_widening(const Hamiltonian& hamiltonian,
                                              const std::vector<double>& half_widths,
                                              const EvolutionOptions& options = {});

/// First-order transfer matrix I - i int H(x) dx over [x-, x+].
TransferMatrix born_transfer(const Hamiltonian& hamiltonian, double x_minus, double x_plus,
                             int panels);

/// Kernel of T against the grid's natural variable: T_ij / W_j.
CMatrix natural_kernel(const TransferMatrix& tm);

/// Barycentric Lagrange interpolation matrix from `nodes` to `targets`.
CMatrix interpolation_matrix(const RVector& nodes, const RVector& targets);

/// sup-norm change of the natural kernel between a coarse and a fine grid,
/// after interpolating the coarse kernel onto the fine nodes.
double refinement_change(const TransferMatrix& coarse, const TransferMatrix& fine);

enum class Incidence { Left, Right };

struct ScatteringResult {
    Incidence incidence = Incidence::Left;
    double theta0_requested = 0.0;
    double theta0 = 0.0;  ///< snapped incidence angle
    double snap_distance = 0.0;
    int node = 0;
    double p0 = 0.0;
    CVector b_minus;        ///< B- with the incident delta removed (right incidence)
    CVector a_plus_smooth;  ///< A+ with the delta part removed
    RVector theta_forward;  ///< theta_j in (-pi/2, pi/2)
    RVector theta_backward; ///< pi - theta_j in (pi/2, 3pi/2)
    CVector f_forward;
    CVector f_backward;
    double m22_smin = 0.0;
    double m22_norm = 0.0;
    double residual = 0.0;
    double tail_estimate = 0.0;
    double x_minus = 0.0;
    double x_plus = 0.0;
};

/// Relative threshold on the smallest singular value of M22.
inline constexpr double kM22Threshold = 1e-8;

ScatteringResult scatter_left(const TransferMatrix& tm, double theta0);
ScatteringResult scatter_right(const TransferMatrix& tm, double theta0);

/// Dispatches on the incidence branch of theta0.
ScatteringResult scatter(const TransferMatrix& tm, double theta0);

ScatteringResult scatter_left(const PotentialModel& model, GridPtr grid, double theta0, double eps,
                              const EvolutionOptions& options = {});
ScatteringResult scatter_right(const PotentialModel& model, GridPtr grid, double theta0,
                               double eps, const EvolutionOptions& options = {});

struct CrossSectionRow {
    double theta = 0.0;
    Complex f;
    double dcs = 0.0;
};

/// Forward branch then backward branch, each in node order.
std::vector<CrossSectionRow> cross_section(const ScatteringResult& result);

/// CSV with columns theta,re_f,im_f,dcs in shortest round-trip format.
std::string emit_cross_section(const ScatteringResult& result);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace nlt
