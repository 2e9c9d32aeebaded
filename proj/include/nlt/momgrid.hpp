#pragma once

// Discrete model of L^2(-k,k) and C^2 (x) L^2(-k,k).
//
// Conventions (Nystrom): an operator with kernel K(p,q) is stored as the
// matrix K(p_i, q_j) * w_j, so applying it is a plain matrix-vector product.
// Inner products carry the quadrature weights. Operator norms are taken in the
// weighted norm, i.e. ||D A D^{-1}||_2 with D = diag(sqrt(w)).

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nlt/types.hpp"

namespace nlt {

enum class QuadratureRule {
    GaussLegendreTheta,  ///< Gauss-Legendre in theta, p = k sin(theta)
    GaussLegendreP,      ///< Gauss-Legendre directly in p on (-k,k)
};

QuadratureRule parse_rule(std::string_view tag);
std::string to_string(QuadratureRule rule);

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

class MomentumGrid {
public:
    MomentumGrid(double k, QuadratureRule rule, RVector theta, RVector p, RVector w,
                 RVector varpi);

    double k() const noexcept { return k_; }
    int size() const noexcept { return static_cast<int>(p_.size()); }
    QuadratureRule rule() const noexcept { return rule_; }

    const RVector& theta() const noexcept { return theta_; }
    const RVector& p() const noexcept { return p_; }
    const RVector& weights() const noexcept { return w_; }
    const RVector& varpi() const noexcept { return varpi_; }
    const RVector& sqrt_weights() const noexcept { return sqrt_w_; }

    /// sqrt(w) repeated for both components of C^2 (x) L^2.
    RVector block_sqrt_weights() const;

    /// Variable the rule is polynomial in (theta or p).
    const RVector& interpolation_nodes() const noexcept {
        return rule_ == QuadratureRule::GaussLegendreTheta ? theta_ : p_;
    }

    /// Density for kernels measured against the rule's natural variable:
    /// W_j = w_j / varpi_j for the theta rule (the bare Gauss weight), w_j otherwise.
    RVector natural_weights() const;

    int nearest_node(double theta) const;

private:
    double k_;
    QuadratureRule rule_;
    RVector theta_;
    RVector p_;
    RVector w_;
    RVector varpi_;
    RVector sqrt_w_;
};

using GridPtr = std::shared_ptr<const MomentumGrid>;

GridPtr build_grid(double k, int n, QuadratureRule rule = QuadratureRule::GaussLegendreTheta);

struct GridFunction {
    GridPtr grid;
    CVector values;

    GridFunction() = default;
    GridFunction(GridPtr g, CVector v);
    static GridFunction zeros(GridPtr g);
    static GridFunction constant(GridPtr g, Complex c);
};

Complex inner_product(const GridFunction& f, const GridFunction& g);
double norm(const GridFunction& f);

/// Weighted inner product of raw sample vectors (same length as w).
Complex weighted_dot(const CVector& f, const CVector& g, const RVector& w);
double weighted_norm(const CVector& f, const RVector& w);

/// Pointwise multiplication by varpi^power, power in {-1, 1, 2}.
GridFunction apply_varpi(const GridFunction& f, int power);

/// Diagonal of exp(i * sign * x * varpi).
CVector phase_diagonal(const MomentumGrid& grid, double x, int sign);

/// exp(i * sign * x * varpi-hat) as an operator on grid functions.
class PhaseOperator {
public:
    PhaseOperator(GridPtr grid, double x, int sign);
    GridFunction operator()(const GridFunction& f) const;
    const CVector& diagonal() const noexcept { return diag_; }

private:
    GridPtr grid_;
    CVector diag_;
};

PhaseOperator phase_operator(GridPtr grid, double x, int sign);

/// 2x2 block operator on C^2 (x) L^2(-k,k), stored as one 2N x 2N matrix.
/// Block (0,0) acts on the plus component, block (1,1) on the minus component.
struct BlockOperator {
    GridPtr grid;
    CMatrix matrix;

    BlockOperator() = default;
    BlockOperator(GridPtr g, CMatrix m);
    static BlockOperator zero(GridPtr g);
    static BlockOperator identity(GridPtr g);

    int n() const noexcept { return grid->size(); }
    auto block(int r, int c) { return matrix.block(r * n(), c * n(), n(), n()); }
    auto block(int r, int c) const { return matrix.block(r * n(), c * n(), n(), n()); }
};

enum class NormMethod { PowerIteration, DenseSvd };

struct NormEstimate {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

/// Norm of A in the norm induced by diag(sqrt_w): ||diag(sqrt_w) A diag(sqrt_w)^{-1}||_2.
NormEstimate weighted_operator_norm(const CMatrix& a, const RVector& sqrt_w,
                                    NormMethod method = NormMethod::DenseSvd);

NormEstimate operator_norm(const BlockOperator& a, NormMethod method = NormMethod::DenseSvd);

/// Norm of an N x N operator on L^2(-k,k) in the grid's weighted norm.
NormEstimate operator_norm(const CMatrix& a, const MomentumGrid& grid,
                           NormMethod method = NormMethod::DenseSvd);

/// Smallest singular value in the weighted norm (dense SVD).
double weighted_smallest_singular_value(const CMatrix& a, const RVector& sqrt_w);

/// The weighted similarity transform diag(sqrt_w) A diag(sqrt_w)^{-1}.
CMatrix symmetrize(const CMatrix& a, const RVector& sqrt_w);

}  // namespace nlt
