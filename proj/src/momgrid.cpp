#include "nlt/momgrid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlt {

QuadratureRule parse_rule(std::string_view tag) {
    if (tag == "gauss-legendre-theta") return QuadratureRule::GaussLegendreTheta;
    if (tag == "gauss-legendre-p") return QuadratureRule::GaussLegendreP;
    throw std::invalid_argument("unknown quadrature rule '" + std::string(tag) + "'");
}

std::string to_string(QuadratureRule rule) {
    switch (rule) {
    case QuadratureRule::GaussLegendreTheta: return "gauss-legendre-theta";
    case QuadratureRule::GaussLegendreP: return "gauss-legendre-p";
    }
    return "unknown";
}

GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton on P_n from the Tricomi initial guess.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

MomentumGrid::MomentumGrid(double k, QuadratureRule rule, RVector theta, RVector p, RVector w,
                           RVector varpi)
    : k_(k), rule_(rule), theta_(std::move(theta)), p_(std::move(p)), w_(std::move(w)),
      varpi_(std::move(varpi)), sqrt_w_(w_.array().sqrt()) {}

RVector MomentumGrid::block_sqrt_weights() const {
    RVector out(2 * size());
    out << sqrt_w_, sqrt_w_;
    return out;
}

RVector MomentumGrid::natural_weights() const {
    if (rule_ == QuadratureRule::GaussLegendreTheta) return w_.cwiseQuotient(varpi_);
    return w_;
}

int MomentumGrid::nearest_node(double theta) const {
    int best = 0;
    for (int j = 1; j < size(); ++j)
        if (std::abs(theta_[j] - theta) < std::abs(theta_[best] - theta)) best = j;
    return best;
}

GridPtr build_grid(double k, int n, QuadratureRule rule) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw std::invalid_argument("build_grid: k must be positive and finite");
    if (n < 2) throw std::invalid_argument("build_grid: N must be at least 2");

    const GaussRule gl = gauss_legendre(n);
    RVector theta(n), p(n), w(n), varpi(n);
    for (int j = 0; j < n; ++j) {
        if (rule == QuadratureRule::GaussLegendreTheta) {
            theta[j] = 0.5 * kPi * gl.nodes[j];
            p[j] = k * std::sin(theta[j]);
            varpi[j] = k * std::cos(theta[j]);
            w[j] = 0.5 * kPi * gl.weights[j] * varpi[j];
        } else {
            p[j] = k * gl.nodes[j];
            theta[j] = std::asin(gl.nodes[j]);
            varpi[j] = k * std::sqrt((1.0 - gl.nodes[j]) * (1.0 + gl.nodes[j]));
            w[j] = k * gl.weights[j];
        }
    }
    return std::make_shared<const MomentumGrid>(k, rule, std::move(theta), std::move(p),
                                                std::move(w), std::move(varpi));
}

GridFunction::GridFunction(GridPtr g, CVector v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("GridFunction: null grid");
    if (values.size() != grid->size())
        throw std::invalid_argument("GridFunction: sample count does not match grid");
}

GridFunction GridFunction::zeros(GridPtr g) {
    const int n = g->size();
    return {std::move(g), CVector::Zero(n)};
}

GridFunction GridFunction::constant(GridPtr g, Complex c) {
    const int n = g->size();
    return {std::move(g), CVector::Constant(n, c)};
}

namespace {

void require_same_grid(const GridFunction& f, const GridFunction& g) {
    if (!f.grid || f.grid != g.grid)
        throw std::invalid_argument("grid functions live on different grids");
}

}  // namespace

Complex weighted_dot(const CVector& f, const CVector& g, const RVector& w) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index j = 0; j < f.size(); ++j) acc += w[j] * std::conj(f[j]) * g[j];
    return acc;
}

double weighted_norm(const CVector& f, const RVector& w) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < f.size(); ++j) acc += w[j] * std::norm(f[j]);
    return std::sqrt(acc);
}

Complex inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    return weighted_dot(f.values, g.values, f.grid->weights());
}

double norm(const GridFunction& f) { return weighted_norm(f.values, f.grid->weights()); }

GridFunction apply_varpi(const GridFunction& f, int power) {
    const RVector& varpi = f.grid->varpi();
    CVector out = f.values;
    switch (power) {
    case -1: out.array() /= varpi.array().cast<Complex>(); break;
    case 1: out.array() *= varpi.array().cast<Complex>(); break;
    case 2: out.array() *= varpi.array().square().cast<Complex>(); break;
    default: throw std::invalid_argument("apply_varpi: power must be -1, 1 or 2");
    }
    return {f.grid, std::move(out)};
}

CVector phase_diagonal(const MomentumGrid& grid, double x, int sign) {
    CVector d(grid.size());
    const double s = sign >= 0 ? 1.0 : -1.0;
    for (int j = 0; j < grid.size(); ++j) d[j] = std::polar(1.0, s * x * grid.varpi()[j]);
    return d;
}

PhaseOperator::PhaseOperator(GridPtr grid, double x, int sign)
    : grid_(std::move(grid)), diag_(phase_diagonal(*grid_, x, sign)) {}

GridFunction PhaseOperator::operator()(const GridFunction& f) const {
    if (f.grid != grid_) throw std::invalid_argument("PhaseOperator: grid mismatch");
    return {grid_, diag_.cwiseProduct(f.values)};
}

PhaseOperator phase_operator(GridPtr grid, double x, int sign) {
    return PhaseOperator(std::move(grid), x, sign);
}

BlockOperator::BlockOperator(GridPtr g, CMatrix m) : grid(std::move(g)), matrix(std::move(m)) {
    if (!grid) throw std::invalid_argument("BlockOperator: null grid");
    if (matrix.rows() != 2 * grid->size() || matrix.cols() != 2 * grid->size())
        throw std::invalid_argument("BlockOperator: matrix must be 2N x 2N");
}

BlockOperator BlockOperator::zero(GridPtr g) {
    const int n2 = 2 * g->size();
    return {std::move(g), CMatrix::Zero(n2, n2)};
}

BlockOperator BlockOperator::identity(GridPtr g) {
    const int n2 = 2 * g->size();
    return {std::move(g), CMatrix::Identity(n2, n2)};
}

CMatrix symmetrize(const CMatrix& a, const RVector& sqrt_w) {
    CMatrix b = a;
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) *= sqrt_w[i] / sqrt_w[j];
    return b;
}

namespace {

// Deterministic start vector; std distributions are not portable across
// standard libraries, so map raw 64-bit draws ourselves.
CVector start_vector(Eigen::Index n) {
    std::mt19937_64 gen(0x5eed1234abcdULL);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
        const double im = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
        v[i] = {1.0 + re, im};
    }
    return v.normalized();
}

NormEstimate power_iteration(const CMatrix& b) {
    constexpr double kRelTol = 1e-10;
    constexpr int kMaxIter = 500;
    NormEstimate est;
    CVector v = start_vector(b.cols());
    double sigma = 0.0;
    est.converged = false;
    for (int it = 1; it <= kMaxIter; ++it) {
        const CVector y = b * v;
        const double next = y.norm();
        est.iterations = it;
        if (next == 0.0) {
            sigma = 0.0;
            est.converged = true;
            break;
        }
        const CVector z = b.adjoint() * y;
        const double zn = z.norm();
        if (zn == 0.0) {
            sigma = next;
            est.converged = true;
            break;
        }
        v = z / zn;
        if (std::abs(next - sigma) < kRelTol * next) {
            sigma = next;
            est.converged = true;
            break;
        }
        sigma = next;
    }
    // ||B v|| for the final unit iterate is a Rayleigh quotient of B^H B.
    est.value = std::max(sigma, (b * v).norm());
    return est;
}

}  // namespace

NormEstimate weighted_operator_norm(const CMatrix& a, const RVector& sqrt_w, NormMethod method) {
    if (a.rows() != a.cols() || a.rows() != sqrt_w.size())
        throw std::invalid_argument("weighted_operator_norm: dimension mismatch");
    if (!a.allFinite()) throw std::invalid_argument("weighted_operator_norm: non-finite entries");
    const CMatrix b = symmetrize(a, sqrt_w);
    if (method == NormMethod::PowerIteration) return power_iteration(b);
    NormEstimate est;
    if (b.size() == 0) return est;
    Eigen::JacobiSVD<CMatrix> svd(b);
    est.value = svd.singularValues()[0];
    return est;
}

NormEstimate operator_norm(const BlockOperator& a, NormMethod method) {
    return weighted_operator_norm(a.matrix, a.grid->block_sqrt_weights(), method);
}

NormEstimate operator_norm(const CMatrix& a, const MomentumGrid& grid, NormMethod method) {
    return weighted_operator_norm(a, grid.sqrt_weights(), method);
}

double weighted_smallest_singular_value(const CMatrix& a, const RVector& sqrt_w) {
    const CMatrix b = symmetrize(a, sqrt_w);
    Eigen::JacobiSVD<CMatrix> svd(b);
    return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace nlt
