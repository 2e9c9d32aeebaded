#include "nlt/scatter.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace nlt {

double tail_envelope(const PotentialModel& model, double X) {
    const double s = model.sigma();
    return 4.0 * kPi * model.beta() * std::pow(1.0 + X, 2.0 - s) / (s - 2.0);
}

TruncationBounds truncation_bounds(const PotentialModel& model, double eps, double zeta_a,
                                   double zeta_b) {
    if (!(model.sigma() > 3.0))
        throw std::invalid_argument("truncation_bounds: sigma must exceed 3");
    if (!(eps > 0.0)) throw std::invalid_argument("truncation_bounds: eps must be positive");
    const double a = model.alpha();
    const double b = model.beta();
    const double s = model.sigma();
    TruncationBounds out;
    double X = a;
    if (b > 0.0) X = std::max(a, std::pow(4.0 * kPi * b / ((s - 2.0) * eps), 1.0 / (s - 2.0)) - 1.0);
    out.x_minus = -X;
    out.x_plus = X;
    out.tail_estimate = tail_envelope(model, X);
    out.zeta_a = zeta_a;
    out.zeta_b = zeta_b;
    out.gamma = 2.0 * kPi * b * (zeta_a + zeta_b * a) / ((s - 2.0) * std::pow(a, s - 1.0));
    out.delta = 2.0 * kPi * b / ((s - 2.0) * std::pow(a, s - 2.0));
    out.f_minus_bound = 2.0 * kPi * b * (zeta_a + zeta_b * a) / ((s - 3.0) * std::pow(a, s - 2.0));
    return out;
}

BlockOperator TransferMatrix::M() const {
    BlockOperator m = T;
    m.matrix += CMatrix::Identity(T.matrix.rows(), T.matrix.cols());
    return m;
}

CMatrix compose(const CMatrix& a, const CMatrix& b) { return a + b + a * b; }

namespace {

void absorb(TransferMatrix& tm, const EvolutionResult& seg) {
    // Segments are applied right to left: M <- U(seg) M.
    tm.T.matrix = compose(seg.T.matrix, tm.T.matrix);
    tm.converged = tm.converged && seg.converged;
    tm.error_estimate += seg.error_estimate;
    tm.steps += seg.steps;
}

}  // namespace

TransferMatrix assemble_transfer(const Hamiltonian& h, double x_minus, double x_plus,
                                 const EvolutionOptions& options) {
    if (!(x_minus <= x_plus)) throw std::invalid_argument("assemble_transfer: x- must not exceed x+");
    const double alpha = h.model().alpha();
    TransferMatrix tm;
    tm.grid = h.grid();
    tm.T = BlockOperator::zero(h.grid());
    tm.x_minus = x_minus;
    tm.x_plus = x_plus;
    tm.scheme = options.scheme;
    std::vector<double> cuts{x_minus};
    for (double c : {-alpha, alpha})
        if (c > x_minus && c < x_plus) cuts.push_back(c);
    cuts.push_back(x_plus);
    for (std::size_t i = 1; i < cuts.size(); ++i) absorb(tm, evolve(h, cuts[i - 1], cuts[i], options));
    const PotentialModel& m = h.model();
    const double reach = std::min(-x_minus, x_plus);
    tm.tail_estimate = m.sigma() > 2.0 && reach > 0.0 ? tail_envelope(m, reach) : 0.0;
    return tm;
}

TransferMatrix assemble_transfer(const PotentialModel& model, GridPtr grid, double eps,
                                 const EvolutionOptions& options) {
    const TruncationBounds tb = truncation_bounds(model, eps);
    TransferMatrix tm = assemble_transfer(Hamiltonian(model, std::move(grid)), tb.x_minus,
                                          tb.x_plus, options);
    tm.tail_estimate = tb.tail_estimate;
    return tm;
}

std::vector<TransferMatrix> transfer_widening(const Hamiltonian& h,
                                              const std::vector<double>& half_widths,
                                              const EvolutionOptions& options) {
    std::vector<TransferMatrix> out;
    for (std::size_t i = 0; i < half_widths.size(); ++i) {
        const double X = half_widths[i];
        if (!(X > 0.0) || (i > 0 && !(X > half_widths[i - 1])))
            throw std::invalid_argument("transfer_widening: half-widths must increase");
        if (i == 0) {
            out.push_back(assemble_transfer(h, -X, X, options));
            continue;
        }
        const double prev = half_widths[i - 1];
        TransferMatrix tm = out.back();
        const EvolutionResult left = evolve(h, -X, -prev, options);
        const EvolutionResult right = evolve(h, prev, X, options);
        tm.T.matrix = compose(tm.T.matrix, left.T.matrix);
        tm.converged = tm.converged && left.converged;
        tm.error_estimate += left.error_estimate;
        tm.steps += left.steps;
        absorb(tm, right);
        tm.x_minus = -X;
        tm.x_plus = X;
        tm.tail_estimate = tail_envelope(h.model(), X);
        out.push_back(std::move(tm));
    }
    return out;
}

TransferMatrix born_transfer(const Hamiltonian& h, double x_minus, double x_plus, int panels) {
    const int n2 = 2 * h.grid()->size();
    TransferMatrix tm;
    tm.grid = h.grid();
    tm.x_minus = x_minus;
    tm.x_plus = x_plus;
    tm.scheme = Scheme::Dyson;
    const auto terms = dyson_terms(h, x_minus, x_plus, CMatrix::Identity(n2, n2), panels, 1,
                                   std::size_t{1} << 31);
    tm.T = BlockOperator(h.grid(), terms.back());
    tm.steps = panels;
    return tm;
}

CMatrix natural_kernel(const TransferMatrix& tm) {
    const RVector nw = tm.grid->natural_weights();
    RVector w2(2 * nw.size());
    w2 << nw, nw;
    return tm.T.matrix * w2.cwiseInverse().asDiagonal();
}

CMatrix interpolation_matrix(const RVector& nodes, const RVector& targets) {
    const Eigen::Index n = nodes.size();
    RVector bw(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double prod = 1.0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (k != j) prod *= nodes[j] - nodes[k];
        bw[j] = 1.0 / prod;
    }
    CMatrix p = CMatrix::Zero(targets.size(), n);
    for (Eigen::Index a = 0; a < targets.size(); ++a) {
        const double t = targets[a];
        Eigen::Index hit = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (t == nodes[j]) hit = j;
        if (hit >= 0) {
            p(a, hit) = 1.0;
            continue;
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) denom += bw[j] / (t - nodes[j]);
        for (Eigen::Index j = 0; j < n; ++j) p(a, j) = bw[j] / (t - nodes[j]) / denom;
    }
    return p;
}

double refinement_change(const TransferMatrix& coarse, const TransferMatrix& fine) {
    if (coarse.grid->rule() != fine.grid->rule() || coarse.grid->k() != fine.grid->k())
        throw std::invalid_argument("refinement_change: grids differ in rule or k");
    const int nc = coarse.grid->size();
    const int nf = fine.grid->size();
    const CMatrix p =
        interpolation_matrix(coarse.grid->interpolation_nodes(), fine.grid->interpolation_nodes());
    const CMatrix kc = natural_kernel(coarse);
    const CMatrix kf = natural_kernel(fine);
    double sup = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const CMatrix ic = p * kc.block(r * nc, c * nc, nc, nc) * p.transpose();
            sup = std::max(sup, (kf.block(r * nf, c * nf, nf, nf) - ic).cwiseAbs().maxCoeff());
        }
    return sup;
}

namespace {

CVector solve_refined(const CMatrix& m, const CVector& b) {
    const Eigen::PartialPivLU<CMatrix> lu(m);
    CVector x = lu.solve(b);
    for (int it = 0; it < 3; ++it) {
        const CVector r = b - m * x;
        x += lu.solve(r);
    }
    return x;
}

struct Prepared {
    CMatrix t11, t12, t21, t22, m22;
};

Prepared prepare(const TransferMatrix& tm, ScatteringResult& res) {
    const MomentumGrid& g = *tm.grid;
    const int n = g.size();
    Prepared p;
    p.t11 = tm.T.block(0, 0);
    p.t12 = tm.T.block(0, 1);
    p.t21 = tm.T.block(1, 0);
    p.t22 = tm.T.block(1, 1);
    p.m22 = CMatrix::Identity(n, n) + p.t22;
    res.m22_norm = operator_norm(p.m22, g).value;
    res.m22_smin = weighted_smallest_singular_value(p.m22, g.sqrt_weights());
    res.tail_estimate = tm.tail_estimate;
    res.x_minus = tm.x_minus;
    res.x_plus = tm.x_plus;
    res.theta_forward = g.theta();
    res.theta_backward = (kPi - g.theta().array()).matrix();
    if (!(res.m22_smin > kM22Threshold * res.m22_norm)) {
        std::ostringstream os;
        os << "M22 is numerically singular (smallest singular value " << res.m22_smin
           << ", norm " << res.m22_norm << "); scattering is ill-posed";
        throw KernelNontrivialError(os.str(), res.m22_smin);
    }
    return p;
}

double relative_residual(const CMatrix& m, const CVector& x, const CVector& b, const RVector& w) {
    const double nb = weighted_norm(b, w);
    const double nr = weighted_norm(m * x - b, w);
    if (nb == 0.0) return nr;
    return nr / nb;
}

}  // namespace

ScatteringResult scatter_left(const TransferMatrix& tm, double theta0) {
    if (!(theta0 > -0.5 * kPi && theta0 < 0.5 * kPi))
        throw std::invalid_argument("scatter_left: theta0 must lie in (-pi/2, pi/2)");
    const MomentumGrid& g = *tm.grid;
    ScatteringResult res;
    res.incidence = Incidence::Left;
    res.theta0_requested = theta0;
    res.node = g.nearest_node(theta0);
    res.theta0 = g.theta()[res.node];
    res.snap_distance = std::abs(theta0 - res.theta0);
    res.p0 = g.p()[res.node];
    const Prepared p = prepare(tm, res);
    const int j0 = res.node;
    const double c = 2.0 * kPi * g.varpi()[j0] / g.weights()[j0];
    const CVector rhs = -c * p.t21.col(j0);
    res.b_minus = solve_refined(p.m22, rhs);
    res.residual = relative_residual(p.m22, res.b_minus, rhs, g.weights());
    res.a_plus_smooth = c * p.t11.col(j0) + p.t12 * res.b_minus;
    const Complex pre = -kI / std::sqrt(2.0 * kPi);
    res.f_forward = pre * res.a_plus_smooth;
    res.f_backward = pre * res.b_minus;
    return res;
}

ScatteringResult scatter_right(const TransferMatrix& tm, double theta0) {
    if (!(theta0 > 0.5 * kPi && theta0 < 1.5 * kPi))
        throw std::invalid_argument("scatter_right: theta0 must lie in (pi/2, 3pi/2)");
    const MomentumGrid& g = *tm.grid;
    ScatteringResult res;
    res.incidence = Incidence::Right;
    res.theta0_requested = theta0;
    res.node = g.nearest_node(kPi - theta0);
    res.theta0 = kPi - g.theta()[res.node];
    res.snap_distance = std::abs(theta0 - res.theta0);
    res.p0 = g.p()[res.node];
    const Prepared p = prepare(tm, res);
    const int j0 = res.node;
    const double c = 2.0 * kPi * g.varpi()[j0] / g.weights()[j0];
    // B- = c e_j0 + B_smooth with (I + T22) B_smooth = -c T22 e_j0.
    const CVector rhs = -c * p.t22.col(j0);
    res.b_minus = solve_refined(p.m22, rhs);
    res.residual = relative_residual(p.m22, res.b_minus, rhs, g.weights());
    res.a_plus_smooth = c * p.t12.col(j0) + p.t12 * res.b_minus;
    const Complex pre = kI / std::sqrt(2.0 * kPi);
    res.f_forward = pre * res.a_plus_smooth;
    res.f_backward = pre * res.b_minus;
    return res;
}

ScatteringResult scatter(const TransferMatrix& tm, double theta0) {
    if (theta0 > -0.5 * kPi && theta0 < 0.5 * kPi) return scatter_left(tm, theta0);
    if (theta0 > 0.5 * kPi && theta0 < 1.5 * kPi) return scatter_right(tm, theta0);
    throw std::invalid_argument("scatter: theta0 must lie in (-pi/2, pi/2) or (pi/2, 3pi/2)");
}

ScatteringResult scatter_left(const PotentialModel& model, GridPtr grid, double theta0, double eps,
                              const EvolutionOptions& options) {
    return scatter_left(assemble_transfer(model, std::move(grid), eps, options), theta0);
}

ScatteringResult scatter_right(const PotentialModel& model, GridPtr grid, double theta0,
                               double eps, const EvolutionOptions& options) {
    return scatter_right(assemble_transfer(model, std::move(grid), eps, options), theta0);
}

std::vector<CrossSectionRow> cross_section(const ScatteringResult& r) {
    std::vector<CrossSectionRow> rows;
    rows.reserve(r.f_forward.size() + r.f_backward.size());
    for (Eigen::Index j = 0; j < r.f_forward.size(); ++j)
        rows.push_back({r.theta_forward[j], r.f_forward[j], std::norm(r.f_forward[j])});
    for (Eigen::Index j = 0; j < r.f_backward.size(); ++j)
        rows.push_back({r.theta_backward[j], r.f_backward[j], std::norm(r.f_backward[j])});
    return rows;
}

std::string format_double(double value) {
    if (value == 0.0) value = 0.0;  // no signed zeros in reports
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string emit_cross_section(const ScatteringResult& result) {
    std::string out = "theta,re_f,im_f,dcs\n";
    for (const CrossSectionRow& row : cross_section(result)) {
        out += format_double(row.theta);
        out += ',';
        out += format_double(row.f.real());
        out += ',';
        out += format_double(row.f.imag());
        out += ',';
        out += format_double(row.dcs);
        out += '\n';
    }
    return out;
}

}  // namespace nlt
