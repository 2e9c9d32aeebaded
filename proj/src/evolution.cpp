#include "nlt/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "nlt/norm_profile.hpp"

namespace nlt {

StateVector::StateVector(GridPtr g, CVector stacked) : grid(std::move(g)), values(std::move(stacked)) {
    if (!grid) throw std::invalid_argument("StateVector: null grid");
    if (values.size() != 2 * grid->size())
        throw std::invalid_argument("StateVector: expected 2N samples");
}

StateVector::StateVector(GridPtr g, const CVector& plus, const CVector& minus) : grid(std::move(g)) {
    if (!grid) throw std::invalid_argument("StateVector: null grid");
    if (plus.size() != grid->size() || minus.size() != grid->size())
        throw std::invalid_argument("StateVector: component length does not match grid");
    values.resize(2 * grid->size());
    values << plus, minus;
}

double StateVector::norm() const {
    const RVector& w = grid->weights();
    return std::hypot(weighted_norm(plus(), w), weighted_norm(minus(), w));
}

DomainSplit decompose_domain(const StateVector& phi, double x) {
    const MomentumGrid& g = *phi.grid;
    const CVector ep = phase_diagonal(g, x, +1);
    const CVector inv_w = g.varpi().cwiseInverse().cast<Complex>();
    DomainSplit s;
    s.x = x;
    s.xi0 = phi.plus();
    s.zeta0 = inv_w.cwiseProduct(phi.minus() + phi.plus());
    s.xi = ep.cwiseProduct(phi.plus());
    s.zeta = inv_w.cwiseProduct(phi.minus() + ep.cwiseProduct(s.xi));
    return s;
}

StateVector reconstruct(const GridPtr& grid, const DomainSplit& split) {
    const CVector ep = phase_diagonal(*grid, split.x, +1);
    const CVector em = phase_diagonal(*grid, split.x, -1);
    const CVector w = grid->varpi().cast<Complex>();
    return {grid, em.cwiseProduct(split.xi),
            w.cwiseProduct(split.zeta) - ep.cwiseProduct(split.xi)};
}

ZetaNorm::ZetaNorm(const StateVector& phi0) : grid_(phi0.grid) {
    const DomainSplit s = decompose_domain(phi0, 0.0);
    zeta0_ = s.zeta0;
    xi0_ = s.xi0;
    a_ = weighted_norm(zeta0_, grid_->weights());
    b_ = 2.0 * weighted_norm(xi0_, grid_->weights());
}

double ZetaNorm::operator()(double x) const {
    const RVector& w = grid_->varpi();
    CVector z(zeta0_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j)
        z[j] = zeta0_[j] + (std::polar(1.0, 2.0 * x * w[j]) - 1.0) / w[j] * xi0_[j];
    return weighted_norm(z, grid_->weights());
}

double operator_zeta_bound(const MomentumGrid& grid) {
    return std::sqrt(2.0) / grid.varpi().minCoeff();
}

Hamiltonian::Hamiltonian(const PotentialModel& model, GridPtr grid)
    : grid_(std::move(grid)), vhat_(model, grid_) {
    inv_varpi_ = grid_->varpi().cwiseInverse();
    a0_ = vhat_.p_kernel() * inv_varpi_.asDiagonal();
    a0_norm_ = operator_norm(a0_, *grid_).value;
}

BlockOperator Hamiltonian::operator()(double x) const {
    const CVector ep = phase_diagonal(*grid_, x, +1);
    const CVector em = phase_diagonal(*grid_, x, -1);
    const CMatrix a = vhat_(x) * inv_varpi_.asDiagonal();
    BlockOperator h = BlockOperator::zero(grid_);
    h.block(0, 0) = 0.5 * em.asDiagonal() * a * ep.asDiagonal();
    h.block(0, 1) = 0.5 * em.asDiagonal() * a * em.asDiagonal();
    h.block(1, 0) = -0.5 * ep.asDiagonal() * a * ep.asDiagonal();
    h.block(1, 1) = -0.5 * ep.asDiagonal() * a * em.asDiagonal();
    return h;
}

CMatrix Hamiltonian::apply(double x, const CMatrix& y) const {
    const int n = grid_->size();
    if (y.rows() != 2 * n) throw std::invalid_argument("Hamiltonian::apply: expected 2N rows");
    const Complex g = vhat_.model().x_profile(x);
    CMatrix out(2 * n, y.cols());
    if (g == Complex{0.0, 0.0}) {
        out.setZero();
        return out;
    }
    const CVector ep = phase_diagonal(*grid_, x, +1);
    const CVector em = phase_diagonal(*grid_, x, -1);
    const CMatrix r = ep.asDiagonal() * y.topRows(n) + em.asDiagonal() * y.bottomRows(n);
    const CMatrix z = (0.5 * g) * (a0_ * r);
    out.topRows(n) = em.asDiagonal() * z;
    out.bottomRows(n) = -(ep.asDiagonal() * z);
    return out;
}

double Hamiltonian::norm_bound(double x) const {
    return std::abs(vhat_.model().x_profile(x)) * a0_norm_;
}

BlockOperator assemble_H(const PotentialModel& model, GridPtr grid, double x) {
    return Hamiltonian(model, std::move(grid))(x);
}

BlockOperator assemble_B(const PotentialModel& model, GridPtr grid, const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("assemble_B: need at least one position");
    for (std::size_t m = 1; m < xs.size(); ++m)
        if (!(xs[m] >= xs[m - 1]))
            throw std::invalid_argument("assemble_B: positions must be ordered x1 <= ... <= xn");
    const VhatAssembler vhat(model, grid);
    const RVector& w = grid->varpi();
    const std::size_t n = xs.size();
    CMatrix q = vhat(xs[n - 1]);
    for (std::size_t m = n - 1; m-- > 0;) {
        // s_m = i varpi^{-1} sin((x_{m+1} - x_m) varpi) vhat(x_m)
        const double dx = xs[m + 1] - xs[m];
        CVector d(w.size());
        for (Eigen::Index j = 0; j < w.size(); ++j) d[j] = kI * std::sin(dx * w[j]) / w[j];
        q = q * (d.asDiagonal() * vhat(xs[m]));
    }
    const CVector ep_n = phase_diagonal(*grid, xs[n - 1], +1);
    const CVector em_n = phase_diagonal(*grid, xs[n - 1], -1);
    const CVector ep_1 = phase_diagonal(*grid, xs[0], +1);
    const CVector em_1 = phase_diagonal(*grid, xs[0], -1);
    BlockOperator b = BlockOperator::zero(grid);
    b.block(0, 0) = 0.5 * em_n.asDiagonal() * q * ep_1.asDiagonal();
    b.block(0, 1) = 0.5 * em_n.asDiagonal() * q * em_1.asDiagonal();
    b.block(1, 0) = -0.5 * ep_n.asDiagonal() * q * ep_1.asDiagonal();
    b.block(1, 1) = -0.5 * ep_n.asDiagonal() * q * em_1.asDiagonal();
    return b;
}

BlockOperator assemble_L(GridPtr grid, double x) {
    const int n = grid->size();
    BlockOperator l = BlockOperator::zero(grid);
    l.block(1, 0) = phase_diagonal(*grid, 2.0 * x, +1).asDiagonal();
    l.block(1, 1) = CMatrix::Identity(n, n);
    return l;
}

BlockOperator inverse_varpi_block(GridPtr grid) {
    BlockOperator d = BlockOperator::zero(grid);
    d.block(0, 0) = grid->varpi().cwiseInverse().cast<Complex>().asDiagonal();
    d.block(1, 1) = grid->varpi().cwiseInverse().cast<Complex>().asDiagonal();
    return d;
}

Scheme parse_scheme(std::string_view tag) {
    if (tag == "dyson") return Scheme::Dyson;
    if (tag == "product") return Scheme::Product;
    if (tag == "rk4") return Scheme::Rk4;
    throw std::invalid_argument("unknown evolution scheme '" + std::string(tag) + "'");
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::Dyson: return "dyson";
    case Scheme::Product: return "product";
    case Scheme::Rk4: return "rk4";
    }
    return "unknown";
}

BlockOperator EvolutionResult::U() const {
    BlockOperator u = T;
    u.matrix += CMatrix::Identity(T.matrix.rows(), T.matrix.cols());
    return u;
}

namespace {

// Steps where ||H|| is below this fraction of its peak on the mesh are dropped.
constexpr double kInertStep = 1e-17;

double peak_bound(const Hamiltonian& h, double x0, double x, long steps) {
    const double dx = (x - x0) / static_cast<double>(steps);
    double peak = 0.0;
    for (long m = 0; m <= 2 * steps; ++m)
        peak = std::max(peak, h.norm_bound(x0 + 0.5 * static_cast<double>(m) * dx));
    return peak;
}

CMatrix product_run(const Hamiltonian& h, double x0, double x, long steps) {
    const int n2 = 2 * h.grid()->size();
    const CMatrix id = CMatrix::Identity(n2, n2);
    CMatrix t = CMatrix::Zero(n2, n2);
    const double dx = (x - x0) / static_cast<double>(steps);
    const double floor = kInertStep * peak_bound(h, x0, x, steps);
    for (long m = 0; m < steps; ++m) {
        const double xm = x0 + (static_cast<double>(m) + 0.5) * dx;
        if (h.norm_bound(xm) <= floor) continue;
        // (I - i dx H)(I + T) = I + T - i dx H (I + T)
        t += (-kI * dx) * h.apply(xm, id + t);
    }
    return t;
}

CMatrix rk4_run(const Hamiltonian& h, double x0, double x, long steps) {
    const int n2 = 2 * h.grid()->size();
    const CMatrix id = CMatrix::Identity(n2, n2);
    CMatrix t = CMatrix::Zero(n2, n2);
    const double dx = (x - x0) / static_cast<double>(steps);
    const Complex mi = -kI;
    const double floor = kInertStep * peak_bound(h, x0, x, steps);
    for (long m = 0; m < steps; ++m) {
        const double xa = x0 + static_cast<double>(m) * dx;
        const double xb = xa + 0.5 * dx;
        const double xc = xa + dx;
        const double bound = std::max({h.norm_bound(xa), h.norm_bound(xb), h.norm_bound(xc)});
        if (bound <= floor) continue;
        const CMatrix k1 = mi * h.apply(xa, id + t);
        const CMatrix k2 = mi * h.apply(xb, id + t + (0.5 * dx) * k1);
        const CMatrix k3 = mi * h.apply(xb, id + t + (0.5 * dx) * k2);
        const CMatrix k4 = mi * h.apply(xc, id + t + dx * k3);
        t += (dx / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return t;
}

double block_norm(const CMatrix& m, const MomentumGrid& grid) {
    return weighted_operator_norm(m, grid.block_sqrt_weights()).value;
}

long initial_steps(const EvolutionOptions& opt, double length) {
    const double want = std::ceil(opt.steps_per_unit * length);
    return std::max<long>(opt.min_steps, static_cast<long>(std::min(want, 1e15)));
}

EvolutionResult evolve_stepper(const Hamiltonian& h, double x0, double x,
                               const EvolutionOptions& opt, EvolutionResult res) {
    const MomentumGrid& grid = *h.grid();
    long n = initial_steps(opt, x - x0);
    if (opt.scheme == Scheme::Rk4) {
        CMatrix coarse = rk4_run(h, x0, x, n);
        for (;;) {
            CMatrix fine = rk4_run(h, x0, x, 2 * n);
            res.steps = 2 * n;
            res.error_estimate = block_norm(fine - coarse, grid) / 15.0;
            res.T.matrix = std::move(fine);
            const double scale = std::max(1.0, block_norm(res.T.matrix, grid));
            res.converged = res.error_estimate <= opt.tol * scale;
            if (res.converged || 4 * n > opt.max_steps) break;
            coarse = res.T.matrix;
            n *= 2;
        }
        return res;
    }
    // The exponential midpoint product is symmetric, so its error expands in
    // even powers of the step; one Richardson level removes the h^2 term.
    CMatrix u1 = product_run(h, x0, x, n);
    CMatrix u2 = product_run(h, x0, x, 2 * n);
    CMatrix r_prev = (4.0 * u2 - u1) / 3.0;
    for (;;) {
        CMatrix u4 = product_run(h, x0, x, 4 * n);
        CMatrix r = (4.0 * u4 - u2) / 3.0;
        res.steps = 4 * n;
        res.error_estimate = block_norm(r - r_prev, grid) / 15.0;
        res.T.matrix = r;
        const double scale = std::max(1.0, block_norm(r, grid));
        res.converged = res.error_estimate <= opt.tol * scale;
        if (res.converged || 8 * n > opt.max_steps) break;
        u2 = std::move(u4);
        r_prev = std::move(r);
        n *= 2;
    }
    return res;
}

int dyson_panels(const EvolutionOptions& opt, double length) {
    const long n = initial_steps(opt, length);
    if (n > (1L << 24)) throw ResourceError("Dyson mesh exceeds the panel budget");
    return std::max(4, static_cast<int>(n));
}

EvolutionResult evolve_dyson(const Hamiltonian& h, double x0, double x,
                             const EvolutionOptions& opt, EvolutionResult res) {
    const MomentumGrid& grid = *h.grid();
    const int n2 = 2 * grid.size();
    const NormProfile profile(h.model(), grid);
    const double zbound = operator_zeta_bound(grid);
    res.f_plus = zbound * f_ell(profile, 0, x, x0);
    res.g = g_functional(profile, x, x0);
    res.term_norms.push_back(1.0);
    double tail = dyson_tail_bound(res.f_plus, res.g, 1);
    const auto stop = [&](int order, const CMatrix& term) {
        res.term_norms.push_back(block_norm(term, grid));
        tail = dyson_tail_bound(res.f_plus, res.g, order + 1);
        return tail < opt.tol;
    };
    const std::vector<CMatrix> terms =
        tail < opt.tol ? std::vector<CMatrix>{CMatrix::Identity(n2, n2)}
                       : dyson_terms(h, x0, x, CMatrix::Identity(n2, n2),
                                     dyson_panels(opt, x - x0), opt.order_cap, opt.memory_budget,
                                     stop);
    res.T.matrix.setZero();
    // Sum smallest terms first.
    for (std::size_t m = terms.size(); m-- > 1;) res.T.matrix += terms[m];
    res.steps = static_cast<long>(terms.size()) - 1;
    res.error_estimate = tail;
    res.converged = tail < opt.tol;
    return res;
}

}  // namespace

EvolutionResult evolve(const Hamiltonian& h, double x0, double x, const EvolutionOptions& opt) {
    if (!(x0 <= x)) throw std::invalid_argument("evolve: requires x0 <= x");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("evolve: tol must be positive");
    EvolutionResult res;
    res.T = BlockOperator::zero(h.grid());
    res.scheme = opt.scheme;
    res.x0 = x0;
    res.x = x;
    if (x == x0) {
        if (opt.scheme == Scheme::Dyson) res.term_norms = {1.0};
        return res;
    }
    if (opt.scheme == Scheme::Dyson) return evolve_dyson(h, x0, x, opt, std::move(res));
    return evolve_stepper(h, x0, x, opt, std::move(res));
}

EvolutionResult evolve(const PotentialModel& model, GridPtr grid, double x0, double x,
                       const EvolutionOptions& opt) {
    return evolve(Hamiltonian(model, std::move(grid)), x0, x, opt);
}

StateEvolution evolve_state(const Hamiltonian& h, double x0, double x, const StateVector& phi0,
                            const EvolutionOptions& opt) {
    if (!(x0 <= x)) throw std::invalid_argument("evolve_state: requires x0 <= x");
    if (phi0.grid != h.grid()) throw std::invalid_argument("evolve_state: grid mismatch");
    StateEvolution res;
    res.phi0 = phi0;
    res.x0 = x0;
    res.x = x;
    const double norm0 = phi0.norm();
    const NormProfile profile(h.model(), *h.grid());
    const ZetaNorm zeta(phi0);
    res.f_plus = f_plus(profile, zeta, x, x0);
    res.g = g_functional(profile, x, x0);
    res.term_norms.push_back(norm0);
    res.partial_sums.push_back(norm0);
    res.tail_bound = dyson_tail_bound(res.f_plus, res.g, 1);
    const double target = opt.tol * std::max(norm0, 1e-300);
    std::vector<CMatrix> terms{phi0.values};
    if (x > x0 && res.tail_bound >= target) {
        const auto stop = [&](int order, const CMatrix& term) {
            const double nrm = StateVector(h.grid(), CVector(term.col(0))).norm();
            res.term_norms.push_back(nrm);
            res.partial_sums.push_back(res.partial_sums.back() + nrm);
            res.tail_bound = dyson_tail_bound(res.f_plus, res.g, order + 1);
            return res.tail_bound < target;
        };
        terms = dyson_terms(h, x0, x, phi0.values, dyson_panels(opt, x - x0), opt.order_cap,
                            opt.memory_budget, stop);
    }
    CVector sum = CVector::Zero(phi0.values.size());
    for (std::size_t m = terms.size(); m-- > 0;) sum += terms[m].col(0);
    res.phi = StateVector(h.grid(), std::move(sum));
    res.converged = x == x0 || res.tail_bound < target;
    return res;
}

DysonTerm dyson_term(const PotentialModel& model, GridPtr grid, int n, double x0, double x,
                     const StateVector& phi0, int panels) {
    if (n < 0) throw std::invalid_argument("dyson_term: order must be nonnegative");
    if (!(x0 <= x)) throw std::invalid_argument("dyson_term: requires x0 <= x");
    DysonTerm out;
    if (n == 0) {
        out.phi = phi0;
    } else if (x == x0) {
        out.phi = StateVector(grid, CVector::Zero(2 * grid->size()));
    } else {
        const Hamiltonian h(model, grid);
        const auto terms = dyson_terms(h, x0, x, phi0.values, panels, n, std::size_t{1} << 30);
        out.phi = StateVector(grid, CVector(terms.back().col(0)));
    }
    out.norm = out.phi.norm();
    return out;
}

double composition_check(const PotentialModel& model, GridPtr grid, double x1, double x2,
                         double x3, const EvolutionOptions& opt) {
    if (!(x1 <= x2 && x2 <= x3)) throw std::invalid_argument("composition_check: unordered triple");
    const Hamiltonian h(model, grid);
    const EvolutionResult a = evolve(h, x2, x3, opt);
    const EvolutionResult b = evolve(h, x1, x2, opt);
    const EvolutionResult c = evolve(h, x1, x3, opt);
    // (I + A)(I + B) - (I + C) = A + B + AB - C
    const CMatrix diff = a.T.matrix + b.T.matrix + a.T.matrix * b.T.matrix - c.T.matrix;
    const double num = block_norm(diff, *grid);
    if (num == 0.0) return 0.0;
    return num / block_norm(c.U().matrix, *grid);
}

}  // namespace nlt
