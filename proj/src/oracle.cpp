#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nlt/evolution.hpp"

namespace nlt {

StateVector to_state(GridPtr grid, double x, const CVector& psi, const CVector& dpsi) {
    const CVector ep = phase_diagonal(*grid, x, +1);
    const CVector em = phase_diagonal(*grid, x, -1);
    const CVector w = grid->varpi().cast<Complex>();
    const CVector plus = kPi * em.cwiseProduct(w.cwiseProduct(psi) - kI * dpsi);
    const CVector minus = kPi * ep.cwiseProduct(w.cwiseProduct(psi) + kI * dpsi);
    return {std::move(grid), plus, minus};
}

void from_state(const StateVector& phi, double x, CVector& psi, CVector& dpsi) {
    const MomentumGrid& g = *phi.grid;
    const CVector ep = phase_diagonal(g, x, +1);
    const CVector em = phase_diagonal(g, x, -1);
    const CVector a = ep.cwiseProduct(phi.plus());
    const CVector b = em.cwiseProduct(phi.minus());
    psi = (a + b).cwiseQuotient(g.varpi().cast<Complex>()) / (2.0 * kPi);
    dpsi = (kI / (2.0 * kPi)) * (a - b);
}

OracleResult schrodinger_oracle(const PotentialModel& model, GridPtr grid, double x0, double x,
                                const StateVector& phi0, double rel_tol) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<Complex>;
    if (!(x0 <= x)) throw std::invalid_argument("schrodinger_oracle: requires x0 <= x");

    const int n = grid->size();
    const VhatAssembler vhat(model, grid);
    const RVector w2 = grid->varpi().array().square();
    CVector psi, dpsi;
    from_state(phi0, x0, psi, dpsi);

    State s(2 * n);
    for (int j = 0; j < n; ++j) {
        s[j] = psi[j];
        s[n + j] = dpsi[j];
    }
    const CMatrix& kernel = vhat.p_kernel();
    auto rhs = [&](const State& y, State& dy, double t) {
        const Complex g = model.x_profile(t);
        Eigen::Map<const CVector> u(y.data(), n);
        Eigen::Map<const CVector> du(y.data() + n, n);
        Eigen::Map<CVector> out_u(dy.data(), n);
        Eigen::Map<CVector> out_du(dy.data() + n, n);
        out_u = du;
        out_du = g * (kernel * u) - w2.cast<Complex>().cwiseProduct(u);
    };

    OracleResult res;
    double scale = 0.0;
    for (const Complex& c : s) scale = std::max(scale, std::abs(c));
    const double abs_tol = rel_tol * std::max(scale, 1e-300);
    try {
        auto stepper = odeint::make_controlled(abs_tol, rel_tol,
                                               odeint::runge_kutta_fehlberg78<State>());
        if (x > x0) res.steps = static_cast<long>(odeint::integrate_adaptive(
                        stepper, rhs, s, x0, x, std::min(0.01, x - x0)));
    } catch (const std::exception&) {
        res.ok = false;
    }
    for (int j = 0; j < n; ++j) {
        psi[j] = s[j];
        dpsi[j] = s[n + j];
    }
    for (Complex c : s)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) res.ok = false;
    res.phi = to_state(grid, x, psi, dpsi);
    return res;
}

}  // namespace nlt
