#include "nlt/bounds.hpp"

#include <cmath>
#include <sstream>

#include "nlt/scatter.hpp"

namespace nlt {

namespace {

std::string label(const std::vector<double>& xs) {
    std::ostringstream os;
    os.precision(17);
    os << "x=(";
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    os << ")";
    return os.str();
}

std::string label(const char* name, double v) {
    std::ostringstream os;
    os.precision(17);
    os << name << "=" << v;
    return os.str();
}

}  // namespace

std::vector<double> envelope_samples(double alpha, int count, double x_max) {
    if (count < 1) return {};
    if (!(alpha > 0.0) || !(x_max >= alpha))
        throw std::invalid_argument("envelope_samples: need 0 < alpha <= x_max");
    std::vector<double> out;
    const double la = std::log(alpha);
    const double lb = std::log(x_max);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const double x = i == count - 1 ? x_max : std::exp(la + t * (lb - la));
        out.push_back(i % 2 == 0 ? x : -x);
    }
    return out;
}

BoundCertificate certify_lemma2(const PotentialModel& model, GridPtr grid,
                                const std::vector<double>& x_samples) {
    return envelope_check(model, std::move(grid), x_samples);
}

BoundCertificate certify_lemma5(const PotentialModel& model, GridPtr grid,
                                const std::vector<std::vector<double>>& tuples) {
    BoundCertificate cert;
    cert.name = "b-product";
    cert.provenance =
        "||B(x1)|| <= ||vhat(x1)||; ||B(xn..x1)|| <= ||vhat(xn)|| prod |x_{m+1}-x_m| ||vhat(x_m)||";
    const VhatAssembler vhat(model, grid);
    for (const auto& xs : tuples) {
        const double lhs = operator_norm(assemble_B(model, grid, xs)).value;
        const std::size_t n = xs.size();
        double rhs = operator_norm(vhat(xs[n - 1]), *grid).value;
        for (std::size_t m = 0; m + 1 < n; ++m)
            rhs *= std::abs(xs[m + 1] - xs[m]) * operator_norm(vhat(xs[m]), *grid).value;
        cert.add(label(xs), lhs, rhs);
    }
    return cert;
}

BoundCertificate certify_theorem3(const StateEvolution& evo) {
    BoundCertificate cert;
    cert.name = "dyson-partial-sums";
    cert.provenance = "sum_{n<=K} ||Phi_n|| <= ||Phi0|| + F+ sum_{n=1}^{K} G^{n-1}/(n-1)!";
    const double norm0 = evo.term_norms.empty() ? 0.0 : evo.term_norms.front();
    double series = 0.0;
    double term = 1.0;  // G^{n-1}/(n-1)!
    for (std::size_t k = 0; k < evo.partial_sums.size(); ++k) {
        if (k >= 1) {
            if (k >= 2) term *= evo.g / static_cast<double>(k - 1);
            series += term;
        }
        cert.add(label("K", static_cast<double>(k)), evo.partial_sums[k], norm0 + evo.f_plus * series);
    }
    return cert;
}

BoundCertificate certify_refined_orders(const PotentialModel& model, const MomentumGrid& grid,
                                        const StateEvolution& evo) {
    BoundCertificate cert;
    cert.name = "refined-orders";
    cert.provenance = "||Phi_n|| <= f0(x,x0) F-(x,x0) (-G(x0,x))^{n-2}/(n-2)!, n >= 2";
    const NormProfile profile(model, grid);
    const ZetaNorm zeta(evo.phi0);
    const double f0 = f_ell(profile, 0, evo.x, evo.x0);
    const double fm = f_minus(profile, zeta, evo.x, evo.x0);
    const double mg = -g_functional(profile, evo.x0, evo.x);
    double term = 1.0;
    for (std::size_t n = 2; n < evo.term_norms.size(); ++n) {
        if (n >= 3) term *= mg / static_cast<double>(n - 2);
        cert.add(label("n", static_cast<double>(n)), evo.term_norms[n], f0 * fm * term);
    }
    return cert;
}

BoundCertificate certify_theorem4(const PotentialModel& model, GridPtr grid,
                                  const StateVector& phi0, const std::vector<double>& x_plus) {
    if (!(model.sigma() > 3.0)) throw std::invalid_argument("certify_theorem4: sigma must exceed 3");
    BoundCertificate cert;
    cert.name = "tail-constants";
    cert.provenance =
        "F+(x+,a) <= gamma; G(x+,a) <= delta; F-(-a,x-) <= 2 pi beta (A + B a)/((s-3) a^(s-2)); "
        "int_{x-}^{-a} (-a-x') ||vhat|| <= delta";
    const NormProfile profile(model, *grid);
    const ZetaNorm zeta(phi0);
    const TruncationBounds tb = truncation_bounds(model, 1.0, zeta.a(), zeta.b());
    const double a = model.alpha();
    for (double xp : x_plus) {
        if (!(xp >= a)) throw std::invalid_argument("certify_theorem4: x+ must be >= alpha");
        const double xm = -xp;
        cert.add(label("F+ x+", xp), f_plus(profile, zeta, xp, a), tb.gamma);
        cert.add(label("G x+", xp), g_functional(profile, xp, a), tb.delta);
        cert.add(label("F- x-", xm), f_minus(profile, zeta, -a, xm), tb.f_minus_bound);
        cert.add(label("-G x-", xm), -g_functional(profile, xm, -a), tb.delta);
    }
    return cert;
}

BoundCertificate certify_nilpotency(const PotentialModel& model, GridPtr grid,
                                    const std::vector<double>& x_samples) {
    BoundCertificate cert;
    cert.name = "nilpotency";
    cert.provenance = "||H(x)^2|| <= 1e-12 ||H(x)||^2";
    const Hamiltonian h(model, grid);
    for (double x : x_samples) {
        const BlockOperator hx = h(x);
        const double nh = operator_norm(hx).value;
        const double lhs = operator_norm(BlockOperator(grid, hx.matrix * hx.matrix)).value;
        cert.add(label("x", x), lhs, 1e-12 * nh * nh);
    }
    return cert;
}

BoundCertificate certify_zeta_growth(const StateVector& phi0, const std::vector<double>& x_samples) {
    BoundCertificate cert;
    cert.name = "zeta-growth";
    cert.provenance = "||zeta(x)|| <= ||zeta0|| + 2 ||xi0|| |x|";
    const ZetaNorm zeta(phi0);
    for (double x : x_samples) cert.add(label("x", x), zeta(x), zeta.a() + zeta.b() * std::abs(x));
    return cert;
}

std::vector<double> widening_sequence(double alpha, double x_max) {
    std::vector<double> out;
    for (double x = alpha; x <= x_max * (1.0 + 1e-12); x *= 2.0) out.push_back(x);
    return out;
}

}  // namespace nlt
