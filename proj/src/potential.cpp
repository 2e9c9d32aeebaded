#include "nlt/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nlt {

Family parse_family(std::string_view tag) {
    if (tag == "gauss-gauss") return Family::GaussGauss;
    if (tag == "gauss-box") return Family::GaussBox;
    if (tag == "powerlaw-gauss") return Family::PowerlawGauss;
    if (tag == "one-sided") return Family::OneSided;
    throw std::invalid_argument("unknown potential family '" + std::string(tag) + "'");
}

std::string to_string(Family family) {
    switch (family) {
    case Family::GaussGauss: return "gauss-gauss";
    case Family::GaussBox: return "gauss-box";
    case Family::PowerlawGauss: return "powerlaw-gauss";
    case Family::OneSided: return "one-sided";
    }
    return "unknown";
}

namespace {

const double kSqrtPi = std::sqrt(kPi);

// sup_y |v(x,y)| / |g(x)|, i.e. the y-profile bound used for the envelope.
double y_sup(Family family) { return family == Family::OneSided ? 1.0 / (2.0 * kPi) : 1.0; }

void validate_params(Family family, const FamilyParams& params) {
    if (!std::isfinite(params.v0.real()) || !std::isfinite(params.v0.imag()))
        throw std::invalid_argument("v0 must be finite");
    if (family == Family::GaussBox && !(params.a > 0.0))
        throw std::invalid_argument("gauss-box: half-width a must be positive");
    if (family == Family::PowerlawGauss && !(params.profile_sigma > 0.0))
        throw std::invalid_argument("powerlaw-gauss: profile sigma must be positive");
}

}  // namespace

PotentialModel::PotentialModel(Family family, FamilyParams params, Envelope envelope,
                               bool transfer_ready)
    : name_(to_string(family)), family_(family), params_(params), envelope_(envelope),
      transfer_ready_(transfer_ready) {
    validate_params(family_, params_);
    if (!(envelope_.alpha > 0.0) || !(envelope_.beta >= 0.0) || !(envelope_.sigma > 0.0))
        throw std::invalid_argument("envelope requires alpha > 0, beta >= 0, sigma > 0");
    if (transfer_ready_ && !(envelope_.sigma > 3.0))
        throw std::invalid_argument("transfer-ready models require sigma > 3");
}

Complex PotentialModel::x_profile(double x) const {
    switch (family_) {
    case Family::PowerlawGauss:
        return params_.v0 * std::pow(1.0 + x * x, -0.5 * params_.profile_sigma);
    default: return params_.v0 * std::exp(-x * x);
    }
}

double PotentialModel::p_profile(double p) const {
    switch (family_) {
    case Family::GaussGauss:
    case Family::PowerlawGauss: return kSqrtPi * std::exp(-0.25 * p * p);
    case Family::GaussBox: {
        const double ap = params_.a * p;
        if (std::abs(ap) < 1e-4) return 2.0 * params_.a * (1.0 - ap * ap / 6.0);
        return 2.0 * std::sin(ap) / p;
    }
    case Family::OneSided: return p > 0.0 ? p * std::exp(-p) : 0.0;
    }
    return 0.0;
}

double PotentialModel::mu(double k) const {
    double hmax = 0.0;
    switch (family_) {
    case Family::GaussGauss:
    case Family::PowerlawGauss: hmax = kSqrtPi; break;
    case Family::GaussBox: hmax = 2.0 * params_.a; break;
    case Family::OneSided: {
        const double p = std::min(1.0, 2.0 * k);
        hmax = p * std::exp(-p);
        break;
    }
    }
    return std::abs(params_.v0) * hmax;
}

bool PotentialModel::hermitian_kernel() const {
    return family_ != Family::OneSided && params_.v0.imag() == 0.0;
}

PotentialModel PotentialModel::with_v0(Complex v0) const {
    FamilyParams p = params_;
    p.v0 = v0;
    return PotentialModel(family_, p, envelope_, transfer_ready_);
}

PotentialModel PotentialModel::with_envelope(Envelope envelope) const {
    return PotentialModel(family_, params_, envelope, transfer_ready_);
}

double gaussian_envelope_factor(double alpha, double sigma) {
    // d/dx [sigma log(1+x) - x^2] = 0 at x* = (sqrt(1+2 sigma) - 1) / 2.
    const double xstar = 0.5 * (std::sqrt(1.0 + 2.0 * sigma) - 1.0);
    const double x = std::max(alpha, xstar);
    return std::exp(sigma * std::log1p(x) - x * x);
}

double powerlaw_envelope_factor(double alpha, double sigma, double profile_sigma) {
    if (sigma > profile_sigma)
        throw std::invalid_argument(
            "powerlaw-gauss: declared sigma exceeds the profile exponent; no finite beta");
    // Stationary point of sigma log(1+x) - (s/2) log(1+x^2):
    // (sigma - s) x^2 - s x + sigma = 0.
    double xstar = 1.0;
    const double s = profile_sigma;
    if (sigma < s) {
        const double a = sigma - s;
        const double disc = s * s - 4.0 * a * sigma;
        xstar = (s - std::sqrt(disc)) / (2.0 * a);
        if (xstar < 0.0) xstar = (s + std::sqrt(disc)) / (2.0 * a);
    }
    const double x = std::max(alpha, xstar);
    return std::exp(sigma * std::log1p(x) - 0.5 * s * std::log1p(x * x));
}

double derived_beta(Family family, const FamilyParams& params, double alpha, double sigma) {
    const double factor = family == Family::PowerlawGauss
                              ? powerlaw_envelope_factor(alpha, sigma, params.profile_sigma)
                              : gaussian_envelope_factor(alpha, sigma);
    return std::abs(params.v0) * y_sup(family) * factor;
}

Envelope default_envelope(Family family, const FamilyParams& params) {
    Envelope env;
    env.alpha = 1.0;
    env.sigma = family == Family::PowerlawGauss ? params.profile_sigma : 12.0;
    env.beta = derived_beta(family, params, env.alpha, env.sigma);
    return env;
}

PotentialModel builtin_model(Family family, const FamilyParams& params,
                             std::optional<Envelope> declared, bool transfer_ready) {
    validate_params(family, params);
    Envelope env = declared ? *declared : default_envelope(family, params);
    return PotentialModel(family, params, env, transfer_ready);
}

VhatAssembler::VhatAssembler(const PotentialModel& model, GridPtr grid)
    : model_(model), grid_(std::move(grid)) {
    const int n = grid_->size();
    const RVector& p = grid_->p();
    const RVector& w = grid_->weights();
    p_kernel_.resize(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double d = p[i] - p[j];
            const double h = model_.p_profile(d);
            if (!std::isfinite(h)) {
                std::ostringstream os;
                os << "non-finite vtilde sample at p=" << d;
                throw ModelEvaluationError(os.str(), 0.0, d);
            }
            p_kernel_(i, j) = h * w[j] / (2.0 * kPi);
        }
    }
}

CMatrix VhatAssembler::operator()(double x) const {
    const Complex g = model_.x_profile(x);
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
        std::ostringstream os;
        os << "non-finite vtilde sample at x=" << x;
        throw ModelEvaluationError(os.str(), x, 0.0);
    }
    return g * p_kernel_;
}

VhatMatrix assemble_vhat(const PotentialModel& model, GridPtr grid, double x) {
    VhatAssembler assembler(model, grid);
    return {std::move(grid), x, assembler(x)};
}

VhatSpectrum vhat_spectrum(const VhatMatrix& v) {
    VhatSpectrum out;
    const CMatrix b = symmetrize(v.entries, v.grid->sqrt_weights());
    const int n = static_cast<int>(b.rows());
    out.svd_norm = operator_norm(v.entries, *v.grid).value;
    const CMatrix comm = b * b.adjoint() - b.adjoint() * b;
    const double scale = out.svd_norm * out.svd_norm;
    out.normality_residual = scale > 0.0 ? comm.norm() / scale : 0.0;
    out.normal = out.normality_residual <= 1e-10;

    Eigen::ComplexEigenSolver<CMatrix> es(b, false);
    if (es.info() != Eigen::Success) {
        out.eigensolver_ok = false;
        out.eigenvalues = CVector::Zero(n);
        out.norm = out.svd_norm;
        return out;
    }
    out.eigenvalues = es.eigenvalues();
    out.max_abs_eigenvalue = n > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    out.norm = out.normal ? out.max_abs_eigenvalue : out.svd_norm;
    return out;
}

BoundCertificate envelope_check(const PotentialModel& model, GridPtr grid,
                                const std::vector<double>& x_samples) {
    BoundCertificate cert;
    cert.name = "envelope";
    cert.provenance = "||vhat_k(x)||_0 <= 2 pi beta / (1+|x|)^sigma for |x| >= alpha";
    const VhatAssembler assemble(model, grid);
    for (double x : x_samples) {
        if (std::abs(x) < model.alpha())
            throw std::invalid_argument("envelope_check: sample inside |x| < alpha");
        const double lhs = operator_norm(assemble(x), *grid).value;
        const double rhs = 2.0 * kPi * model.beta() / std::pow(1.0 + std::abs(x), model.sigma());
        std::ostringstream os;
        os.precision(17);
        os << "x=" << x;
        cert.add(os.str(), lhs, rhs);
    }
    return cert;
}

ContinuityTable continuity_probe(const PotentialModel& model, GridPtr grid, double x,
                                 const std::vector<double>& dx_sequence) {
    ContinuityTable table;
    table.x = x;
    const VhatAssembler assemble(model, grid);
    const CMatrix base = assemble(x);
    // Separable kernel: the p-sup of the difference is |dg| * sup|h| on (-2k, 2k).
    const double hsup = model.params().v0 == Complex{0.0, 0.0}
                            ? 0.0
                            : model.mu(grid->k()) / std::abs(model.params().v0);
    for (double dx : dx_sequence) {
        ContinuityRow row;
        row.dx = dx;
        row.difference_norm = operator_norm(assemble(x + dx) - base, *grid).value;
        row.sup_difference = std::abs(model.x_profile(x + dx) - model.x_profile(x)) * hsup;
        row.bound = grid->k() / kPi * row.sup_difference;
        if (row.difference_norm > row.bound * (1.0 + 1e-12) + 1e-15) table.bounded = false;
        table.rows.push_back(row);
    }
    std::vector<ContinuityRow> sorted = table.rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return std::abs(a.dx) > std::abs(b.dx); });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double noise = 1e-12 * std::max(1.0, sorted.front().difference_norm);
        if (sorted[i].difference_norm > sorted[i - 1].difference_norm + noise)
            table.decaying = false;
    }
    return table;
}

}  // namespace nlt
