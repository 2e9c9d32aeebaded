#pragma once

// Potential families in the class C_{s,k}, given by the partial Fourier
// transform vtilde(x, p) = int dy exp(-i p y) v(x, y), and the discretized
// Hilbert-Schmidt operator
//
//     (vhat_k(x) xi)(p) = (1/2pi) int_{-k}^{k} dq vtilde(x, p - q) xi(q).
//
// Every builtin family is separable, vtilde(x, p) = g(x) h(p).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlt/certificate.hpp"
#include "nlt/momgrid.hpp"

namespace nlt {

enum class Family {
    GaussGauss,     ///< v = v0 exp(-x^2 - y^2)
    GaussBox,       ///< v = v0 exp(-x^2) 1_{|y| < a}
    PowerlawGauss,  ///< v = v0 (1 + x^2)^{-s/2} exp(-y^2)
    OneSided,       ///< vtilde = v0 exp(-x^2) p exp(-p) 1_{p > 0}
};

Family parse_family(std::string_view tag);
std::string to_string(Family family);

struct FamilyParams {
    Complex v0{1.0, 0.0};
    double a = 1.0;              ///< box half-width (gauss-box)
    double profile_sigma = 4.0;  ///< x-decay exponent s (powerlaw-gauss)
};

/// Declared constants of |v(x,y)| <= beta / (1+|x|)^sigma for |x| >= alpha.
struct Envelope {
    double alpha = 1.0;
    double beta = 0.0;
    double sigma = 4.0;
};

class PotentialModel {
public:
    PotentialModel(Family family, FamilyParams params, Envelope envelope, bool transfer_ready);

    const std::string& name() const noexcept { return name_; }
    Family family() const noexcept { return family_; }
    const FamilyParams& params() const noexcept { return params_; }
    const Envelope& envelope() const noexcept { return envelope_; }
    double alpha() const noexcept { return envelope_.alpha; }
    double beta() const noexcept { return envelope_.beta; }
    double sigma() const noexcept { return envelope_.sigma; }
    bool transfer_ready() const noexcept { return transfer_ready_; }

    Complex x_profile(double x) const;
    double p_profile(double p) const;
    Complex vtilde(double x, double p) const { return x_profile(x) * p_profile(p); }

    /// sup over x and |p| <= 2k of |vtilde(x, p)|.
    double mu(double k) const;

    /// Real v0 and a y-even profile: the discretized kernel is Hermitian.
    bool hermitian_kernel() const;

    /// Same family and envelope with v0 replaced.
    PotentialModel with_v0(Complex v0) const;
    PotentialModel with_envelope(Envelope envelope) const;

private:
    std::string name_;
    Family family_;
    FamilyParams params_;
    Envelope envelope_;
    bool transfer_ready_;
};

/// max over |x| >= alpha of (1+|x|)^sigma exp(-x^2).
double gaussian_envelope_factor(double alpha, double sigma);

/// max over |x| >= alpha of (1+|x|)^sigma (1+x^2)^{-profile_sigma/2}; requires
/// sigma <= profile_sigma.
double powerlaw_envelope_factor(double alpha, double sigma, double profile_sigma);

/// Smallest beta for which the family satisfies the envelope with (alpha, sigma).
double derived_beta(Family family, const FamilyParams& params, double alpha, double sigma);

/// Default declared (alpha, beta, sigma) for a family.
Envelope default_envelope(Family family, const FamilyParams& params);

/// Builds a builtin model. Missing envelope fields are derived. A transfer-ready
/// request with sigma <= 3 is rejected.
PotentialModel builtin_model(Family family, const FamilyParams& params,
                             std::optional<Envelope> declared = std::nullopt,
                             bool transfer_ready = true);

struct VhatMatrix {
    GridPtr grid;
    double x = 0.0;
    CMatrix entries;  ///< (1/2pi) vtilde(x, p_i - q_j) w_j
};

/// Caches the p-dependent part of a separable kernel on one grid.
class VhatAssembler {
public:
    VhatAssembler(const PotentialModel& model, GridPtr grid);

    CMatrix operator()(double x) const;
    const GridPtr& grid() const noexcept { return grid_; }
    const PotentialModel& model() const noexcept { return model_; }
    /// The x-independent factor: V(x) = x_profile(x) * p_kernel().
    const CMatrix& p_kernel() const noexcept { return p_kernel_; }

private:
    PotentialModel model_;
    GridPtr grid_;
    CMatrix p_kernel_;  ///< (1/2pi) h(p_i - q_j) w_j
};

VhatMatrix assemble_vhat(const PotentialModel& model, GridPtr grid, double x);

struct VhatSpectrum {
    CVector eigenvalues;
    double max_abs_eigenvalue = 0.0;
    double svd_norm = 0.0;
    double normality_residual = 0.0;  ///< ||B B^H - B^H B|| / ||B||^2
    bool normal = true;
    bool eigensolver_ok = true;
    /// max |nu| for normal operators, the SVD norm otherwise.
    double norm = 0.0;
};

VhatSpectrum vhat_spectrum(const VhatMatrix& v);

/// Operator-norm envelope check ||vhat_k(x)|| <= 2 pi beta / (1+|x|)^sigma.
BoundCertificate envelope_check(const PotentialModel& model, GridPtr grid,
                                const std::vector<double>& x_samples);

struct ContinuityRow {
    double dx = 0.0;
    double difference_norm = 0.0;  ///< ||vhat(x+dx) - vhat(x)||
    double sup_difference = 0.0;   ///< sup_{|p|<2k} |vtilde(x+dx,p) - vtilde(x,p)|
    double bound = 0.0;            ///< (k/pi) * sup_difference
};

struct ContinuityTable {
    double x = 0.0;
    std::vector<ContinuityRow> rows;
    bool bounded = true;   ///< difference_norm <= bound on every row
    bool decaying = true;  ///< difference_norm shrinks with dx (within 1e-12 noise)
};

ContinuityTable continuity_probe(const PotentialModel& model, GridPtr grid, double x,
                                 const std::vector<double>& dx_sequence);

}  // namespace nlt
