#pragma once

// Effective Hamiltonian on C^2 (x) L^2(-k,k)
//
//     H(x) = (1/2) exp(-i x sigma3 varpi) vhat(x) varpi^{-1} K exp(i x sigma3 varpi),
//     K = [[1, 1], [-1, -1]],
//
// and the evolution operator U(x, x0) solving i dU/dx = H(x) U, U(x0, x0) = I.
// H(x) has rank N and squares to zero, H = L R with
//     R = [diag e^{ixw}, diag e^{-ixw}],  L = (1/2) [e^{-ixw} A; -e^{ixw} A],
// A = vhat(x) varpi^{-1}. Evolution results are stored as U = I + T.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nlt/momgrid.hpp"
#include "nlt/potential.hpp"

namespace nlt {

/// Discretized element (phi_plus, phi_minus) of C^2 (x) L^2(-k,k).
struct StateVector {
    GridPtr grid;
    CVector values;  ///< [phi_plus; phi_minus], length 2N

    StateVector() = default;
    StateVector(GridPtr g, CVector stacked);
    StateVector(GridPtr g, const CVector& plus, const CVector& minus);

    auto plus() const { return values.head(grid->size()); }
    auto minus() const { return values.tail(grid->size()); }
    double norm() const;
};

/// Phi = [e^{-ixw} xi(x); w zeta(x) - e^{ixw} xi(x)].
struct DomainSplit {
    double x = 0.0;
    CVector zeta;
    CVector xi;
    CVector zeta0;
    CVector xi0;
};

DomainSplit decompose_domain(const StateVector& phi, double x);
StateVector reconstruct(const GridPtr& grid, const DomainSplit& split);

/// ||zeta(x)|| for a fixed initial state, with a = ||zeta0|| and b = 2 ||xi0||.
class ZetaNorm {
public:
    explicit ZetaNorm(const StateVector& phi0);
    double operator()(double x) const;
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }

private:
    GridPtr grid_;
    CVector zeta0_;
    CVector xi0_;
    double a_;
    double b_;
};

/// sup over unit Phi0 of ||varpi^{-1} L(x) Phi0||, i.e. sqrt(2) / min varpi.
double operator_zeta_bound(const MomentumGrid& grid);

class Hamiltonian {
public:
    Hamiltonian(const PotentialModel& model, GridPtr grid);

    const GridPtr& grid() const noexcept { return grid_; }
    const PotentialModel& model() const noexcept { return vhat_.model(); }
    const VhatAssembler& vhat() const noexcept { return vhat_; }

    BlockOperator operator()(double x) const;

    /// H(x) Y for a 2N x c block, in O(N^2 c).
    CMatrix apply(double x, const CMatrix& y) const;

    /// Upper bound on ||H(x)|| used to skip numerically inert steps.
    double norm_bound(double x) const;

private:
    GridPtr grid_;
    VhatAssembler vhat_;
    CMatrix a0_;  ///< p_kernel * varpi^{-1}
    RVector inv_varpi_;
    double a0_norm_ = 0.0;
};

BlockOperator assemble_H(const PotentialModel& model, GridPtr grid, double x);

/// B(x1) for a single point and the product form for x1 <= ... <= xn.
BlockOperator assemble_B(const PotentialModel& model, GridPtr grid, const std::vector<double>& xs);

/// L(x) = [[0, 0], [e^{2ixw}, 1]].
BlockOperator assemble_L(GridPtr grid, double x);

/// diag(varpi^{-1}, varpi^{-1}).
BlockOperator inverse_varpi_block(GridPtr grid);

enum class Scheme { Dyson, Product, Rk4 };

Scheme parse_scheme(std::string_view tag);
std::string to_string(Scheme scheme);

struct EvolutionOptions {
    Scheme scheme = Scheme::Product;
    double tol = 1e-8;
    int order_cap = 40;
    double steps_per_unit = 256.0;
    int min_steps = 16;
    long max_steps = 1L << 20;
    std::size_t memory_budget = std::size_t{1} << 30;  ///< bytes, Dyson only
};

struct EvolutionResult {
    BlockOperator T;  ///< U = I + T
    Scheme scheme = Scheme::Product;
    double x0 = 0.0;
    double x = 0.0;
    bool converged = true;
    double error_estimate = 0.0;
    long steps = 0;
    std::vector<double> term_norms;  ///< Dyson: ||Phi_n||_0 for n = 0, 1, ...
    double f_plus = 0.0;             ///< Dyson: operator-level F+(x, x0)
    double g = 0.0;                  ///< Dyson: G(x, x0)

    BlockOperator U() const;
};

EvolutionResult evolve(const PotentialModel& model, GridPtr grid, double x0, double x,
                       const EvolutionOptions& options = {});
EvolutionResult evolve(const Hamiltonian& hamiltonian, double x0, double x,
                       const EvolutionOptions& options = {});

/// Dyson series applied to one initial state.
struct StateEvolution {
    StateVector phi0;
    StateVector phi;
    double x0 = 0.0;
    double x = 0.0;
    std::vector<double> term_norms;  ///< ||Phi_n|| for n = 0, 1, ...
    std::vector<double> partial_sums;
    double f_plus = 0.0;
    double g = 0.0;
    double tail_bound = 0.0;
    bool converged = true;
};

StateEvolution evolve_state(const Hamiltonian& hamiltonian, double x0, double x,
                            const StateVector& phi0, const EvolutionOptions& options = {});

struct DysonTerm {
    StateVector phi;
    double norm = 0.0;
};

/// Phi_n(x, x0) by the Volterra recursion on `panels` uniform panels.
DysonTerm dyson_term(const PotentialModel& model, GridPtr grid, int n, double x0, double x,
                     const StateVector& phi0, int panels);

/// Every Dyson term up to order `max_order` for a block of initial columns.
/// Entry n of the result is (-i)^n I_n(x); entry 0 is the initial block.
std::vector<CMatrix> dyson_terms(const Hamiltonian& hamiltonian, double x0, double x,
                                 const CMatrix& initial, int panels, int max_order,
                                 std::size_t memory_budget,
                                 const std::function<bool(int, const CMatrix&)>& stop = {});

double composition_check(const PotentialModel& model, GridPtr grid, double x1, double x2,
                         double x3, const EvolutionOptions& options = {});

struct OracleResult {
    StateVector phi;
    bool ok = true;
    long steps = 0;
};

/// Integrates psi'' = (vhat(x) - varpi^2) psi with an adaptive Runge-Kutta-Fehlberg 7(8)
/// method and maps back to (Psi_plus, Psi_minus).
OracleResult schrodinger_oracle(const PotentialModel& model, GridPtr grid, double x0, double x,
                                const StateVector& phi0, double rel_tol = 1e-12);

/// Psi = pi [e^{-ixw}(w psi - i psi'); e^{ixw}(w psi + i psi')] and its inverse.
StateVector to_state(GridPtr grid, double x, const CVector& psi, const CVector& dpsi);
void from_state(const StateVector& phi, double x, CVector& psi, CVector& dpsi);

}  // namespace nlt
