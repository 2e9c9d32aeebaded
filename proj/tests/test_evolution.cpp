#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlt/evolution.hpp"
#include "nlt/norm_profile.hpp"

using namespace nlt;

namespace {

PotentialModel gauss(Complex v0 = 1.0) {
    FamilyParams p;
    p.v0 = v0;
    return builtin_model(Family::GaussGauss, p);
}

PotentialModel family(Family f) { return builtin_model(f, FamilyParams{}, std::nullopt, false); }

CVector random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    CVector v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

StateVector random_state(const GridPtr& g, std::mt19937_64& rng) {
    return StateVector(g, random_vector(2 * g->size(), rng));
}

double block_rel(const CMatrix& a, const CMatrix& b, const GridPtr& g) {
    return operator_norm(BlockOperator(g, a - b)).value / operator_norm(BlockOperator(g, b)).value;
}

}  // namespace

TEST(Hamiltonian, ZeroPotentialAndBlockFormulas) {
    const auto g = build_grid(1.0, 10);
    EXPECT_EQ(assemble_H(gauss(0.0), g, 0.7).matrix.norm(), 0.0);

    const double x = 0.37;
    const auto h = assemble_H(gauss(), g, x);
    const CMatrix v = assemble_vhat(gauss(), g, x).entries;
    const CVector em = phase_diagonal(*g, x, -1);
    const CVector ep = phase_diagonal(*g, x, 1);
    const RVector inv = g->varpi().cwiseInverse();
    const CMatrix core = v * inv.cast<Complex>().asDiagonal();
    const CMatrix h11 = 0.5 * em.asDiagonal() * core * ep.asDiagonal();
    const CMatrix h12 = 0.5 * em.asDiagonal() * core * em.asDiagonal();
    const CMatrix h21 = -0.5 * ep.asDiagonal() * core * ep.asDiagonal();
    const CMatrix h22 = -0.5 * ep.asDiagonal() * core * em.asDiagonal();
    EXPECT_LE((h.block(0, 0) - h11).norm(), 1e-14 * h11.norm());
    EXPECT_LE((h.block(0, 1) - h12).norm(), 1e-14 * h12.norm());
    EXPECT_LE((h.block(1, 0) - h21).norm(), 1e-14 * h21.norm());
    EXPECT_LE((h.block(1, 1) - h22).norm(), 1e-14 * h22.norm());

    const auto h0 = assemble_H(gauss(), g, 0.0);
    EXPECT_EQ((h0.block(0, 0) + h0.block(1, 0)).norm(), 0.0);
    EXPECT_EQ((h0.block(0, 1) + h0.block(1, 1)).norm(), 0.0);
}

TEST(Hamiltonian, NilpotentForEveryFamilyAndComplexStrength) {
    const auto g = build_grid(1.0, 16);
    std::vector<PotentialModel> models;
    for (Family f : {Family::GaussGauss, Family::GaussBox, Family::PowerlawGauss, Family::OneSided})
        models.push_back(family(f));
    models.push_back(gauss(Complex(0.4, -1.7)));
    for (const auto& m : models)
        for (double x : {-3.0, -0.2, 0.0, 1.1, 5.0}) {
            const auto h = assemble_H(m, g, x);
            const double n = operator_norm(h).value;
            EXPECT_LE(operator_norm(BlockOperator(g, h.matrix * h.matrix)).value, 1e-12 * n * n);
        }
}

TEST(Hamiltonian, LowRankApplyAndNormBound) {
    std::mt19937_64 rng(5);
    const auto g = build_grid(1.0, 14);
    const Hamiltonian h(family(Family::GaussBox), g);
    CMatrix y(28, 3);
    for (int c = 0; c < 3; ++c) y.col(c) = random_vector(28, rng);
    for (double x : {-1.0, 0.3, 2.2}) {
        const CMatrix dense = h(x).matrix * y;
        EXPECT_LE((h.apply(x, y) - dense).norm(), 1e-13 * dense.norm());
        EXPECT_GE(h.norm_bound(x) * (1 + 1e-12), operator_norm(h(x)).value);
    }
}

TEST(DomainSplit, ReconstructionAndZetaFormula) {
    std::mt19937_64 rng(6);
    const auto g = build_grid(1.0, 12);
    const StateVector phi = random_state(g, rng);
    for (double x : {-4.0, 0.0, 0.8, 3.5}) {
        const DomainSplit s = decompose_domain(phi, x);
        const StateVector back = reconstruct(g, s);
        EXPECT_LE((back.values - phi.values).norm(), 1e-12 * phi.values.norm());
        const CVector e2 = phase_diagonal(*g, 2.0 * x, 1);
        const CVector expect =
            s.zeta0 + g->varpi().cwiseInverse().cast<Complex>().cwiseProduct((e2.array() - 1.0).matrix().cwiseProduct(s.xi0));
        EXPECT_LE((s.zeta - expect).norm(), 1e-12 * expect.norm());
    }
}

TEST(DomainSplit, PureComponents) {
    std::mt19937_64 rng(7);
    const auto g = build_grid(1.0, 12);
    const CVector zeta0 = random_vector(12, rng);
    const StateVector r_minus(g, CVector::Zero(12), g->varpi().cast<Complex>().cwiseProduct(zeta0));
    for (double x : {-2.0, 0.0, 1.5}) {
        const DomainSplit s = decompose_domain(r_minus, x);
        EXPECT_LE(s.xi.norm(), 1e-15);
        EXPECT_LE((s.zeta - zeta0).norm(), 1e-14 * zeta0.norm());
    }
    const CVector xi0 = random_vector(12, rng);
    const StateVector n0(g, xi0, -xi0);
    EXPECT_LE(decompose_domain(n0, 0.0).zeta.norm(), 1e-15);
}

TEST(DomainSplit, ZetaGrowsAtMostLinearly) {
    std::mt19937_64 rng(8);
    const auto g = build_grid(1.0, 16);
    const StateVector phi = random_state(g, rng);
    const ZetaNorm zeta(phi);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    double prev_x = 0.0;
    double prev_z = zeta(0.0);
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng);
        const double z = zeta(x);
        EXPECT_LE(z, zeta.a() + zeta.b() * std::abs(x) + 1e-12);
        EXPECT_LE(std::abs(z - prev_z), zeta.b() * std::abs(x - prev_x) + 1e-12);
        prev_x = x;
        prev_z = z;
    }
}

TEST(AssembleB, NormBoundsAndFactorization) {
    std::mt19937_64 rng(9);
    const auto g = build_grid(1.0, 16);
    const auto m = gauss();
    const VhatAssembler vh(m, g);
    const double x1 = -0.4, x2 = 0.9;
    const double b1 = operator_norm(assemble_B(m, g, {x1})).value;
    EXPECT_LE(b1, operator_norm(vh(x1), *g).value * (1 + 1e-12));
    const double b2 = operator_norm(assemble_B(m, g, {x1, x2})).value;
    EXPECT_LE(b2, std::abs(x2 - x1) * operator_norm(vh(x2), *g).value * operator_norm(vh(x1), *g).value);

    const StateVector phi = random_state(g, rng);
    const CVector lhs = assemble_H(m, g, x2).matrix * (assemble_H(m, g, x1).matrix * phi.values);
    const CVector rhs = assemble_B(m, g, {x1, x2}).matrix *
                        (inverse_varpi_block(g).matrix * (assemble_L(g, x1).matrix * phi.values));
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * lhs.norm());

    EXPECT_THROW(assemble_B(m, g, {1.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(assemble_B(m, g, {}), std::invalid_argument);
    // Coincident points: the sin factor vanishes.
    EXPECT_LE(operator_norm(assemble_B(m, g, {0.3, 0.3})).value, 1e-15);
}

TEST(DysonTerm, ZeroPotentialAndCollapsedRange) {
    std::mt19937_64 rng(10);
    const auto g = build_grid(1.0, 8);
    const StateVector phi = random_state(g, rng);
    for (int n = 1; n <= 3; ++n) EXPECT_EQ(dyson_term(gauss(0.0), g, n, -2.0, 2.0, phi, 64).norm, 0.0);
    EXPECT_EQ(dyson_term(gauss(), g, 2, 0.5, 0.5, phi, 64).norm, 0.0);
    // Two applications of H at a single node vanish.
    const auto h = assemble_H(gauss(), g, 0.5).matrix;
    EXPECT_LE((h * (h * phi.values)).norm(), 1e-13 * h.norm() * h.norm() * phi.values.norm());
}

TEST(DysonTerm, FirstOrderMatchesTrapezoidOracle) {
    std::mt19937_64 rng(11);
    const auto g = build_grid(1.0, 16);
    const auto m = gauss();
    const StateVector phi = random_state(g, rng);
    const Hamiltonian h(m, g);
    const int nodes = 2000;
    const double a = -4.0, b = 4.0, dx = (b - a) / (nodes - 1);
    CVector oracle = CVector::Zero(32);
    for (int i = 0; i < nodes; ++i) {
        const double wt = (i == 0 || i == nodes - 1) ? 0.5 * dx : dx;
        oracle += wt * (h(a + i * dx).matrix * phi.values);
    }
    oracle *= -kI;
    const DysonTerm t = dyson_term(m, g, 1, a, b, phi, 512);
    EXPECT_LE((t.phi.values - oracle).norm() / oracle.norm(), 1e-6);
}

TEST(DysonTerm, OneSidedTermsVanishFromOrderN) {
    std::mt19937_64 rng(12);
    const int n = 6;
    const auto g = build_grid(1.0, n);
    const StateVector phi = random_state(g, rng);
    const Hamiltonian h(family(Family::OneSided), g);
    const auto terms = dyson_terms(h, -3.0, 3.0, phi.values, 64, n + 2, std::size_t{1} << 28);
    const double scale = terms[1].norm();
    for (int k = n; k <= n + 2; ++k) EXPECT_LE(terms[k].norm(), 1e-14 * scale) << k;
}

TEST(DysonTerm, MemoryBudgetIsEnforced) {
    const auto g = build_grid(1.0, 16);
    const Hamiltonian h(gauss(), g);
    EXPECT_THROW(dyson_terms(h, -1.0, 1.0, CMatrix::Identity(32, 32), 1 << 12, 5, 1024), ResourceError);
}

TEST(Evolve, IdentityCases) {
    const auto g = build_grid(1.0, 8);
    for (Scheme s : {Scheme::Dyson, Scheme::Product, Scheme::Rk4}) {
        EvolutionOptions o;
        o.scheme = s;
        EXPECT_EQ(evolve(gauss(), g, 1.5, 1.5, o).T.matrix.norm(), 0.0);
        EXPECT_EQ(evolve(gauss(0.0), g, -5.0, 5.0, o).T.matrix.norm(), 0.0);
        EXPECT_THROW(evolve(gauss(), g, 1.0, 0.0, o), std::invalid_argument);
        EXPECT_EQ(parse_scheme(to_string(s)), s);
    }
}

TEST(Evolve, SchemesAgreeWithEachOtherAndTheOracle) {
    std::mt19937_64 rng(13);
    const auto g = build_grid(1.0, 16);
    const auto m = gauss();
    const Hamiltonian h(m, g);
    std::vector<EvolutionResult> results;
    for (Scheme s : {Scheme::Dyson, Scheme::Product, Scheme::Rk4}) {
        EvolutionOptions o;
        o.scheme = s;
        o.tol = 1e-9;
        results.push_back(evolve(h, -6.0, 6.0, o));
        EXPECT_TRUE(results.back().converged) << to_string(s);
    }
    for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j)
            EXPECT_LE(block_rel(results[i].U().matrix, results[j].U().matrix, g), 1e-6);
    for (int trial = 0; trial < 3; ++trial) {
        const StateVector phi = random_state(g, rng);
        const OracleResult orc = schrodinger_oracle(m, g, -6.0, 6.0, phi);
        ASSERT_TRUE(orc.ok);
        for (const auto& r : results)
            EXPECT_LE((r.U().matrix * phi.values - orc.phi.values).norm() / phi.values.norm(), 1e-6);
    }
}

TEST(Evolve, Rk4ConvergesAtFourthOrder) {
    const auto g = build_grid(1.0, 8);
    const Hamiltonian h(gauss(), g);
    EvolutionOptions ref;
    ref.tol = 1e-13;
    const CMatrix exact = evolve(h, -2.0, 2.0, ref).T.matrix;
    std::vector<double> errors;
    for (double spu : {2.0, 4.0, 8.0}) {
        EvolutionOptions o;
        o.scheme = Scheme::Rk4;
        o.tol = 1e3;  // accept the first refinement pair
        o.min_steps = 1;
        o.steps_per_unit = spu;
        errors.push_back(operator_norm(BlockOperator(g, evolve(h, -2.0, 2.0, o).T.matrix - exact)).value);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_GE(std::log2(errors[i - 1] / errors[i]), 3.7);
}

TEST(Evolve, UnreachableToleranceIsFlagged) {
    const auto g = build_grid(1.0, 8);
    EvolutionOptions o;
    o.scheme = Scheme::Dyson;
    o.tol = 1e-14;
    o.order_cap = 2;
    const auto r = evolve(gauss(3.0), g, -4.0, 4.0, o);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.error_estimate, o.tol);
}

TEST(Composition, IdentityAndGaussian) {
    const auto g = build_grid(1.0, 16);
    EvolutionOptions o;
    o.tol = 1e-9;
    EXPECT_EQ(composition_check(gauss(0.0), g, -6.0, 0.0, 6.0, o), 0.0);
    EXPECT_LE(composition_check(gauss(), g, -6.0, -6.0, 6.0, o), 1e-10);
    EXPECT_LE(composition_check(gauss(), g, -6.0, 0.0, 6.0, o), 1e-7);
    EXPECT_THROW(composition_check(gauss(), g, 1.0, 0.0, 2.0, o), std::invalid_argument);
}

TEST(Oracle, FreePropagationAndLinearity) {
    std::mt19937_64 rng(14);
    const auto g = build_grid(1.0, 10);
    const StateVector a = random_state(g, rng);
    const StateVector b = random_state(g, rng);
    const OracleResult free = schrodinger_oracle(gauss(0.0), g, -3.0, 4.0, a);
    ASSERT_TRUE(free.ok);
    EXPECT_LE((free.phi.values - a.values).norm(), 1e-10 * a.values.norm());

    const Complex ca(0.5, -1.0), cb(2.0, 0.25);
    const StateVector mix(g, CVector(ca * a.values + cb * b.values));
    const auto m = gauss();
    const CVector lhs = schrodinger_oracle(m, g, -3.0, 3.0, mix).phi.values;
    const CVector rhs = ca * schrodinger_oracle(m, g, -3.0, 3.0, a).phi.values +
                        cb * schrodinger_oracle(m, g, -3.0, 3.0, b).phi.values;
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * rhs.norm());
}

TEST(Oracle, StateMapRoundTrip) {
    std::mt19937_64 rng(15);
    const auto g = build_grid(1.0, 10);
    const StateVector phi = random_state(g, rng);
    CVector psi, dpsi;
    from_state(phi, 1.3, psi, dpsi);
    const StateVector back = to_state(g, 1.3, psi, dpsi);
    EXPECT_LE((back.values - phi.values).norm(), 1e-13 * phi.values.norm());
}

TEST(StateEvolution, PartialSumsAndGIdentity) {
    std::mt19937_64 rng(16);
    const auto g = build_grid(1.0, 16);
    const auto m = gauss();
    const Hamiltonian h(m, g);
    const StateVector phi = random_state(g, rng);
    EvolutionOptions o;
    o.tol = 1e-10;
    const StateEvolution evo = evolve_state(h, -6.0, 6.0, phi, o);
    ASSERT_TRUE(evo.converged);
    ASSERT_EQ(evo.term_norms.size(), evo.partial_sums.size());
    for (std::size_t n = 1; n < evo.partial_sums.size(); ++n)
        EXPECT_NEAR(evo.partial_sums[n] - evo.partial_sums[n - 1], evo.term_norms[n], 1e-12 * evo.partial_sums[n]);
    const OracleResult orc = schrodinger_oracle(m, g, -6.0, 6.0, phi);
    EXPECT_LE((evo.phi.values - orc.phi.values).norm() / phi.values.norm(), 1e-6);

    // -G(x0, x) equals the direct integral of (x - x') ||vhat(x')||.
    const NormProfile profile(m, *g);
    const double direct = integrate([&](double xp) { return (6.0 - xp) * profile(xp); }, -6.0, 6.0);
    EXPECT_NEAR(-g_functional(profile, -6.0, 6.0), direct, 1e-12 * direct);
    EXPECT_NEAR(g_functional(profile, 6.0, -6.0),
                integrate([&](double xp) { return (xp + 6.0) * profile(xp); }, -6.0, 6.0), 1e-12 * direct);
}
