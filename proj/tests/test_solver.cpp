#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>

#include "spdefem/error.hpp"
#include "spdefem/solver.hpp"

using namespace spdefem;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const Mesh> mesh_ptr(int dim, int n)
{
    return std::make_shared<const Mesh>(build_mesh(Domain::unit(dim), n));
}

FemSystem system_with_noise(int dim, int n, const EigenBasis& basis, std::span<const double> w)
{
    auto sys = assemble(mesh_ptr(dim, n));
    sys.noise_load = assemble_noise_load(*sys.mesh, basis, w);
    return sys;
}

std::vector<double> white_sample(const EigenBasis& basis, std::size_t n, std::uint64_t seed, std::uint64_t index)
{
    NormalStream stream(seed, index);
    return sample_projected_noise(PowerLaw{0.0}, basis, n, stream).coeffs;
}

}  // namespace

TEST(Nonlinearity, Values)
{
    EXPECT_EQ(Nonlinearity::zero()(3.0), 0.0);
    EXPECT_EQ(Nonlinearity::linear(2.0)(3.0), 6.0);
    EXPECT_DOUBLE_EQ(Nonlinearity::scaled_sin(2.0)(1.0), 2.0 * std::sin(1.0));
    EXPECT_DOUBLE_EQ(Nonlinearity::scaled_tanh(-3.0)(0.5), -3.0 * std::tanh(0.5));
    EXPECT_EQ(Nonlinearity::scaled_tanh(-3.0).lipschitz(), 3.0);
    EXPECT_EQ(Nonlinearity::zero().lipschitz(), 0.0);
    EXPECT_TRUE(Nonlinearity::linear(1.0).affine());
    EXPECT_FALSE(Nonlinearity::scaled_sin(1.0).affine());
}

TEST(Nonlinearity, NamesRoundTrip)
{
    using K = Nonlinearity::Kind;
    for (auto k : {K::Zero, K::Linear, K::ScaledSin, K::ScaledTanh})
        EXPECT_EQ(nonlinearity_kind_from_string(to_string(k)), k);
    EXPECT_THROW(nonlinearity_kind_from_string("cubic"), ConfigError);
}

TEST(SpectralSolve, ZeroFirstMode)
{
    const auto basis = build_basis(Domain::unit(1), 8);
    const std::vector<double> w{1.0, 0, 0, 0, 0, 0, 0, 0};
    const auto s = solve_spectral(basis, 8, Nonlinearity::zero(), w);
    EXPECT_NEAR(s.coeffs[0], 1.0 / (pi * pi), 1e-16);
    for (std::size_t m = 1; m < 8; ++m)
        EXPECT_EQ(s.coeffs[m], 0.0);
    EXPECT_EQ(s.iterations, 0);
    EXPECT_EQ(contraction_estimate(s.increments), 0.0);
}

TEST(SpectralSolve, LinearResolvent)
{
    const auto basis = build_basis(Domain::unit(1), 4);
    const std::vector<double> w{1.0, 0.0, 0.0, 0.0};
    const auto s = solve_spectral(basis, 4, Nonlinearity::linear(1.0), w);
    EXPECT_NEAR(s.coeffs[0], 1.0 / (pi * pi - 1.0), 1e-16);
}

TEST(SpectralSolve, RefusesNonContractive)
{
    const auto basis = build_basis(Domain::unit(1), 4);
    const std::vector<double> w(4, 1.0);
    EXPECT_THROW(solve_spectral(basis, 4, Nonlinearity::scaled_sin(10.0), w), ConfigError);
    EXPECT_THROW(solve_spectral(basis, 4, Nonlinearity::linear(pi * pi), w), ConfigError);
    EXPECT_THROW(solve_spectral(basis, 5, Nonlinearity::zero(), w), ConfigError);
}

TEST(SpectralSolve, SinContraction)
{
    const auto basis = build_basis(Domain::unit(1), 32);
    const auto w = white_sample(basis, 32, 8, 0);
    const auto s = solve_spectral(basis, 32, Nonlinearity::scaled_sin(5.0), w);
    EXPECT_GE(s.iterations, 3);
    EXPECT_LE(contraction_estimate(s.increments), 5.0 / (pi * pi));
    EXPECT_LE(s.residual, 2e-11);
}

TEST(SpectralSolve, NonlinearAgreesWithLinearizationForSmallNoise)
{
    // For tiny noise sin(u) ≈ u, so the sin solution approaches the linear resolvent.
    const auto basis = build_basis(Domain::unit(1), 16);
    auto w = white_sample(basis, 16, 1, 0);
    for (auto& x : w)
        x *= 1e-3;
    PicardOptions opts;
    opts.tol = 1e-16;
    const auto s = solve_spectral(basis, 16, Nonlinearity::scaled_sin(3.0), w, opts);
    const auto l = solve_spectral(basis, 16, Nonlinearity::linear(3.0), w);
    // |sin u - u| ≤ |u|³/6 with |u| below 1e-3, damped by (λ_1 - c)^{-1}.
    for (std::size_t m = 0; m < 16; ++m)
        EXPECT_NEAR(s.coeffs[m], l.coeffs[m], 1e-10);
}

TEST(SpectralSolve, TwoDimensionalNonlinearRefused)
{
    const auto basis = build_basis(Domain::unit(2), 4);
    const std::vector<double> w(4, 1.0);
    EXPECT_THROW(solve_spectral(basis, 4, Nonlinearity::scaled_tanh(1.0), w), ConfigError);
    EXPECT_NO_THROW(solve_spectral(basis, 4, Nonlinearity::linear(1.0), w));
}

TEST(FemSolve, ZeroLoadZeroSolution)
{
    for (int dim : {1, 2}) {
        auto sys = assemble(mesh_ptr(dim, 6));
        sys.noise_load = Eigen::VectorXd::Zero(sys.stiffness.rows());
        for (auto f : {Nonlinearity::zero(), Nonlinearity::scaled_sin(3.0)}) {
            const auto s = solve_fem(sys, f);
            for (double v : s.function.nodal_values)
                EXPECT_EQ(v, 0.0);
        }
    }
}

TEST(FemSolve, RequiresLoad)
{
    const auto sys = assemble(mesh_ptr(1, 4));
    EXPECT_THROW(solve_fem(sys, Nonlinearity::zero()), ConfigError);
    EXPECT_THROW(solve_fem(sys, Eigen::VectorXd::Zero(2), Nonlinearity::zero()), ConfigError);
}

TEST(FemSolve, ZeroSingleModeSecondOrder)
{
    const auto basis = build_basis(Domain::unit(1), 1);
    const std::vector<double> w{1.0};
    const std::vector<double> exact{1.0 / (pi * pi)};
    std::vector<double> errors;
    for (int n = 16; n <= 256; n *= 2) {
        const auto s = solve_fem(system_with_noise(1, n, basis, w), Nonlinearity::zero());
        EXPECT_EQ(s.iterations, 1);
        errors.push_back(l2_error(s.function, basis, exact));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        EXPECT_NEAR(std::log2(errors[i] / errors[i + 1]), 2.0, 0.1);
}

TEST(FemSolve, LinearConvergesToResolvent)
{
    const auto basis = build_basis(Domain::unit(1), 1);
    const std::vector<double> w{1.0};
    const std::vector<double> exact{1.0 / (pi * pi - 1.0)};
    std::vector<double> errors;
    for (int n = 16; n <= 256; n *= 2) {
        const auto s = solve_fem(system_with_noise(1, n, basis, w), Nonlinearity::linear(1.0));
        errors.push_back(l2_error(s.function, basis, exact));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        EXPECT_LT(errors[i + 1], errors[i]);
        EXPECT_NEAR(std::log2(errors[i] / errors[i + 1]), 2.0, 0.1);
    }
}

TEST(FemSolve, LinearMatchesSpectralOracleForDiagonalNoise)
{
    const auto basis = build_basis(Domain::unit(1), 8);
    const Diagonal q{{1.0, 0.5, 0.25, 0.125, 0.0, 0.0, 0.0, 0.0}};
    NormalStream stream(4, 0);
    const auto sample = sample_projected_noise(q, basis, 8, stream);
    const auto oracle = solve_spectral(basis, 8, Nonlinearity::linear(2.0), sample.coeffs);
    double prev = 1.0;
    for (int n = 32; n <= 256; n *= 2) {
        const auto s = solve_fem(system_with_noise(1, n, basis, sample.coeffs), Nonlinearity::linear(2.0));
        const double e = l2_error(s.function, basis, oracle.coeffs);
        EXPECT_LT(e, prev);
        if (n > 32)
            EXPECT_NEAR(std::log2(prev / e), 2.0, 0.15);
        prev = e;
    }
}

TEST(FemSolve, ContractionWithinBound)
{
    const auto basis = build_basis(Domain::unit(1), 64);
    const double gamma = poincare_constant(basis);
    for (auto f : {Nonlinearity::scaled_sin(5.0), Nonlinearity::scaled_tanh(4.0), Nonlinearity::scaled_sin(-8.0)}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto w = white_sample(basis, 64, 21, s);
            const auto sys = system_with_noise(1, 64, basis, w);
            const auto sol = solve_fem(sys, f);
            EXPECT_LE(contraction_estimate(sol.increments), f.lipschitz() / gamma + 0.02);
        }
    }
}

TEST(FemSolve, TwoDimensionalContraction)
{
    const auto basis = build_basis(Domain::unit(2), 64);
    const auto w = white_sample(basis, 64, 2, 0);
    const auto sys = system_with_noise(2, 8, basis, w);
    const auto f = Nonlinearity::scaled_tanh(15.0);
    const auto sol = solve_fem(sys, f);
    EXPECT_LE(contraction_estimate(sol.increments), 15.0 / (2 * pi * pi) + 0.02);
    EXPECT_THROW(solve_fem(sys, Nonlinearity::scaled_sin(20.0)), ConfigError);
}

TEST(FemSolve, ResidualIsHonest)
{
    const auto basis = build_basis(Domain::unit(1), 32);
    PicardOptions opts;
    for (double tol : {1e-8, 1e-11}) {
        opts.tol = tol;
        const auto w = white_sample(basis, 32, 5, 0);
        const auto sys = system_with_noise(1, 32, basis, w);
        const auto f = Nonlinearity::scaled_sin(6.0);
        const auto sol = solve_fem(sys, f, opts);
        const double defect = fixed_point_defect(sys, sys.noise_load, f, sol.function);
        EXPECT_LE(defect, 2.0 * tol);
        EXPECT_NEAR(defect, sol.residual, 1e-15);
    }
}

TEST(FemSolve, ConjugateGradientAgreesWithDirect)
{
    const auto basis = build_basis(Domain::unit(2), 50);
    const auto w = white_sample(basis, 50, 6, 0);
    const auto sys = system_with_noise(2, 12, basis, w);
    PicardOptions cg;
    cg.linear_solver = LinearSolver::ConjugateGradient;
    const auto f = Nonlinearity::scaled_sin(4.0);
    const auto a = solve_fem(sys, f);
    const auto b = solve_fem(sys, f, cg);
    EXPECT_LT((a.function.dofs() - b.function.dofs()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FemSolve, IterationCapReported)
{
    const auto basis = build_basis(Domain::unit(1), 16);
    const auto sys = system_with_noise(1, 16, basis, white_sample(basis, 16, 3, 0));
    PicardOptions opts;
    opts.max_iter = 2;
    EXPECT_THROW(solve_fem(sys, Nonlinearity::scaled_sin(9.0), opts), NumericalError);
}

TEST(FemSolve, DeterministicRepeat)
{
    const auto basis = build_basis(Domain::unit(1), 32);
    const auto w = white_sample(basis, 32, 77, 4);
    const auto sys = system_with_noise(1, 32, basis, w);
    const auto a = solve_fem(sys, Nonlinearity::scaled_tanh(3.0));
    const auto b = solve_fem(sys, Nonlinearity::scaled_tanh(3.0));
    EXPECT_EQ(a.function.nodal_values, b.function.nodal_values);
    EXPECT_EQ(a.increments, b.increments);
}

TEST(FemSolve, NonlinearFemApproachesSpectralOracle)
{
    const auto basis = build_basis(Domain::unit(1), 8);
    const auto w = white_sample(basis, 8, 12, 0);
    const auto oracle = solve_spectral(basis, 8, Nonlinearity::scaled_sin(4.0), w);
    std::vector<double> errors;
    for (int n = 32; n <= 512; n *= 2) {
        const auto s = solve_fem(system_with_noise(1, n, basis, w), Nonlinearity::scaled_sin(4.0));
        errors.push_back(l2_error(s.function, basis, oracle.coeffs));
    }
    // The oracle projects f(u) onto 8 modes, so the gap levels off at the
    // spectral truncation of f(u); it still decreases over the first refinements.
    EXPECT_LT(errors[1], errors[0]);
    EXPECT_LT(errors.back(), 0.05 * std::sqrt(std::inner_product(oracle.coeffs.begin(), oracle.coeffs.end(),
                                                                  oracle.coeffs.begin(), 0.0)));
}

TEST(Contraction, Conventions)
{
    EXPECT_EQ(contraction_estimate(std::vector<double>{}), 0.0);
    EXPECT_EQ(contraction_estimate(std::vector<double>{1.0}), 0.0);
    EXPECT_EQ(contraction_estimate(std::vector<double>{1.0, 0.0}), 0.0);
    EXPECT_THROW(contraction_estimate(std::vector<double>{1.0, 0.5}), ConfigError);
    EXPECT_DOUBLE_EQ(contraction_estimate(std::vector<double>{1.0, 0.5, 0.3, 0.03}), 0.6);
}
