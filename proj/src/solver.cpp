#include "spdefem/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <fmt/format.h>

#include "spdefem/error.hpp"

namespace spdefem {

namespace {

double converged_threshold(double tol, double norm)
{
    return tol * std::max(1.0, norm);
}

double lumped_norm(const Eigen::VectorXd& lumped, const Eigen::VectorXd& v)
{
    return std::sqrt(v.cwiseProduct(v).dot(lumped));
}

Eigen::VectorXd apply_nodal(const Nonlinearity& f, const Eigen::VectorXd& u)
{
    return u.unaryExpr([&f](double x) { return f(x); });
}

Eigen::VectorXd solve_linear(const FemSystem& system, const Eigen::VectorXd& rhs, const PicardOptions& options)
{
    if (options.linear_solver == LinearSolver::Direct)
        return solve_stiffness(system, rhs);
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(options.cg_tol);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * rhs.size()));
    cg.compute(system.stiffness);
    Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
        throw NumericalError(fmt::format("conjugate gradient failed after {} iterations (error {:g})",
                                         cg.iterations(), cg.error()));
    return x;
}

// One application of the discrete fixed-point map.
Eigen::VectorXd fem_map(const FemSystem& system, const Eigen::VectorXd& load, const Nonlinearity& f,
                        const Eigen::VectorXd& u, const PicardOptions& options)
{
    Eigen::VectorXd rhs = load;
    if (f.kind != Nonlinearity::Kind::Zero)
        rhs += system.lumped_mass.cwiseProduct(apply_nodal(f, u));
    return solve_linear(system, rhs, options);
}

// Pseudo-spectral grid for projecting f(u) onto the first n sine modes.
struct SpectralGrid {
    Eigen::MatrixXd modes;   // (points × n) values φ_m(x_k)
    double weight = 0.0;     // trapezoid weight a / P
};

SpectralGrid make_grid(const EigenBasis& basis, std::size_t n)
{
    const auto points = static_cast<Eigen::Index>(4 * n);
    const double a = basis.domain().extent[0];
    SpectralGrid g;
    g.weight = a / static_cast<double>(points);
    g.modes.resize(points - 1, static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 1; k < points; ++k) {
        const Point x{a * static_cast<double>(k) / static_cast<double>(points), 0.0};
        for (std::size_t m = 0; m < n; ++m)
            g.modes(k - 1, static_cast<Eigen::Index>(m)) = basis[m].value(x);
    }
    return g;
}

}  // namespace

double Nonlinearity::operator()(double u) const
{
    switch (kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Linear:
        return c * u;
    case Kind::ScaledSin:
        return c * std::sin(u);
    case Kind::ScaledTanh:
        return c * std::tanh(u);
    }
    return 0.0;
}

double Nonlinearity::lipschitz() const
{
    return kind == Kind::Zero ? 0.0 : std::abs(c);
}

std::string to_string(Nonlinearity::Kind kind)
{
    switch (kind) {
    case Nonlinearity::Kind::Zero:
        return "zero";
    case Nonlinearity::Kind::Linear:
        return "linear";
    case Nonlinearity::Kind::ScaledSin:
        return "sin";
    case Nonlinearity::Kind::ScaledTanh:
        return "tanh";
    }
    return "?";
}

Nonlinearity::Kind nonlinearity_kind_from_string(const std::string& name)
{
    if (name == "zero")
        return Nonlinearity::Kind::Zero;
    if (name == "linear")
        return Nonlinearity::Kind::Linear;
    if (name == "sin")
        return Nonlinearity::Kind::ScaledSin;
    if (name == "tanh")
        return Nonlinearity::Kind::ScaledTanh;
    throw ConfigError("unknown nonlinearity kind '" + name + "' (expected zero, linear, sin or tanh)");
}

void require_contraction(const Nonlinearity& f, double gamma)
{
    if (!(f.lipschitz() < gamma))
        throw ConfigError(fmt::format("Lipschitz constant {:g} of f is not below the Poincare constant {:g}; "
                                      "the fixed-point map is not a contraction",
                                      f.lipschitz(), gamma));
}

SpectralSolution solve_spectral(const EigenBasis& basis, std::size_t n, const Nonlinearity& f,
                                std::span<const double> noise, const PicardOptions& options)
{
    if (n > basis.size())
        throw ConfigError("solve_spectral: N exceeds the basis size");
    if (noise.size() < n)
        throw ConfigError("solve_spectral: noise has fewer than N coefficients");
    require_contraction(f, poincare_constant(basis));

    SpectralSolution sol;
    sol.coeffs.resize(n);
    if (f.affine()) {
        for (std::size_t m = 0; m < n; ++m)
            sol.coeffs[m] = noise[m] / (basis.lambda(m) - f.slope());
        return sol;
    }
    if (basis.domain().dim != 1)
        throw ConfigError("the pseudo-spectral oracle for nonlinear f is implemented in 1D only");

    const auto grid = make_grid(basis, n);
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd lambda(nn);
    Eigen::VectorXd w(nn);
    for (Eigen::Index m = 0; m < nn; ++m) {
        lambda[m] = basis.lambda(static_cast<std::size_t>(m));
        w[m] = noise[static_cast<std::size_t>(m)];
    }
    const auto map = [&](const Eigen::VectorXd& c) -> Eigen::VectorXd {
        const Eigen::VectorXd values = grid.modes * c;
        const Eigen::VectorXd projected = grid.weight * (grid.modes.transpose() * apply_nodal(f, values));
        return (projected + w).cwiseQuotient(lambda);
    };

    Eigen::VectorXd c = Eigen::VectorXd::Zero(nn);
    for (int it = 1; it <= options.max_iter; ++it) {
        Eigen::VectorXd next = map(c);
        const double inc = (next - c).norm();
        sol.increments.push_back(inc);
        c = std::move(next);
        if (inc <= converged_threshold(options.tol, c.norm())) {
            sol.iterations = it;
            sol.residual = (map(c) - c).norm();
            sol.coeffs.assign(c.data(), c.data() + nn);
            return sol;
        }
    }
    throw NumericalError(fmt::format("spectral Picard iteration did not converge in {} iterations", options.max_iter));
}

FemSolution solve_fem(const FemSystem& system, const Nonlinearity& f, const PicardOptions& options)
{
    if (system.noise_load.size() == 0)
        throw ConfigError("solve_fem: the system has no noise load");
    return solve_fem(system, system.noise_load, f, options);
}

FemSolution solve_fem(const FemSystem& system, const Eigen::VectorXd& load, const Nonlinearity& f,
                      const PicardOptions& options)
{
    if (load.size() != system.stiffness.rows())
        throw ConfigError("solve_fem: load vector does not match the system");
    require_contraction(f, poincare_constant(system.mesh->domain));

    FemSolution sol;
    const auto& lumped = system.lumped_mass;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(load.size());
    for (int it = 1; it <= options.max_iter; ++it) {
        Eigen::VectorXd next = fem_map(system, load, f, u, options);
        const double inc = lumped_norm(lumped, next - u);
        sol.increments.push_back(inc);
        u = std::move(next);
        if (f.kind == Nonlinearity::Kind::Zero || inc <= converged_threshold(options.tol, lumped_norm(lumped, u))) {
            sol.iterations = it;
            sol.function = FemFunction::from_dofs(system.mesh, u);
            sol.residual = f.kind == Nonlinearity::Kind::Zero
                               ? 0.0
                               : lumped_norm(lumped, fem_map(system, load, f, u, options) - u);
            return sol;
        }
    }
    throw NumericalError(fmt::format("FEM Picard iteration did not converge in {} iterations", options.max_iter));
}

double fixed_point_defect(const FemSystem& system, const Eigen::VectorXd& load, const Nonlinearity& f,
                          const FemFunction& u)
{
    const Eigen::VectorXd dofs = u.dofs();
    return lumped_norm(system.lumped_mass, fem_map(system, load, f, dofs, PicardOptions{}) - dofs);
}

double contraction_estimate(std::span<const double> increments)
{
    if (increments.empty())
        return 0.0;
    if (std::all_of(increments.begin() + 1, increments.end(), [](double d) { return d == 0.0; }))
        return 0.0;
    if (increments.size() < 3)
        throw ConfigError("contraction estimate needs at least 3 Picard iterations");
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < increments.size(); ++j) {
        if (increments[j] > 0.0)
            worst = std::max(worst, increments[j + 1] / increments[j]);
    }
    return worst;
}

}  // namespace spdefem
