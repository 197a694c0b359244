#pragma once

#include <span>
#include <string>
#include <vector>

#include "spdefem/eigenbasis.hpp"
#include "spdefem/fem.hpp"

namespace spdefem {

/// Globally Lipschitz right-hand side f(u).
struct Nonlinearity {
    enum class Kind { Zero, Linear, ScaledSin, ScaledTanh };

    Kind kind = Kind::Zero;
    double c = 0.0;

    static Nonlinearity zero() { return {Kind::Zero, 0.0}; }
    static Nonlinearity linear(double c) { return {Kind::Linear, c}; }
    static Nonlinearity scaled_sin(double c) { return {Kind::ScaledSin, c}; }
    static Nonlinearity scaled_tanh(double c) { return {Kind::ScaledTanh, c}; }

    double operator()(double u) const;
    double lipschitz() const;
    /// Zero and Linear admit closed-form solves.
    bool affine() const noexcept { return kind == Kind::Zero || kind == Kind::Linear; }
    /// Slope for the affine kinds; 0 for Zero.
    double slope() const noexcept { return kind == Kind::Linear ? c : 0.0; }
};

std::string to_string(Nonlinearity::Kind kind);
Nonlinearity::Kind nonlinearity_kind_from_string(const std::string& name);

enum class LinearSolver { Direct, ConjugateGradient };

struct PicardOptions {
    double tol = 1e-11;   // on the increment, relative to max(1, ‖u‖)
    int max_iter = 200;
    LinearSolver linear_solver = LinearSolver::Direct;
    double cg_tol = 1e-12;
};

struct SpectralSolution {
    std::vector<double> coeffs;        // (u_N, φ_m), m = 1..N
    int iterations = 0;                // 0 for closed-form kinds
    double residual = 0.0;
    std::vector<double> increments;    // ‖u^{(j+1)} - u^{(j)}‖
};

struct FemSolution {
    FemFunction function;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> increments;
};

/// Picard iteration for u_N = A^{-1} P_N f(u_N) + A^{-1} P_N Ẇ^Q in span{φ_1..φ_N}.
/// Zero and Linear kinds are solved in closed form. Nonlinear kinds use a
/// pseudo-spectral projection on 4N equispaced points and are 1D only.
SpectralSolution solve_spectral(const EigenBasis& basis, std::size_t n, const Nonlinearity& f,
                                std::span<const double> noise, const PicardOptions& options = {});

/// Picard iteration S u^{(j+1)} = M_L f(u^{(j)}) + b with f applied at the
/// nodes and M_L the lumped mass. Increments are measured in the M_L norm.
FemSolution solve_fem(const FemSystem& system, const Nonlinearity& f, const PicardOptions& options = {});
FemSolution solve_fem(const FemSystem& system, const Eigen::VectorXd& load, const Nonlinearity& f,
                      const PicardOptions& options = {});

/// ‖G(u) - u‖ in the M_L norm, G the discrete fixed-point map.
double fixed_point_defect(const FemSystem& system, const Eigen::VectorXd& load, const Nonlinearity& f,
                          const FemFunction& u);

/// max_j ‖Δu^{(j+1)}‖ / ‖Δu^{(j)}‖ over a Picard trace. Returns 0 for an
/// empty trace (closed form) or one that hit the fixed point exactly.
double contraction_estimate(std::span<const double> increments);

/// Throws ConfigError unless ‖f‖_Lip < γ.
void require_contraction(const Nonlinearity& f, double gamma);

}  // namespace spdefem
