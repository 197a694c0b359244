#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "spdefem/eigenbasis.hpp"

namespace spdefem {

/// Q = A^rho, i.e. ψ_k = φ_k and σ_k = λ_k^rho. rho = 0 is white noise.
struct PowerLaw {
    double rho = 0.0;
};

/// Q diagonal in the eigenbasis with variances σ_k. Entries past the end of
/// the sequence are zero.
struct Diagonal {
    std::vector<double> sigmas;
};

/// Finite-rank square root B with B(m,k) = (Q^{1/2}ψ_k, φ_m); Q = B Bᵀ in the
/// φ-basis. Need not commute with the Laplacian.
struct General {
    Eigen::MatrixXd sqrt_coeffs;
};

using CovarianceSpec = std::variant<PowerLaw, Diagonal, General>;

/// Throws ConfigError on negative variances or a non-square B.
void validate(const CovarianceSpec& q);

/// Number of standard normals one realisation consumes when projected onto
/// `n_modes` modes.
std::size_t eta_count(const CovarianceSpec& q, std::size_t n_modes);

/// Σ_k (Q^{1/2}ψ_k, φ_m)² for m = 1..count (the variance of mode m).
std::vector<double> mode_variances(const CovarianceSpec& q, const EigenBasis& basis,
                                   std::size_t count);

/// Per-sample substream of standard normals. The stream for (master, index)
/// is fixed, so the k-th draw never depends on how many draws follow it.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t index);

    double next();
    std::vector<double> draw(std::size_t count);

    std::uint64_t master_seed() const noexcept { return master_; }
    std::uint64_t index() const noexcept { return index_; }

private:
    std::uint64_t master_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

struct NoiseSample {
    std::size_t n = 0;
    std::vector<double> coeffs;   // (P_N Ẇ^Q, φ_m), m = 1..n
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
    std::vector<double> eta;
};

/// Coefficients of P_N Ẇ^Q for given normal draws.
std::vector<double> project_noise(const CovarianceSpec& q, const EigenBasis& basis,
                                  std::size_t n, std::span<const double> eta);

NoiseSample sample_projected_noise(const CovarianceSpec& q, const EigenBasis& basis,
                                   std::size_t n, NormalStream& stream);

struct RegularityIndex {
    double beta = 0.0;
    double hs_norm_sq = 0.0;
    bool converged = false;
    /// True when `converged` comes from the stagnation heuristic rather than
    /// the analytic power-law criterion.
    bool heuristic = false;
};

/// Partial sum Σ_{m≤K} λ_m^{β-2} Σ_k (Q^{1/2}ψ_k, φ_m)².
RegularityIndex hs_norm_sq(const CovarianceSpec& q, const EigenBasis& basis, double beta,
                           std::size_t trunc);

struct WellPosedness {
    bool well_posed = false;
    double margin = 0.0;   // 2 - d/2 - rho for power law; NaN otherwise
    bool heuristic = false;
};

WellPosedness is_well_posed(const CovarianceSpec& q, const Domain& domain);

/// Supremum of admissible β for Q = A^rho: 2 - d/2 - rho (not attained).
double regularity_supremum(const PowerLaw& q, int dim);

/// Σ_{m=N+1}^{K} λ_m^{-2} Σ_k (Q^{1/2}ψ_k, φ_m)², the expected squared L2
/// norm of A^{-1}(I - P_N)Ẇ^Q up to the cap K.
double truncation_error_sq(const CovarianceSpec& q, const EigenBasis& basis, std::size_t n,
                           std::size_t trunc);

}  // namespace spdefem
