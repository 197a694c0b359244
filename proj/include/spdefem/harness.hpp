#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdefem/covariance.hpp"
#include "spdefem/eigenbasis.hpp"
#include "spdefem/solver.hpp"

namespace spdefem {

// ---------------------------------------------------------------------------
// Predicted rates

/// Error bound N^{a} + h^{r+1} N^{b} and its net rate in h when the mesh is
/// tied to the truncation level by h ~ N^{-coupling/d}.
struct RateDecomposition {
    double truncation_exponent = 0.0;   // a, exponent of N in the truncation term
    double fem_h_exponent = 0.0;        // r + 1
    double fem_n_exponent = 0.0;        // b
    double net_rate = 0.0;              // error ~ h^{net_rate} under the coupling
};

/// Power-law noise Q = A^rho. Throws ConfigError unless rho < 2 - d/2.
RateDecomposition predicted_rate(int dim, double rho, int order = 1, double coupling = 1.0);

/// General noise with regularity index beta in [0,2].
RateDecomposition predicted_rate_beta(int dim, double beta, int order = 1, double coupling = 1.0);

// ---------------------------------------------------------------------------
// Statistics

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope x + intercept; needs two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct MomentEstimate {
    double value = 0.0;       // (Σ e^p / M)^{1/p}
    double std_error = 0.0;   // jackknife
};

MomentEstimate moment_estimate(std::span<const double> errors, double p);

/// Worker count: `requested` if positive, else the hardware concurrency,
/// capped by SPDEFEM_THREADS when set and never more than `jobs`.
unsigned worker_count(int requested, std::size_t jobs);

// ---------------------------------------------------------------------------
// Studies

struct Level {
    std::size_t n_modes = 0;
    int n_per_side = 0;
};

enum class CouplingRounding { Nearest, Ceil };

/// Levels with n_per_side = N^{1/d}, i.e. h = Θ(N^{-1/d}).
std::vector<Level> coupled_levels(int dim, std::span<const std::size_t> modes,
                                  CouplingRounding rounding = CouplingRounding::Nearest);

enum class ReferenceKind { Auto, Spectral, FineFem };

struct ReferenceConfig {
    int n_mult = 8;          // N_ref = n_mult × finest N
    int refinements = 2;     // fine-FEM reference: finest n × 2^refinements
    ReferenceKind kind = ReferenceKind::Auto;
};

struct StudyConfig {
    Domain domain;
    CovarianceSpec covariance = PowerLaw{0.0};
    Nonlinearity f;
    double p = 2.0;
    std::vector<Level> levels;
    std::size_t samples = 2;   // M
    std::uint64_t seed = 0;
    ReferenceConfig reference;
    PicardOptions picard;
    int threads = 0;
    double rate_tolerance = 0.15;

    /// Throws ConfigError on any violated invariant. The truncation study
    /// may include a level at the reference mode count itself.
    void validate(bool allow_reference_level = false) const;
    std::size_t reference_modes() const;
};

struct LevelResult {
    double h = 0.0;
    std::size_t n_modes = 0;
    int n_per_side = 0;
    double error = 0.0;
    double std_error = 0.0;
};

struct ConvergenceReport {
    std::vector<LevelResult> levels;
    double fitted_rate = 0.0;               // NaN when the fit is skipped
    std::optional<double> predicted_rate;   // power-law covariance only
    bool pass = false;
    std::size_t reference_modes = 0;
    std::string reference_kind;
    double max_contraction = 0.0;           // worst Picard factor over all solves
};

/// Coupled Monte Carlo estimate of E[‖u - u_N^h‖^p]^{1/p} per level.
ConvergenceReport run_study(const StudyConfig& config);

struct TruncationLevel {
    std::size_t n_modes = 0;
    double error = 0.0;            // E[‖u - u_N‖^p]^{1/p}
    double std_error = 0.0;
    double mean_sq = 0.0;          // MC mean of ‖u - u_N‖²
    double mean_sq_std_error = 0.0;
    double expected_sq = 0.0;      // exact expectation up to N_ref
};

struct TruncationReport {
    std::vector<TruncationLevel> levels;
    double fitted_rate = 0.0;      // error ~ N^{-fitted_rate}
    std::optional<double> predicted_rate;
    bool pass = false;
    std::size_t reference_modes = 0;
};

/// Exact per-sample spectral truncation error for affine f:
/// ‖u_ref - u_N‖² = Σ_{N<m≤N_ref} (w_m / (λ_m - c))².
TruncationReport run_truncation_study(const StudyConfig& config);

// ---------------------------------------------------------------------------
// Output

/// Header `h,N,error,stderr`, values in round-trip precision.
void write_report_csv(const ConvergenceReport& report, const std::string& path);
void write_report_gnuplot(const ConvergenceReport& report, const std::string& csv_name,
                          const std::string& path);
/// Header `N,error,stderr,mean_sq,mean_sq_std_error,expected_sq`.
void write_truncation_csv(const TruncationReport& report, const std::string& path);

}  // namespace spdefem
