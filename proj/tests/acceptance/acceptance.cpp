#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "spdefem/covariance.hpp"
#include "spdefem/eigenbasis.hpp"
#include "spdefem/error.hpp"
#include "spdefem/fem.hpp"
#include "spdefem/harness.hpp"
#include "spdefem/solver.hpp"

using namespace spdefem;

namespace {

constexpr double pi = std::numbers::pi;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    fmt::print("[{}] criterion {:>2} {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

StudyConfig power_law_1d(double rho)
{
    StudyConfig c;
    c.domain = Domain::unit(1);
    c.covariance = PowerLaw{rho};
    c.f = Nonlinearity::zero();
    c.levels = {{16, 16}, {32, 32}, {64, 64}, {128, 128}, {256, 256}};
    c.samples = 200;
    c.seed = 20240601;
    c.reference.n_mult = 8;
    c.reference.kind = ReferenceKind::Spectral;
    return c;
}

double refit_without_coarsest(const ConvergenceReport& r)
{
    std::vector<double> x, y;
    for (std::size_t i = 1; i < r.levels.size(); ++i) {
        x.push_back(std::log(r.levels[i].h));
        y.push_back(std::log(r.levels[i].error));
    }
    return fit_line(x, y).slope;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double log2_order(double coarse, double fine)
{
    return std::log2(coarse / fine);
}

// Observed orders between consecutive halvings.
std::vector<double> orders(const std::vector<double>& errors)
{
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        out.push_back(log2_order(errors[i], errors[i + 1]));
    return out;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += fmt::format("{}{:.3f}", i ? "," : "", v[i]);
    return s;
}

ConvergenceReport criterion_1()
{
    const auto r = run_study(power_law_1d(0.0));
    const bool ok = r.fitted_rate >= 1.35 && r.fitted_rate <= 1.65;
    report(1, "1D white noise rate", ok,
           fmt::format("rate={:.4f} in [1.35,1.65], N_ref={}", r.fitted_rate, r.reference_modes));
    const double dropped = refit_without_coarsest(r);
    report(1, "rate stable without coarsest level", std::abs(dropped - r.fitted_rate) < 0.15,
           fmt::format("rate={:.4f}, |Δ|={:.4f} < 0.15", dropped, std::abs(dropped - r.fitted_rate)));
    return r;
}

void criterion_2()
{
    StudyConfig c;
    c.domain = Domain::unit(2);
    c.covariance = PowerLaw{0.0};
    const std::vector<std::size_t> modes{16, 64, 256, 1024};
    c.levels = coupled_levels(2, modes, CouplingRounding::Ceil);
    c.samples = 100;
    c.seed = 99;
    c.reference.kind = ReferenceKind::Spectral;
    const auto r = run_study(c);
    const bool ok = r.fitted_rate >= 0.85 && r.fitted_rate <= 1.15;
    report(2, "2D white noise rate", ok, fmt::format("rate={:.4f} in [0.85,1.15]", r.fitted_rate));
}

void criterion_3()
{
    for (const auto [rho, expected] : {std::pair{-0.5, 2.0}, std::pair{0.5, 1.0}}) {
        const auto r = run_study(power_law_1d(rho));
        report(3, fmt::format("power law rho={}", rho), std::abs(r.fitted_rate - expected) <= 0.15,
               fmt::format("rate={:.4f}, expected {} ± 0.15", r.fitted_rate, expected));
    }
}

void criterion_4()
{
    StudyConfig c;
    c.domain = Domain::unit(1);
    c.covariance = PowerLaw{0.0};
    c.levels = {{10, 2}, {20, 2}, {40, 2}, {80, 2}, {160, 2}};
    c.samples = 400;
    c.seed = 7;
    c.reference.n_mult = 625;   // N_ref = 1e5
    const auto r = run_truncation_study(c);
    report(4, "truncation rate in N", r.fitted_rate >= 1.4 && r.fitted_rate <= 1.6,
           fmt::format("rate={:.4f} in [1.4,1.6], N_ref={}", r.fitted_rate, r.reference_modes));

    const auto basis = build_basis(c.domain, 100000);
    const double tail = truncation_error_sq(PowerLaw{0.0}, basis, 10, 100000);
    const auto& l = r.levels.front();
    const double dev = std::abs(l.mean_sq - tail);
    report(4, "MC mean square error at N=10", dev <= 3.0 * l.mean_sq_std_error,
           fmt::format("mean={:.6e}, tail={:.6e}, |Δ|/SE={:.2f} ≤ 3", l.mean_sq, tail,
                       dev / l.mean_sq_std_error));
}

void criterion_5()
{
    int mismatches = 0;
    int cells = 0;
    for (int d : {1, 2}) {
        for (double rho : {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0}) {
            ++cells;
            const bool expected = rho < 2.0 - d / 2.0;
            const bool got = is_well_posed(PowerLaw{rho}, Domain::unit(d)).well_posed;
            bool refused = false;
            try {
                predicted_rate(d, rho);
            } catch (const ConfigError&) {
                refused = true;
            }
            if (got != expected || refused == expected)
                ++mismatches;
        }
    }
    report(5, "well-posedness table", mismatches == 0, fmt::format("{}/{} cells match", cells - mismatches, cells));
}

void criterion_6()
{
    const auto basis = build_basis(Domain::unit(1), 1);
    const std::vector<double> w{1.0};
    const std::vector<double> exact{1.0 / basis.lambda(0)};
    std::vector<double> ritz, solve;
    for (int n = 16; n <= 256; n *= 2) {
        auto sys = assemble(build_mesh(Domain::unit(1), n));
        ritz.push_back(l2_error(ritz_project(sys, basis, w), basis, w));
        sys.noise_load = assemble_noise_load(*sys.mesh, basis, w);
        solve.push_back(l2_error(solve_fem(sys, Nonlinearity::zero()).function, basis, exact));
    }
    const auto within = [](const std::vector<double>& o) {
        return std::all_of(o.begin(), o.end(), [](double v) { return std::abs(v - 2.0) <= 0.1; });
    };
    const auto ro = orders(ritz);
    const auto so = orders(solve);
    report(6, "Ritz projection order", within(ro), fmt::format("orders={} (2 ± 0.1)", join(ro)));
    report(6, "single-mode solve order", within(so), fmt::format("orders={} (2 ± 0.1)", join(so)));
}

void criterion_7()
{
    for (double c : {2.0, 5.0, 8.0}) {
        StudyConfig cfg;
        cfg.domain = Domain::unit(1);
        cfg.covariance = PowerLaw{0.0};
        cfg.f = Nonlinearity::scaled_sin(c);
        cfg.levels = {{16, 16}, {32, 32}, {64, 64}};
        cfg.samples = 50;
        cfg.seed = 31;
        cfg.reference.n_mult = 4;
        const auto r = run_study(cfg);
        const double bound = c / (pi * pi) + 0.02;
        report(7, fmt::format("contraction c={}", c), r.max_contraction <= bound,
               fmt::format("max factor={:.4f} ≤ {:.4f}", r.max_contraction, bound));
    }
    bool refused = false;
    try {
        require_contraction(Nonlinearity::scaled_sin(10.0), poincare_constant(Domain::unit(1)));
    } catch (const ConfigError&) {
        refused = true;
    }
    const auto basis = build_basis(Domain::unit(1), 8);
    bool solver_refused = false;
    try {
        solve_spectral(basis, 8, Nonlinearity::scaled_sin(10.0), std::vector<double>(8, 1.0));
    } catch (const ConfigError&) {
        solver_refused = true;
    }
    report(7, "c=10 refused", refused && solver_refused, refused && solver_refused ? "ConfigError" : "accepted");
}

Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& gen)
{
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a.data()[i] = normal(gen);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

void criterion_8()
{
    constexpr Eigen::Index n = 6;
    constexpr std::size_t samples = 10000;
    std::mt19937_64 gen(8);
    const Eigen::MatrixXd rot = random_orthogonal(n, gen);
    const CovarianceSpec q = General{rot};
    const auto basis = build_basis(Domain::unit(1), n);

    std::vector<Eigen::VectorXd> xs;
    for (std::size_t s = 0; s < samples; ++s) {
        NormalStream stream(123, s);
        const auto smp = sample_projected_noise(q, basis, n, stream);
        xs.emplace_back(Eigen::Map<const Eigen::VectorXd>(smp.coeffs.data(), n));
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            std::vector<double> prod;
            for (const auto& x : xs)
                prod.push_back(x[i] * x[j]);
            double m = 0.0;
            for (double p : prod)
                m += p;
            m /= samples;
            double var = 0.0;
            for (double p : prod)
                var += (p - m) * (p - m);
            var /= samples - 1;
            const double se = std::sqrt(var / samples);
            worst = std::max(worst, std::abs(m - (i == j ? 1.0 : 0.0)) / se);
        }
    }
    report(8, "rotated covariance is identity", worst <= 5.0, fmt::format("max |Δ|/SE={:.2f} ≤ 5", worst));

    const auto big = build_basis(Domain::unit(1), 40);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(40, 40);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < b.size(); ++i)
        b.data()[i] = normal(gen) / (1.0 + i % 40);
    const Eigen::MatrixXd u = random_orthogonal(40, gen);
    double worst_rel = 0.0;
    for (double beta : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const double a = hs_norm_sq(General{b}, big, beta, 40).hs_norm_sq;
        const double c = hs_norm_sq(General{Eigen::MatrixXd(b * u)}, big, beta, 40).hs_norm_sq;
        worst_rel = std::max(worst_rel, std::abs(a - c) / std::abs(a));
    }
    report(8, "HS norm invariant under change of basis", worst_rel <= 1e-10,
           fmt::format("max rel diff={:.2e} ≤ 1e-10", worst_rel));
}

void criterion_9()
{
    constexpr std::size_t n = 8;
    constexpr std::size_t samples = 10000;
    const CovarianceSpec q = PowerLaw{0.5};
    const auto basis = build_basis(Domain::unit(1), n);
    const auto sigma = mode_variances(q, basis, n);
    std::vector<std::vector<double>> cols(n);
    for (std::size_t s = 0; s < samples; ++s) {
        NormalStream stream(4242, s);
        const auto smp = sample_projected_noise(q, basis, n, stream);
        for (std::size_t m = 0; m < n; ++m)
            cols[m].push_back(smp.coeffs[m]);
    }
    double worst_mean = 0.0;
    double worst_var = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        double mean = 0.0;
        for (double x : cols[m])
            mean += x;
        mean /= samples;
        worst_mean = std::max(worst_mean, std::abs(mean) / std::sqrt(sigma[m] / samples));
        double var = 0.0;
        for (double x : cols[m])
            var += (x - mean) * (x - mean);
        var /= samples - 1;
        // Var of the sample variance of a Gaussian: 2σ²/(M-1).
        worst_var = std::max(worst_var, std::abs(var - sigma[m]) / (sigma[m] * std::sqrt(2.0 / (samples - 1))));
    }
    report(9, "Gaussian coefficient mean", worst_mean <= 5.0, fmt::format("max |Δ|/SE={:.2f} ≤ 5", worst_mean));
    report(9, "Gaussian coefficient variance", worst_var <= 5.0, fmt::format("max |Δ|/SE={:.2f} ≤ 5", worst_var));
}

void criterion_10(const ConvergenceReport& first)
{
    auto c = power_law_1d(0.0);
    c.threads = 1;
    const auto again = run_study(c);
    write_report_csv(first, "determinism_a.csv");
    write_report_csv(again, "determinism_b.csv");
    const bool same = slurp("determinism_a.csv") == slurp("determinism_b.csv") && !slurp("determinism_a.csv").empty();
    report(10, "byte-identical report for the same seed", same, same ? "identical" : "differs");

    double worst = 0.0;
    for (int threads : {2, 3, 8}) {
        c.threads = threads;
        const auto r = run_study(c);
        for (std::size_t i = 0; i < r.levels.size(); ++i) {
            worst = std::max(worst, std::abs(r.levels[i].error - again.levels[i].error));
            worst = std::max(worst, std::abs(r.levels[i].std_error - again.levels[i].std_error));
        }
    }
    report(10, "agreement across thread counts", worst <= 1e-13, fmt::format("max diff={:.2e} ≤ 1e-13", worst));
}

}  // namespace

int main()
{
    const auto first = criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(first);
    fmt::print("{} failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
