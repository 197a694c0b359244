#include "spdefem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>

#include "spdefem/error.hpp"
#include "spdefem/fem.hpp"

namespace spdefem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_rate_inputs(int dim, int order, double coupling)
{
    Domain{dim}.validate();
    if (order < 1)
        throw ConfigError("element order must be at least 1");
    if (!(coupling > 0.0))
        throw ConfigError("coupling exponent must be positive");
}

// Net h-rate of N^a + h^{r+1} N^b with N = h^{-d/coupling}.
double net_rate(int dim, double a, double b, int order, double coupling)
{
    const double per_n = dim / coupling;
    return std::min(-a * per_n, (order + 1) - b * per_n);
}

// Runs job(s) for s in [0, jobs) on `workers` threads. Exceptions are kept per
// job and the one with the lowest index is rethrown.
template <class Job>
void parallel_for(std::size_t jobs, unsigned workers, Job&& job)
{
    std::vector<std::exception_ptr> failures(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t s = next++; s < jobs; s = next++) {
            try {
                job(s);
            } catch (...) {
                failures[s] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back(worker);
    }
    for (auto& f : failures) {
        if (f)
            std::rethrow_exception(f);
    }
}

[[noreturn]] void rethrow_with_context(const Level& level, std::size_t sample)
{
    const auto context = fmt::format("level N={} n={}, sample {}", level.n_modes, level.n_per_side, sample);
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(context + ": " + e.what());
    } catch (const std::exception& e) {
        throw NumericalError(context + ": " + e.what());
    }
}

bool uses_spectral_reference(const StudyConfig& config)
{
    switch (config.reference.kind) {
    case ReferenceKind::Spectral:
        return true;
    case ReferenceKind::FineFem:
        return false;
    case ReferenceKind::Auto:
        break;
    }
    return config.f.affine();
}

struct LevelOperators {
    Level level;
    std::shared_ptr<const Mesh> mesh;
    FemSystem system;
    NoiseLoadOperator load;
};

std::unique_ptr<LevelOperators> make_level(const Domain& domain, const Level& level, const EigenBasis& basis,
                                           std::size_t load_modes)
{
    auto mesh = std::make_shared<const Mesh>(build_mesh(domain, level.n_per_side));
    auto system = assemble(mesh);
    NoiseLoadOperator load(*mesh, basis, load_modes);
    return std::make_unique<LevelOperators>(LevelOperators{level, mesh, std::move(system), std::move(load)});
}

std::vector<double> log_of(std::span<const double> v)
{
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
    return out;
}

}  // namespace

RateDecomposition predicted_rate(int dim, double rho, int order, double coupling)
{
    check_rate_inputs(dim, order, coupling);
    if (!(rho < 2.0 - 0.5 * dim))
        throw ConfigError(fmt::format("power-law noise with rho = {:g} is ill-posed in d = {}: "
                                      "a mild solution exists if and only if rho < {:g}",
                                      rho, dim, 2.0 - 0.5 * dim));
    RateDecomposition r;
    r.truncation_exponent = (rho - 2.0) / dim + 0.5;
    r.fem_h_exponent = order + 1;
    // Σ_{k≤N} k^{2(rho+r-1)/d} stays bounded once the exponent drops below -1.
    r.fem_n_exponent = std::max((rho + order - 1.0) / dim + 0.5, 0.0);
    r.net_rate = net_rate(dim, r.truncation_exponent, r.fem_n_exponent, order, coupling);
    return r;
}

RateDecomposition predicted_rate_beta(int dim, double beta, int order, double coupling)
{
    check_rate_inputs(dim, order, coupling);
    if (!(beta >= 0.0 && beta <= 2.0))
        throw ConfigError("regularity index beta must lie in [0, 2]");
    RateDecomposition r;
    r.truncation_exponent = -beta / dim;
    r.fem_h_exponent = order + 1;
    r.fem_n_exponent = (order + 1 - beta) / dim;
    r.net_rate = net_rate(dim, r.truncation_exponent, r.fem_n_exponent, order, coupling);
    return r;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("line fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw ConfigError("line fit needs two distinct abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

MomentEstimate moment_estimate(std::span<const double> errors, double p)
{
    if (errors.empty())
        throw ConfigError("moment estimate of an empty sample");
    const std::size_t m = errors.size();
    double sum = 0.0;
    for (double e : errors)
        sum += std::pow(e, p);
    MomentEstimate est;
    est.value = std::pow(sum / static_cast<double>(m), 1.0 / p);
    if (m < 2)
        return est;

    std::vector<double> loo(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        loo[i] = std::pow(std::max(0.0, sum - std::pow(errors[i], p)) / static_cast<double>(m - 1), 1.0 / p);
        mean += loo[i];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : loo)
        ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt(static_cast<double>(m - 1) / static_cast<double>(m) * ss);
    return est;
}

unsigned worker_count(int requested, std::size_t jobs)
{
    long n = requested > 0 ? requested : static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("SPDEFEM_THREADS"); env != nullptr && *env != '\0') {
        if (const long cap = std::strtol(env, nullptr, 10); cap > 0)
            n = std::min(n, cap);
    }
    return static_cast<unsigned>(std::clamp<long>(n, 1, static_cast<long>(std::max<std::size_t>(1, jobs))));
}

std::vector<Level> coupled_levels(int dim, std::span<const std::size_t> modes, CouplingRounding rounding)
{
    Domain{dim}.validate();
    std::vector<Level> out;
    for (std::size_t n_modes : modes) {
        const double side = std::pow(static_cast<double>(n_modes), 1.0 / dim);
        // Guard against pow returning 3.9999999 for a perfect square.
        const double snapped = std::abs(side - std::round(side)) < 1e-9 ? std::round(side) : side;
        int n = static_cast<int>(rounding == CouplingRounding::Ceil ? std::ceil(snapped) : std::round(snapped));
        out.push_back({n_modes, std::max(n, 2)});
    }
    return out;
}

void StudyConfig::validate(bool allow_reference_level) const
{
    domain.validate();
    spdefem::validate(covariance);
    if (!(p >= 1.0))
        throw ConfigError("moment order p must be at least 1");
    if (levels.empty())
        throw ConfigError("study needs at least one level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].n_modes == 0)
            throw ConfigError("level truncation N must be positive");
        if (levels[i].n_per_side < 2)
            throw ConfigError("level mesh needs at least 2 cells per side");
        if (i > 0 && levels[i].n_modes <= levels[i - 1].n_modes)
            throw ConfigError("levels must be strictly increasing in N");
    }
    if (samples < 1)
        throw ConfigError("study needs at least one sample");
    if (reference.n_mult < 2)
        throw ConfigError("reference multiplier must be at least 2");
    if (reference.refinements < 1)
        throw ConfigError("fine-FEM reference needs at least one refinement");
    if (reference.kind == ReferenceKind::Spectral && !f.affine())
        throw ConfigError("the spectral reference is closed-form and requires zero or linear f");
    if (!(rate_tolerance >= 0.0))
        throw ConfigError("rate tolerance must be nonnegative");
    if (const auto* pl = std::get_if<PowerLaw>(&covariance); pl && regularity_supremum(*pl, domain.dim) <= 0.0)
        throw ConfigError(fmt::format("power-law noise with rho = {:g} is ill-posed in d = {} (need rho < {:g})",
                                      pl->rho, domain.dim, 2.0 - 0.5 * domain.dim));
    require_contraction(f, poincare_constant(domain));

    const std::size_t finest = levels.back().n_modes;
    const std::size_t ref = reference_modes();
    if (allow_reference_level ? finest > ref : finest >= ref)
        throw ConfigError(fmt::format("reference with {} modes is not finer than the finest level N = {}", ref, finest));
}

std::size_t StudyConfig::reference_modes() const
{
    if (const auto* g = std::get_if<General>(&covariance))
        return static_cast<std::size_t>(g->sqrt_coeffs.rows());
    return static_cast<std::size_t>(reference.n_mult) * levels.back().n_modes;
}

ConvergenceReport run_study(const StudyConfig& config)
{
    config.validate();
    const std::size_t n_ref = config.reference_modes();
    const bool spectral = uses_spectral_reference(config);
    const auto basis = build_basis(config.domain, n_ref);
    std::vector<double> lambda(n_ref);
    for (std::size_t m = 0; m < n_ref; ++m)
        lambda[m] = basis.lambda(m);

    std::vector<std::unique_ptr<LevelOperators>> ops;
    for (const auto& level : config.levels)
        ops.push_back(make_level(config.domain, level, basis, spectral ? n_ref : level.n_modes));

    std::unique_ptr<LevelOperators> reference;
    if (!spectral) {
        const Level fine{n_ref, config.levels.back().n_per_side << config.reference.refinements};
        for (const auto& level : config.levels) {
            if (fine.n_per_side % level.n_per_side != 0)
                throw ConfigError(fmt::format("fine-FEM reference with n = {} does not nest level n = {}",
                                              fine.n_per_side, level.n_per_side));
        }
        reference = make_level(config.domain, fine, basis, n_ref);
    }

    const std::size_t n_levels = ops.size();
    const std::size_t samples = config.samples;
    std::vector<double> errors(n_levels * samples, 0.0);
    std::vector<double> contraction(samples, 0.0);

    parallel_for(samples, worker_count(config.threads, samples), [&](std::size_t s) {
        NormalStream stream(config.seed, s);
        const auto eta = stream.draw(eta_count(config.covariance, n_ref));
        const auto w = project_noise(config.covariance, basis, n_ref, eta);
        const std::span<const double> w_span(w);

        // Reference realisation shared by every level of this sample.
        std::vector<double> exact;
        double exact_sq = 0.0;
        FemFunction fine_solution;
        if (spectral) {
            exact.resize(n_ref);
            for (std::size_t m = 0; m < n_ref; ++m) {
                exact[m] = w[m] / (lambda[m] - config.f.slope());
                exact_sq += exact[m] * exact[m];
            }
        } else {
            try {
                auto sol = solve_fem(reference->system, reference->load.apply(w_span), config.f, config.picard);
                contraction[s] = std::max(contraction[s], contraction_estimate(sol.increments));
                fine_solution = std::move(sol.function);
            } catch (...) {
                rethrow_with_context(reference->level, s);
            }
        }

        for (std::size_t l = 0; l < n_levels; ++l) {
            const auto& op = *ops[l];
            try {
                const auto sol = solve_fem(op.system, op.load.apply(w_span.first(op.level.n_modes)), config.f,
                                           config.picard);
                contraction[s] = std::max(contraction[s], contraction_estimate(sol.increments));
                double err = 0.0;
                if (spectral) {
                    // ‖u_h - u_ref‖² = uᵀMu - 2 (u_h, u_ref) + Σ c_m²
                    const Eigen::VectorXd u = sol.function.dofs();
                    const double norm_sq = u.dot(op.system.mass * u);
                    const double cross = u.dot(op.load.apply(exact));
                    err = std::sqrt(std::max(0.0, norm_sq - 2.0 * cross + exact_sq));
                } else {
                    err = l2_distance(sol.function, fine_solution);
                }
                errors[l * samples + s] = err;
            } catch (...) {
                rethrow_with_context(op.level, s);
            }
        }
    });

    ConvergenceReport report;
    report.reference_modes = n_ref;
    report.reference_kind = spectral ? "spectral" : "fine-fem";
    report.max_contraction = *std::max_element(contraction.begin(), contraction.end());
    std::vector<double> hs;
    std::vector<double> errs;
    bool all_zero = true;
    bool all_positive = true;
    for (std::size_t l = 0; l < n_levels; ++l) {
        const auto est = moment_estimate(std::span<const double>(errors).subspan(l * samples, samples), config.p);
        report.levels.push_back({ops[l]->mesh->h, ops[l]->level.n_modes, ops[l]->level.n_per_side, est.value,
                                 est.std_error});
        hs.push_back(ops[l]->mesh->h);
        errs.push_back(est.value);
        all_zero = all_zero && est.value == 0.0;
        all_positive = all_positive && est.value > 0.0;
    }

    if (const auto* pl = std::get_if<PowerLaw>(&config.covariance))
        report.predicted_rate = predicted_rate(config.domain.dim, pl->rho).net_rate;
    report.fitted_rate = kNaN;
    if (all_positive && n_levels >= 3)
        report.fitted_rate = fit_line(log_of(hs), log_of(errs)).slope;

    if (all_zero)
        report.pass = true;
    else if (report.predicted_rate && std::isfinite(report.fitted_rate))
        report.pass = std::abs(report.fitted_rate - *report.predicted_rate) <= config.rate_tolerance;
    return report;
}

TruncationReport run_truncation_study(const StudyConfig& config)
{
    config.validate(true);
    if (!config.f.affine())
        throw ConfigError("the exact truncation study requires zero or linear f");
    const std::size_t n_ref = config.reference_modes();
    const auto basis = build_basis(config.domain, n_ref);
    const double shift = config.f.slope();

    const std::size_t n_levels = config.levels.size();
    const std::size_t samples = config.samples;
    std::vector<double> errors(n_levels * samples, 0.0);

    parallel_for(samples, worker_count(config.threads, samples), [&](std::size_t s) {
        NormalStream stream(config.seed, s);
        const auto eta = stream.draw(eta_count(config.covariance, n_ref));
        const auto w = project_noise(config.covariance, basis, n_ref, eta);
        // tail[m] = Σ_{k≥m} (w_k / (λ_k - c))², accumulated from the small end.
        std::vector<double> tail(n_ref + 1, 0.0);
        for (std::size_t m = n_ref; m-- > 0;) {
            const double c = w[m] / (basis.lambda(m) - shift);
            tail[m] = tail[m + 1] + c * c;
        }
        for (std::size_t l = 0; l < n_levels; ++l)
            errors[l * samples + s] = std::sqrt(tail[config.levels[l].n_modes]);
    });

    const auto variances = mode_variances(config.covariance, basis, n_ref);
    TruncationReport report;
    report.reference_modes = n_ref;
    std::vector<double> ns;
    std::vector<double> errs;
    for (std::size_t l = 0; l < n_levels; ++l) {
        const std::size_t n = config.levels[l].n_modes;
        const auto block = std::span<const double>(errors).subspan(l * samples, samples);
        const auto est = moment_estimate(block, config.p);

        TruncationLevel out;
        out.n_modes = n;
        out.error = est.value;
        out.std_error = est.std_error;
        double mean = 0.0;
        for (double e : block)
            mean += e * e;
        mean /= static_cast<double>(samples);
        double var = 0.0;
        for (double e : block)
            var += (e * e - mean) * (e * e - mean);
        out.mean_sq = mean;
        out.mean_sq_std_error =
            samples > 1 ? std::sqrt(var / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
        if (n < n_ref) {
            if (shift == 0.0) {
                out.expected_sq = truncation_error_sq(config.covariance, basis, n, n_ref);
            } else {
                for (std::size_t m = n_ref; m-- > n;) {
                    const double d = basis.lambda(m) - shift;
                    out.expected_sq += variances[m] / (d * d);
                }
            }
        }
        report.levels.push_back(out);
        if (out.error > 0.0) {
            ns.push_back(static_cast<double>(n));
            errs.push_back(out.error);
        }
    }

    if (const auto* pl = std::get_if<PowerLaw>(&config.covariance))
        report.predicted_rate = -predicted_rate(config.domain.dim, pl->rho).truncation_exponent;
    report.fitted_rate = kNaN;
    if (ns.size() >= 3)
        report.fitted_rate = -fit_line(log_of(ns), log_of(errs)).slope;
    if (ns.empty())
        report.pass = true;
    else if (report.predicted_rate && std::isfinite(report.fitted_rate))
        report.pass = std::abs(report.fitted_rate - *report.predicted_rate) <= config.rate_tolerance;
    return report;
}

void write_report_csv(const ConvergenceReport& report, const std::string& path)
{
    auto out = fmt::output_file(path);
    out.print("h,N,error,stderr\n");
    for (const auto& l : report.levels)
        out.print("{:.17g},{},{:.17g},{:.17g}\n", l.h, l.n_modes, l.error, l.std_error);
}

void write_report_gnuplot(const ConvergenceReport& report, const std::string& csv_name, const std::string& path)
{
    auto out = fmt::output_file(path);
    out.print("# gnuplot -p {}\n", path);
    out.print("set datafile separator ','\n");
    out.print("set logscale xy\n");
    out.print("set key top left\n");
    out.print("set xlabel 'h'\nset ylabel 'E[|u - u_N^h|^p]^(1/p)'\n");
    if (report.levels.empty()) {
        out.print("plot '{}' using 1:3:4 skip 1 with yerrorbars title 'measured'\n", csv_name);
        return;
    }
    const auto& finest = report.levels.back();
    const double slope = report.predicted_rate.value_or(report.fitted_rate);
    out.print("h0 = {:.17g}\ne0 = {:.17g}\nrate = {:.17g}\n", finest.h, finest.error, slope);
    out.print("ref(x) = e0 * (x / h0)**rate\n");
    out.print("plot '{}' using 1:3:4 skip 1 with yerrorbars title 'measured (fit {:.3f})', \\\n", csv_name,
              report.fitted_rate);
    out.print("     ref(x) with lines dashtype 2 title sprintf('h^{{%.2f}}', rate)\n");
}

void write_truncation_csv(const TruncationReport& report, const std::string& path)
{
    auto out = fmt::output_file(path);
    out.print("N,error,stderr,mean_sq,mean_sq_stderr,expected_sq\n");
    for (const auto& l : report.levels)
        out.print("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", l.n_modes, l.error, l.std_error, l.mean_sq,
                  l.mean_sq_std_error, l.expected_sq);
}

}  // namespace spdefem
