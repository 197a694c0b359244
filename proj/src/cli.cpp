#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spdefem/config.hpp"
#include "spdefem/error.hpp"

namespace spdefem {

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    return out;
}

Domain unit_domain(int dim)
{
    Domain d = Domain::unit(dim);
    d.validate();
    return d;
}

void run_eigen(int dim, std::size_t count, const std::string& csv)
{
    const auto basis = build_basis(unit_domain(dim), count);
    const auto ratios = weyl_ratios(basis);
    std::ofstream file;
    if (!csv.empty())
        file = open_output(csv);
    std::ostream& out = csv.empty() ? std::cout : file;
    fmt::print(out, "k,lambda,weyl_ratio\n");
    for (std::size_t k = 0; k < basis.size(); ++k)
        fmt::print(out, "{},{:.17g},{:.17g}\n", k + 1, basis.lambda(k), ratios[k]);
}

void run_sample(int dim, double rho, std::size_t n, std::uint64_t seed, std::uint64_t index,
                const std::string& csv)
{
    const CovarianceSpec q = PowerLaw{rho};
    validate(q);
    const auto basis = build_basis(unit_domain(dim), n);
    NormalStream stream(seed, index);
    const auto sample = sample_projected_noise(q, basis, n, stream);
    std::ofstream file;
    if (!csv.empty())
        file = open_output(csv);
    std::ostream& out = csv.empty() ? std::cout : file;
    fmt::print(out, "m,coeff\n");
    for (std::size_t m = 0; m < sample.coeffs.size(); ++m)
        fmt::print(out, "{},{:.17g}\n", m + 1, sample.coeffs[m]);
}

void run_converge(const std::string& config_path, const std::string& out_dir, int threads)
{
    auto config = load_study_config(config_path);
    if (threads > 0)
        config.threads = threads;
    const auto report = run_study(config);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_report_csv(report, (dir / "report.csv").string());
    write_report_gnuplot(report, "report.csv", (dir / "report.gp").string());
    for (const auto& l : report.levels)
        fmt::print("N={} n={} h={:.6g} error={:.6e} stderr={:.2e}\n", l.n_modes, l.n_per_side, l.h, l.error,
                   l.std_error);
    fmt::print("reference={} N_ref={}\n", report.reference_kind, report.reference_modes);
    fmt::print("max_contraction={:.6g}\n", report.max_contraction);
    fmt::print("fitted_rate={:.6g}\n", report.fitted_rate);
    if (report.predicted_rate)
        fmt::print("predicted_rate={:.6g}\n", *report.predicted_rate);
    fmt::print("pass={}\n", report.pass ? "true" : "false");
}

void run_truncate(const std::string& config_path, const std::string& out_dir)
{
    const auto config = load_study_config(config_path);
    const auto report = run_truncation_study(config);
    std::filesystem::create_directories(out_dir);
    write_truncation_csv(report, (std::filesystem::path(out_dir) / "truncation.csv").string());
    for (const auto& l : report.levels)
        fmt::print("N={} error={:.6e} stderr={:.2e} mean_sq={:.6e} expected_sq={:.6e}\n", l.n_modes, l.error,
                   l.std_error, l.mean_sq, l.expected_sq);
    fmt::print("fitted_rate={:.6g}\n", report.fitted_rate);
    if (report.predicted_rate)
        fmt::print("predicted_rate={:.6g}\n", *report.predicted_rate);
    fmt::print("pass={}\n", report.pass ? "true" : "false");
}

void run_rates(int dim, double rho, int order, double coupling)
{
    const auto r = predicted_rate(dim, rho, order, coupling);
    fmt::print("predicted_rate={:g}\n", r.net_rate);
    fmt::print("truncation_exponent={:g}\n", r.truncation_exponent);
    fmt::print("fem_h_exponent={:g}\n", r.fem_h_exponent);
    fmt::print("fem_n_exponent={:g}\n", r.fem_n_exponent);
}

}  // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Finite elements for semilinear elliptic equations with projected Gaussian noise"};
    app.require_subcommand(1);

    int dim = 1;
    std::size_t count = 0;
    std::string csv;
    auto* eigen = app.add_subcommand("eigen", "Dirichlet Laplacian eigenvalues and Weyl ratios");
    eigen->add_option("--dim", dim)->required()->check(CLI::Range(1, 2));
    eigen->add_option("--count", count)->required()->check(CLI::PositiveNumber);
    eigen->add_option("--csv", csv, "Output file (stdout if omitted)");

    double rho = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    auto* sample = app.add_subcommand("sample", "One realisation of the projected noise coefficients");
    sample->add_option("--dim", dim)->required()->check(CLI::Range(1, 2));
    sample->add_option("--rho", rho)->required();
    sample->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    sample->add_option("--seed", seed)->required();
    sample->add_option("--index", index, "Sample stream index");
    sample->add_option("--csv", csv, "Output file (stdout if omitted)");

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    auto* converge = app.add_subcommand("converge", "Monte Carlo convergence study in h");
    converge->add_option("--config", config_path)->required();
    converge->add_option("--out", out_dir, "Directory for report.csv and report.gp");
    converge->add_option("--threads", threads);

    auto* truncate = app.add_subcommand("truncate", "Spectral truncation study in N");
    truncate->add_option("--config", config_path)->required();
    truncate->add_option("--out", out_dir, "Directory for truncation.csv");

    int order = 1;
    double coupling = 1.0;
    auto* rates = app.add_subcommand("rates", "Predicted convergence rate for power-law noise");
    rates->add_option("--dim", dim)->required()->check(CLI::Range(1, 2));
    rates->add_option("--rho", rho)->required();
    rates->add_option("--order", order, "Polynomial degree r of the elements")->check(CLI::PositiveNumber);
    rates->add_option("--coupling", coupling, "h ~ N^{-coupling/d}")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*eigen)
            run_eigen(dim, count, csv);
        else if (*sample)
            run_sample(dim, rho, n, seed, index, csv);
        else if (*converge)
            run_converge(config_path, out_dir, threads);
        else if (*truncate)
            run_truncate(config_path, out_dir);
        else if (*rates)
            run_rates(dim, rho, order, coupling);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace spdefem
