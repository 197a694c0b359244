#include "spdefem/covariance.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spdefem/error.hpp"

namespace spdefem {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kStagnationTolerance = 1e-8;

// Σ_k B(m,k)^2 for the first `count` modes; rows past the matrix are zero.
std::vector<double> row_norms_sq(const General& g, std::size_t count)
{
    std::vector<double> out(count, 0.0);
    const auto rows = static_cast<std::size_t>(g.sqrt_coeffs.rows());
    for (std::size_t m = 0; m < std::min(count, rows); ++m)
        out[m] = g.sqrt_coeffs.row(static_cast<Eigen::Index>(m)).squaredNorm();
    return out;
}

void require_modes(const EigenBasis& basis, std::size_t n, const char* what)
{
    if (n > basis.size())
        throw ConfigError(std::string(what) + ": requested " + std::to_string(n) +
                          " modes but the basis holds " + std::to_string(basis.size()));
}

}  // namespace

void validate(const CovarianceSpec& q)
{
    std::visit(overloaded{
                   [](const PowerLaw& p) {
                       if (!std::isfinite(p.rho))
                           throw ConfigError("power-law exponent must be finite");
                   },
                   [](const Diagonal& d) {
                       for (double s : d.sigmas) {
                           if (!(s >= 0.0) || !std::isfinite(s))
                               throw ConfigError("diagonal covariance entries must be nonnegative");
                       }
                   },
                   [](const General& g) {
                       if (g.sqrt_coeffs.rows() != g.sqrt_coeffs.cols() || g.sqrt_coeffs.rows() == 0)
                           throw ConfigError("square-root coefficient matrix must be square and nonempty");
                       if (!g.sqrt_coeffs.allFinite())
                           throw ConfigError("square-root coefficient matrix has non-finite entries");
                   },
               },
               q);
}

std::size_t eta_count(const CovarianceSpec& q, std::size_t n_modes)
{
    if (const auto* g = std::get_if<General>(&q))
        return static_cast<std::size_t>(g->sqrt_coeffs.cols());
    return n_modes;
}

std::vector<double> mode_variances(const CovarianceSpec& q, const EigenBasis& basis,
                                   std::size_t count)
{
    validate(q);
    require_modes(basis, count, "mode variances");
    return std::visit(overloaded{
                          [&](const PowerLaw& p) {
                              std::vector<double> v(count);
                              for (std::size_t m = 0; m < count; ++m)
                                  v[m] = std::pow(basis.lambda(m), p.rho);
                              return v;
                          },
                          [&](const Diagonal& d) {
                              std::vector<double> v(count, 0.0);
                              for (std::size_t m = 0; m < std::min(count, d.sigmas.size()); ++m)
                                  v[m] = d.sigmas[m];
                              return v;
                          },
                          [&](const General& g) { return row_norms_sq(g, count); },
                      },
                      q);
}

NormalStream::NormalStream(std::uint64_t master_seed, std::uint64_t index)
    : master_(master_seed), index_(index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double NormalStream::next()
{
    return normal_(engine_);
}

std::vector<double> NormalStream::draw(std::size_t count)
{
    std::vector<double> out(count);
    for (auto& x : out)
        x = next();
    return out;
}

std::vector<double> project_noise(const CovarianceSpec& q, const EigenBasis& basis,
                                  std::size_t n, std::span<const double> eta)
{
    validate(q);
    require_modes(basis, n, "noise projection");
    if (eta.size() < eta_count(q, n))
        throw ConfigError("noise projection: not enough normal draws");

    std::vector<double> w(n, 0.0);
    if (const auto* g = std::get_if<General>(&q)) {
        const auto dim = static_cast<std::size_t>(g->sqrt_coeffs.rows());
        if (n > dim)
            throw ConfigError("noise projection: N = " + std::to_string(n) +
                              " exceeds the square-root matrix dimension " + std::to_string(dim));
        const Eigen::Map<const Eigen::VectorXd> e(eta.data(), g->sqrt_coeffs.cols());
        const Eigen::VectorXd full = g->sqrt_coeffs.topRows(static_cast<Eigen::Index>(n)) * e;
        for (std::size_t m = 0; m < n; ++m)
            w[m] = full[static_cast<Eigen::Index>(m)];
        return w;
    }
    const auto variances = mode_variances(q, basis, n);
    for (std::size_t m = 0; m < n; ++m)
        w[m] = std::sqrt(variances[m]) * eta[m];
    return w;
}

NoiseSample sample_projected_noise(const CovarianceSpec& q, const EigenBasis& basis,
                                   std::size_t n, NormalStream& stream)
{
    NoiseSample s;
    s.n = n;
    s.seed = stream.master_seed();
    s.stream_index = stream.index();
    s.eta = stream.draw(eta_count(q, n));
    s.coeffs = project_noise(q, basis, n, s.eta);
    return s;
}

RegularityIndex hs_norm_sq(const CovarianceSpec& q, const EigenBasis& basis, double beta,
                           std::size_t trunc)
{
    if (!(beta >= 0.0 && beta <= 2.0))
        throw ConfigError("regularity index beta must lie in [0, 2]");
    if (trunc == 0)
        throw ConfigError("hs_norm_sq needs at least one mode");
    require_modes(basis, trunc, "hs_norm_sq");

    const auto variances = mode_variances(q, basis, trunc);
    // Partial sums accumulated from the small tail terms upward.
    auto partial = [&](std::size_t upto) {
        double s = 0.0;
        for (std::size_t m = upto; m-- > 0;)
            s += std::pow(basis.lambda(m), beta - 2.0) * variances[m];
        return s;
    };

    RegularityIndex r;
    r.beta = beta;
    r.hs_norm_sq = partial(trunc);
    if (const auto* p = std::get_if<PowerLaw>(&q)) {
        r.converged = beta - 2.0 + p->rho < -0.5 * basis.domain().dim;
        r.heuristic = false;
    } else {
        // Stagnation over the last decade (K/10, K].
        const double earlier = partial(trunc / 10);
        const double change = r.hs_norm_sq - earlier;
        r.converged = r.hs_norm_sq == 0.0 || change < kStagnationTolerance * r.hs_norm_sq;
        r.heuristic = true;
    }
    return r;
}

WellPosedness is_well_posed(const CovarianceSpec& q, const Domain& domain)
{
    domain.validate();
    validate(q);
    if (const auto* p = std::get_if<PowerLaw>(&q)) {
        const double margin = regularity_supremum(*p, domain.dim);
        return {margin > 0.0, margin, false};
    }
    std::size_t k = 0;
    if (const auto* d = std::get_if<Diagonal>(&q))
        k = d->sigmas.size();
    else
        k = static_cast<std::size_t>(std::get<General>(q).sqrt_coeffs.rows());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (k == 0)
        return {true, nan, true};
    const auto basis = build_basis(domain, k);
    return {hs_norm_sq(q, basis, 0.0, k).converged, nan, true};
}

double regularity_supremum(const PowerLaw& q, int dim)
{
    return 2.0 - 0.5 * dim - q.rho;
}

double truncation_error_sq(const CovarianceSpec& q, const EigenBasis& basis, std::size_t n,
                           std::size_t trunc)
{
    if (n >= trunc)
        throw ConfigError("truncation_error_sq: N must be smaller than the cap K");
    require_modes(basis, trunc, "truncation_error_sq");
    const auto variances = mode_variances(q, basis, trunc);
    double s = 0.0;
    for (std::size_t m = trunc; m-- > n;) {
        const double lam = basis.lambda(m);
        s += variances[m] / (lam * lam);
    }
    return s;
}

}  // namespace spdefem
