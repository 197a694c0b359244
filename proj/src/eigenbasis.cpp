#include "spdefem/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "spdefem/error.hpp"

namespace spdefem {

namespace {

constexpr double kPi = std::numbers::pi;

EigenPair make_pair_1d(const Domain& domain, int i)
{
    const double a = domain.extent[0];
    EigenPair p;
    p.dim = 1;
    p.quantum = {i, 0};
    p.wavenumber = {i * kPi / a, 0.0};
    p.lambda = p.wavenumber[0] * p.wavenumber[0];
    p.amplitude = std::sqrt(2.0 / a);
    return p;
}

EigenPair make_pair_2d(const Domain& domain, int i, int j)
{
    const double a = domain.extent[0];
    const double b = domain.extent[1];
    EigenPair p;
    p.dim = 2;
    p.quantum = {i, j};
    p.wavenumber = {i * kPi / a, j * kPi / b};
    // π² times the sort key, so equal keys give bitwise equal eigenvalues.
    p.lambda = kPi * kPi * (i * i / (a * a) + j * j / (b * b));
    p.amplitude = 2.0 / std::sqrt(a * b);
    return p;
}

// The `count` smallest values of i^2/a^2 + j^2/b^2, ordered by (value, i, j).
std::vector<std::array<int, 2>> smallest_lattice_modes(const Domain& domain, std::size_t count)
{
    const double a2 = domain.extent[0] * domain.extent[0];
    const double b2 = domain.extent[1] * domain.extent[1];
    const double ia2 = 1.0 / a2;
    const double ib2 = 1.0 / b2;
    // Lattice points under the quarter ellipse of "radius" sqrt(bound): ~ π bound ab / 4.
    double bound = 4.0 * static_cast<double>(count) / (kPi * std::sqrt(ia2 * ib2)) + ia2 + ib2;

    using Key = std::tuple<double, int, int>;
    std::vector<Key> keys;
    for (;;) {
        keys.clear();
        for (int i = 1; i * i * ia2 + ib2 <= bound; ++i) {
            for (int j = 1; i * i * ia2 + j * j * ib2 <= bound; ++j)
                keys.emplace_back(i * i / a2 + j * j / b2, i, j);
        }
        if (keys.size() >= count)
            break;
        bound *= 2.0;
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::array<int, 2>> modes;
    modes.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        modes.push_back({std::get<1>(keys[k]), std::get<2>(keys[k])});
    return modes;
}

}  // namespace

Domain Domain::unit(int dim)
{
    Domain d;
    d.dim = dim;
    d.validate();
    return d;
}

void Domain::validate() const
{
    if (dim != 1 && dim != 2)
        throw ConfigError("domain dimension must be 1 or 2, got " + std::to_string(dim));
    for (int k = 0; k < dim; ++k) {
        if (!(extent[k] > 0.0) || !std::isfinite(extent[k]))
            throw ConfigError("domain extents must be positive and finite");
    }
}

double Domain::volume() const
{
    return dim == 1 ? extent[0] : extent[0] * extent[1];
}

double EigenPair::value(const Point& x) const
{
    double v = amplitude * std::sin(wavenumber[0] * x[0]);
    if (dim == 2)
        v *= std::sin(wavenumber[1] * x[1]);
    return v;
}

double EigenPair::neg_laplacian(const Point& x) const
{
    // Each sine factor contributes -(k^2) sin to its second derivative.
    const double sx = std::sin(wavenumber[0] * x[0]);
    if (dim == 1)
        return amplitude * wavenumber[0] * wavenumber[0] * sx;
    const double sy = std::sin(wavenumber[1] * x[1]);
    return amplitude * (wavenumber[0] * wavenumber[0] + wavenumber[1] * wavenumber[1]) * sx * sy;
}

EigenBasis::EigenBasis(Domain domain, std::vector<EigenPair> pairs)
    : domain_(domain), pairs_(std::move(pairs))
{
}

double EigenBasis::evaluate(std::span<const double> coeffs, const Point& x) const
{
    const std::size_t n = std::min(coeffs.size(), pairs_.size());
    double v = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        v += coeffs[k] * pairs_[k].value(x);
    return v;
}

EigenBasis build_basis(const Domain& domain, std::size_t count)
{
    domain.validate();
    if (count == 0)
        throw ConfigError("eigenbasis needs at least one mode");

    std::vector<EigenPair> pairs;
    pairs.reserve(count);
    if (domain.dim == 1) {
        for (std::size_t k = 1; k <= count; ++k)
            pairs.push_back(make_pair_1d(domain, static_cast<int>(k)));
    } else {
        for (const auto& [i, j] : smallest_lattice_modes(domain, count))
            pairs.push_back(make_pair_2d(domain, i, j));
    }
    for (std::size_t k = 0; k < pairs.size(); ++k)
        pairs[k].index = static_cast<int>(k + 1);
    return EigenBasis(domain, std::move(pairs));
}

std::vector<double> weyl_ratios(const EigenBasis& basis)
{
    const double exponent = 2.0 / basis.domain().dim;
    std::vector<double> ratios;
    ratios.reserve(basis.size());
    for (const auto& p : basis.pairs())
        ratios.push_back(p.lambda / std::pow(static_cast<double>(p.index), exponent));
    return ratios;
}

double poincare_constant(const EigenBasis& basis)
{
    if (basis.empty())
        throw ConfigError("Poincare constant of an empty basis");
    return basis[0].lambda;
}

double poincare_constant(const Domain& domain)
{
    domain.validate();
    double gamma = 0.0;
    for (int k = 0; k < domain.dim; ++k)
        gamma += kPi * kPi / (domain.extent[k] * domain.extent[k]);
    return gamma;
}

}  // namespace spdefem
