#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace spdefem {

using Point = std::array<double, 2>;

/// Interval (0,a) or rectangle (0,a)x(0,b).
struct Domain {
    int dim = 1;
    std::array<double, 2> extent{1.0, 1.0};

    static Domain unit(int dim);
    /// Throws ConfigError unless dim is 1 or 2 and the used extents are positive.
    void validate() const;
    double volume() const;
};

/// One eigenpair of the negative Dirichlet Laplacian, evaluated in closed form
/// as a product of sines.
struct EigenPair {
    int index = 0;                       // 1-based position in the sorted basis
    double lambda = 0.0;
    std::array<int, 2> quantum{0, 0};    // (i) in 1D, (i,j) in 2D
    std::array<double, 2> wavenumber{0.0, 0.0};
    double amplitude = 0.0;              // L2 normalisation
    int dim = 1;

    double value(const Point& x) const;
    /// -Δφ evaluated from the second derivatives of the sine factors.
    double neg_laplacian(const Point& x) const;
};

class EigenBasis {
public:
    EigenBasis(Domain domain, std::vector<EigenPair> pairs);

    const Domain& domain() const noexcept { return domain_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::span<const EigenPair> pairs() const noexcept { return pairs_; }
    const EigenPair& operator[](std::size_t k) const { return pairs_[k]; }
    double lambda(std::size_t k) const { return pairs_[k].lambda; }

    /// Σ c_k φ_k(x) over the first c.size() modes.
    double evaluate(std::span<const double> coeffs, const Point& x) const;

private:
    Domain domain_;
    std::vector<EigenPair> pairs_;
};

/// First `count` eigenpairs sorted by eigenvalue; 2D ties are broken
/// lexicographically on (i,j).
EigenBasis build_basis(const Domain& domain, std::size_t count);

/// λ_k / k^{2/d} for k = 1..K.
std::vector<double> weyl_ratios(const EigenBasis& basis);

/// Sharp Poincaré constant, i.e. λ_1.
double poincare_constant(const EigenBasis& basis);
double poincare_constant(const Domain& domain);

}  // namespace spdefem
