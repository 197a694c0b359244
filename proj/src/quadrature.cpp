#include "spdefem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spdefem/error.hpp"

namespace spdefem {

QuadratureRule gauss_legendre(int q)
{
    if (q < 1)
        throw ConfigError("Gauss rule needs at least one point");
    QuadratureRule rule;
    rule.points.resize(q);
    rule.weights.resize(q);
    // Newton on P_q from the Chebyshev-like initial guesses; symmetric pairs.
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1].
        rule.points[i] = {0.5 * (1.0 - x), 0.0};
        rule.points[q - 1 - i] = {0.5 * (1.0 + x), 0.0};
        rule.weights[i] = 0.5 * w;
        rule.weights[q - 1 - i] = 0.5 * w;
    }
    return rule;
}

QuadratureRule collapsed_triangle(int q)
{
    const auto line = gauss_legendre(q);
    QuadratureRule rule;
    rule.points.reserve(static_cast<std::size_t>(q) * q);
    rule.weights.reserve(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a) {
        const double u = line.points[a][0];
        for (int b = 0; b < q; ++b) {
            const double v = line.points[b][0];
            rule.points.push_back({u, v * (1.0 - u)});
            rule.weights.push_back(line.weights[a] * line.weights[b] * (1.0 - u));
        }
    }
    return rule;
}

int gauss_points_for_phase(double theta, int min_points, int max_points)
{
    theta = std::abs(theta);
    for (int q = min_points; q <= max_points; ++q) {
        if (theta == 0.0)
            return q;
        // log of theta^{2q} (q!)^4 / ((2q+1) ((2q)!)^3) * (1 + 2q/theta)
        const double log_bound = 2.0 * q * std::log(theta) + 4.0 * std::lgamma(q + 1.0) -
                                 std::log(2.0 * q + 1.0) - 3.0 * std::lgamma(2.0 * q + 1.0) +
                                 std::log1p(2.0 * q / theta);
        if (log_bound < std::log(1e-15))
            return q;
    }
    throw NumericalError("quadrature cannot resolve phase variation " + std::to_string(theta) +
                         " per element with at most " + std::to_string(max_points) +
                         " Gauss points; refine the mesh or reduce the number of modes");
}

}  // namespace spdefem
