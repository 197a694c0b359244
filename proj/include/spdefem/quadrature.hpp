#pragma once

#include <vector>

#include "spdefem/eigenbasis.hpp"

namespace spdefem {

struct QuadratureRule {
    std::vector<Point> points;    // reference coordinates
    std::vector<double> weights;  // sum to the reference measure
};

/// q-point Gauss–Legendre rule on [0,1]; exact for degree 2q-1.
QuadratureRule gauss_legendre(int q);

/// Collapsed (Duffy) q×q Gauss rule on the reference triangle
/// {(0,0),(1,0),(0,1)}; exact for total degree 2q-2.
QuadratureRule collapsed_triangle(int q);

/// Smallest Gauss point count in [min_points, max_points] whose error bound
/// for a linear function times an oscillation of phase variation `theta`
/// over the element is below 1e-15. Throws NumericalError if none is.
int gauss_points_for_phase(double theta, int min_points, int max_points);

}  // namespace spdefem
