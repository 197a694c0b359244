#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "spdefem/covariance.hpp"
#include "spdefem/eigenbasis.hpp"

namespace spdefem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// P1 mesh of segments (1D) or triangles (2D).
///
/// Meshes produced by build_mesh are structured: an n×n grid whose squares are
/// split along the (1,1) diagonal. `n_per_side` is 0 for meshes assembled by
/// hand, which disables the closed-form load and point location.
struct Mesh {
    Domain domain;
    int n_per_side = 0;
    std::array<double, 2> spacing{0.0, 0.0};
    int nodes_per_element = 2;
    std::vector<Point> nodes;
    std::vector<int> connectivity;
    std::vector<bool> boundary;
    double h = 0.0;

    /// Interior numbering; -1 marks Dirichlet nodes.
    std::vector<int> dof_of_node;
    std::vector<int> node_of_dof;

    std::size_t num_nodes() const noexcept { return nodes.size(); }
    std::size_t num_elements() const noexcept { return connectivity.size() / nodes_per_element; }
    std::size_t num_dofs() const noexcept { return node_of_dof.size(); }
    bool structured() const noexcept { return n_per_side > 0; }

    std::span<const int> element(std::size_t e) const
    {
        return {connectivity.data() + e * nodes_per_element, static_cast<std::size_t>(nodes_per_element)};
    }
    /// Signed length (1D) or area (2D).
    double element_measure(std::size_t e) const;
    double element_diameter(std::size_t e) const;

    /// Rebuilds the dof numbering from `boundary`.
    void number_dofs();
};

Mesh build_mesh(const Domain& domain, int n_per_side);

/// Ratio of largest to smallest element diameter.
double quasi_uniformity(const Mesh& mesh);

/// Stiffness and mass over all nodes, before Dirichlet elimination.
struct GlobalMatrices {
    SparseMatrix stiffness;
    SparseMatrix mass;
};

GlobalMatrices assemble_global(const Mesh& mesh);

using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

/// Interior-node operators for one discretisation level.
struct FemSystem {
    std::shared_ptr<const Mesh> mesh;
    SparseMatrix stiffness;        // S_ij = (∇χ_i, ∇χ_j)
    SparseMatrix mass;             // M_ij = (χ_i, χ_j)
    Eigen::VectorXd lumped_mass;   // ∫χ_i
    Eigen::VectorXd noise_load;    // b_i = (P_N Ẇ^Q, χ_i); empty until set
    std::shared_ptr<const Factorization> factorization;
};

FemSystem assemble(std::shared_ptr<const Mesh> mesh);
FemSystem assemble(const Mesh& mesh);

/// Solves S x = rhs with the cached sparse Cholesky factor.
Eigen::VectorXd solve_stiffness(const FemSystem& system, const Eigen::VectorXd& rhs);

struct FemFunction {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> nodal_values;   // zero at Dirichlet nodes

    static FemFunction zero(std::shared_ptr<const Mesh> mesh);
    static FemFunction from_dofs(std::shared_ptr<const Mesh> mesh, const Eigen::VectorXd& dofs);
    Eigen::VectorXd dofs() const;
    /// Point evaluation on a structured mesh.
    double value_at(const Point& x) const;
};

enum class LoadRule { ClosedForm, Quadrature };

/// c ↦ ((Σ_m c_m φ_m, χ_i))_i on a structured mesh, evaluated exactly.
///
/// Uses the Fourier transform of the P1 hat: a B-spline of order two in 1D,
/// and in 2D the three-direction box spline with directions (1,0), (0,1),
/// (1,1), so that
///   ∫ χ_p e^{iω·x} = h_x h_y e^{iω·x_p} sinc(h_xω_1/2) sinc(h_yω_2/2)
///                    sinc((h_xω_1 + h_yω_2)/2).
/// The sine products then reduce to two small matrix products per apply.
class NoiseLoadOperator {
public:
    NoiseLoadOperator(const Mesh& mesh, const EigenBasis& basis, std::size_t n_modes);

    std::size_t modes() const noexcept { return n_modes_; }
    Eigen::VectorXd apply(std::span<const double> coeffs) const;

private:
    int dim_ = 1;
    std::size_t n_modes_ = 0;
    Eigen::Index n_int_ = 0;
    // 1D: table_(p, m) = (φ_m, χ_p).
    Eigen::MatrixXd table_;
    // 2D: per-axis trig tables and box-spline weights on the (i,j) lattice.
    std::vector<std::array<int, 2>> quantum_;
    Eigen::MatrixXd cos_x_, sin_x_, cos_y_, sin_y_;
    Eigen::MatrixXd weight_cc_, weight_ss_;
};

/// b_i = Σ_{m≤N} w_m (φ_m, χ_i). The quadrature rule raises the Gauss order
/// with the highest retained wavenumber and throws NumericalError when the
/// modes cannot be resolved.
Eigen::VectorXd assemble_noise_load(const Mesh& mesh, const EigenBasis& basis,
                                    std::span<const double> coeffs,
                                    LoadRule rule = LoadRule::ClosedForm);

void set_noise_load(FemSystem& system, const EigenBasis& basis, const NoiseSample& sample,
                    LoadRule rule = LoadRule::ClosedForm);

/// Nodal interpolant of Σ w_m φ_m.
FemFunction interpolate(std::shared_ptr<const Mesh> mesh, const EigenBasis& basis,
                        std::span<const double> coeffs);

/// Energy projection R_h of Σ w_m φ_m: S c = g, g_i = Σ λ_m w_m (φ_m, χ_i).
FemFunction ritz_project(const FemSystem& system, const EigenBasis& basis,
                         std::span<const double> coeffs);

/// R_h for a function known only through its products g_i = (∇w, ∇χ_i).
FemFunction ritz_project_gradients(const FemSystem& system, const Eigen::VectorXd& grad_products);

double l2_norm_sq(const FemFunction& fe);

/// ‖fe − Σ w_m φ_m‖_{L²}. The closed-form rule expands the square using
/// orthonormality of φ_m and the exact load operator; the quadrature rule
/// integrates the squared difference element by element.
double l2_error(const FemFunction& fe, const EigenBasis& basis, std::span<const double> coeffs,
                LoadRule rule = LoadRule::ClosedForm);

/// ‖fine − coarse‖_{L²} when the coarse structured mesh is nested in the fine one.
double l2_distance(const FemFunction& coarse, const FemFunction& fine);

/// CSV with header `x,value` (1D) or `x,y,value` (2D).
void write_csv(const FemFunction& fe, const std::string& path);

/// `x y value` rows with a blank line after each grid row, as read by
/// gnuplot's splot. 2D only.
void write_gnuplot_grid(const FemFunction& fe, const std::string& path);

}  // namespace spdefem
