#include "spdefem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/os.h>

#include "spdefem/error.hpp"
#include "spdefem/quadrature.hpp"

namespace spdefem {

namespace {

using Triplet = Eigen::Triplet<double>;

double sinc(double t)
{
    return std::abs(t) < 1e-8 ? 1.0 - t * t / 6.0 : std::sin(t) / t;
}

std::shared_ptr<const Mesh> share(const Mesh& mesh)
{
    return std::make_shared<const Mesh>(mesh);
}

void require_structured(const Mesh& mesh, const char* what)
{
    if (!mesh.structured())
        throw ConfigError(std::string(what) + " requires a structured mesh from build_mesh");
}

SparseMatrix restrict_to_dofs(const SparseMatrix& full, const Mesh& mesh)
{
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (Eigen::Index col = 0; col < full.outerSize(); ++col) {
        const int dc = mesh.dof_of_node[static_cast<std::size_t>(col)];
        if (dc < 0)
            continue;
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int dr = mesh.dof_of_node[static_cast<std::size_t>(it.row())];
            if (dr >= 0)
                entries.emplace_back(dr, dc, it.value());
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_dofs());
    SparseMatrix out(n, n);
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

// Largest phase variation sum_k |ω_k| h_k of the first `count` modes over one element.
double max_phase(const Mesh& mesh, const EigenBasis& basis, std::size_t count)
{
    double hx = mesh.spacing[0];
    double hy = mesh.spacing[1];
    if (!mesh.structured())
        hx = hy = mesh.h;
    double theta = 0.0;
    for (std::size_t m = 0; m < count; ++m) {
        const auto& p = basis[m];
        theta = std::max(theta, p.wavenumber[0] * hx + (mesh.domain.dim == 2 ? p.wavenumber[1] * hy : 0.0));
    }
    return theta;
}

constexpr int kMinGaussPoints = 3;   // degree >= 4 in both 1D and on triangles
constexpr int kMaxGaussPoints1d = 48;
constexpr int kMaxGaussPoints2d = 32;

// Reference rule and affine map for element e.
struct ElementGeometry {
    Point origin{};
    Point e1{};
    Point e2{};
    double jacobian = 0.0;

    Point map(const Point& xi) const
    {
        return {origin[0] + e1[0] * xi[0] + e2[0] * xi[1], origin[1] + e1[1] * xi[0] + e2[1] * xi[1]};
    }
};

ElementGeometry geometry(const Mesh& mesh, std::size_t e)
{
    const auto v = mesh.element(e);
    ElementGeometry g;
    g.origin = mesh.nodes[v[0]];
    const auto& p1 = mesh.nodes[v[1]];
    g.e1 = {p1[0] - g.origin[0], p1[1] - g.origin[1]};
    if (mesh.nodes_per_element == 3) {
        const auto& p2 = mesh.nodes[v[2]];
        g.e2 = {p2[0] - g.origin[0], p2[1] - g.origin[1]};
    }
    g.jacobian = std::abs(mesh.element_measure(e)) * (mesh.nodes_per_element == 3 ? 2.0 : 1.0);
    return g;
}

// P1 shape functions at reference point xi.
std::array<double, 3> shape(const Mesh& mesh, const Point& xi)
{
    if (mesh.nodes_per_element == 2)
        return {1.0 - xi[0], xi[0], 0.0};
    return {1.0 - xi[0] - xi[1], xi[0], xi[1]};
}

QuadratureRule element_rule(const Mesh& mesh, double theta)
{
    if (mesh.domain.dim == 1)
        return gauss_legendre(gauss_points_for_phase(theta, kMinGaussPoints, kMaxGaussPoints1d));
    return collapsed_triangle(gauss_points_for_phase(theta, kMinGaussPoints, kMaxGaussPoints2d));
}

Eigen::VectorXd quadrature_load(const Mesh& mesh, const EigenBasis& basis, std::span<const double> coeffs)
{
    const auto rule = element_rule(mesh, max_phase(mesh, basis, coeffs.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto g = geometry(mesh, e);
        const auto v = mesh.element(e);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
            const double field = basis.evaluate(coeffs, g.map(rule.points[q]));
            const auto n = shape(mesh, rule.points[q]);
            for (int a = 0; a < mesh.nodes_per_element; ++a) {
                const int dof = mesh.dof_of_node[v[a]];
                if (dof >= 0)
                    b[dof] += rule.weights[q] * g.jacobian * field * n[a];
            }
        }
    }
    return b;
}

}  // namespace

double Mesh::element_measure(std::size_t e) const
{
    const auto v = element(e);
    const auto& a = nodes[v[0]];
    const auto& b = nodes[v[1]];
    if (nodes_per_element == 2)
        return b[0] - a[0];
    const auto& c = nodes[v[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double Mesh::element_diameter(std::size_t e) const
{
    const auto v = element(e);
    double diam = 0.0;
    for (int a = 0; a < nodes_per_element; ++a) {
        for (int b = a + 1; b < nodes_per_element; ++b) {
            const auto& p = nodes[v[a]];
            const auto& q = nodes[v[b]];
            diam = std::max(diam, std::hypot(p[0] - q[0], p[1] - q[1]));
        }
    }
    return diam;
}

void Mesh::number_dofs()
{
    dof_of_node.assign(nodes.size(), -1);
    node_of_dof.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!boundary[i]) {
            dof_of_node[i] = static_cast<int>(node_of_dof.size());
            node_of_dof.push_back(static_cast<int>(i));
        }
    }
}

Mesh build_mesh(const Domain& domain, int n)
{
    domain.validate();
    if (n < 2)
        throw ConfigError("mesh needs at least 2 cells per side, got " + std::to_string(n));

    Mesh mesh;
    mesh.domain = domain;
    mesh.n_per_side = n;
    if (domain.dim == 1) {
        const double h = domain.extent[0] / n;
        mesh.spacing = {h, 0.0};
        mesh.nodes_per_element = 2;
        for (int i = 0; i <= n; ++i) {
            mesh.nodes.push_back({i * h, 0.0});
            mesh.boundary.push_back(i == 0 || i == n);
        }
        for (int i = 0; i < n; ++i) {
            mesh.connectivity.push_back(i);
            mesh.connectivity.push_back(i + 1);
        }
        mesh.h = h;
    } else {
        const double hx = domain.extent[0] / n;
        const double hy = domain.extent[1] / n;
        mesh.spacing = {hx, hy};
        mesh.nodes_per_element = 3;
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                mesh.nodes.push_back({i * hx, j * hy});
                mesh.boundary.push_back(i == 0 || i == n || j == 0 || j == n);
            }
        }
        const auto id = [n](int i, int j) { return j * (n + 1) + i; };
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int n00 = id(i, j), n10 = id(i + 1, j), n11 = id(i + 1, j + 1), n01 = id(i, j + 1);
                mesh.connectivity.insert(mesh.connectivity.end(), {n00, n10, n11});
                mesh.connectivity.insert(mesh.connectivity.end(), {n00, n11, n01});
            }
        }
        mesh.h = std::hypot(hx, hy);
    }
    mesh.number_dofs();
    return mesh;
}

double quasi_uniformity(const Mesh& mesh)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double d = mesh.element_diameter(e);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi / lo;
}

GlobalMatrices assemble_global(const Mesh& mesh)
{
    std::vector<Triplet> stiff;
    std::vector<Triplet> mass;
    const std::size_t per = static_cast<std::size_t>(mesh.nodes_per_element) * mesh.nodes_per_element;
    stiff.reserve(mesh.num_elements() * per);
    mass.reserve(mesh.num_elements() * per);

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element(e);
        const double measure = mesh.element_measure(e);
        if (!(std::abs(measure) > 1e-14 * std::pow(mesh.h > 0.0 ? mesh.h : 1.0, mesh.domain.dim)))
            throw ConfigError(fmt::format("degenerate element {} (measure {:g})", e, measure));

        if (mesh.nodes_per_element == 2) {
            const double len = std::abs(measure);
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    stiff.emplace_back(v[a], v[b], (a == b ? 1.0 : -1.0) / len);
                    mass.emplace_back(v[a], v[b], len * (a == b ? 2.0 : 1.0) / 6.0);
                }
            }
            continue;
        }

        const double area = std::abs(measure);
        std::array<std::array<double, 2>, 3> grad{};
        for (int a = 0; a < 3; ++a) {
            // ∇λ_a = perp(x_{a+2} - x_{a+1}) / (2 * signed area)
            const auto& p = mesh.nodes[v[(a + 1) % 3]];
            const auto& q = mesh.nodes[v[(a + 2) % 3]];
            grad[a] = {(p[1] - q[1]) / (2.0 * measure), (q[0] - p[0]) / (2.0 * measure)};
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                stiff.emplace_back(v[a], v[b], area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]));
                mass.emplace_back(v[a], v[b], area * (a == b ? 2.0 : 1.0) / 12.0);
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    GlobalMatrices g{SparseMatrix(n, n), SparseMatrix(n, n)};
    g.stiffness.setFromTriplets(stiff.begin(), stiff.end());
    g.mass.setFromTriplets(mass.begin(), mass.end());
    return g;
}

FemSystem assemble(std::shared_ptr<const Mesh> mesh)
{
    const auto global = assemble_global(*mesh);
    FemSystem sys;
    sys.mesh = std::move(mesh);
    sys.stiffness = restrict_to_dofs(global.stiffness, *sys.mesh);
    sys.mass = restrict_to_dofs(global.mass, *sys.mesh);
    // ∫χ_i: row sums of the full mass matrix, before boundary columns are dropped.
    const Eigen::VectorXd row_sums = global.mass * Eigen::VectorXd::Ones(global.mass.cols());
    sys.lumped_mass.resize(static_cast<Eigen::Index>(sys.mesh->num_dofs()));
    for (std::size_t d = 0; d < sys.mesh->num_dofs(); ++d)
        sys.lumped_mass[static_cast<Eigen::Index>(d)] = row_sums[sys.mesh->node_of_dof[d]];
    auto factor = std::make_shared<Factorization>(sys.stiffness);
    if (factor->info() != Eigen::Success)
        throw NumericalError("stiffness matrix is not positive definite");
    sys.factorization = std::move(factor);
    return sys;
}

FemSystem assemble(const Mesh& mesh)
{
    return assemble(share(mesh));
}

Eigen::VectorXd solve_stiffness(const FemSystem& system, const Eigen::VectorXd& rhs)
{
    Eigen::VectorXd x = system.factorization->solve(rhs);
    return x;
}

FemFunction FemFunction::zero(std::shared_ptr<const Mesh> mesh)
{
    FemFunction f;
    f.nodal_values.assign(mesh->num_nodes(), 0.0);
    f.mesh = std::move(mesh);
    return f;
}

FemFunction FemFunction::from_dofs(std::shared_ptr<const Mesh> mesh, const Eigen::VectorXd& dofs)
{
    if (static_cast<std::size_t>(dofs.size()) != mesh->num_dofs())
        throw ConfigError("dof vector length does not match the mesh");
    auto f = zero(std::move(mesh));
    for (std::size_t d = 0; d < f.mesh->num_dofs(); ++d)
        f.nodal_values[f.mesh->node_of_dof[d]] = dofs[static_cast<Eigen::Index>(d)];
    return f;
}

Eigen::VectorXd FemFunction::dofs() const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(mesh->num_dofs()));
    for (std::size_t d = 0; d < mesh->num_dofs(); ++d)
        out[static_cast<Eigen::Index>(d)] = nodal_values[mesh->node_of_dof[d]];
    return out;
}

double FemFunction::value_at(const Point& x) const
{
    require_structured(*mesh, "point evaluation");
    const int n = mesh->n_per_side;
    const auto cell = [n](double coord, double h, int& idx) {
        const double s = coord / h;
        idx = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
        return s - idx;
    };
    int i = 0;
    const double s = cell(x[0], mesh->spacing[0], i);
    if (mesh->domain.dim == 1)
        return (1.0 - s) * nodal_values[i] + s * nodal_values[i + 1];

    int j = 0;
    const double t = cell(x[1], mesh->spacing[1], j);
    const auto at = [&](int a, int b) { return nodal_values[static_cast<std::size_t>((j + b) * (n + 1) + i + a)]; };
    const double u00 = at(0, 0), u10 = at(1, 0), u11 = at(1, 1), u01 = at(0, 1);
    if (s >= t)
        return u00 + s * (u10 - u00) + t * (u11 - u10);
    return u00 + t * (u01 - u00) + s * (u11 - u01);
}

NoiseLoadOperator::NoiseLoadOperator(const Mesh& mesh, const EigenBasis& basis, std::size_t n_modes)
    : dim_(mesh.domain.dim), n_modes_(n_modes)
{
    require_structured(mesh, "closed-form noise load");
    if (n_modes > basis.size())
        throw ConfigError("noise load: basis covers fewer modes than requested");
    const int n = mesh.n_per_side;
    n_int_ = n - 1;
    const double hx = mesh.spacing[0];

    if (dim_ == 1) {
        table_.resize(n_int_, static_cast<Eigen::Index>(n_modes));
        for (std::size_t m = 0; m < n_modes; ++m) {
            const auto& p = basis[m];
            const double s = sinc(0.5 * p.wavenumber[0] * hx);
            const double weight = p.amplitude * hx * s * s;
            for (Eigen::Index q = 0; q < n_int_; ++q)
                table_(q, static_cast<Eigen::Index>(m)) = weight * std::sin(p.wavenumber[0] * (q + 1) * hx);
        }
        return;
    }

    const double hy = mesh.spacing[1];
    int imax = 0;
    int jmax = 0;
    quantum_.reserve(n_modes);
    for (std::size_t m = 0; m < n_modes; ++m) {
        quantum_.push_back(basis[m].quantum);
        imax = std::max(imax, basis[m].quantum[0]);
        jmax = std::max(jmax, basis[m].quantum[1]);
    }
    const double kx = basis.empty() ? 0.0 : basis[0].wavenumber[0] / basis[0].quantum[0];
    const double ky = basis.empty() ? 0.0 : basis[0].wavenumber[1] / basis[0].quantum[1];
    const double amplitude = basis.empty() ? 0.0 : basis[0].amplitude;

    cos_x_.resize(n_int_, imax);
    sin_x_.resize(n_int_, imax);
    cos_y_.resize(n_int_, jmax);
    sin_y_.resize(n_int_, jmax);
    for (Eigen::Index q = 0; q < n_int_; ++q) {
        for (int i = 0; i < imax; ++i) {
            const double phase = kx * (i + 1) * (q + 1) * hx;
            cos_x_(q, i) = std::cos(phase);
            sin_x_(q, i) = std::sin(phase);
        }
        for (int j = 0; j < jmax; ++j) {
            const double phase = ky * (j + 1) * (q + 1) * hy;
            cos_y_(q, j) = std::cos(phase);
            sin_y_(q, j) = std::sin(phase);
        }
    }
    // sin(a x) sin(b y) = [cos(ax - by) - cos(ax + by)] / 2, and the hat
    // transform at (a, ±b) carries the diagonal factor sinc((a h_x ± b h_y)/2).
    weight_cc_.setZero(imax, jmax);
    weight_ss_.setZero(imax, jmax);
    for (int i = 0; i < imax; ++i) {
        for (int j = 0; j < jmax; ++j) {
            const double ta = 0.5 * kx * (i + 1) * hx;
            const double tb = 0.5 * ky * (j + 1) * hy;
            const double common = 0.5 * amplitude * hx * hy * sinc(ta) * sinc(tb);
            const double minus = common * sinc(ta - tb);
            const double plus = common * sinc(ta + tb);
            weight_cc_(i, j) = minus - plus;
            weight_ss_(i, j) = minus + plus;
        }
    }
}

Eigen::VectorXd NoiseLoadOperator::apply(std::span<const double> coeffs) const
{
    if (coeffs.size() > n_modes_)
        throw ConfigError("noise load: more coefficients than the operator was built for");
    if (dim_ == 1) {
        const Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
        return table_.leftCols(c.size()) * c;
    }
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(weight_cc_.rows(), weight_cc_.cols());
    for (std::size_t m = 0; m < coeffs.size(); ++m)
        grid(quantum_[m][0] - 1, quantum_[m][1] - 1) = coeffs[m];
    const Eigen::MatrixXd cc = grid.cwiseProduct(weight_cc_);
    const Eigen::MatrixXd ss = grid.cwiseProduct(weight_ss_);
    Eigen::MatrixXd b = cos_x_ * (cc * cos_y_.transpose());
    b.noalias() += sin_x_ * (ss * sin_y_.transpose());
    // Column-major flattening matches the dof order (row j outer, i inner).
    return Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
}

Eigen::VectorXd assemble_noise_load(const Mesh& mesh, const EigenBasis& basis,
                                    std::span<const double> coeffs, LoadRule rule)
{
    if (coeffs.size() > basis.size())
        throw ConfigError("noise load: basis covers fewer modes than the sample");
    if (rule == LoadRule::Quadrature || !mesh.structured())
        return quadrature_load(mesh, basis, coeffs);
    return NoiseLoadOperator(mesh, basis, coeffs.size()).apply(coeffs);
}

void set_noise_load(FemSystem& system, const EigenBasis& basis, const NoiseSample& sample, LoadRule rule)
{
    system.noise_load = assemble_noise_load(*system.mesh, basis, sample.coeffs, rule);
}

FemFunction interpolate(std::shared_ptr<const Mesh> mesh, const EigenBasis& basis,
                        std::span<const double> coeffs)
{
    auto f = FemFunction::zero(std::move(mesh));
    for (std::size_t i = 0; i < f.mesh->num_nodes(); ++i) {
        if (!f.mesh->boundary[i])
            f.nodal_values[i] = basis.evaluate(coeffs, f.mesh->nodes[i]);
    }
    return f;
}

FemFunction ritz_project(const FemSystem& system, const EigenBasis& basis, std::span<const double> coeffs)
{
    std::vector<double> scaled(coeffs.begin(), coeffs.end());
    for (std::size_t m = 0; m < scaled.size(); ++m)
        scaled[m] *= basis.lambda(m);
    return ritz_project_gradients(system, assemble_noise_load(*system.mesh, basis, scaled));
}

FemFunction ritz_project_gradients(const FemSystem& system, const Eigen::VectorXd& grad_products)
{
    return FemFunction::from_dofs(system.mesh, solve_stiffness(system, grad_products));
}

double l2_norm_sq(const FemFunction& fe)
{
    const auto& mesh = *fe.mesh;
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element(e);
        const double measure = std::abs(mesh.element_measure(e));
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int a = 0; a < mesh.nodes_per_element; ++a) {
            const double u = fe.nodal_values[v[a]];
            sum += u;
            sum_sq += u * u;
        }
        // Exact P1 mass: |e|/6 (Σu² + (Σu)²) on segments, |e|/12 (...) on triangles.
        total += measure * (sum_sq + sum * sum) / (mesh.nodes_per_element == 2 ? 6.0 : 12.0);
    }
    return total;
}

double l2_error(const FemFunction& fe, const EigenBasis& basis, std::span<const double> coeffs, LoadRule rule)
{
    const auto& mesh = *fe.mesh;
    if (coeffs.size() > basis.size())
        throw ConfigError("l2_error: basis covers fewer modes than the coefficients");

    if (rule == LoadRule::ClosedForm && mesh.structured()) {
        double coeff_sq = 0.0;
        for (double c : coeffs)
            coeff_sq += c * c;
        const double cross = fe.dofs().dot(NoiseLoadOperator(mesh, basis, coeffs.size()).apply(coeffs));
        return std::sqrt(std::max(0.0, l2_norm_sq(fe) - 2.0 * cross + coeff_sq));
    }

    // The squared difference oscillates at twice the highest wavenumber.
    const auto rule_q = element_rule(mesh, 2.0 * max_phase(mesh, basis, coeffs.size()));
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto g = geometry(mesh, e);
        const auto v = mesh.element(e);
        for (std::size_t q = 0; q < rule_q.weights.size(); ++q) {
            const auto n = shape(mesh, rule_q.points[q]);
            double uh = 0.0;
            for (int a = 0; a < mesh.nodes_per_element; ++a)
                uh += n[a] * fe.nodal_values[v[a]];
            const double diff = uh - basis.evaluate(coeffs, g.map(rule_q.points[q]));
            total += rule_q.weights[q] * g.jacobian * diff * diff;
        }
    }
    return std::sqrt(total);
}

double l2_distance(const FemFunction& coarse, const FemFunction& fine)
{
    const auto& cm = *coarse.mesh;
    const auto& fm = *fine.mesh;
    require_structured(cm, "l2_distance");
    require_structured(fm, "l2_distance");
    if (cm.domain.dim != fm.domain.dim || cm.domain.extent != fm.domain.extent ||
        fm.n_per_side % cm.n_per_side != 0)
        throw ConfigError(fmt::format("l2_distance: mesh with {} cells is not nested in mesh with {} cells",
                                      cm.n_per_side, fm.n_per_side));
    auto diff = FemFunction::zero(fine.mesh);
    for (std::size_t i = 0; i < fm.num_nodes(); ++i)
        diff.nodal_values[i] = fine.nodal_values[i] - coarse.value_at(fm.nodes[i]);
    return std::sqrt(l2_norm_sq(diff));
}

void write_csv(const FemFunction& fe, const std::string& path)
{
    auto out = fmt::output_file(path);
    const bool two_d = fe.mesh->domain.dim == 2;
    out.print("{}", two_d ? "x,y,value\n" : "x,value\n");
    for (std::size_t i = 0; i < fe.mesh->num_nodes(); ++i) {
        const auto& x = fe.mesh->nodes[i];
        if (two_d)
            out.print("{:.17g},{:.17g},{:.17g}\n", x[0], x[1], fe.nodal_values[i]);
        else
            out.print("{:.17g},{:.17g}\n", x[0], fe.nodal_values[i]);
    }
}

void write_gnuplot_grid(const FemFunction& fe, const std::string& path)
{
    const auto& mesh = *fe.mesh;
    if (mesh.domain.dim != 2)
        throw ConfigError("grid dump is only defined for 2D functions");
    require_structured(mesh, "grid dump");
    auto out = fmt::output_file(path);
    const int n = mesh.n_per_side;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const auto k = static_cast<std::size_t>(j * (n + 1) + i);
            out.print("{:.17g} {:.17g} {:.17g}\n", mesh.nodes[k][0], mesh.nodes[k][1], fe.nodal_values[k]);
        }
        out.print("\n");
    }
}

}  // namespace spdefem
