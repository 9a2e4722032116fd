#pragma once

#include "berglab/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace berglab {

using ScalarFunction = std::function<double(Point2)>;
using VectorFunction = std::function<Point2(Point2)>;

/// Square matrix in compressed sparse row layout.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void multiply(std::span<const double> x, std::span<double> y) const;
    double at(int i, int j) const;
};

/// Neumann data on the inner facets: a on the horizontal facets, b on the vertical ones.
struct NeumannData {
    double a = 0.0;
    double b = 0.0;
};

struct AssemblyOptions {
    NeumannData neumann;
    /// Right-hand side f of -Lap u = f; empty means f = 0.
    ScalarFunction volume_source;
    /// Triangles are split into subdivision^2 pieces for the source
    /// quadrature; 1 gives the plain 3-point rule.
    int source_subdivision = 1;
    /// When set, every boundary node is pinned to this function instead of
    /// the outer boundary being pinned to zero.
    ScalarFunction dirichlet_everywhere;
};

/// Reduced linear system over the free (non-Dirichlet) nodes.
struct SparseSystem {
    std::shared_ptr<const Mesh> mesh;
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<int> free_nodes;        ///< free index -> node
    std::vector<int> free_index;        ///< node -> free index, -1 for pinned nodes
    std::vector<double> pinned_values;  ///< per node; meaningful for pinned nodes only
};

SparseSystem assemble(std::shared_ptr<const Mesh> mesh, const AssemblyOptions& options);
SparseSystem assemble(std::shared_ptr<const Mesh> mesh, NeumannData neumann,
                      ScalarFunction volume_source = {});

/// Standard P1 element stiffness matrix of a triangle.
std::array<std::array<double, 3>, 3> element_stiffness(Point2 p0, Point2 p1, Point2 p2);

struct SolverOptions {
    double tol_rel = 1e-10;
    int max_iter = 20000;
};

struct SolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Bucket grid over the triangles of a mesh.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);

    /// Lowest-index triangle containing p (barycentric tolerance 1e-12), or -1.
    int find(Point2 p) const;
    /// Barycentric coordinates of p in triangle t.
    std::array<double, 3> barycentric(int t, Point2 p) const;

private:
    const Mesh* mesh_;
    double x0_, y0_, dx_, dy_;
    int nx_, ny_;
    std::vector<int> start_;
    std::vector<int> items_;
};

/// Piecewise-linear field over a mesh.
class FemField {
public:
    FemField(std::shared_ptr<const Mesh> mesh, std::vector<double> values);
    FemField(std::shared_ptr<const Mesh> mesh, const ScalarFunction& f);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double value(int node) const { return values_[node]; }

    /// Throws GeometryError("point outside mesh").
    double eval(Point2 p) const;
    Point2 eval_grad(Point2 p) const;
    Point2 triangle_gradient(int t) const;

    FemField operator+(const FemField& other) const;
    FemField scaled(double s) const;

private:
    int locate(Point2 p) const;

    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> values_;
    mutable std::shared_ptr<const PointLocator> locator_;
};

/// Preconditioned conjugate gradients with Jacobi scaling.
/// Throws SolverError when max_iter is reached first.
FemField solve(const SparseSystem& system, const SolverOptions& options = {}, SolveInfo* info = nullptr);

/// ||A x - rhs|| / ||rhs|| for the free part of a field.
double relative_residual(const SparseSystem& system, const FemField& field);

struct TraceSample {
    double s = 0.0;
    Point2 p;
    double value = 0.0;
};

/// n uniformly spaced samples with the endpoints excluded by half a spacing.
std::vector<TraceSample> facet_trace(const FemField& field, const BoundaryLabel& facet, int n_samples);

struct LineSample {
    double y = 0.0;
    double value = 0.0;
};

/// u_xx(0, y) = -u_yy(0, y) from second differences of the nodal trace along
/// x = 0, resampled at n midpoints of [y_lo, y_hi].
std::vector<LineSample> second_derivative_on_symmetry_line(const FemField& field, double y_lo,
                                                           double y_hi, int n);

double l2_norm(const FemField& field);
double l2_inner(const FemField& f, const FemField& g);
/// Mixed product with a closed-form function by the 3-point rule.
double l2_inner(const FemField& f, const ScalarFunction& g);
/// Dirichlet energy of the field.
double energy(const FemField& field);
/// Energy-norm error against an exact gradient (3-point rule per triangle).
double energy_error(const FemField& field, const VectorFunction& exact_grad);
/// Neumann boundary pairing of the field with the data.
double neumann_pairing(const FemField& field, NeumannData data);

/// Largest mirror mismatch max |v_i - v_mirror(i)| over both axes, relative to
/// max |v|. Non-finite values are skipped.
double symmetry_residual(const Mesh& mesh, std::span<const double> values);

void write_field_csv(const FemField& field, std::ostream& os);
void write_trace_csv(std::span<const TraceSample> trace, std::ostream& os);

} // namespace berglab
