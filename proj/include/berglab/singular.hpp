#pragma once

#include "berglab/fem.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace berglab {

/// Neumann-compatible corner eigenfunction rho^exponent * cos(2 k theta / 3).
struct CornerMode {
    int corner_index = 1;
    double exponent = 2.0 / 3.0;
    int k = 1;
};

CornerMode primal_mode(int corner_index, int k = 1);
/// rho^(-2/3) cos(2 theta / 3).
CornerMode dual_mode(int corner_index);

/// Throws GeometryError("singular point") for a negative exponent at rho = 0.
double eval_mode(const CornerMode& mode, const CornerFrame& frame, Point2 p);
Point2 eval_mode_grad(const CornerMode& mode, const CornerFrame& frame, Point2 p);

/// Quintic smoothstep cutoff: 1 on [0, delta_c/2], 0 on [delta_c, inf).
double cutoff(double rho, double delta_c);
double cutoff_derivative(double rho, double delta_c);
double cutoff_second_derivative(double rho, double delta_c);

/// 0.4 * min(r1 + eps, r2, (lambda0 - 1) * min(r1, r2)).
double default_cutoff_radius(const DomainSpec& domain);

struct DualOptions {
    double cutoff_radius = 0.0; ///< 0 selects default_cutoff_radius
    int source_subdivision = 4;
    SolverOptions solver{1e-12, 50000};
};

/// s* = kappa * sum_i cutoff(rho_i) rho_i^(-2/3) cos(2 theta_i / 3) + w,
/// harmonic in the domain, zero flux on the inner facets, zero on the outer
/// boundary, unit L2 norm and negative at the midpoint of the top facet.
class DualSingularSolution {
public:
    DualSingularSolution(DomainSpec domain, FemField correction, double kappa, double cutoff_radius,
                         double normalization);

    const DomainSpec& domain() const noexcept { return domain_; }
    const Mesh& mesh() const noexcept { return correction_.mesh(); }
    std::shared_ptr<const Mesh> mesh_ptr() const noexcept { return correction_.mesh_ptr(); }
    /// Amplitude of the dual mode at each corner after normalization.
    double kappa() const noexcept { return kappa_; }
    double cutoff_radius() const noexcept { return cutoff_radius_; }
    /// The H1 part, already normalized.
    const FemField& correction() const noexcept { return correction_; }
    /// L2 norm of the unnormalized construction.
    double normalization() const noexcept { return normalization_; }

    double singular_part(Point2 p) const;
    /// Throws GeometryError at an inner corner.
    double eval(Point2 p) const;
    /// Nodal values; NaN at the four inner corners.
    std::vector<double> nodal_values() const;
    /// L2 norm by subdivided quadrature.
    double l2_norm() const;

private:
    DomainSpec domain_;
    FemField correction_;
    double kappa_;
    double cutoff_radius_;
    double normalization_;
};

/// Throws InvalidArgument when the cutoff radius is too large for the domain.
DualSingularSolution build_dual_solution(const DomainSpec& domain, std::shared_ptr<const Mesh> mesh,
                                         const DualOptions& options = {});

/// Integral of s* over an inner facet, with the singular part integrated in closed form.
double facet_integral_of_dual(const DualSingularSolution& dual, const BoundaryLabel& facet);

/// -2a * int_{facet 1} s* - 2b * int_{facet 4} s*.
double extract_coefficient_dual(const DomainSpec& domain, const DualSingularSolution& dual, double a, double b);

/// Amplitude of rho^(2/3) cos(2 theta / 3) in the solution with data (a, b),
/// obtained from the boundary pairing with s*. Equals
/// extract_coefficient_dual / (4 pi |kappa|).
double mode_coefficient_from_dual(const DualSingularSolution& dual, double a, double b);

struct FitRing {
    double rho_min = 0.0;
    double rho_max = 0.0;
};

/// [max(4 * corner_local_h, rho_max / 50), cutoff_radius / 2].
FitRing default_fit_ring(const Mesh& mesh, double cutoff_radius, int corner);

struct FitResult {
    double coefficient = 0.0;
    double residual = 0.0;  ///< relative least-squares residual
    int samples = 0;
    double condition = 0.0; ///< condition number of the equilibrated normal equations
};

/// Least-squares fit of nodal values in a ring around a corner against
/// {1, x - xs, y - ys, rho^(2/3) cos(2 theta/3), rho^(4/3) cos(4 theta/3)} after
/// removing the linear part fixed by the Neumann data (a, b).
/// Throws FitError when the condition estimate exceeds 1e10 or fewer than 30 nodes qualify.
FitResult extract_coefficient_fit(const FemField& field, const DomainSpec& domain, int corner, FitRing ring,
                                  double a, double b);

struct SingularCoefficientReport {
    double c_dual = 0.0;     ///< mode amplitude from the dual pairing
    double c_dual_raw = 0.0; ///< -2a alpha - 2b beta
    double c_fit = 0.0;
    double fit_residual = 0.0;
    int mesh_level = 0;
};

SingularCoefficientReport coefficient_report(const FemField& field, const DualSingularSolution& dual, double a,
                                             double b);

enum class LevelSetClass { A1, A2, A3 };
std::string to_string(LevelSetClass c);

struct LevelSetEnd {
    Point2 p;
    int corner = 0;               ///< nearest inner corner
    double corner_distance = 0.0;
    double corner_h = 0.0;        ///< size of the elements touching that corner
    double outer_distance = 0.0;  ///< distance to the outer boundary
    double local_h = 0.0;         ///< size of the element holding the end point
    bool near_corner() const { return corner_distance <= 2.0 * corner_h; }
    bool near_outer() const { return outer_distance <= 2.0 * local_h; }
};

struct LevelSetComponent {
    std::vector<Point2> points;
    bool closed = false;
    LevelSetEnd start;
    LevelSetEnd end;
    /// One end near an inner corner and the other near the outer boundary.
    bool connects_corner_to_outer() const;
};

struct LevelSet {
    std::vector<LevelSetComponent> components;
    LevelSetClass classification = LevelSetClass::A3;
    int positive_samples = 0;
    int negative_samples = 0;
    double offset = 0.0;
};

/// Zero contour of the nodal interpolant of s*. Triangles touching an inner
/// corner or the outer boundary are skipped. The class is read from the sign
/// pattern on the rectangle (lambda0 - offset) * boundary of R1; offset <= 0
/// selects 0.1 * (lambda0 - 1).
LevelSet level_set(const DualSingularSolution& dual, const Mesh& mesh, double offset = 0.0);

void write_level_set_csv(const LevelSet& ls, std::ostream& os);
void write_level_set_svg(const LevelSet& ls, const DomainSpec& domain, std::ostream& os);

} // namespace berglab
