#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace berglab {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// How the outer rectangle follows a widening of the inner one.
///
/// `Scaled` keeps R2 = lambda0 * R1 for the widened R1. `Translated` widens the
/// outer rectangle by the same eps as the inner one, so that the two vertical
/// halves of the frame are rigid translations of the unperturbed ones.
enum class OuterBoundary { Scaled, Translated };

/// Rectangular annulus  Omega = R2 \ closure(R1)  with
///   R1 = (-(r1+eps), r1+eps) x (-(r2+eps_y), r2+eps_y).
///
/// Facet labels: 1 top, 2 left, 3 bottom, 4 right. Corner 1 is the top-right
/// vertex (closure of facet 1 meets closure of facet 4); the others follow
/// counterclockwise. Outer labels use the same convention on R2.
class DomainSpec {
public:
    DomainSpec(double r1, double r2, double lambda0, double eps = 0.0, double eps_y = 0.0,
               OuterBoundary outer = OuterBoundary::Scaled);

    double r1() const noexcept { return r1_; }
    double r2() const noexcept { return r2_; }
    double lambda0() const noexcept { return lambda0_; }
    double eps() const noexcept { return eps_; }
    double eps_y() const noexcept { return eps_y_; }
    OuterBoundary outer_mode() const noexcept { return outer_; }

    /// Half widths of the inner rectangle.
    double inner_hx() const noexcept { return r1_ + eps_; }
    double inner_hy() const noexcept { return r2_ + eps_y_; }
    /// Half widths of the outer rectangle.
    double outer_hx() const noexcept { return outer_hx_; }
    double outer_hy() const noexcept { return outer_hy_; }

    double area() const noexcept;
    /// Largest distance between two points of the closure.
    double diameter() const noexcept;

    /// Inner vertex S_i, i in 1..4.
    Point2 inner_corner(int i) const;
    Point2 outer_corner(int i) const;

    /// The same annulus with r1 and r2 exchanged (x and y axes swapped).
    DomainSpec transposed() const;

    bool contains(Point2 p, double tol = 0.0) const;

private:
    double r1_, r2_, lambda0_, eps_, eps_y_;
    OuterBoundary outer_;
    double outer_hx_, outer_hy_;
};

DomainSpec make_domain(double r1, double r2, double lambda0, double eps = 0.0);

enum class BoundaryKind { InnerFacet, OuterFacet, InnerCorner, OuterCorner };

struct BoundaryLabel {
    BoundaryKind kind = BoundaryKind::InnerFacet;
    int index = 1;

    bool is_inner() const noexcept {
        return kind == BoundaryKind::InnerFacet || kind == BoundaryKind::InnerCorner;
    }
    bool is_facet() const noexcept {
        return kind == BoundaryKind::InnerFacet || kind == BoundaryKind::OuterFacet;
    }
    friend bool operator==(const BoundaryLabel&, const BoundaryLabel&) = default;
};

std::string to_string(const BoundaryLabel& label);

/// Image of a label under x -> -x (flip_x) or y -> -y.
BoundaryLabel mirror_label(const BoundaryLabel& label, bool flip_x);

struct Segment {
    Point2 a;
    Point2 b;

    double length() const { return distance(a, b); }
    Point2 at(double s) const; ///< point at arclength s measured from a
};

/// Facet as a segment oriented by increasing x (horizontal) or y (vertical).
Segment facet_segment(const DomainSpec& domain, const BoundaryLabel& facet);

/// Local polar frame (rho, theta) attached to an inner corner.
///
/// theta = 0 along the horizontal facet leaving the corner, theta = 3pi/2 along
/// the vertical one, and theta sweeps through Omega in between.
struct CornerFrame {
    int corner_index = 1;
    Point2 origin;
    double sx = 1.0; ///< sign of the corner's x coordinate
    double sy = 1.0; ///< sign of the corner's y coordinate

    double rho(Point2 p) const;
    /// Angle in [0, 2pi); values above 3pi/2 lie inside the inner rectangle.
    double theta(Point2 p) const;
    /// Inverse map; theta in [0, 3pi/2].
    Point2 point(double rho, double theta) const;
    /// Unit vectors of the local polar basis expressed in global coordinates.
    Point2 e_rho(double theta) const;
    Point2 e_theta(double theta) const;
};

CornerFrame corner_frame(const DomainSpec& domain, int i);

/// Label of a point within tol of the boundary. Corners win over facets.
/// Throws GeometryError when p is farther than tol from every boundary part.
BoundaryLabel classify_boundary_point(const DomainSpec& domain, Point2 p, double tol);

/// Piecewise-constant Neumann datum: a on facets 1 and 3, b on facets 2 and 4.
double neumann_datum(const DomainSpec& domain, const BoundaryLabel& label, double a, double b);

} // namespace berglab
