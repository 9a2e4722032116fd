#include "berglab/geometry.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace berglab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double distance_to_segment(Point2 p, const Segment& s) {
    const Point2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, s.a + t * d);
}

Point2 rectangle_corner(double hx, double hy, int i) {
    switch (i) {
    case 1: return {hx, hy};
    case 2: return {-hx, hy};
    case 3: return {-hx, -hy};
    case 4: return {hx, -hy};
    default: throw InvalidArgument("corner index must be in 1..4, got " + std::to_string(i));
    }
}

Segment rectangle_facet(double hx, double hy, int i) {
    switch (i) {
    case 1: return {{-hx, hy}, {hx, hy}};
    case 2: return {{-hx, -hy}, {-hx, hy}};
    case 3: return {{-hx, -hy}, {hx, -hy}};
    case 4: return {{hx, -hy}, {hx, hy}};
    default: throw InvalidArgument("facet index must be in 1..4, got " + std::to_string(i));
    }
}

} // namespace

DomainSpec::DomainSpec(double r1, double r2, double lambda0, double eps, double eps_y,
                       OuterBoundary outer)
    : r1_(r1), r2_(r2), lambda0_(lambda0), eps_(eps), eps_y_(eps_y), outer_(outer) {
    if (!(r1 > 0.0) || !std::isfinite(r1))
        throw InvalidArgument("r1 must be a finite positive length");
    if (!(r2 > 0.0) || !std::isfinite(r2))
        throw InvalidArgument("r2 must be a finite positive length");
    if (!(lambda0 > 1.0) || !std::isfinite(lambda0))
        throw InvalidArgument("lambda0 must satisfy lambda0 > 1");
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw InvalidArgument("eps must be >= 0");
    if (!(eps_y >= 0.0) || !std::isfinite(eps_y))
        throw InvalidArgument("eps_y must be >= 0");
    if (outer_ == OuterBoundary::Scaled) {
        outer_hx_ = lambda0_ * inner_hx();
        outer_hy_ = lambda0_ * inner_hy();
    } else {
        outer_hx_ = lambda0_ * r1_ + eps_;
        outer_hy_ = lambda0_ * r2_ + eps_y_;
    }
}

DomainSpec make_domain(double r1, double r2, double lambda0, double eps) {
    return DomainSpec(r1, r2, lambda0, eps);
}

double DomainSpec::area() const noexcept {
    return 4.0 * (outer_hx_ * outer_hy_ - inner_hx() * inner_hy());
}

double DomainSpec::diameter() const noexcept { return 2.0 * std::hypot(outer_hx_, outer_hy_); }

Point2 DomainSpec::inner_corner(int i) const { return rectangle_corner(inner_hx(), inner_hy(), i); }

Point2 DomainSpec::outer_corner(int i) const { return rectangle_corner(outer_hx_, outer_hy_, i); }

DomainSpec DomainSpec::transposed() const {
    return DomainSpec(r2_, r1_, lambda0_, eps_y_, eps_, outer_);
}

bool DomainSpec::contains(Point2 p, double tol) const {
    const bool in_outer = std::abs(p.x) <= outer_hx_ + tol && std::abs(p.y) <= outer_hy_ + tol;
    const bool in_inner = std::abs(p.x) < inner_hx() - tol && std::abs(p.y) < inner_hy() - tol;
    return in_outer && !in_inner;
}

std::string to_string(const BoundaryLabel& label) {
    std::ostringstream os;
    switch (label.kind) {
    case BoundaryKind::InnerFacet: os << "Gamma"; break;
    case BoundaryKind::OuterFacet: os << "OuterGamma"; break;
    case BoundaryKind::InnerCorner: os << "S"; break;
    case BoundaryKind::OuterCorner: os << "OuterS"; break;
    }
    os << label.index;
    return os.str();
}

BoundaryLabel mirror_label(const BoundaryLabel& label, bool flip_x) {
    BoundaryLabel out = label;
    if (label.is_facet()) {
        // x -> -x swaps left/right facets, y -> -y swaps top/bottom facets.
        if (flip_x && (label.index == 2 || label.index == 4)) out.index = 6 - label.index;
        if (!flip_x && (label.index == 1 || label.index == 3)) out.index = 4 - label.index;
    } else {
        static constexpr std::array<int, 5> kFlipX{0, 2, 1, 4, 3};
        static constexpr std::array<int, 5> kFlipY{0, 4, 3, 2, 1};
        out.index = flip_x ? kFlipX[label.index] : kFlipY[label.index];
    }
    return out;
}

Point2 Segment::at(double s) const {
    const double len = length();
    const double t = len > 0.0 ? s / len : 0.0;
    return a + t * (b - a);
}

Segment facet_segment(const DomainSpec& domain, const BoundaryLabel& facet) {
    switch (facet.kind) {
    case BoundaryKind::InnerFacet:
        return rectangle_facet(domain.inner_hx(), domain.inner_hy(), facet.index);
    case BoundaryKind::OuterFacet:
        return rectangle_facet(domain.outer_hx(), domain.outer_hy(), facet.index);
    default: throw InvalidArgument("facet_segment: label " + to_string(facet) + " is a corner");
    }
}

double CornerFrame::rho(Point2 p) const { return distance(p, origin); }

double CornerFrame::theta(Point2 p) const {
    const double dx = (p.x - origin.x) * sx;
    const double dy = (p.y - origin.y) * sy;
    double t = std::atan2(dy, -dx);
    if (t < 0.0) t += kTwoPi;
    return t;
}

Point2 CornerFrame::point(double r, double t) const {
    return {origin.x - sx * r * std::cos(t), origin.y + sy * r * std::sin(t)};
}

Point2 CornerFrame::e_rho(double t) const { return {-sx * std::cos(t), sy * std::sin(t)}; }

Point2 CornerFrame::e_theta(double t) const { return {sx * std::sin(t), sy * std::cos(t)}; }

CornerFrame corner_frame(const DomainSpec& domain, int i) {
    CornerFrame f;
    f.corner_index = i;
    f.origin = domain.inner_corner(i);
    f.sx = f.origin.x > 0.0 ? 1.0 : -1.0;
    f.sy = f.origin.y > 0.0 ? 1.0 : -1.0;
    return f;
}

BoundaryLabel classify_boundary_point(const DomainSpec& domain, Point2 p, double tol) {
    for (int i = 1; i <= 4; ++i) {
        if (distance(p, domain.inner_corner(i)) <= tol) return {BoundaryKind::InnerCorner, i};
        if (distance(p, domain.outer_corner(i)) <= tol) return {BoundaryKind::OuterCorner, i};
    }
    for (int i = 1; i <= 4; ++i) {
        const BoundaryLabel inner{BoundaryKind::InnerFacet, i};
        if (distance_to_segment(p, facet_segment(domain, inner)) <= tol) return inner;
        const BoundaryLabel outer{BoundaryKind::OuterFacet, i};
        if (distance_to_segment(p, facet_segment(domain, outer)) <= tol) return outer;
    }
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") is not on the boundary (tol " << tol << ")";
    throw GeometryError(os.str());
}

double neumann_datum(const DomainSpec& /*domain*/, const BoundaryLabel& label, double a, double b) {
    if (label.kind != BoundaryKind::InnerFacet)
        throw InvalidArgument("neumann_datum: " + to_string(label) + " is not an inner facet");
    return (label.index == 1 || label.index == 3) ? a : b;
}

} // namespace berglab
