#include "berglab/error.hpp"
#include "berglab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace berglab;

constexpr double pi = std::numbers::pi;

TEST(DomainSpec, AreaOfScaledFrame) {
    // 4 r1 r2 (lambda0^2 - 1)
    EXPECT_DOUBLE_EQ(DomainSpec(1, 2, 2).area(), 24.0);
    EXPECT_DOUBLE_EQ(DomainSpec(0.5, 0.5, 3).area(), 8.0);
}

TEST(DomainSpec, PerturbedHalfWidths) {
    const DomainSpec s(1, 1, 2, 0.1);
    EXPECT_DOUBLE_EQ(s.inner_hx(), 1.1);
    EXPECT_DOUBLE_EQ(s.inner_hy(), 1.0);
    EXPECT_DOUBLE_EQ(s.outer_hx(), 2.2);
    EXPECT_DOUBLE_EQ(s.outer_hy(), 2.0);
    const DomainSpec t(1, 1, 2, 0.1, 0.0, OuterBoundary::Translated);
    EXPECT_DOUBLE_EQ(t.outer_hx(), 2.1);
    EXPECT_DOUBLE_EQ(t.outer_hy(), 2.0);
}

TEST(DomainSpec, RejectsInvalidParameters) {
    EXPECT_THROW(DomainSpec(1, 1, 0.5), InvalidArgument);
    EXPECT_THROW(DomainSpec(1, 1, 1.0), InvalidArgument);
    EXPECT_THROW(DomainSpec(0, 1, 2), InvalidArgument);
    EXPECT_THROW(DomainSpec(1, -1, 2), InvalidArgument);
    EXPECT_THROW(DomainSpec(1, NAN, 2), InvalidArgument);
    try {
        DomainSpec(1, 1, 0.5);
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("lambda0 > 1"), std::string::npos);
    }
}

TEST(DomainSpec, CornersCounterclockwiseFromTopRight) {
    const DomainSpec d(1, 2, 2);
    EXPECT_EQ(d.inner_corner(1), (Point2{1, 2}));
    EXPECT_EQ(d.inner_corner(2), (Point2{-1, 2}));
    EXPECT_EQ(d.inner_corner(3), (Point2{-1, -2}));
    EXPECT_EQ(d.inner_corner(4), (Point2{1, -2}));
    EXPECT_EQ(d.outer_corner(1), (Point2{2, 4}));
    EXPECT_THROW(d.inner_corner(5), InvalidArgument);
}

TEST(DomainSpec, ContainsAndTranspose) {
    const DomainSpec d(1, 2, 2);
    EXPECT_TRUE(d.contains({1.5, 0}));
    EXPECT_TRUE(d.contains({1.0, 0}));
    EXPECT_FALSE(d.contains({0.5, 0}));
    EXPECT_FALSE(d.contains({2.5, 0}));
    const DomainSpec t = d.transposed();
    EXPECT_DOUBLE_EQ(t.r1(), 2);
    EXPECT_DOUBLE_EQ(t.r2(), 1);
    EXPECT_DOUBLE_EQ(d.diameter(), 2 * std::hypot(2.0, 4.0));
}

TEST(CornerFrame, FacetsAtZeroAndThreeHalvesPi) {
    const DomainSpec d(1, 1, 2);
    for (int i = 1; i <= 4; ++i) {
        const CornerFrame f = corner_frame(d, i);
        const Point2 s = d.inner_corner(i);
        // A point on the horizontal facet next to the corner, moved towards x = 0.
        const Point2 ph{s.x - 0.1 * f.sx, s.y};
        EXPECT_NEAR(f.theta(ph), 0.0, 1e-14) << i;
        const Point2 pv{s.x, s.y - 0.1 * f.sy};
        EXPECT_NEAR(f.theta(pv), 1.5 * pi, 1e-14) << i;
        // Diagonally outward is the bisector 3pi/4.
        const Point2 pd{s.x + 0.1 * f.sx, s.y + 0.1 * f.sy};
        EXPECT_NEAR(f.theta(pd), 0.75 * pi, 1e-14) << i;
        EXPECT_NEAR(f.rho(pd), 0.1 * std::sqrt(2.0), 1e-14);
    }
}

TEST(CornerFrame, PolarRoundTripAndOrthonormalBasis) {
    const DomainSpec d(1, 2, 3);
    for (int i = 1; i <= 4; ++i) {
        const CornerFrame f = corner_frame(d, i);
        for (double th : {0.1, 1.0, 2.5, 4.0}) {
            const Point2 p = f.point(0.3, th);
            EXPECT_NEAR(f.rho(p), 0.3, 1e-14);
            EXPECT_NEAR(f.theta(p), th, 1e-13);
            const Point2 er = f.e_rho(th), et = f.e_theta(th);
            EXPECT_NEAR(norm(er), 1.0, 1e-15);
            EXPECT_NEAR(norm(et), 1.0, 1e-15);
            EXPECT_NEAR(dot(er, et), 0.0, 1e-15);
            // e_rho is the direction of increasing rho.
            const Point2 q = f.point(0.3 + 1e-6, th);
            EXPECT_NEAR(dot(q - p, er), 1e-6, 1e-12);
            const Point2 r = f.point(0.3, th + 1e-6);
            EXPECT_NEAR(dot(r - p, et), 0.3e-6, 1e-12);
        }
    }
}

TEST(BoundaryLabels, ClassifyAndMirror) {
    const DomainSpec d(1, 2, 2);
    EXPECT_EQ(classify_boundary_point(d, {0, 2}, 1e-12), (BoundaryLabel{BoundaryKind::InnerFacet, 1}));
    EXPECT_EQ(classify_boundary_point(d, {-1, 0}, 1e-12), (BoundaryLabel{BoundaryKind::InnerFacet, 2}));
    EXPECT_EQ(classify_boundary_point(d, {1, 2}, 1e-12), (BoundaryLabel{BoundaryKind::InnerCorner, 1}));
    EXPECT_EQ(classify_boundary_point(d, {2, 0}, 1e-12), (BoundaryLabel{BoundaryKind::OuterFacet, 4}));
    EXPECT_EQ(classify_boundary_point(d, {-2, -4}, 1e-12), (BoundaryLabel{BoundaryKind::OuterCorner, 3}));
    EXPECT_THROW(classify_boundary_point(d, {1.5, 0}, 1e-12), GeometryError);

    EXPECT_EQ(mirror_label({BoundaryKind::InnerFacet, 4}, true), (BoundaryLabel{BoundaryKind::InnerFacet, 2}));
    EXPECT_EQ(mirror_label({BoundaryKind::InnerFacet, 1}, true), (BoundaryLabel{BoundaryKind::InnerFacet, 1}));
    EXPECT_EQ(mirror_label({BoundaryKind::InnerFacet, 1}, false), (BoundaryLabel{BoundaryKind::InnerFacet, 3}));
    EXPECT_EQ(mirror_label({BoundaryKind::InnerCorner, 1}, true), (BoundaryLabel{BoundaryKind::InnerCorner, 2}));
    EXPECT_EQ(mirror_label({BoundaryKind::InnerCorner, 1}, false), (BoundaryLabel{BoundaryKind::InnerCorner, 4}));
    EXPECT_EQ(mirror_label({BoundaryKind::OuterCorner, 3}, true), (BoundaryLabel{BoundaryKind::OuterCorner, 4}));
    EXPECT_EQ(to_string(BoundaryLabel{BoundaryKind::InnerFacet, 4}), "Gamma4");
    EXPECT_EQ(to_string(BoundaryLabel{BoundaryKind::OuterCorner, 2}), "OuterS2");
}

TEST(BoundaryLabels, NeumannDatumAndFacetSegments) {
    const DomainSpec d(1, 2, 2);
    EXPECT_EQ(neumann_datum(d, {BoundaryKind::InnerFacet, 1}, 3, 5), 3);
    EXPECT_EQ(neumann_datum(d, {BoundaryKind::InnerFacet, 3}, 3, 5), 3);
    EXPECT_EQ(neumann_datum(d, {BoundaryKind::InnerFacet, 2}, 3, 5), 5);
    EXPECT_EQ(neumann_datum(d, {BoundaryKind::InnerFacet, 4}, 3, 5), 5);
    const Segment top = facet_segment(d, {BoundaryKind::InnerFacet, 1});
    EXPECT_EQ(top.a, (Point2{-1, 2}));
    EXPECT_EQ(top.b, (Point2{1, 2}));
    EXPECT_DOUBLE_EQ(top.length(), 2.0);
    EXPECT_EQ(top.at(0.5), (Point2{-0.5, 2}));
    const Segment right = facet_segment(d, {BoundaryKind::InnerFacet, 4});
    EXPECT_EQ(right.a, (Point2{1, -2}));
    EXPECT_DOUBLE_EQ(right.length(), 4.0);
}
