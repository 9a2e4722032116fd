#include "berglab/error.hpp"
#include "berglab/singular.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace berglab;

namespace {

constexpr double pi = std::numbers::pi;

struct DualFixture {
    DomainSpec domain;
    std::shared_ptr<const Mesh> mesh;
    DualSingularSolution dual;

    explicit DualFixture(DomainSpec d, int levels = 0)
        : domain(d),
          mesh(std::make_shared<const Mesh>(build_mesh(d, MeshParams{4, 1.2, levels}))),
          dual(build_dual_solution(d, mesh)) {}
};

const DualFixture& unit_dual() {
    static const DualFixture f(DomainSpec(1, 1, 2));
    return f;
}

const DualFixture& tall_dual() {
    static const DualFixture f(DomainSpec(1, 2, 2));
    return f;
}

/// Integral of s* along an inner facet by the substitution rho = t^3 from each
/// end, which removes the rho^(-2/3) singularity, and the midpoint rule in t.
double brute_facet_integral(const DualSingularSolution& s, int facet) {
    const DomainSpec& d = s.domain();
    const bool horizontal = facet == 1 || facet == 3;
    const double half = horizontal ? d.inner_hx() : d.inner_hy();
    const double tmax = std::cbrt(half);
    const int n = 20000;
    double sum = 0.0;
    for (int side : {-1, 1}) {
        for (int k = 0; k < n; ++k) {
            const double t = (k + 0.5) * tmax / n;
            const double along = side * (half - t * t * t);
            const Point2 p = horizontal ? Point2{along, facet == 1 ? d.inner_hy() : -d.inner_hy()}
                                        : Point2{facet == 4 ? d.inner_hx() : -d.inner_hx(), along};
            sum += s.eval(p) * 3.0 * t * t * tmax / n;
        }
    }
    return sum;
}

} // namespace

TEST(Modes, HarmonicWithZeroFluxOnBothFacets) {
    const DomainSpec d(1, 1, 2);
    for (int i = 1; i <= 4; ++i) {
        const CornerFrame f = corner_frame(d, i);
        for (const CornerMode& m : {primal_mode(i), dual_mode(i), primal_mode(i, 2)}) {
            // Five-point Laplacian at a point inside the wedge.
            const Point2 p = f.point(0.3, 2.0);
            const double h = 1e-3;
            auto u = [&](Point2 q) { return eval_mode(m, f, q); };
            const double lap = (u(p + Point2{h, 0}) + u(p - Point2{h, 0}) + u(p + Point2{0, h}) +
                                u(p - Point2{0, h}) - 4 * u(p)) /
                               (h * h);
            EXPECT_NEAR(lap, 0.0, 1e-4 * std::abs(u(p)) / (0.3 * 0.3)) << i;
            // Gradient against central differences.
            const Point2 g = eval_mode_grad(m, f, p);
            const double hg = 1e-6;
            EXPECT_NEAR(g.x, (u(p + Point2{hg, 0}) - u(p - Point2{hg, 0})) / (2 * hg), 1e-7);
            EXPECT_NEAR(g.y, (u(p + Point2{0, hg}) - u(p - Point2{0, hg})) / (2 * hg), 1e-7);
            // Zero normal derivative on both facets.
            for (double th : {0.0, 1.5 * pi}) {
                const Point2 q = f.point(0.2, th);
                const Point2 gq = eval_mode_grad(m, f, q);
                EXPECT_NEAR(dot(gq, f.e_theta(th)), 0.0, 1e-12);
            }
        }
    }
}

TEST(Modes, ClosedFormValues) {
    const DomainSpec d(1, 1, 2);
    const CornerFrame f = corner_frame(d, 1);
    // rho = 8, theta = 3pi/4: 8^(2/3) cos(pi/2) = 0 and 8^(-2/3) cos(pi/2) = 0.
    EXPECT_NEAR(eval_mode(primal_mode(1), f, f.point(8, 0.75 * pi)), 0.0, 1e-14);
    EXPECT_NEAR(eval_mode(primal_mode(1), f, f.point(8, 0.0)), 4.0, 1e-13);
    EXPECT_NEAR(eval_mode(dual_mode(1), f, f.point(8, 0.0)), 0.25, 1e-15);
    EXPECT_NEAR(eval_mode(primal_mode(1), f, f.point(8, 1.5 * pi)), -4.0, 1e-13);
    EXPECT_THROW(eval_mode(dual_mode(1), f, d.inner_corner(1)), GeometryError);
    EXPECT_EQ(eval_mode(primal_mode(1), f, d.inner_corner(1)), 0.0);
}

TEST(Cutoff, PlateausAndDerivatives) {
    const double dc = 0.4;
    EXPECT_EQ(cutoff(0.0, dc), 1.0);
    EXPECT_EQ(cutoff(0.2, dc), 1.0);
    EXPECT_EQ(cutoff(0.4, dc), 0.0);
    EXPECT_EQ(cutoff(1.0, dc), 0.0);
    EXPECT_NEAR(cutoff(0.3, dc), 0.5, 1e-15);
    const double h = 1e-6;
    for (double r : {0.21, 0.25, 0.3, 0.37, 0.39}) {
        EXPECT_NEAR(cutoff_derivative(r, dc), (cutoff(r + h, dc) - cutoff(r - h, dc)) / (2 * h), 1e-7);
        EXPECT_NEAR(cutoff_second_derivative(r, dc),
                    (cutoff_derivative(r + h, dc) - cutoff_derivative(r - h, dc)) / (2 * h), 1e-5);
    }
    // C2 joins.
    for (double r : {0.2, 0.4}) {
        EXPECT_NEAR(cutoff_derivative(r, dc), 0.0, 1e-12);
        EXPECT_NEAR(cutoff_second_derivative(r, dc), 0.0, 1e-9);
    }
    EXPECT_NEAR(default_cutoff_radius(DomainSpec(1, 1, 2)), 0.4, 1e-15);
    EXPECT_NEAR(default_cutoff_radius(DomainSpec(1, 2, 1.5)), 0.2, 1e-15);
}

TEST(Dual, NormalizationAndSign) {
    const auto& f = unit_dual();
    EXPECT_NEAR(f.dual.l2_norm(), 1.0, 1e-8);
    EXPECT_LT(f.dual.eval({0, 1}), 0.0);
    EXPECT_GT(f.dual.eval({1, 0}), 0.0);
    EXPECT_LT(f.dual.kappa(), 0.0);
    // Zero on the outer boundary.
    EXPECT_EQ(f.dual.eval({2, 0.3}), 0.0);
    EXPECT_EQ(f.dual.eval({-0.7, -2}), 0.0);
    EXPECT_THROW(f.dual.eval({1, 1}), GeometryError);
    const auto v = f.dual.nodal_values();
    EXPECT_LE(symmetry_residual(*f.mesh, v), 1e-9);
}

TEST(Dual, SingularPartDominatesNearCorners) {
    const auto& f = unit_dual();
    const CornerFrame fr = corner_frame(f.domain, 1);
    for (double rho : {1e-4, 1e-6}) {
        const Point2 p = fr.point(rho, 0.75 * pi + 0.3);
        const double sing = f.dual.singular_part(p);
        EXPECT_NEAR(f.dual.eval(p) / sing, 1.0, 1e-2);
    }
}

TEST(Dual, FacetIntegralsMatchBruteForceQuadrature) {
    for (const DualFixture* f : {&unit_dual(), &tall_dual()}) {
        for (int facet : {1, 4}) {
            const double closed = facet_integral_of_dual(f->dual, {BoundaryKind::InnerFacet, facet});
            const double brute = brute_facet_integral(f->dual, facet);
            EXPECT_NEAR(closed, brute, 1e-4 * std::abs(brute)) << facet;
        }
    }
}

TEST(Dual, DiagonalSymmetryGivesOppositeFacetIntegrals) {
    const auto& f = unit_dual();
    const double alpha = facet_integral_of_dual(f.dual, {BoundaryKind::InnerFacet, 1});
    const double beta = facet_integral_of_dual(f.dual, {BoundaryKind::InnerFacet, 4});
    EXPECT_LT(alpha, 0.0);
    EXPECT_GT(beta, 0.0);
    EXPECT_NEAR(alpha, -beta, 1e-10 * beta);
    EXPECT_NEAR(extract_coefficient_dual(f.domain, f.dual, 1, 1), 0.0, 1e-10);
    EXPECT_EQ(extract_coefficient_dual(f.domain, f.dual, 0, 0), 0.0);
}

TEST(Dual, RejectsOversizedCutoff) {
    const DomainSpec d(1, 1, 2);
    auto mesh = std::make_shared<const Mesh>(build_mesh(d, 2, 1.2, 0));
    DualOptions opt;
    opt.cutoff_radius = 1.0;
    EXPECT_THROW(build_dual_solution(d, mesh, opt), InvalidArgument);
}

TEST(Fit, RecoversPlantedModeAmplitude) {
    // Field = c * sum of cut-off primal modes + constant; no linear part for a = b = 0.
    const DomainSpec d(1, 1, 2);
    auto mesh = std::make_shared<const Mesh>(build_mesh(d, MeshParams{4, 1.2, 1}));
    const double c = 0.7, dc = default_cutoff_radius(d);
    const FemField u(mesh, [&](Point2 p) {
        double s = 0.3;
        for (int i = 1; i <= 4; ++i) {
            const CornerFrame f = corner_frame(d, i);
            s += c * cutoff(f.rho(p), dc) * eval_mode(primal_mode(i), f, p);
        }
        return s;
    });
    const FitResult r = extract_coefficient_fit(u, d, 1, default_fit_ring(*mesh, dc, 1), 0, 0);
    EXPECT_NEAR(r.coefficient, c, 1e-3);
    EXPECT_LT(r.residual, 1e-3);
    EXPECT_GE(r.samples, 30);
    EXPECT_THROW(extract_coefficient_fit(u, d, 1, FitRing{0.15, 0.1500001}, 0, 0), Error);
}

TEST(Fit, AgreesWithDualPairingOnDetunedData) {
    const auto& f = unit_dual();
    const FemField u = solve(assemble(f.mesh, NeumannData{1, 0}), SolverOptions{1e-12, 20000});
    const auto rep = coefficient_report(u, f.dual, 1, 0);
    EXPECT_GT(rep.c_dual, 0.0);
    EXPECT_NEAR(rep.c_fit, rep.c_dual, 0.02 * rep.c_dual);
    EXPECT_NEAR(rep.c_dual, rep.c_dual_raw / (4 * pi * std::abs(f.dual.kappa())), 1e-14);
}

TEST(LevelSet, FourCornerToOuterCurvesOfClassA3) {
    for (const DualFixture* f : {&unit_dual(), &tall_dual()}) {
        const LevelSet ls = level_set(f->dual, *f->mesh);
        EXPECT_EQ(ls.classification, LevelSetClass::A3);
        ASSERT_EQ(ls.components.size(), 4u);
        for (const auto& c : ls.components) EXPECT_TRUE(c.connects_corner_to_outer());
        EXPECT_GT(ls.positive_samples, 0);
        EXPECT_GT(ls.negative_samples, 0);
        std::ostringstream csv, svg;
        write_level_set_csv(ls, csv);
        write_level_set_svg(ls, f->domain, svg);
        EXPECT_EQ(csv.str().rfind("component,x,y\n", 0), 0u);
        EXPECT_NE(svg.str().find("<svg"), std::string::npos);
    }
    EXPECT_EQ(to_string(LevelSetClass::A2), "A2");
}
