#include "berglab/error.hpp"
#include "berglab/fem.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace berglab;

namespace {

std::shared_ptr<const Mesh> unit_mesh(int levels = 0, int n_base = 4) {
    return std::make_shared<const Mesh>(build_mesh(DomainSpec(1, 1, 2), MeshParams{n_base, 1.2, levels}));
}

} // namespace

TEST(ElementStiffness, ReferenceTriangle) {
    const auto k = element_stiffness({0, 0}, {1, 0}, {0, 1});
    const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(k[i][j], expect[i][j], 1e-15);
}

TEST(ElementStiffness, InvariantUnderTranslationAndRowSumsVanish) {
    const auto k = element_stiffness({2, 3}, {4, 3.5}, {2.5, 5});
    const auto k2 = element_stiffness({0, 0}, {2, 0.5}, {0.5, 2});
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(k[i][0] + k[i][1] + k[i][2], 0.0, 1e-14);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(k[i][j], k[j][i], 1e-15);
            EXPECT_NEAR(k[i][j], k2[i][j], 1e-14);
        }
    }
}

TEST(Quadrature, SecondMomentOfTheFrame) {
    // int x^2 over [-2,2]^2 minus [-1,1]^2 = 64/3 - 4/3 = 20.
    const auto mesh = unit_mesh();
    const FemField one(mesh, [](Point2) { return 1.0; });
    EXPECT_NEAR(l2_inner(one, [](Point2 p) { return p.x * p.x; }), 20.0, 1e-11);
    EXPECT_NEAR(l2_norm(one), std::sqrt(12.0), 1e-12);
    // Mass-matrix form is exact for products of P1 fields.
    const FemField x(mesh, [](Point2 p) { return p.x; });
    EXPECT_NEAR(l2_inner(x, x), 20.0, 1e-11);
}

TEST(Field, LinearFunctionsAreReproduced) {
    const auto mesh = unit_mesh();
    const FemField f(mesh, [](Point2 p) { return 2 * p.x - 3 * p.y + 1; });
    for (Point2 p : {Point2{1.5, 0.3}, Point2{-1.9, 1.9}, Point2{0.1, -1.2}, Point2{1.0, 1.0}})
        EXPECT_NEAR(f.eval(p), 2 * p.x - 3 * p.y + 1, 1e-13);
    for (Point2 p : {Point2{1.5, 0.3}, Point2{-1.9, 1.9}, Point2{0.1, -1.2}}) {
        const Point2 g = f.eval_grad(p);
        EXPECT_NEAR(g.x, 2.0, 1e-10);
        EXPECT_NEAR(g.y, -3.0, 1e-10);
    }
    EXPECT_THROW(f.eval({0, 0}), GeometryError);
    EXPECT_THROW(f.eval({3, 0}), GeometryError);
    EXPECT_NEAR(energy(f), 13.0 * 12.0, 1e-9);
    const FemField s = (f + f).scaled(0.5);
    EXPECT_NEAR(s.eval({1.5, 0.3}), f.eval({1.5, 0.3}), 1e-14);
}

TEST(Locator, FindsContainingTriangle) {
    const auto mesh = unit_mesh();
    const PointLocator loc(*mesh);
    for (Point2 p : {Point2{1.2, 0.0}, Point2{-1.99, 1.99}, Point2{1.0 + 1e-11, 1.0 + 1e-11}}) {
        const int t = loc.find(p);
        ASSERT_GE(t, 0);
        const auto w = loc.barycentric(t, p);
        EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-14);
        for (double v : w) EXPECT_GE(v, -1e-12);
    }
    EXPECT_EQ(loc.find({0.5, 0.5}), -1);
}

TEST(Solver, DirichletHarmonicConvergesAtFirstOrder) {
    const VectorFunction grad = [](Point2 p) { return Point2{2 * p.x, -2 * p.y}; };
    AssemblyOptions opt;
    opt.dirichlet_everywhere = [](Point2 p) { return p.x * p.x - p.y * p.y; };
    std::vector<double> err, h;
    auto mesh = unit_mesh(0, 2);
    for (int l = 0; l < 3; ++l) {
        if (l > 0) mesh = std::make_shared<const Mesh>(refine(*mesh));
        SolveInfo info;
        const FemField u = solve(assemble(mesh, opt), SolverOptions{1e-12, 20000}, &info);
        EXPECT_LE(info.relative_residual, 1e-12);
        err.push_back(energy_error(u, grad));
        h.push_back(mesh->h_max);
    }
    for (int l = 1; l < 3; ++l) {
        const double order = std::log(err[l - 1] / err[l]) / std::log(h[l - 1] / h[l]);
        EXPECT_GT(order, 0.9);
        EXPECT_LT(order, 1.2);
    }
}

TEST(Solver, LinearDirichletDataIsExact) {
    const auto mesh = unit_mesh();
    AssemblyOptions opt;
    opt.dirichlet_everywhere = [](Point2 p) { return 3 * p.x + p.y; };
    const FemField u = solve(assemble(mesh, opt), SolverOptions{1e-13, 20000});
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
        EXPECT_NEAR(u.value(static_cast<int>(i)), 3 * mesh->nodes[i].x + mesh->nodes[i].y, 1e-10);
}

TEST(Solver, VolumeSourceMatchesManufacturedSolution) {
    // u = sin(pi x / 2) sin(pi y / 2) vanishes on the outer square, -Lap u = pi^2/2 u.
    const double k = M_PI / 2;
    AssemblyOptions opt;
    opt.dirichlet_everywhere = [&](Point2 p) { return std::sin(k * p.x) * std::sin(k * p.y); };
    opt.volume_source = [&](Point2 p) { return 2 * k * k * std::sin(k * p.x) * std::sin(k * p.y); };
    opt.source_subdivision = 2;
    const FemField u = solve(assemble(unit_mesh(1), opt), SolverOptions{1e-12, 20000});
    EXPECT_NEAR(u.eval({1.5, 0.5}), std::sin(k * 1.5) * std::sin(k * 0.5), 5e-3);
}

TEST(Solver, NeumannPairingEqualsEnergy) {
    const auto mesh = unit_mesh(1);
    const NeumannData data{1.0, 0.7};
    const auto sys = assemble(mesh, data);
    const FemField u = solve(sys, SolverOptions{1e-12, 20000});
    EXPECT_LE(relative_residual(sys, u), 1e-11);
    EXPECT_NEAR(energy(u), neumann_pairing(u, data), 1e-9 * energy(u));
    // Pairing of the constant 1: a * |facets 1,3| + b * |facets 2,4|.
    const FemField one(mesh, [](Point2) { return 1.0; });
    EXPECT_NEAR(neumann_pairing(one, data), 4.0 * 1.0 + 4.0 * 0.7, 1e-12);
}

TEST(Solver, PositivityAndSymmetry) {
    const auto mesh = unit_mesh(1);
    const FemField u = solve(assemble(mesh, NeumannData{1, 1}), SolverOptions{1e-12, 20000});
    const auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
    EXPECT_GE(*lo, -1e-8 * *hi);
    EXPECT_GT(*hi, 0.0);
    EXPECT_LE(symmetry_residual(*mesh, u.values()), 1e-10);
    // Diagonal symmetry of the square frame.
    EXPECT_NEAR(u.eval({1.3, 0.4}), u.eval({0.4, 1.3}), 1e-9);
}

TEST(Solver, ReportsIterationCap) {
    const auto mesh = unit_mesh(1);
    EXPECT_THROW(solve(assemble(mesh, NeumannData{1, 1}), SolverOptions{1e-12, 2}), SolverError);
}

TEST(Traces, FacetTraceOfLinearField) {
    const auto mesh = unit_mesh();
    const FemField f(mesh, [](Point2 p) { return p.x + 2 * p.y; });
    const auto tr = facet_trace(f, {BoundaryKind::InnerFacet, 1}, 10);
    ASSERT_EQ(tr.size(), 10u);
    EXPECT_NEAR(tr.front().s, 0.1, 1e-14);
    for (const auto& s : tr) EXPECT_NEAR(s.value, s.p.x + 2.0, 1e-13);
    EXPECT_THROW(facet_trace(f, {BoundaryKind::InnerFacet, 1}, 2), InvalidArgument);
}

TEST(Traces, SecondDerivativeOnSymmetryLine) {
    // Nonuniform three-point differences are exact for quadratics.
    const auto mesh = unit_mesh();
    const FemField f(mesh, [](Point2 p) { return p.x * p.x - p.y * p.y + p.y; });
    const auto s = second_derivative_on_symmetry_line(f, 1.0, 2.0, 16);
    ASSERT_EQ(s.size(), 16u);
    for (const auto& v : s) EXPECT_NEAR(v.value, 2.0, 1e-9);
    EXPECT_NEAR(s.front().y, 1.0 + 0.5 / 16, 1e-14);
}

TEST(Symmetry, ResidualOfOddField) {
    const auto mesh = unit_mesh();
    const FemField odd(mesh, [](Point2 p) { return p.x; });
    const FemField even(mesh, [](Point2 p) { return p.x * p.x + p.y * p.y; });
    EXPECT_NEAR(symmetry_residual(*mesh, odd.values()), 2.0, 1e-14);
    EXPECT_EQ(symmetry_residual(*mesh, even.values()), 0.0);
}

TEST(Writers, CsvHeaders) {
    const auto mesh = unit_mesh();
    const FemField f(mesh, [](Point2 p) { return p.x; });
    std::ostringstream a, b;
    write_field_csv(f, a);
    EXPECT_EQ(a.str().rfind("x,y,value\n", 0), 0u);
    const auto tr = facet_trace(f, {BoundaryKind::InnerFacet, 4}, 5);
    write_trace_csv(tr, b);
    EXPECT_EQ(b.str().rfind("s,value\n", 0), 0u);
}
