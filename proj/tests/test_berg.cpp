#include "berglab/berg.hpp"
#include "berglab/error.hpp"
#include "berglab/singular.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace berglab;

namespace {

std::shared_ptr<const Mesh> mesh_for(const DomainSpec& d, int levels = 0) {
    return std::make_shared<const Mesh>(build_mesh(d, MeshParams{4, 1.2, levels}));
}

} // namespace

TEST(Berg, SyntheticFieldsWithKnownSigns) {
    const DomainSpec d(1, 1, 2);
    const auto mesh = mesh_for(d);
    // x u_x = -2x^2 on facet 1 and y u_y = -2y^2 on facet 4.
    const FemField bowl(mesh, [](Point2 p) { return 5 - p.x * p.x - p.y * p.y; });
    const BergReport ok = check_berg(bowl, d, 1, 1);
    EXPECT_TRUE(ok.holds);
    EXPECT_TRUE(ok.weak_berg_holds);
    EXPECT_GT(ok.margin, 0.0);
    EXPECT_TRUE(ok.violations.empty());

    const FemField cup(mesh, [](Point2 p) { return p.x * p.x + p.y * p.y; });
    const BergReport bad = check_berg(cup, d, 1, 1);
    EXPECT_FALSE(bad.holds);
    EXPECT_TRUE(bad.violated_on(1));
    EXPECT_TRUE(bad.violated_on(4));
    EXPECT_FALSE(bad.weak_berg_holds);
    EXPECT_LT(bad.margin, 0.0);

    // Saddle: rising along facet 1 only.
    const FemField saddle(mesh, [](Point2 p) { return p.x * p.x - p.y * p.y; });
    const BergReport s = check_berg(saddle, d, 1, 1);
    EXPECT_TRUE(s.violated_on(1));
    EXPECT_FALSE(s.violated_on(4));
}

TEST(Berg, CentralDifferenceValues) {
    // Two-sided difference quotients are exact for linear fields on any spacing.
    const DomainSpec d(1, 1, 2);
    const FemField lin(mesh_for(d), [](Point2 p) { return 3 * p.x + 7 * p.y; });
    const BergReport r = check_berg(lin, d, 1, 1);
    ASSERT_FALSE(r.samples.empty());
    // Cells next to the corners are ~1e-10 wide, so quotients there carry ~1e-6 of round-off.
    for (const auto& s : r.samples)
        EXPECT_NEAR(s.value, (s.facet == 1 ? 3 : 7) * s.coord, std::abs(s.coord) < 0.999 ? 1e-9 : 1e-4) << s.facet;
    const FemField bowl(mesh_for(d), [](Point2 p) { return 5 - p.x * p.x - p.y * p.y; });
    EXPECT_DOUBLE_EQ(check_berg(bowl, d, 1, 1).threshold, 1e-3);
    EXPECT_DOUBLE_EQ(check_berg(bowl, d, 2, 3).threshold, 3e-3);
}

TEST(Berg, CornerExclusion) {
    const DomainSpec d(1, 1, 2);
    // Monotone decreasing except for a rise within 0.05 of the corners on facet 1.
    const FemField f(mesh_for(d, 1), [](Point2 p) {
        const double t = std::max(0.0, std::abs(p.x) - 0.95);
        return 5 - p.x * p.x - p.y * p.y + 100 * t * t;
    });
    BergOptions wide;
    wide.r_excl = 0.1;
    EXPECT_TRUE(check_berg(f, d, 1, 1, wide).holds);
    BergOptions narrow;
    narrow.r_excl = 0.01;
    const BergReport r = check_berg(f, d, 1, 1, narrow);
    EXPECT_FALSE(r.holds);
    EXPECT_TRUE(r.violated_on(1));
    EXPECT_FALSE(r.violated_on(4));
    for (const auto& v : r.violations) EXPECT_GT(std::abs(v.coord), 0.95);
    BergOptions neg;
    neg.tol_sign = -1;
    EXPECT_THROW(check_berg(f, d, 1, 1, neg), InvalidArgument);
}

TEST(Berg, SolvedFieldsFollowTheSignRule) {
    const DomainSpec d(1, 1, 2);
    const auto mesh = mesh_for(d, 1);
    const auto dual = build_dual_solution(d, mesh);
    const SolverOptions so{1e-12, 20000};
    const FemField ua = solve(assemble(mesh, NeumannData{1, 0}), so);
    const FemField ub = solve(assemble(mesh, NeumannData{0, 1}), so);

    const BergReport sym = check_berg(ua + ub, d, 1, 1);
    EXPECT_TRUE(sym.holds);
    EXPECT_GT(sym.margin, 0.0);
    EXPECT_LE(max_interior_ux(ua + ub, 40), 1e-3);

    for (double b : {0.6, 1.4}) {
        const FemField u = ua + ub.scaled(b);
        const double c = mode_coefficient_from_dual(dual, 1, b);
        const BergReport r = check_berg(u, d, 1, b);
        EXPECT_FALSE(r.holds) << b;
        // Negative mode amplitude breaks facet 1, positive breaks facet 4.
        EXPECT_EQ(r.violated_on(1), c < 0) << b;
        EXPECT_EQ(r.violated_on(4), c > 0) << b;
    }
}

TEST(Berg, ProfileCsv) {
    const DomainSpec d(1, 1, 2);
    const FemField bowl(mesh_for(d), [](Point2 p) { return -p.x * p.x; });
    std::ostringstream os;
    const BergReport r = check_berg(bowl, d, 1, 1);
    write_berg_profile_csv(r, os);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("facet,coord,value,excluded\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), r.samples.size() + 1);
    EXPECT_LE(max_interior_ux(bowl, 20), 0.0);
}
