#pragma once

#include "berglab/berg.hpp"
#include "berglab/singular.hpp"

#include <memory>
#include <string>
#include <vector>

namespace berglab {

struct ExperimentOptions {
    SolverOptions solver{1e-12, 50000};
    DualOptions dual;
    BergOptions berg;
};

/// Mesh, dual solution and the two unit-data solves of one domain.
struct PreparedCase {
    DomainSpec domain;
    std::shared_ptr<const Mesh> mesh;
    DualSingularSolution dual;
    FemField u_a; ///< data (a, b) = (1, 0)
    FemField u_b; ///< data (a, b) = (0, 1)

    /// Solution for data (a, b) by linearity.
    FemField solution(double a, double b) const;
};

PreparedCase prepare_case(const DomainSpec& domain, const MeshParams& mesh_params,
                          const ExperimentOptions& options = {});

struct CriticalBResult {
    double b_star_dual = 0.0;
    double b_star_fit = 0.0;
    double relative_gap = 0.0;
    int mesh_level = 0;
    double alpha = 0.0; ///< integral of s* over facet 1
    double beta = 0.0;  ///< integral of s* over facet 4
    double c_fit_a = 0.0;
    double c_fit_b = 0.0;
    double c_dual_a = 0.0;
    double c_dual_b = 0.0;
};

/// Throws Error("degenerate dual") when |beta| is at quadrature noise level.
CriticalBResult critical_b(const PreparedCase& prepared, double a);
CriticalBResult critical_b(double r1, double r2, double lambda0, double a, const MeshParams& mesh_params,
                           const ExperimentOptions& options = {});

struct PerturbationPoint {
    double eps = 0.0;
    double c_dual = 0.0;     ///< mode amplitude
    double c_dual_raw = 0.0; ///< -2a alpha - 2b beta
    double c_fit = 0.0;
    double pairing = 0.0;    ///< integral of s* f, equal to 2a alpha + 2b beta
    bool berg_holds = true;
    bool violated_facet_1 = false;
    bool violated_facet_4 = false;
    /// Violated facet agrees with the sign of c_dual (negative: facet 1, positive: facet 4).
    bool sign_rule_ok = false;
};

struct PerturbationStudy {
    OuterBoundary outer = OuterBoundary::Scaled;
    double a = 0.0;
    double b_star = 0.0;
    std::vector<PerturbationPoint> points;
    /// c_dual_raw / eps at every grid point (c = -int s* f).
    std::vector<double> slope;
    /// Mean of the last three slopes and their spread relative to that mean.
    double slope_estimate = 0.0;
    double slope_variation = 0.0;
    /// Limit of (int s* f) / eps, i.e. -slope_estimate.
    double pairing_slope = 0.0;
    /// -2 * int s*(0,y) u_xx(0,y) dy over the upper symmetry segment.
    double independent_limit = 0.0;
    /// 2 * int |s*(0,y) u_xx(0,y)| dy.
    double independent_limit_abs = 0.0;
    /// | |slope_estimate| - |independent_limit| | / |independent_limit|.
    double agreement = 0.0;
    /// Unperturbed reference run.
    PerturbationPoint baseline;
};

/// Runs the eps grid at b = b_star(a) of the unperturbed domain. The grid must be
/// strictly increasing inside (0, 0.2 * r1); grid points run concurrently.
PerturbationStudy perturbation_study(double r1, double r2, double lambda0, double a,
                                     const std::vector<double>& eps_grid, const MeshParams& mesh_params,
                                     OuterBoundary outer = OuterBoundary::Scaled,
                                     const ExperimentOptions& options = {});

/// Same, reusing an unperturbed prepared case.
PerturbationStudy perturbation_study(const PreparedCase& base, double a, const std::vector<double>& eps_grid,
                                     const MeshParams& mesh_params, OuterBoundary outer,
                                     const ExperimentOptions& options = {});

/// Sign structure of the dual solution.
struct DualStructure {
    LevelSet level_set;
    double alpha = 0.0; ///< integral over facet 1
    double beta = 0.0;  ///< integral over facet 4
    double l2_norm = 0.0;
    double symmetry_residual = 0.0;
    /// Trace signs on the middle 60% of facets 1 and 4 (64 samples each).
    bool negative_on_facet_1 = false;
    bool positive_on_facet_4 = false;
    int connecting_components = 0;

    /// Class A3, four components each joining a corner to the outer boundary,
    /// the trace signs above and alpha < 0 < beta.
    bool passes() const;
};

DualStructure dual_structure(const DualSingularSolution& dual);

struct EquivalencePoint {
    double factor = 0.0; ///< b / b_star
    double b = 0.0;
    double c_dual = 0.0;
    double margin = 0.0;
    bool berg_holds = false;
    bool violated_facet_1 = false;
    bool violated_facet_4 = false;
    bool sign_rule_ok = false;
    bool below_threshold = false; ///< |c_dual| <= c_threshold
};

struct EquivalenceSweep {
    double b_star = 0.0;
    double c_threshold = 0.0;
    std::vector<EquivalencePoint> points;
    /// Berg holds exactly where |c_dual| is below the threshold.
    bool consistent() const;
};

/// Mode amplitude threshold: 3 |c_dual| of the symmetric unit case (a = b = 1) on the
/// same mesh family, floored at 1e-9, scaled by a.
double calibrated_threshold(double a, const MeshParams& mesh_params, const ExperimentOptions& options = {});

/// Berg check at b = factor * b_star for each factor.
EquivalenceSweep equivalence_sweep(const PreparedCase& prepared, double a, const std::vector<double>& factors,
                                   double c_threshold, const BergOptions& berg = {});

/// -2 int_{r2}^{lambda0 r2} s*(0,y) u_xx(0,y) dy from n cell-centred samples,
/// trapezoid rule between the first and last sample.
/// Also returns 2 int |s* u_xx| through abs_out.
double symmetry_line_limit(const DualSingularSolution& dual, const FemField& u, int n, double* abs_out = nullptr);

struct ContinuityRow {
    double eps = 0.0;
    double deviation = 0.0;
};

struct ContinuityResult {
    std::vector<ContinuityRow> rows;
    double sup_reference = 0.0; ///< sup of |s*| on the sample set
    double floor = 0.0;         ///< deviation between two refinement levels at eps = 0
    int samples = 0;
    /// deviation(eps_k+1) <= deviation(eps_k) + floor along the (decreasing) grid.
    bool monotone = false;
};

ContinuityResult dual_continuity_test(double r1, double r2, double lambda0, const std::vector<double>& eps_grid,
                                      double compact_margin, const MeshParams& mesh_params,
                                      const ExperimentOptions& options = {});

struct SweepRow {
    double ratio = 0.0;
    double b_star_dual = 0.0;
    double b_star_fit = 0.0;
    /// b_star of the transposed domain, reported as a / b_star.
    double transposed_inverse = 0.0;
};

std::vector<SweepRow> aspect_ratio_sweep(const std::vector<double>& ratios, double lambda0,
                                         const MeshParams& mesh_params, bool with_transposed = false,
                                         const ExperimentOptions& options = {});

enum class ConvergenceCase { ManufacturedSmooth, SymmetricRegular, DetunedSingular };
std::string to_string(ConvergenceCase c);
ConvergenceCase parse_convergence_case(const std::string& s);

struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    double value = 0.0; ///< energy error, |c_fit| or |c_dual|
    double order = 0.0; ///< log2 ratio against the previous row, 0 on the first
};

struct ConvergenceResult {
    ConvergenceCase kind = ConvergenceCase::ManufacturedSmooth;
    std::vector<ConvergenceRow> rows;
    /// Least-squares slope of log(value) against log(h) (manufactured case).
    double fitted_order = 0.0;
};

/// Runs levels 0..max_level of the mesh family. The singular cases use the unit domain.
ConvergenceResult convergence_study(ConvergenceCase kind, int max_level, const MeshParams& mesh_params,
                                    const ExperimentOptions& options = {});

} // namespace berglab
