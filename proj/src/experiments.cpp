#include "berglab/experiments.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace berglab {

namespace {

std::shared_ptr<const Mesh> make_mesh(const DomainSpec& domain, const MeshParams& params) {
    return std::make_shared<const Mesh>(build_mesh(domain, params));
}

double fit_or_nan(const FemField& u, const DomainSpec& domain, double cutoff_radius, double a, double b) {
    try {
        return extract_coefficient_fit(u, domain, 1, default_fit_ring(u.mesh(), cutoff_radius, 1), a, b).coefficient;
    } catch (const FitError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

PerturbationPoint evaluate_point(double eps, const FemField& u, const DualSingularSolution& dual, double a, double b,
                                 const BergOptions& berg) {
    PerturbationPoint pt;
    pt.eps = eps;
    pt.c_dual_raw = extract_coefficient_dual(dual.domain(), dual, a, b);
    pt.c_dual = mode_coefficient_from_dual(dual, a, b);
    pt.pairing = -pt.c_dual_raw;
    pt.c_fit = fit_or_nan(u, dual.domain(), dual.cutoff_radius(), a, b);
    const BergReport rep = check_berg(u, dual.domain(), a, b, berg);
    pt.berg_holds = rep.holds;
    pt.violated_facet_1 = rep.violated_on(1);
    pt.violated_facet_4 = rep.violated_on(4);
    pt.sign_rule_ok = (pt.c_dual < 0.0 && pt.violated_facet_1 && !pt.violated_facet_4) ||
                      (pt.c_dual > 0.0 && pt.violated_facet_4 && !pt.violated_facet_1);
    return pt;
}

double mean_last(const std::vector<double>& v, std::size_t k) {
    const std::size_t n = std::min(k, v.size());
    if (n == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = v.size() - n; i < v.size(); ++i) s += v[i];
    return s / static_cast<double>(n);
}

double spread_last(const std::vector<double>& v, std::size_t k) {
    const std::size_t n = std::min(k, v.size());
    if (n == 0) return 0.0;
    const auto first = v.end() - static_cast<std::ptrdiff_t>(n);
    const auto [lo, hi] = std::minmax_element(first, v.end());
    const double m = std::abs(mean_last(v, k));
    return m > 0.0 ? (*hi - *lo) / m : std::numeric_limits<double>::infinity();
}

struct SampleSet {
    std::vector<Point2> points;
};

SampleSet continuity_samples(const DomainSpec& base, const std::vector<DomainSpec>& perturbed, double margin,
                             int n) {
    SampleSet s;
    const double hx = base.outer_hx();
    const double hy = base.outer_hy();
    const double tol = -1e-9 * std::max(hx, hy);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Point2 p{-hx + (i + 0.5) * 2.0 * hx / n, -hy + (j + 0.5) * 2.0 * hy / n};
            if (!base.contains(p, tol)) continue;
            bool keep = true;
            for (int c = 1; c <= 4 && keep; ++c) keep = distance(p, base.inner_corner(c)) >= margin;
            for (const auto& d : perturbed) {
                if (!keep) break;
                keep = d.contains(p, tol);
                for (int c = 1; c <= 4 && keep; ++c) keep = distance(p, d.inner_corner(c)) >= margin;
            }
            if (keep) s.points.push_back(p);
        }
    }
    return s;
}

double sup_difference(const DualSingularSolution& f, const DualSingularSolution& g, const SampleSet& s) {
    double d = 0.0;
    for (const Point2& p : s.points) d = std::max(d, std::abs(f.eval(p) - g.eval(p)));
    return d;
}

} // namespace

FemField PreparedCase::solution(double a, double b) const { return u_a.scaled(a) + u_b.scaled(b); }

PreparedCase prepare_case(const DomainSpec& domain, const MeshParams& mesh_params, const ExperimentOptions& options) {
    auto mesh = make_mesh(domain, mesh_params);
    auto dual = build_dual_solution(domain, mesh, options.dual);
    auto u_a = solve(assemble(mesh, NeumannData{1.0, 0.0}), options.solver);
    auto u_b = solve(assemble(mesh, NeumannData{0.0, 1.0}), options.solver);
    return PreparedCase{domain, mesh, std::move(dual), std::move(u_a), std::move(u_b)};
}

CriticalBResult critical_b(const PreparedCase& prepared, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("a must be a finite positive datum");
    CriticalBResult r;
    r.mesh_level = prepared.mesh->level;
    r.alpha = facet_integral_of_dual(prepared.dual, {BoundaryKind::InnerFacet, 1});
    r.beta = facet_integral_of_dual(prepared.dual, {BoundaryKind::InnerFacet, 4});
    const double scale = std::max(std::abs(r.alpha), 1e-300);
    if (std::abs(r.beta) < 1e-12 * scale) throw Error("degenerate dual");
    r.b_star_dual = -a * r.alpha / r.beta;
    r.c_dual_a = mode_coefficient_from_dual(prepared.dual, 1.0, 0.0);
    r.c_dual_b = mode_coefficient_from_dual(prepared.dual, 0.0, 1.0);
    const double delta = prepared.dual.cutoff_radius();
    r.c_fit_a = fit_or_nan(prepared.u_a, prepared.domain, delta, 1.0, 0.0);
    r.c_fit_b = fit_or_nan(prepared.u_b, prepared.domain, delta, 0.0, 1.0);
    r.b_star_fit = -a * r.c_fit_a / r.c_fit_b;
    r.relative_gap = std::abs(r.b_star_dual - r.b_star_fit) / std::abs(r.b_star_dual);
    return r;
}

CriticalBResult critical_b(double r1, double r2, double lambda0, double a, const MeshParams& mesh_params,
                           const ExperimentOptions& options) {
    return critical_b(prepare_case(DomainSpec(r1, r2, lambda0), mesh_params, options), a);
}

bool DualStructure::passes() const {
    return level_set.classification == LevelSetClass::A3 && level_set.components.size() == 4 &&
           connecting_components == 4 && negative_on_facet_1 && positive_on_facet_4 && alpha < 0.0 && beta > 0.0;
}

DualStructure dual_structure(const DualSingularSolution& dual) {
    DualStructure ds;
    const DomainSpec& dom = dual.domain();
    ds.level_set = level_set(dual, dual.mesh());
    for (const auto& c : ds.level_set.components)
        if (c.connects_corner_to_outer()) ++ds.connecting_components;
    ds.alpha = facet_integral_of_dual(dual, {BoundaryKind::InnerFacet, 1});
    ds.beta = facet_integral_of_dual(dual, {BoundaryKind::InnerFacet, 4});
    ds.l2_norm = dual.l2_norm();
    ds.symmetry_residual = symmetry_residual(dual.mesh(), dual.nodal_values());
    ds.negative_on_facet_1 = true;
    ds.positive_on_facet_4 = true;
    const int n = 64;
    for (int k = 0; k < n; ++k) {
        const double t = -0.6 + 1.2 * k / (n - 1);
        if (!(dual.eval({t * dom.inner_hx(), dom.inner_hy()}) < 0.0)) ds.negative_on_facet_1 = false;
        if (!(dual.eval({dom.inner_hx(), t * dom.inner_hy()}) > 0.0)) ds.positive_on_facet_4 = false;
    }
    return ds;
}

bool EquivalenceSweep::consistent() const {
    return std::all_of(points.begin(), points.end(),
                       [](const EquivalencePoint& p) { return p.berg_holds == p.below_threshold; });
}

double calibrated_threshold(double a, const MeshParams& mesh_params, const ExperimentOptions& options) {
    const DomainSpec unit(1.0, 1.0, 2.0);
    const auto dual = build_dual_solution(unit, make_mesh(unit, mesh_params), options.dual);
    return a * std::max(3.0 * std::abs(mode_coefficient_from_dual(dual, 1.0, 1.0)), 1e-9);
}

EquivalenceSweep equivalence_sweep(const PreparedCase& prepared, double a, const std::vector<double>& factors,
                                   double c_threshold, const BergOptions& berg) {
    EquivalenceSweep sw;
    sw.b_star = critical_b(prepared, a).b_star_dual;
    sw.c_threshold = c_threshold;
    for (double f : factors) {
        EquivalencePoint p;
        p.factor = f;
        p.b = f * sw.b_star;
        p.c_dual = mode_coefficient_from_dual(prepared.dual, a, p.b);
        const BergReport rep = check_berg(prepared.solution(a, p.b), prepared.domain, a, p.b, berg);
        p.margin = rep.margin;
        p.berg_holds = rep.holds;
        p.violated_facet_1 = rep.violated_on(1);
        p.violated_facet_4 = rep.violated_on(4);
        p.sign_rule_ok = (p.c_dual < 0.0 && p.violated_facet_1 && !p.violated_facet_4) ||
                         (p.c_dual > 0.0 && p.violated_facet_4 && !p.violated_facet_1);
        p.below_threshold = std::abs(p.c_dual) <= c_threshold;
        sw.points.push_back(p);
    }
    return sw;
}

double symmetry_line_limit(const DualSingularSolution& dual, const FemField& u, int n, double* abs_out) {
    const DomainSpec& dom = dual.domain();
    const double lo = dom.inner_hy();
    const double hi = dom.outer_hy();
    const auto uxx = second_derivative_on_symmetry_line(u, lo, hi, n);
    const double h = (hi - lo) / n;
    double signed_sum = 0.0;
    double abs_sum = 0.0;
    for (std::size_t k = 0; k < uxx.size(); ++k) {
        const double w = (k == 0 || k + 1 == uxx.size()) ? 0.5 * h : h;
        const double v = dual.eval({0.0, uxx[k].y}) * uxx[k].value * w;
        signed_sum += v;
        abs_sum += std::abs(v);
    }
    if (abs_out) *abs_out = 2.0 * abs_sum;
    return -2.0 * signed_sum;
}

PerturbationStudy perturbation_study(const PreparedCase& base, double a, const std::vector<double>& eps_grid,
                                     const MeshParams& mesh_params, OuterBoundary outer,
                                     const ExperimentOptions& options) {
    if (eps_grid.empty()) throw InvalidArgument("eps grid must not be empty");
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (!(eps_grid[k] > 0.0) || !(eps_grid[k] < 0.2 * base.domain.r1()))
            throw InvalidArgument("eps grid entries must lie in (0, 0.2 * r1)");
        if (k > 0 && !(eps_grid[k] > eps_grid[k - 1]))
            throw InvalidArgument("eps grid must be strictly increasing");
    }
    PerturbationStudy st;
    st.outer = outer;
    st.a = a;
    st.b_star = critical_b(base, a).b_star_dual;
    const double b = st.b_star;
    const FemField u0 = base.solution(a, b);
    st.baseline = evaluate_point(0.0, u0, base.dual, a, b, options.berg);
    st.independent_limit = symmetry_line_limit(base.dual, u0, 64, &st.independent_limit_abs);

    const DomainSpec& d0 = base.domain;
    std::vector<std::future<PerturbationPoint>> jobs;
    for (double eps : eps_grid) {
        jobs.push_back(std::async(std::launch::async, [&, eps] {
            const DomainSpec dom(d0.r1(), d0.r2(), d0.lambda0(), eps, 0.0, outer);
            auto mesh = make_mesh(dom, mesh_params);
            const auto dual = build_dual_solution(dom, mesh, options.dual);
            const FemField u = solve(assemble(mesh, NeumannData{a, b}), options.solver);
            return evaluate_point(eps, u, dual, a, b, options.berg);
        }));
    }
    for (auto& j : jobs) st.points.push_back(j.get());
    for (const auto& pt : st.points) st.slope.push_back(pt.c_dual_raw / pt.eps);
    st.slope_estimate = mean_last(st.slope, 3);
    st.slope_variation = spread_last(st.slope, 3);
    st.pairing_slope = -st.slope_estimate;
    st.agreement = std::abs(std::abs(st.slope_estimate) - std::abs(st.independent_limit)) /
                   std::abs(st.independent_limit);
    return st;
}

PerturbationStudy perturbation_study(double r1, double r2, double lambda0, double a,
                                     const std::vector<double>& eps_grid, const MeshParams& mesh_params,
                                     OuterBoundary outer, const ExperimentOptions& options) {
    const auto base = prepare_case(DomainSpec(r1, r2, lambda0), mesh_params, options);
    return perturbation_study(base, a, eps_grid, mesh_params, outer, options);
}

ContinuityResult dual_continuity_test(double r1, double r2, double lambda0, const std::vector<double>& eps_grid,
                                      double compact_margin, const MeshParams& mesh_params,
                                      const ExperimentOptions& options) {
    if (eps_grid.empty()) throw InvalidArgument("eps grid must not be empty");
    if (!(compact_margin > 0.0)) throw InvalidArgument("compact_margin must be positive");
    const DomainSpec base(r1, r2, lambda0);
    std::vector<DomainSpec> perturbed;
    for (double e : eps_grid) perturbed.emplace_back(r1, r2, lambda0, e);

    const SampleSet samples = continuity_samples(base, perturbed, compact_margin, 80);
    if (samples.points.empty()) throw InvalidArgument("compact set is empty");

    const auto ref = build_dual_solution(base, make_mesh(base, mesh_params), options.dual);
    ContinuityResult res;
    res.samples = static_cast<int>(samples.points.size());
    for (const Point2& p : samples.points) res.sup_reference = std::max(res.sup_reference, std::abs(ref.eval(p)));

    MeshParams coarse = mesh_params;
    if (coarse.levels > 0)
        --coarse.levels;
    else
        coarse.n_base = std::max(2, coarse.n_base / 2);
    const auto ref_coarse = build_dual_solution(base, make_mesh(base, coarse), options.dual);
    res.floor = sup_difference(ref, ref_coarse, samples);

    for (std::size_t k = 0; k < perturbed.size(); ++k) {
        const auto d = build_dual_solution(perturbed[k], make_mesh(perturbed[k], mesh_params), options.dual);
        res.rows.push_back({eps_grid[k], sup_difference(d, ref, samples)});
    }
    res.monotone = true;
    for (std::size_t k = 1; k < res.rows.size(); ++k)
        if (res.rows[k].deviation > res.rows[k - 1].deviation + res.floor) res.monotone = false;
    return res;
}

std::vector<SweepRow> aspect_ratio_sweep(const std::vector<double>& ratios, double lambda0,
                                         const MeshParams& mesh_params, bool with_transposed,
                                         const ExperimentOptions& options) {
    std::vector<SweepRow> rows;
    for (double t : ratios) {
        if (!(t > 0.0)) throw InvalidArgument("aspect ratios must be positive");
        SweepRow row;
        row.ratio = t;
        const auto r = critical_b(1.0, t, lambda0, 1.0, mesh_params, options);
        row.b_star_dual = r.b_star_dual;
        row.b_star_fit = r.b_star_fit;
        if (with_transposed) {
            const auto tr = critical_b(t, 1.0, lambda0, 1.0, mesh_params, options);
            row.transposed_inverse = 1.0 / tr.b_star_dual;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string to_string(ConvergenceCase c) {
    switch (c) {
    case ConvergenceCase::ManufacturedSmooth: return "manufactured-smooth";
    case ConvergenceCase::SymmetricRegular: return "symmetric-regular";
    case ConvergenceCase::DetunedSingular: return "detuned-singular";
    }
    return "?";
}

ConvergenceCase parse_convergence_case(const std::string& s) {
    for (auto c : {ConvergenceCase::ManufacturedSmooth, ConvergenceCase::SymmetricRegular,
                   ConvergenceCase::DetunedSingular})
        if (to_string(c) == s) return c;
    throw InvalidArgument("unknown convergence case '" + s + "'");
}

ConvergenceResult convergence_study(ConvergenceCase kind, int max_level, const MeshParams& mesh_params,
                                    const ExperimentOptions& options) {
    if (max_level < 0) throw InvalidArgument("max_level must be >= 0");
    const DomainSpec dom(1.0, 1.0, 2.0);
    ConvergenceResult res;
    res.kind = kind;
    auto mesh = make_mesh(dom, [&] {
        MeshParams p = mesh_params;
        p.levels = 0;
        return p;
    }());
    for (int level = 0; level <= max_level; ++level) {
        if (level > 0) mesh = std::make_shared<const Mesh>(refine(*mesh));
        ConvergenceRow row;
        row.level = level;
        row.h = mesh->h_max;
        switch (kind) {
        case ConvergenceCase::ManufacturedSmooth: {
            AssemblyOptions ao;
            ao.dirichlet_everywhere = [](Point2 p) { return p.x * p.x - p.y * p.y; };
            const FemField u = solve(assemble(mesh, ao), options.solver);
            row.value = energy_error(u, [](Point2 p) { return Point2{2.0 * p.x, -2.0 * p.y}; });
            break;
        }
        case ConvergenceCase::SymmetricRegular: {
            const FemField u = solve(assemble(mesh, NeumannData{1.0, 1.0}), options.solver);
            const double delta = options.dual.cutoff_radius > 0.0 ? options.dual.cutoff_radius
                                                                   : default_cutoff_radius(dom);
            row.value = std::abs(
                extract_coefficient_fit(u, dom, 1, default_fit_ring(*mesh, delta, 1), 1.0, 1.0).coefficient);
            break;
        }
        case ConvergenceCase::DetunedSingular: {
            const auto dual = build_dual_solution(dom, mesh, options.dual);
            row.value = std::abs(mode_coefficient_from_dual(dual, 1.0, 1.5));
            break;
        }
        }
        if (!res.rows.empty() && row.value > 0.0 && res.rows.back().value > 0.0)
            row.order = std::log(res.rows.back().value / row.value) / std::log(res.rows.back().h / row.h);
        res.rows.push_back(row);
    }
    if (res.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const auto& r : res.rows) {
            if (!(r.value > 0.0)) continue;
            const double x = std::log(r.h), y = std::log(r.value);
            sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
        }
        if (n >= 2) res.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return res;
}

} // namespace berglab
