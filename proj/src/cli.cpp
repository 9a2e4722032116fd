#include "berglab/cli.hpp"

#include "berglab/error.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace berglab {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, Command> kCommands{
    {"solve", Command::Solve},         {"dual", Command::Dual},         {"berg", Command::Berg},
    {"critical-b", Command::CriticalB}, {"perturb", Command::Perturb},   {"sweep", Command::Sweep},
    {"converge", Command::Converge},   {"continuity", Command::Continuity}};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void require(bool ok, const std::string& field, const std::string& rule, double got) {
    if (!ok) throw InvalidArgument(field + ": " + rule + " (got " + fmt(got) + ")");
}

std::vector<double> default_eps_grid(const RunConfig& c) {
    std::vector<double> g;
    if (c.command == Command::Continuity) {
        for (double f : {0.08, 0.04, 0.02, 0.01}) g.push_back(f * c.r1);
    } else {
        for (double f : {0.02, 0.04, 0.06, 0.08, 0.10}) g.push_back(f * c.r1);
    }
    return g;
}

std::vector<double> eps_grid_of(const RunConfig& c) { return c.eps_grid.empty() ? default_eps_grid(c) : c.eps_grid; }

/// Collects artifacts in memory; they reach the disk only once the run has succeeded.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;
    Json assertions = Json::array();

    template <class Writer>
    void add(const std::string& name, Writer&& w) {
        std::ostringstream os;
        w(os);
        files.emplace_back(name, os.str());
    }
    void check(const std::string& name, bool passed) { assertions.push_back(Json{{"name", name}, {"passed", passed}}); }
    bool all_passed() const {
        for (const auto& a : assertions)
            if (!a["passed"].get<bool>()) return false;
        return true;
    }
};

DomainSpec domain_of(const RunConfig& c) { return DomainSpec(c.r1, c.r2, c.lambda0, c.eps, 0.0, c.outer); }

std::shared_ptr<const Mesh> mesh_of(const RunConfig& c, const DomainSpec& d) {
    return std::make_shared<const Mesh>(build_mesh(d, c.mesh));
}

void add_trace_files(Artifacts& art, const FemField& u) {
    for (int f : {1, 4}) {
        const auto trace = facet_trace(u, {BoundaryKind::InnerFacet, f}, 200);
        art.add("trace_gamma" + std::to_string(f) + ".csv", [&](std::ostream& os) { write_trace_csv(trace, os); });
    }
}

void add_profile_plot(Artifacts& art, const BergReport& rep, const std::string& title) {
    std::vector<PlotSeries> series;
    for (int f : {1, 4}) {
        PlotSeries s;
        s.name = f == 1 ? "x u_x on Gamma1" : "y u_y on Gamma4";
        for (const auto& d : rep.samples) {
            if (d.facet != f || d.excluded) continue;
            s.x.push_back(d.coord);
            s.y.push_back(d.value);
        }
        series.push_back(std::move(s));
    }
    art.add("berg_profile.csv", [&](std::ostream& os) { write_berg_profile_csv(rep, os); });
    art.add("berg_profile.svg",
            [&](std::ostream& os) { write_line_plot_svg(series, title, "facet coordinate", "tangential term", os); });
}

Json run_solve(const RunConfig& c, Artifacts& art) {
    const DomainSpec d = domain_of(c);
    const auto mesh = mesh_of(c, d);
    SolveInfo info;
    const auto sys = assemble(mesh, NeumannData{c.a, c.b});
    const FemField u = solve(sys, c.experiment_options().solver, &info);
    double umin = u.values().front(), umax = umin;
    for (double v : u.values()) umin = std::min(umin, v), umax = std::max(umax, v);
    const double sym = symmetry_residual(*mesh, u.values());
    const double delta = c.cutoff_radius > 0.0 ? c.cutoff_radius : default_cutoff_radius(d);
    Json fit = nullptr;
    try {
        const auto r = extract_coefficient_fit(u, d, 1, default_fit_ring(*mesh, delta, 1), c.a, c.b);
        fit = Json{{"c_fit", r.coefficient}, {"residual", r.residual}, {"samples", r.samples}};
    } catch (const FitError&) {
    }
    art.add("solution.csv", [&](std::ostream& os) { write_field_csv(u, os); });
    art.add("mesh.svg", [&](std::ostream& os) { write_mesh_svg(*mesh, os); });
    add_trace_files(art, u);
    art.check("discrete positivity", c.a < 0 || c.b < 0 || umin >= -1e-8 * umax);
    art.check("symmetry residual <= 1e-6", sym <= 1e-6);
    return Json{{"domain", to_json(d)},
                {"mesh", to_json(*mesh)},
                {"iterations", info.iterations},
                {"relative_residual", info.relative_residual},
                {"energy", energy(u)},
                {"u_min", umin},
                {"u_max", umax},
                {"symmetry_residual", sym},
                {"max_interior_ux", max_interior_ux(u, 60)},
                {"fit", fit}};
}

Json run_dual(const RunConfig& c, Artifacts& art) {
    const DomainSpec d = domain_of(c);
    const auto mesh = mesh_of(c, d);
    const auto dual = build_dual_solution(d, mesh, c.experiment_options().dual);
    const DualStructure ds = dual_structure(dual);
    const auto values = dual.nodal_values();
    art.add("dual.csv", [&](std::ostream& os) {
        os << "x,y,value\n" << std::setprecision(17);
        for (std::size_t i = 0; i < values.size(); ++i)
            if (std::isfinite(values[i])) os << mesh->nodes[i].x << ',' << mesh->nodes[i].y << ',' << values[i] << '\n';
    });
    art.add("level_set.csv", [&](std::ostream& os) { write_level_set_csv(ds.level_set, os); });
    art.add("level_set.svg", [&](std::ostream& os) { write_level_set_svg(ds.level_set, d, os); });
    art.add("mesh.svg", [&](std::ostream& os) { write_mesh_svg(*mesh, os); });
    art.check("classification A3", ds.level_set.classification == LevelSetClass::A3);
    art.check("four corner-to-outer components", ds.level_set.components.size() == 4 && ds.connecting_components == 4);
    art.check("trace signs on middle 60%", ds.negative_on_facet_1 && ds.positive_on_facet_4);
    art.check("alpha < 0 < beta", ds.alpha < 0.0 && ds.beta > 0.0);
    art.check("unit L2 norm", std::abs(ds.l2_norm - 1.0) <= 1e-8);
    return Json{{"domain", to_json(d)},
                {"mesh", to_json(*mesh)},
                {"kappa", dual.kappa()},
                {"cutoff_radius", dual.cutoff_radius()},
                {"normalization", dual.normalization()},
                {"structure", to_json(ds)}};
}

Json run_berg(const RunConfig& c, Artifacts& art) {
    const DomainSpec d = domain_of(c);
    const auto mesh = mesh_of(c, d);
    const auto opt = c.experiment_options();
    const auto dual = build_dual_solution(d, mesh, opt.dual);
    const FemField u = solve(assemble(mesh, NeumannData{c.a, c.b}), opt.solver);
    const BergReport rep = check_berg(u, d, c.a, c.b, opt.berg);
    SingularCoefficientReport coef;
    coef.c_dual_raw = extract_coefficient_dual(d, dual, c.a, c.b);
    coef.c_dual = mode_coefficient_from_dual(dual, c.a, c.b);
    coef.mesh_level = mesh->level;
    coef.c_fit = std::numeric_limits<double>::quiet_NaN();
    coef.fit_residual = std::numeric_limits<double>::quiet_NaN();
    try {
        const auto fit = extract_coefficient_fit(u, d, 1, default_fit_ring(*mesh, dual.cutoff_radius(), 1), c.a, c.b);
        coef.c_fit = fit.coefficient;
        coef.fit_residual = fit.residual;
    } catch (const FitError&) {
    }
    const double threshold = calibrated_threshold(std::max(c.a, c.b), c.mesh, opt);
    add_profile_plot(art, rep, "Berg profile");
    add_trace_files(art, u);
    art.check("Berg verdict matches |c_dual| <= threshold", rep.holds == (std::abs(coef.c_dual) <= threshold));
    return Json{{"domain", to_json(d)},
                {"mesh", to_json(*mesh)},
                {"data", {{"a", c.a}, {"b", c.b}}},
                {"holds", rep.holds},
                {"berg", to_json(rep)},
                {"coefficients", to_json(coef)},
                {"c_threshold", threshold}};
}

Json run_critical_b(const RunConfig& c, Artifacts& art) {
    if (c.eps != 0.0) throw InvalidArgument("eps: critical-b runs on the unperturbed domain (got " + fmt(c.eps) + ")");
    const auto prepared = prepare_case(DomainSpec(c.r1, c.r2, c.lambda0), c.mesh, c.experiment_options());
    const auto r = critical_b(prepared, c.a);
    art.check("b_star > 0", r.b_star_dual > 0.0 && r.b_star_fit > 0.0);
    art.check("method gap <= 2%", r.relative_gap <= 0.02);
    if (c.r1 == c.r2) art.check("b_star = a within 1%", std::abs(r.b_star_dual - c.a) <= 0.01 * c.a);
    return Json{{"domain", to_json(prepared.domain)}, {"mesh", to_json(*prepared.mesh)}, {"a", c.a}, {"critical_b", to_json(r)}};
}

Json run_perturb(const RunConfig& c, Artifacts& art) {
    const auto grid = eps_grid_of(c);
    const auto st = perturbation_study(c.r1, c.r2, c.lambda0, c.a, grid, c.mesh, c.outer, c.experiment_options());
    art.add("perturbation.csv", [&](std::ostream& os) {
        os << "eps,c_dual,c_dual_raw,c_fit,pairing,c_over_eps,berg_holds,violated_facet_1,violated_facet_4\n"
           << std::setprecision(17);
        for (std::size_t k = 0; k < st.points.size(); ++k) {
            const auto& p = st.points[k];
            os << p.eps << ',' << p.c_dual << ',' << p.c_dual_raw << ',' << p.c_fit << ',' << p.pairing << ','
               << st.slope[k] << ',' << p.berg_holds << ',' << p.violated_facet_1 << ',' << p.violated_facet_4 << '\n';
        }
    });
    PlotSeries s{"c(eps)/eps", grid, st.slope};
    art.add("perturbation.svg", [&](std::ostream& os) { write_line_plot_svg({s}, "c(eps)/eps", "eps", "c/eps", os); });
    bool all_fail = true, coherent = true;
    for (const auto& p : st.points) all_fail = all_fail && !p.berg_holds, coherent = coherent && p.sign_rule_ok;
    art.check("Berg fails for every eps", all_fail);
    art.check("violated facet follows the sign rule", coherent);
    art.check("c/eps variation <= 25% over the last three", st.slope_variation <= 0.25);
    art.check("pairing int s* f negative", st.pairing_slope < 0.0);
    art.check("magnitude within 15% of the symmetry-line quadrature", st.agreement <= 0.15);
    return Json{{"study", to_json(st)}};
}

Json run_sweep(const RunConfig& c, Artifacts& art) {
    const auto rows = aspect_ratio_sweep(c.ratios, c.lambda0, c.mesh, c.transposed, c.experiment_options());
    Json out = Json::array();
    PlotSeries dual_s{"b*/a (dual)", {}, {}}, fit_s{"b*/a (fit)", {}, {}};
    for (const auto& r : rows) {
        out.push_back(to_json(r));
        dual_s.x.push_back(r.ratio), dual_s.y.push_back(r.b_star_dual);
        fit_s.x.push_back(r.ratio), fit_s.y.push_back(r.b_star_fit);
        if (r.ratio == 1.0) art.check("ratio 1 gives b*/a = 1 within 1%", std::abs(r.b_star_dual - 1.0) <= 0.01);
        if (c.transposed)
            art.check("reciprocal at ratio " + fmt(r.ratio),
                      std::abs(r.b_star_dual - r.transposed_inverse) <= 0.02 * r.b_star_dual);
    }
    art.add("sweep.csv", [&](std::ostream& os) {
        os << "ratio,b_star_dual,b_star_fit,transposed_inverse\n" << std::setprecision(17);
        for (const auto& r : rows)
            os << r.ratio << ',' << r.b_star_dual << ',' << r.b_star_fit << ',' << r.transposed_inverse << '\n';
    });
    art.add("sweep.svg", [&](std::ostream& os) {
        write_line_plot_svg({dual_s, fit_s}, "critical b against aspect ratio", "r2/r1", "b*/a", os);
    });
    return Json{{"lambda0", c.lambda0}, {"rows", out}};
}

Json run_converge(const RunConfig& c, Artifacts& art) {
    const auto kind = parse_convergence_case(c.convergence_case);
    const auto res = convergence_study(kind, c.mesh.levels, c.mesh, c.experiment_options());
    art.add("convergence.csv", [&](std::ostream& os) {
        os << "level,h,value,order\n" << std::setprecision(17);
        for (const auto& r : res.rows) os << r.level << ',' << r.h << ',' << r.value << ',' << r.order << '\n';
    });
    PlotSeries s{to_string(kind), {}, {}};
    for (const auto& r : res.rows)
        if (r.value > 0.0) s.x.push_back(std::log10(r.h)), s.y.push_back(std::log10(r.value));
    art.add("convergence.svg",
            [&](std::ostream& os) { write_line_plot_svg({s}, to_string(kind), "log10 h", "log10 value", os); });
    const auto& rows = res.rows;
    switch (kind) {
    case ConvergenceCase::ManufacturedSmooth:
        art.check("energy order in [0.9, 1.2]", res.fitted_order >= 0.9 && res.fitted_order <= 1.2);
        break;
    case ConvergenceCase::SymmetricRegular: {
        bool dec = true;
        for (std::size_t k = 1; k < rows.size(); ++k) dec = dec && rows[k].value < rows[k - 1].value;
        art.check("|c_fit| strictly decreasing", dec);
        break;
    }
    case ConvergenceCase::DetunedSingular:
        if (rows.size() >= 2) {
            const double q = rows.back().value / rows[rows.size() - 2].value;
            art.check("|c_dual| ratio of last two levels in [0.95, 1.05]", q >= 0.95 && q <= 1.05);
        }
        break;
    }
    return Json{{"convergence", to_json(res)}};
}

Json run_continuity(const RunConfig& c, Artifacts& art) {
    const auto grid = eps_grid_of(c);
    const auto res = dual_continuity_test(c.r1, c.r2, c.lambda0, grid, c.margin, c.mesh, c.experiment_options());
    art.add("continuity.csv", [&](std::ostream& os) {
        os << "eps,deviation\n" << std::setprecision(17);
        for (const auto& r : res.rows) os << r.eps << ',' << r.deviation << '\n';
    });
    art.check("deviation decreases up to the floor", res.monotone);
    return Json{{"continuity", to_json(res)}};
}

void commit_artifacts(const fs::path& final_dir, const Artifacts& art, const std::string& report) {
    const fs::path tmp = final_dir.parent_path() / ("." + final_dir.filename().string() + ".tmp");
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    try {
        for (const auto& [name, text] : art.files) write_file_atomic(tmp / name, text);
        write_file_atomic(tmp / "report.json", report);
        fs::remove_all(final_dir);
        fs::rename(tmp, final_dir);
    } catch (...) {
        fs::remove_all(tmp);
        throw;
    }
}

} // namespace

std::string to_string(Command c) {
    for (const auto& [name, cmd] : kCommands)
        if (cmd == c) return name;
    return "?";
}

Json RunConfig::to_json() const {
    Json eps = Json::array(), rat = Json::array();
    for (double e : eps_grid) eps.push_back(e);
    for (double r : ratios) rat.push_back(r);
    return Json{{"command", to_string(command)},
                {"r1", r1},
                {"r2", r2},
                {"lambda0", lambda0},
                {"eps", eps},
                {"a", a},
                {"b", b},
                {"mesh", berglab::to_json(mesh)},
                {"solver_tol", solver_tol},
                {"max_iter", max_iter},
                {"tol_sign", tol_sign},
                {"r_excl", r_excl},
                {"cutoff_radius", cutoff_radius},
                {"eps_grid", eps},
                {"ratios", rat},
                {"transposed", transposed},
                {"outer", outer == OuterBoundary::Scaled ? "scaled" : "translated"},
                {"case", convergence_case},
                {"margin", margin}};
}

std::string RunConfig::hash() const { return hex16(fnv1a(to_json().dump())); }

ExperimentOptions RunConfig::experiment_options() const {
    ExperimentOptions o;
    o.solver = SolverOptions{solver_tol, max_iter};
    o.dual.solver = o.solver;
    o.dual.cutoff_radius = cutoff_radius;
    o.berg.tol_sign = tol_sign;
    o.berg.r_excl = r_excl;
    return o;
}

void validate(const RunConfig& c) {
    require(std::isfinite(c.r1) && c.r1 > 0.0, "r1", "must be a finite positive length", c.r1);
    require(std::isfinite(c.r2) && c.r2 > 0.0, "r2", "must be a finite positive length", c.r2);
    require(std::isfinite(c.lambda0) && c.lambda0 > 1.0, "lambda0", "must satisfy lambda0 > 1", c.lambda0);
    require(std::isfinite(c.eps) && c.eps >= 0.0 && c.eps < 0.2 * c.r1, "eps", "must lie in [0, 0.2 * r1)", c.eps);
    require(std::isfinite(c.a) && c.a >= 0.0, "a", "must be finite and >= 0", c.a);
    require(std::isfinite(c.b) && c.b >= 0.0, "b", "must be finite and >= 0", c.b);
    if (c.command == Command::CriticalB || c.command == Command::Perturb)
        require(c.a > 0.0, "a", "must be > 0 for " + to_string(c.command), c.a);
    require(c.mesh.n_base >= 2, "n_base", "must be >= 2", c.mesh.n_base);
    require(std::isfinite(c.mesh.grading_ratio) && c.mesh.grading_ratio >= 1.0, "grading_ratio", "must be >= 1",
            c.mesh.grading_ratio);
    require(c.mesh.levels >= 0 && c.mesh.levels <= 6, "levels", "must lie in [0, 6]", c.mesh.levels);
    require(c.solver_tol > 0.0 && c.solver_tol < 1.0, "solver_tol", "must lie in (0, 1)", c.solver_tol);
    require(c.max_iter >= 1, "max_iter", "must be >= 1", c.max_iter);
    require(std::isfinite(c.tol_sign) && c.tol_sign >= 0.0, "tol_sign", "must be finite and >= 0", c.tol_sign);
    require(std::isfinite(c.r_excl) && c.r_excl >= 0.0, "r_excl", "must be finite and >= 0", c.r_excl);
    require(std::isfinite(c.cutoff_radius) && c.cutoff_radius >= 0.0, "cutoff_radius", "must be finite and >= 0",
            c.cutoff_radius);
    require(std::isfinite(c.margin) && c.margin > 0.0, "margin", "must be > 0", c.margin);
    const auto grid = eps_grid_of(c);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::string field = "eps_grid[" + std::to_string(k) + "]";
        require(grid[k] > 0.0 && grid[k] < 0.2 * c.r1, field, "must lie in (0, 0.2 * r1)", grid[k]);
        if (k == 0) continue;
        if (c.command == Command::Continuity)
            require(grid[k] < grid[k - 1], field, "continuity grid must be strictly decreasing", grid[k]);
        else
            require(grid[k] > grid[k - 1], field, "perturbation grid must be strictly increasing", grid[k]);
    }
    for (std::size_t k = 0; k < c.ratios.size(); ++k)
        require(std::isfinite(c.ratios[k]) && c.ratios[k] > 0.0, "ratios[" + std::to_string(k) + "]", "must be > 0",
                c.ratios[k]);
    parse_convergence_case(c.convergence_case);
    DomainSpec(c.r1, c.r2, c.lambda0, c.eps, 0.0, c.outer);
}

ParseResult parse_config(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Berg's effect laboratory: Laplace problems on rectangular annuli"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML file with flat keys named like the long flags");
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    app.require_subcommand(1);

    app.add_option("--r1", cfg.r1, "Inner half width");
    app.add_option("--r2", cfg.r2, "Inner half height");
    app.add_option("--lambda0", cfg.lambda0, "Outer scale factor, > 1");
    app.add_option("--eps", cfg.eps, "Widening of the inner rectangle in x");
    app.add_option("--a", cfg.a, "Neumann datum on the horizontal facets");
    app.add_option("--b", cfg.b, "Neumann datum on the vertical facets");
    app.add_option("--n-base,--n_base", cfg.mesh.n_base, "Cells across the frame width");
    app.add_option("--grading-ratio,--grading_ratio", cfg.mesh.grading_ratio, "Corner band ratio");
    app.add_option("--levels", cfg.mesh.levels, "Uniform refinements (maximum level for converge)");
    app.add_option("--solver-tol,--solver_tol", cfg.solver_tol, "Relative CG residual");
    app.add_option("--max-iter,--max_iter", cfg.max_iter, "CG iteration cap");
    app.add_option("--tol-sign,--tol_sign", cfg.tol_sign, "Berg sign tolerance relative to max(a, b)");
    app.add_option("--r-excl,--r_excl", cfg.r_excl, "Corner exclusion radius for Berg checks, 0 = automatic");
    app.add_option("--cutoff-radius,--cutoff_radius", cfg.cutoff_radius, "Dual cutoff radius, 0 = automatic");
    app.add_option("--eps-grid,--eps_grid", cfg.eps_grid,
                   "Absolute eps values; default 0.02..0.10 r1 (perturb), 0.08..0.01 r1 (continuity)");
    app.add_option("--ratios", cfg.ratios, "Aspect ratios r2/r1 for sweep");
    app.add_flag("--transposed", cfg.transposed, "Sweep also solves the transposed domains");
    std::string outer = "scaled";
    app.add_option("--outer", outer, "Outer boundary of perturbed domains")
        ->check(CLI::IsMember({"scaled", "translated"}));
    app.add_option("--case", cfg.convergence_case, "Convergence case")
        ->check(CLI::IsMember({"manufactured-smooth", "symmetric-regular", "detuned-singular"}));
    app.add_option("--margin", cfg.margin, "Corner ball radius excluded by the continuity test");
    app.add_option("--output-dir,--output_dir", cfg.output_dir, "Output root; BERG_LAB_OUT overrides");
    app.add_flag("--assert", cfg.assert_mode, "Exit 3 when a built-in assertion fails");

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, cmd] : kCommands) subs[name] = app.add_subcommand(name)->fallthrough();
    subs["solve"]->description("Solve the mixed problem and write the field");
    subs["dual"]->description("Dual singular solution, zero level set and sign structure");
    subs["berg"]->description("Berg check with singular coefficients");
    subs["critical-b"]->description("Critical datum b by two methods");
    subs["perturb"]->description("Instability under widening of the inner rectangle");
    subs["sweep"]->description("Critical b against aspect ratio");
    subs["converge"]->description("Convergence study");
    subs["continuity"]->description("Dependence of the dual solution on eps");

    ParseResult res;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        res.message = app.help();
        res.exit_code = 0;
        return res;
    } catch (const CLI::CallForAllHelp& e) {
        res.message = app.help("", CLI::AppFormatMode::All);
        res.exit_code = 0;
        return res;
    } catch (const CLI::ParseError& e) {
        res.message = e.what();
        res.exit_code = 2;
        return res;
    }
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) cfg.command = kCommands.at(name);
    cfg.outer = outer == "translated" ? OuterBoundary::Translated : OuterBoundary::Scaled;
    try {
        validate(cfg);
    } catch (const InvalidArgument& e) {
        res.message = e.what();
        res.exit_code = 2;
        return res;
    }
    res.config = cfg;
    return res;
}

RunOutcome run(const RunConfig& config) {
    RunOutcome out;
    Artifacts art;
    Json results;
    try {
        validate(config);
        switch (config.command) {
        case Command::Solve: results = run_solve(config, art); break;
        case Command::Dual: results = run_dual(config, art); break;
        case Command::Berg: results = run_berg(config, art); break;
        case Command::CriticalB: results = run_critical_b(config, art); break;
        case Command::Perturb: results = run_perturb(config, art); break;
        case Command::Sweep: results = run_sweep(config, art); break;
        case Command::Converge: results = run_converge(config, art); break;
        case Command::Continuity: results = run_continuity(config, art); break;
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        out.exit_code = 2;
        return out;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        out.exit_code = 1;
        return out;
    }

    const std::string hash = config.hash();
    Json names = Json::array();
    for (const auto& f : art.files) names.push_back(f.first);
    out.report = Json{{"schema_version", kReportSchemaVersion},
                      {"command", to_string(config.command)},
                      {"config_hash", hash},
                      {"config", config.to_json()},
                      {"results", results},
                      {"assertions", art.assertions},
                      {"all_assertions_passed", art.all_passed()},
                      {"artifacts", names}};

    const char* env = std::getenv("BERG_LAB_OUT");
    const fs::path root = env && *env ? fs::path(env) : fs::path(config.output_dir);
    const fs::path dir = root / (to_string(config.command) + "-" + hash);
    try {
        fs::create_directories(root);
        commit_artifacts(dir, art, dump_report(out.report));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        out.exit_code = 1;
        return out;
    }
    out.report_path = (dir / "report.json").string();
    out.exit_code = config.assert_mode && !art.all_passed() ? 3 : 0;
    return out;
}

int cli_main(int argc, const char* const* argv) {
    const ParseResult parsed = parse_config(argc, argv);
    if (!parsed.config) {
        (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << '\n';
        return parsed.exit_code;
    }
    const RunOutcome out = run(*parsed.config);
    if (!out.report_path.empty()) {
        std::cout << out.report_path << '\n';
        for (const auto& a : out.report["assertions"])
            std::cout << (a["passed"].get<bool>() ? "  ok    " : "  FAIL  ") << a["name"].get<std::string>() << '\n';
    }
    return out.exit_code;
}

} // namespace berglab
