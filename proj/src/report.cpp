#include "berglab/report.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace berglab {

namespace {

Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(finite_or_null(x));
    return a;
}

const char* outer_name(OuterBoundary o) { return o == OuterBoundary::Scaled ? "scaled" : "translated"; }

} // namespace

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const DomainSpec& d) {
    return Json{{"r1", d.r1()},
                {"r2", d.r2()},
                {"lambda0", d.lambda0()},
                {"eps", d.eps()},
                {"eps_y", d.eps_y()},
                {"outer", outer_name(d.outer_mode())}};
}

Json to_json(const MeshParams& p) {
    return Json{{"n_base", p.n_base},
                {"grading_ratio", p.grading_ratio},
                {"levels", p.levels},
                {"corner_depth", p.corner_depth}};
}

Json to_json(const Mesh& m) {
    return Json{{"nodes", m.num_nodes()},  {"triangles", m.num_triangles()}, {"h_max", m.h_max},
                {"grading", m.grading},    {"bands", m.bands},               {"level", m.level},
                {"min_angle_deg", min_angle_degrees(m)}};
}

Json to_json(const BergReport& r, bool with_samples) {
    Json j{{"holds", r.holds},
           {"weak_berg_holds", r.weak_berg_holds},
           {"margin", finite_or_null(r.margin)},
           {"threshold", r.threshold},
           {"excluded_radius", r.excluded_radius},
           {"violated_facet_1", r.violated_on(1)},
           {"violated_facet_4", r.violated_on(4)},
           {"violations", r.violations.size()}};
    if (!r.violations.empty()) {
        const auto worst = std::max_element(r.violations.begin(), r.violations.end(),
                                            [](const BergViolation& p, const BergViolation& q) {
                                                return p.value < q.value;
                                            });
        j["worst_violation"] = Json{{"facet", worst->facet}, {"coord", worst->coord}, {"value", worst->value}};
    }
    if (with_samples) {
        Json s = Json::array();
        for (const auto& d : r.samples)
            s.push_back(Json{{"facet", d.facet}, {"coord", d.coord}, {"value", d.value}, {"excluded", d.excluded}});
        j["samples"] = s;
    }
    return j;
}

Json to_json(const SingularCoefficientReport& r) {
    return Json{{"c_dual", finite_or_null(r.c_dual)},
                {"c_dual_raw", finite_or_null(r.c_dual_raw)},
                {"c_fit", finite_or_null(r.c_fit)},
                {"fit_residual", finite_or_null(r.fit_residual)},
                {"mesh_level", r.mesh_level}};
}

Json to_json(const CriticalBResult& r) {
    return Json{{"b_star_dual", finite_or_null(r.b_star_dual)},
                {"b_star_fit", finite_or_null(r.b_star_fit)},
                {"relative_gap", finite_or_null(r.relative_gap)},
                {"mesh_level", r.mesh_level},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"c_dual_a", r.c_dual_a},
                {"c_dual_b", r.c_dual_b},
                {"c_fit_a", finite_or_null(r.c_fit_a)},
                {"c_fit_b", finite_or_null(r.c_fit_b)}};
}

Json to_json(const PerturbationPoint& p) {
    return Json{{"eps", p.eps},
                {"c_dual", finite_or_null(p.c_dual)},
                {"c_dual_raw", finite_or_null(p.c_dual_raw)},
                {"c_fit", finite_or_null(p.c_fit)},
                {"pairing", finite_or_null(p.pairing)},
                {"berg_holds", p.berg_holds},
                {"violated_facet_1", p.violated_facet_1},
                {"violated_facet_4", p.violated_facet_4},
                {"sign_rule_ok", p.sign_rule_ok}};
}

Json to_json(const PerturbationStudy& s) {
    Json pts = Json::array();
    std::vector<double> eps;
    for (const auto& p : s.points) {
        pts.push_back(to_json(p));
        eps.push_back(p.eps);
    }
    return Json{{"outer", outer_name(s.outer)},
                {"a", s.a},
                {"b_star", s.b_star},
                {"eps_grid", numbers(eps)},
                {"baseline", to_json(s.baseline)},
                {"points", pts},
                {"c_over_eps", numbers(s.slope)},
                {"slope_estimate", finite_or_null(s.slope_estimate)},
                {"slope_variation", finite_or_null(s.slope_variation)},
                {"pairing_slope", finite_or_null(s.pairing_slope)},
                {"independent_limit", finite_or_null(s.independent_limit)},
                {"independent_limit_abs", finite_or_null(s.independent_limit_abs)},
                {"agreement", finite_or_null(s.agreement)}};
}

Json to_json(const ContinuityResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) rows.push_back(Json{{"eps", row.eps}, {"deviation", row.deviation}});
    return Json{{"rows", rows},
                {"sup_reference", r.sup_reference},
                {"floor", r.floor},
                {"samples", r.samples},
                {"monotone", r.monotone}};
}

Json to_json(const SweepRow& r) {
    return Json{{"ratio", r.ratio},
                {"b_star_dual", finite_or_null(r.b_star_dual)},
                {"b_star_fit", finite_or_null(r.b_star_fit)},
                {"transposed_inverse", finite_or_null(r.transposed_inverse)}};
}

Json to_json(const ConvergenceResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(Json{{"level", row.level},
                            {"h", row.h},
                            {"value", finite_or_null(row.value)},
                            {"order", finite_or_null(row.order)}});
    return Json{{"case", to_string(r.kind)}, {"rows", rows}, {"fitted_order", finite_or_null(r.fitted_order)}};
}

Json to_json(const EquivalenceSweep& s) {
    Json pts = Json::array();
    for (const auto& p : s.points)
        pts.push_back(Json{{"factor", p.factor},
                           {"b", p.b},
                           {"c_dual", p.c_dual},
                           {"margin", finite_or_null(p.margin)},
                           {"berg_holds", p.berg_holds},
                           {"violated_facet_1", p.violated_facet_1},
                           {"violated_facet_4", p.violated_facet_4},
                           {"sign_rule_ok", p.sign_rule_ok},
                           {"below_threshold", p.below_threshold}});
    return Json{{"b_star", s.b_star}, {"c_threshold", s.c_threshold}, {"consistent", s.consistent()}, {"points", pts}};
}

Json to_json(const LevelSet& ls) {
    Json comps = Json::array();
    for (const auto& c : ls.components)
        comps.push_back(Json{{"points", c.points.size()},
                             {"closed", c.closed},
                             {"connects_corner_to_outer", c.connects_corner_to_outer()},
                             {"start", {c.start.p.x, c.start.p.y}},
                             {"end", {c.end.p.x, c.end.p.y}}});
    return Json{{"classification", to_string(ls.classification)},
                {"components", comps},
                {"positive_samples", ls.positive_samples},
                {"negative_samples", ls.negative_samples},
                {"offset", ls.offset}};
}

Json to_json(const DualStructure& d) {
    return Json{{"level_set", to_json(d.level_set)},
                {"connecting_components", d.connecting_components},
                {"alpha", d.alpha},
                {"beta", d.beta},
                {"l2_norm", d.l2_norm},
                {"symmetry_residual", d.symmetry_residual},
                {"negative_on_facet_1", d.negative_on_facet_1},
                {"positive_on_facet_4", d.positive_on_facet_4},
                {"passes", d.passes()}};
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!os) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

void write_line_plot_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                         const std::string& y_label, std::ostream& os) {
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (y0 < 0 && y1 > 0)
        os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
           << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << xv
           << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << yv
           << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
       << ")\" text-anchor=\"middle\" font-size=\"13\">" << y_label << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colours[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << L + 8 << "\" y=\"" << T + 16 + 14 * k << "\" font-size=\"12\" fill=\"" << c << "\">"
           << s.name << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace berglab
