#include "berglab/berg.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace berglab {

namespace {

double default_exclusion(const Mesh& mesh) {
    double h = 0.0;
    for (int i = 1; i <= 4; ++i) h = std::max(h, corner_local_h(mesh, i));
    return 3.0 * h;
}

struct FacetTrace {
    std::vector<double> coord;
    std::vector<double> value;
    double half_length = 0.0;
};

FacetTrace nodal_trace(const FemField& field, const DomainSpec& domain, int facet) {
    const Mesh& mesh = field.mesh();
    const auto nodes = facet_nodes(mesh, {BoundaryKind::InnerFacet, facet});
    const bool horizontal = facet == 1 || facet == 3;
    FacetTrace t;
    t.half_length = horizontal ? domain.inner_hx() : domain.inner_hy();
    for (int n : nodes) {
        t.coord.push_back(horizontal ? mesh.nodes[n].x : mesh.nodes[n].y);
        t.value.push_back(field.value(n));
    }
    return t;
}

} // namespace

bool BergReport::violated_on(int facet) const {
    return std::any_of(violations.begin(), violations.end(), [&](const BergViolation& v) { return v.facet == facet; });
}

BergReport check_berg(const FemField& field, const DomainSpec& domain, double a, double b,
                      const BergOptions& options) {
    if (options.tol_sign < 0.0) throw InvalidArgument("tol_sign must be >= 0");
    BergReport rep;
    rep.excluded_radius = options.r_excl > 0.0 ? options.r_excl : default_exclusion(field.mesh());
    rep.threshold = options.tol_sign * std::max(a, b);
    rep.margin = std::numeric_limits<double>::infinity();
    for (int facet : {1, 4}) {
        const FacetTrace t = nodal_trace(field, domain, facet);
        for (std::size_t k = 1; k + 1 < t.coord.size(); ++k) {
            const double d = (t.value[k + 1] - t.value[k - 1]) / (t.coord[k + 1] - t.coord[k - 1]);
            DerivativeSample s{facet, t.coord[k], t.coord[k] * d, false};
            s.excluded = t.half_length - std::abs(t.coord[k]) < rep.excluded_radius;
            rep.samples.push_back(s);
            if (s.excluded) continue;
            rep.margin = std::min(rep.margin, rep.threshold - s.value);
            if (s.value > rep.threshold) rep.violations.push_back({facet, s.coord, s.value});
        }
    }
    if (!std::isfinite(rep.margin)) rep.margin = 0.0;
    rep.holds = rep.violations.empty();
    rep.weak_berg_holds = check_weak_berg(field, domain, rep.excluded_radius);
    return rep;
}

bool check_weak_berg(const FemField& field, const DomainSpec& domain, double r_excl) {
    if (r_excl <= 0.0) r_excl = default_exclusion(field.mesh());
    for (int facet : {1, 4}) {
        const FacetTrace t = nodal_trace(field, domain, facet);
        std::vector<double> coord, value;
        for (std::size_t k = 0; k < t.coord.size(); ++k) {
            if (t.half_length - std::abs(t.coord[k]) < r_excl) continue;
            coord.push_back(t.coord[k]);
            value.push_back(t.value[k]);
        }
        if (value.size() < 3) continue;
        double scale = 0.0;
        for (double v : value) scale = std::max(scale, std::abs(v));
        const double tie = 1e-12 * scale;
        const auto centre = std::min_element(coord.begin(), coord.end(), [](double p, double q) {
                                return std::abs(p) < std::abs(q);
                            }) - coord.begin();
        const double vmax = *std::max_element(value.begin(), value.end());
        const double vmin = *std::min_element(value.begin(), value.end());
        if (value[centre] < vmax - tie) return false;
        if (value.front() > vmin + tie || value.back() > vmin + tie) return false;
    }
    return true;
}

double max_interior_ux(const FemField& field, int n) {
    const DomainSpec& dom = field.mesh().domain;
    const double hx = dom.outer_hx();
    const double hy = dom.outer_hy();
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Point2 p{(i + 0.5) * hx / n, -hy + (j + 0.5) * 2.0 * hy / n};
            if (!dom.contains(p, -1e-9 * hx)) continue;
            best = std::max(best, field.eval_grad(p).x);
        }
    }
    return best;
}

void write_berg_profile_csv(const BergReport& report, std::ostream& os) {
    os << "facet,coord,value,excluded\n" << std::setprecision(17);
    for (const auto& s : report.samples)
        os << s.facet << ',' << s.coord << ',' << s.value << ',' << (s.excluded ? 1 : 0) << '\n';
}

} // namespace berglab
