#include "berglab/mesh.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace berglab {

namespace {

int corner_index_from_signs(double x, double y) {
    if (x > 0.0) return y > 0.0 ? 1 : 4;
    return y > 0.0 ? 2 : 3;
}

double min_angle_of(Point2 a, Point2 b, Point2 c) {
    auto angle = [](Point2 p, Point2 q, Point2 r) {
        const Point2 u = q - p;
        const Point2 v = r - p;
        return std::atan2(std::abs(cross(u, v)), dot(u, v));
    };
    return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

/// Assigns node indices to exact coordinate pairs.
class NodeStore {
public:
    explicit NodeStore(std::vector<Point2>& nodes) : nodes_(nodes) {}

    int get(double x, double y) {
        x += 0.0; // folds -0.0 into +0.0
        y += 0.0;
        const auto [it, inserted] = index_.try_emplace({x, y}, static_cast<int>(nodes_.size()));
        if (inserted) nodes_.push_back({x, y});
        return it->second;
    }

    int find(double x, double y) const {
        const auto it = index_.find({x + 0.0, y + 0.0});
        return it == index_.end() ? -1 : it->second;
    }

private:
    std::vector<Point2>& nodes_;
    std::map<std::pair<double, double>, int> index_;
};

class TriangleSink {
public:
    TriangleSink(const std::vector<Point2>& nodes, std::vector<std::array<int, 3>>& tris)
        : nodes_(nodes), tris_(tris) {}

    void add(int a, int b, int c) {
        if (cross(nodes_[b] - nodes_[a], nodes_[c] - nodes_[a]) < 0.0) std::swap(b, c);
        tris_.push_back({a, b, c});
    }

    /// Quad a-b-c-d (cyclic); diagonal a-c when split_ac, else b-d.
    void quad(int a, int b, int c, int d, bool split_ac) {
        if (split_ac) {
            add(a, b, c);
            add(a, c, d);
        } else {
            add(a, b, d);
            add(b, c, d);
        }
    }

private:
    const std::vector<Point2>& nodes_;
    std::vector<std::array<int, 3>>& tris_;
};

/// Nonnegative half of a symmetric 1D grid: [0, inner] with n_mid/2 cells,
/// then [inner, outer] with n_side cells.
std::vector<double> half_grid(double inner, double outer, int half_mid, int n_side) {
    std::vector<double> g(half_mid + n_side + 1);
    for (int k = 0; k <= half_mid; ++k) g[k] = k == half_mid ? inner : inner * k / half_mid;
    for (int k = 1; k <= n_side; ++k)
        g[half_mid + k] = k == n_side ? outer : inner + (outer - inner) * k / n_side;
    return g;
}

std::vector<double> full_grid(const std::vector<double>& half) {
    const int n = static_cast<int>(half.size()) - 1;
    std::vector<double> g(2 * n + 1);
    for (int i = 0; i <= 2 * n; ++i) g[i] = i < n ? -half[n - i] : half[i - n];
    return g;
}

void finish_topology(Mesh& mesh) {
    const auto& dom = mesh.domain;
    mesh.node_tags.resize(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        mesh.node_tags[i] = exact_boundary_tag(dom, mesh.nodes[i]);

    std::map<std::pair<int, int>, int> edge_count;
    double h = 0.0;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k];
            const int b = t[(k + 1) % 3];
            ++edge_count[{std::min(a, b), std::max(a, b)}];
            h = std::max(h, distance(mesh.nodes[a], mesh.nodes[b]));
        }
    }
    mesh.h_max = h;
    mesh.boundary_edges.clear();
    for (const auto& [e, count] : edge_count) {
        if (count > 2) throw GeometryError("non-manifold edge in triangulation");
        if (count != 1) continue;
        const Point2 mid = 0.5 * (mesh.nodes[e.first] + mesh.nodes[e.second]);
        const auto label = exact_boundary_tag(dom, mid);
        if (!label || !label->is_facet())
            throw GeometryError("boundary edge does not lie on the domain boundary");
        mesh.boundary_edges.push_back({e.first, e.second, *label});
    }
}

} // namespace

std::optional<BoundaryLabel> exact_boundary_tag(const DomainSpec& domain, Point2 p) {
    const double ax = std::abs(p.x);
    const double ay = std::abs(p.y);
    const double x1 = domain.inner_hx();
    const double y1 = domain.inner_hy();
    const double x2 = domain.outer_hx();
    const double y2 = domain.outer_hy();
    if (ax == x1 && ay == y1) return BoundaryLabel{BoundaryKind::InnerCorner, corner_index_from_signs(p.x, p.y)};
    if (ax == x2 && ay == y2) return BoundaryLabel{BoundaryKind::OuterCorner, corner_index_from_signs(p.x, p.y)};
    if (ay == y1 && ax < x1) return BoundaryLabel{BoundaryKind::InnerFacet, p.y > 0.0 ? 1 : 3};
    if (ax == x1 && ay < y1) return BoundaryLabel{BoundaryKind::InnerFacet, p.x < 0.0 ? 2 : 4};
    if (ay == y2) return BoundaryLabel{BoundaryKind::OuterFacet, p.y > 0.0 ? 1 : 3};
    if (ax == x2) return BoundaryLabel{BoundaryKind::OuterFacet, p.x < 0.0 ? 2 : 4};
    return std::nullopt;
}

Mesh build_mesh(const DomainSpec& domain, const MeshParams& params) {
    if (params.n_base < 2) throw InvalidArgument("n_base must be >= 2");
    if (!(params.grading_ratio >= 1.0) || !std::isfinite(params.grading_ratio))
        throw InvalidArgument("grading_ratio must be >= 1");
    if (params.levels < 0) throw InvalidArgument("levels must be >= 0");
    if (!(params.corner_depth > 0.0 && params.corner_depth < 1.0))
        throw InvalidArgument("corner_depth must lie in (0, 1)");

    const double r1 = domain.r1();
    const double r2 = domain.r2();
    const double lam = domain.lambda0();
    const double x1 = domain.inner_hx();
    const double y1 = domain.inner_hy();
    const double x2 = domain.outer_hx();
    const double y2 = domain.outer_hy();

    // Cell counts depend on the unperturbed sizes only, so the topology does
    // not change with eps.
    const double h0 = (lam - 1.0) * std::min(r1, r2) / params.n_base;
    const int nxs = std::max(1, static_cast<int>(std::lround((lam - 1.0) * r1 / h0)));
    const int nys = std::max(1, static_cast<int>(std::lround((lam - 1.0) * r2 / h0)));
    const int hmx = std::max(2, static_cast<int>(std::lround(r1 / h0)));
    const int hmy = std::max(2, static_cast<int>(std::lround(r2 / h0)));

    int m = 0;
    double q = params.grading_ratio;
    if (q > 1.0) {
        m = std::max(1, static_cast<int>(std::lround(q / (q - 1.0))));
        m = std::min({m, nxs, nys, hmx - 1, hmy - 1});
        q = std::max(q, m == 1 ? 2.0 : static_cast<double>(m) / (m - 1));
    }
    const int bands = m > 0 ? static_cast<int>(std::ceil(std::log(1.0 / params.corner_depth) / std::log(q))) : 0;

    const std::vector<double> px = half_grid(x1, x2, hmx, nxs);
    const std::vector<double> py = half_grid(y1, y2, hmy, nys);
    const std::vector<double> xs = full_grid(px);
    const std::vector<double> ys = full_grid(py);
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    const int ix1 = nxs, ix2 = nxs + 2 * hmx;
    const int iy1 = nys, iy2 = nys + 2 * hmy;

    Mesh mesh{domain, {}, {}, {}, {}, {}, {}};
    mesh.grading = m > 0 ? q : 1.0;
    mesh.bands = bands;
    mesh.patch_cells = m;
    NodeStore store(mesh.nodes);
    TriangleSink sink(mesh.nodes, mesh.triangles);

    auto in_hole = [&](int i, int j) { return i >= ix1 && i < ix2 && j >= iy1 && j < iy2; };
    auto in_patch = [&](int i, int j) {
        if (m == 0) return false;
        for (int cx : {ix1, ix2})
            for (int cy : {iy1, iy2})
                if (i >= cx - m && i < cx + m && j >= cy - m && j < cy + m) return true;
        return false;
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (in_hole(i, j) || in_patch(i, j)) continue;
            const int a = store.get(xs[i], ys[j]);
            const int b = store.get(xs[i + 1], ys[j]);
            const int c = store.get(xs[i + 1], ys[j + 1]);
            const int d = store.get(xs[i], ys[j + 1]);
            const double xc = xs[i] + xs[i + 1];
            const double yc = ys[j] + ys[j + 1];
            sink.quad(a, b, c, d, (xc > 0.0) == (yc > 0.0));
        }
    }

    if (m > 0) {
        std::vector<double> scale(bands + 1);
        for (int k = 0; k <= bands; ++k) scale[k] = std::pow(q, -k);

        // Ring path around the corner in local integer offsets.
        std::vector<std::array<int, 2>> path;
        for (int t = 0; t <= m; ++t) path.push_back({-m, t});
        for (int t = 1; t <= 2 * m; ++t) path.push_back({-m + t, m});
        for (int t = 1; t <= 2 * m; ++t) path.push_back({m, m - t});
        for (int t = 1; t <= m; ++t) path.push_back({m - t, -m});
        const int segs = static_cast<int>(path.size()) - 1;

        // Diagonal of each ring segment, decided once on the reference band.
        std::vector<bool> ring_split_ac(segs);
        for (int s = 0; s < segs; ++s) {
            const Point2 o0{double(path[s][0]), double(path[s][1])};
            const Point2 o1{double(path[s + 1][0]), double(path[s + 1][1])};
            const Point2 i0 = (1.0 / q) * o0;
            const Point2 i1 = (1.0 / q) * o1;
            const double ac = std::min(min_angle_of(i0, i1, o1), min_angle_of(i0, o1, o0));
            const double bd = std::min(min_angle_of(i0, i1, o0), min_angle_of(i1, o1, o0));
            if (ac > bd + 1e-9) ring_split_ac[s] = true;
            else if (bd > ac + 1e-9) ring_split_ac[s] = false;
            else ring_split_ac[s] = 2 * s < segs;
        }

        for (int cj : {iy2, iy1}) {
            for (int ci : {ix2, ix1}) {
                const double sx = ci == ix2 ? 1.0 : -1.0;
                const double sy = cj == iy2 ? 1.0 : -1.0;
                auto node = [&](int iu, int iv, int band) {
                    if (band == 0) return store.get(sx * px[hmx + iu], sy * py[hmy + iv]);
                    const double u = (px[hmx + iu] - x1) * scale[band];
                    const double v = (py[hmy + iv] - y1) * scale[band];
                    return store.get(sx * (x1 + u), sy * (y1 + v));
                };
                for (int k = 0; k < bands; ++k) {
                    for (int s = 0; s < segs; ++s) {
                        const int a = node(path[s][0], path[s][1], k + 1);
                        const int b = node(path[s + 1][0], path[s + 1][1], k + 1);
                        const int c = node(path[s + 1][0], path[s + 1][1], k);
                        const int d = node(path[s][0], path[s][1], k);
                        sink.quad(a, b, c, d, ring_split_ac[s]);
                    }
                }
                for (int j = 0; j < 2 * m; ++j) {
                    for (int i = 0; i < 2 * m; ++i) {
                        if (i < m && j < m) continue;
                        const int a = node(i - m, j - m, bands);
                        const int b = node(i + 1 - m, j - m, bands);
                        const int c = node(i + 1 - m, j + 1 - m, bands);
                        const int d = node(i - m, j + 1 - m, bands);
                        sink.quad(a, b, c, d, (i >= m) == (j >= m));
                    }
                }
            }
        }
    }

    finish_topology(mesh);
    const std::size_t n = mesh.nodes.size();
    mesh.mirror_x.resize(n);
    mesh.mirror_y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = mesh.nodes[i];
        mesh.mirror_x[i] = store.find(-p.x, p.y);
        mesh.mirror_y[i] = store.find(p.x, -p.y);
        if (mesh.mirror_x[i] < 0 || mesh.mirror_y[i] < 0)
            throw GeometryError("mesh construction lost mirror symmetry");
    }

    for (int l = 0; l < params.levels; ++l) mesh = refine(mesh);
    return mesh;
}

Mesh build_mesh(const DomainSpec& domain, int n_base, double grading_ratio, int levels) {
    MeshParams p;
    p.n_base = n_base;
    p.grading_ratio = grading_ratio;
    p.levels = levels;
    return build_mesh(domain, p);
}

Mesh refine(const Mesh& mesh) {
    Mesh out{mesh.domain, mesh.nodes, {}, {}, {}, mesh.mirror_x, mesh.mirror_y};
    out.grading = mesh.grading;
    out.bands = mesh.bands;
    out.patch_cells = mesh.patch_cells;
    out.level = mesh.level + 1;

    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.triangles.size() * 2);
    const std::uint64_t stride = mesh.nodes.size();
    auto mid = [&](int a, int b) {
        const auto lo = static_cast<std::uint64_t>(std::min(a, b));
        const auto hi = static_cast<std::uint64_t>(std::max(a, b));
        const auto [it, inserted] = midpoint.try_emplace(lo * stride + hi, static_cast<int>(out.nodes.size()));
        if (inserted) out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
        return it->second;
    };

    out.triangles.reserve(4 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const int ab = mid(t[0], t[1]);
        const int bc = mid(t[1], t[2]);
        const int ca = mid(t[2], t[0]);
        out.triangles.push_back({t[0], ab, ca});
        out.triangles.push_back({ab, t[1], bc});
        out.triangles.push_back({ca, bc, t[2]});
        out.triangles.push_back({ab, bc, ca});
    }

    const std::size_t n = out.nodes.size();
    out.mirror_x.resize(n);
    out.mirror_y.resize(n);
    for (const auto& [key, idx] : midpoint) {
        const int a = static_cast<int>(key / stride);
        const int b = static_cast<int>(key % stride);
        auto image = [&](const std::vector<int>& m) {
            const auto lo = static_cast<std::uint64_t>(std::min(m[a], m[b]));
            const auto hi = static_cast<std::uint64_t>(std::max(m[a], m[b]));
            return midpoint.at(lo * stride + hi);
        };
        out.mirror_x[idx] = image(mesh.mirror_x);
        out.mirror_y[idx] = image(mesh.mirror_y);
    }
    finish_topology(out);
    return out;
}

std::vector<int> corner_ring_nodes(const Mesh& mesh, int i, double rho_min, double rho_max) {
    if (!(rho_min > 0.0 && rho_min < rho_max))
        throw InvalidArgument("corner_ring_nodes: need 0 < rho_min < rho_max");
    const Point2 s = mesh.domain.inner_corner(i);
    std::vector<int> out;
    for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
        const double r = distance(mesh.nodes[k], s);
        if (r >= rho_min && r <= rho_max) out.push_back(static_cast<int>(k));
    }
    if (out.empty()) throw GeometryError("empty ring");
    return out;
}

std::vector<int> facet_nodes(const Mesh& mesh, const BoundaryLabel& facet) {
    if (!facet.is_facet()) throw InvalidArgument("facet_nodes: " + to_string(facet) + " is not a facet");
    const bool inner = facet.kind == BoundaryKind::InnerFacet;
    const Segment seg = facet_segment(mesh.domain, facet);
    const bool horizontal = facet.index == 1 || facet.index == 3;
    const BoundaryKind corner_kind = inner ? BoundaryKind::InnerCorner : BoundaryKind::OuterCorner;
    std::vector<int> out;
    for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
        const auto& tag = mesh.node_tags[k];
        if (!tag) continue;
        if (*tag == facet) {
            out.push_back(static_cast<int>(k));
        } else if (tag->kind == corner_kind) {
            const Point2 p = mesh.nodes[k];
            if (p == seg.a || p == seg.b) out.push_back(static_cast<int>(k));
        }
    }
    std::sort(out.begin(), out.end(), [&](int a, int b) {
        return horizontal ? mesh.nodes[a].x < mesh.nodes[b].x : mesh.nodes[a].y < mesh.nodes[b].y;
    });
    return out;
}

double corner_local_h(const Mesh& mesh, int i) {
    const Point2 s = mesh.domain.inner_corner(i);
    double h = std::numeric_limits<double>::infinity();
    for (const auto& e : mesh.boundary_edges) {
        if (mesh.nodes[e.a] == s || mesh.nodes[e.b] == s)
            h = std::min(h, distance(mesh.nodes[e.a], mesh.nodes[e.b]));
    }
    if (!std::isfinite(h)) throw GeometryError("corner is not a mesh node");
    return h;
}

double facet_center_h(const Mesh& mesh, const BoundaryLabel& facet) {
    const Segment seg = facet_segment(mesh.domain, facet);
    const Point2 c = 0.5 * (seg.a + seg.b);
    double h = 0.0;
    for (const auto& e : mesh.boundary_edges) {
        if (!(e.label == facet)) continue;
        const Point2 pa = mesh.nodes[e.a];
        const Point2 pb = mesh.nodes[e.b];
        const double len = distance(pa, pb);
        if (distance(pa, c) <= len * (1.0 + 1e-12) && distance(pb, c) <= len * (1.0 + 1e-12))
            h = std::max(h, len);
    }
    return h;
}

double triangle_area(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Point2 a = mesh.nodes[tri[0]];
    return 0.5 * cross(mesh.nodes[tri[1]] - a, mesh.nodes[tri[2]] - a);
}

double total_area(const Mesh& mesh) {
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) s += triangle_area(mesh, static_cast<int>(t));
    return s;
}

double min_angle_degrees(const Mesh& mesh) {
    double best = std::numbers::pi;
    for (const auto& t : mesh.triangles)
        best = std::min(best, min_angle_of(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]));
    return best * 180.0 / std::numbers::pi;
}

void write_mesh_text(const Mesh& mesh, std::ostream& os) {
    os << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        os << "node " << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << ' ';
        os << (mesh.node_tags[i] ? to_string(*mesh.node_tags[i]) : std::string("-")) << '\n';
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        os << "tri " << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
}

void write_mesh_svg(const Mesh& mesh, std::ostream& os) {
    const double w = mesh.domain.outer_hx();
    const double h = mesh.domain.outer_hy();
    const double px = 800.0 / (2.0 * std::max(w, h));
    auto X = [&](double x) { return (x + w) * px; };
    auto Y = [&](double y) { return (h - y) * px; };
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w * px << "\" height=\"" << 2 * h * px
       << "\">\n<g fill=\"none\" stroke=\"black\" stroke-width=\"0.3\">\n";
    for (const auto& t : mesh.triangles) {
        os << "<polygon points=\"";
        for (int k = 0; k < 3; ++k) os << X(mesh.nodes[t[k]].x) << ',' << Y(mesh.nodes[t[k]].y) << ' ';
        os << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
}

} // namespace berglab
