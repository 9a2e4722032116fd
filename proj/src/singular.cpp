#include "berglab/singular.hpp"

#include "berglab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

namespace berglab {

namespace {

constexpr double kPi = std::numbers::pi;

struct QuadPoint {
    double xi;
    double eta;
    double weight;
};

std::vector<QuadPoint> triangle_rule(int n) {
    static constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                           {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                           {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    std::vector<QuadPoint> out;
    const double w = 1.0 / (3.0 * n * n);
    auto emit = [&](double x0, double y0, double x1, double y1, double x2, double y2) {
        for (const auto& b : kBary)
            out.push_back({(b[0] * x0 + b[1] * x1 + b[2] * x2) / n, (b[0] * y0 + b[1] * y1 + b[2] * y2) / n, w});
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; i + j < n; ++j) {
            emit(i, j, i + 1, j, i, j + 1);
            if (i + j < n - 1) emit(i + 1, j, i + 1, j + 1, i, j + 1);
        }
    }
    return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1], five points.
constexpr std::array<double, 5> kGaussX{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};

double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }

/// Laplacian of cutoff(rho) * rho^(-2/3) cos(2 theta / 3) in the transition annulus.
double laplacian_of_cut_mode(double rho, double theta, double delta) {
    const double c = std::cos(2.0 * theta / 3.0);
    const double s = std::pow(rho, -2.0 / 3.0) * c;
    const double ds = (-2.0 / 3.0) * std::pow(rho, -5.0 / 3.0) * c;
    const double d1 = cutoff_derivative(rho, delta);
    const double d2 = cutoff_second_derivative(rho, delta);
    return s * (d2 + d1 / rho) + 2.0 * d1 * ds;
}

double cut_modes(const DomainSpec& domain, double kappa, double delta, Point2 p) {
    double v = 0.0;
    for (int i = 1; i <= 4; ++i) {
        const CornerFrame f = corner_frame(domain, i);
        const double rho = f.rho(p);
        if (rho >= delta) continue;
        if (rho == 0.0) throw GeometryError("singular point");
        v += cutoff(rho, delta) * std::pow(rho, -2.0 / 3.0) * std::cos(2.0 * f.theta(p) / 3.0);
    }
    return kappa * v;
}

/// Integral of (kappa * cut modes + w_h)^2 over the mesh.
double dual_square_integral(const DomainSpec& domain, const Mesh& mesh, double kappa, double delta,
                            const std::vector<double>& w) {
    static const auto rule = triangle_rule(4);
    std::array<Point2, 4> corners;
    for (int i = 1; i <= 4; ++i) corners[i - 1] = domain.inner_corner(i);
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Point2 p0 = mesh.nodes[tri[0]];
        const Point2 e1 = mesh.nodes[tri[1]] - p0;
        const Point2 e2 = mesh.nodes[tri[2]] - p0;
        const double area = 0.5 * cross(e1, e2);
        const double diam = std::max({norm(e1), norm(e2), norm(e2 - e1)});
        bool near = false;
        for (const auto& c : corners) near = near || distance(p0, c) < delta + diam;
        const double w0 = w[tri[0]], w1 = w[tri[1]], w2 = w[tri[2]];
        if (!near) {
            total += area / 6.0 * (w0 * w0 + w1 * w1 + w2 * w2 + w0 * w1 + w1 * w2 + w2 * w0);
            continue;
        }
        for (const auto& q : rule) {
            const Point2 x = p0 + q.xi * e1 + q.eta * e2;
            const double v = cut_modes(domain, kappa, delta, x) + (1.0 - q.xi - q.eta) * w0 + q.xi * w1 + q.eta * w2;
            total += v * v * q.weight * area;
        }
    }
    return total;
}

/// Integral of cutoff(rho) * rho^(-2/3) over [0, delta].
double cut_mode_line_integral(double delta) {
    const double half = 0.5 * delta;
    double s = 3.0 * std::cbrt(half);
    constexpr int panels = 16;
    const double h = half / panels;
    for (int k = 0; k < panels; ++k) {
        const double mid = half + (k + 0.5) * h;
        for (int g = 0; g < 5; ++g) {
            const double r = mid + 0.5 * h * kGaussX[g];
            s += 0.5 * h * kGaussW[g] * cutoff(r, delta) * std::pow(r, -2.0 / 3.0);
        }
    }
    return s;
}

} // namespace

CornerMode primal_mode(int corner_index, int k) {
    if (corner_index < 1 || corner_index > 4) throw InvalidArgument("corner index must be in 1..4");
    if (k < 1) throw InvalidArgument("primal mode index must be >= 1");
    return {corner_index, 2.0 * k / 3.0, k};
}

CornerMode dual_mode(int corner_index) {
    if (corner_index < 1 || corner_index > 4) throw InvalidArgument("corner index must be in 1..4");
    return {corner_index, -2.0 / 3.0, 1};
}

double eval_mode(const CornerMode& mode, const CornerFrame& frame, Point2 p) {
    const double rho = frame.rho(p);
    if (rho == 0.0) {
        if (mode.exponent < 0.0) throw GeometryError("singular point");
        return mode.exponent == 0.0 ? 1.0 : 0.0;
    }
    return std::pow(rho, mode.exponent) * std::cos(2.0 * mode.k * frame.theta(p) / 3.0);
}

Point2 eval_mode_grad(const CornerMode& mode, const CornerFrame& frame, Point2 p) {
    const double rho = frame.rho(p);
    if (rho == 0.0) throw GeometryError("singular point");
    const double theta = frame.theta(p);
    const double w = 2.0 * mode.k / 3.0;
    const double rp = std::pow(rho, mode.exponent - 1.0);
    const double d_rho = mode.exponent * rp * std::cos(w * theta);
    const double d_theta = -w * rp * std::sin(w * theta);
    return d_rho * frame.e_rho(theta) + d_theta * frame.e_theta(theta);
}

double cutoff(double rho, double delta_c) {
    if (!(delta_c > 0.0)) throw InvalidArgument("cutoff radius must be positive");
    const double half = 0.5 * delta_c;
    if (rho <= half) return 1.0;
    if (rho >= delta_c) return 0.0;
    return 1.0 - smoothstep((rho - half) / half);
}

double cutoff_derivative(double rho, double delta_c) {
    const double half = 0.5 * delta_c;
    if (rho <= half || rho >= delta_c) return 0.0;
    const double t = (rho - half) / half;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / half;
}

double cutoff_second_derivative(double rho, double delta_c) {
    const double half = 0.5 * delta_c;
    if (rho <= half || rho >= delta_c) return 0.0;
    const double t = (rho - half) / half;
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (half * half);
}

double default_cutoff_radius(const DomainSpec& domain) {
    const double frame = (domain.lambda0() - 1.0) * std::min(domain.r1(), domain.r2());
    return 0.4 * std::min({domain.inner_hx(), domain.inner_hy(), frame});
}

DualSingularSolution::DualSingularSolution(DomainSpec domain, FemField correction, double kappa,
                                           double cutoff_radius, double normalization)
    : domain_(std::move(domain)), correction_(std::move(correction)), kappa_(kappa),
      cutoff_radius_(cutoff_radius), normalization_(normalization) {}

double DualSingularSolution::singular_part(Point2 p) const {
    return cut_modes(domain_, kappa_, cutoff_radius_, p);
}

double DualSingularSolution::eval(Point2 p) const { return singular_part(p) + correction_.eval(p); }

std::vector<double> DualSingularSolution::nodal_values() const {
    const Mesh& m = mesh();
    std::vector<double> out(m.nodes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& tag = m.node_tags[i];
        if (tag && tag->kind == BoundaryKind::InnerCorner) {
            out[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        out[i] = singular_part(m.nodes[i]) + correction_.value(static_cast<int>(i));
    }
    return out;
}

double DualSingularSolution::l2_norm() const {
    return std::sqrt(dual_square_integral(domain_, mesh(), kappa_, cutoff_radius_, correction_.values()));
}

DualSingularSolution build_dual_solution(const DomainSpec& domain, std::shared_ptr<const Mesh> mesh,
                                         const DualOptions& options) {
    const double delta = options.cutoff_radius > 0.0 ? options.cutoff_radius : default_cutoff_radius(domain);
    const double limit = std::min({domain.inner_hx(), domain.inner_hy(),
                                   (domain.lambda0() - 1.0) * std::min(domain.r1(), domain.r2())});
    if (!(delta < limit)) throw InvalidArgument("cutoff radius must be smaller than every facet half length and the frame width");

    constexpr double kappa0 = -1.0;
    std::array<CornerFrame, 4> frames;
    for (int i = 1; i <= 4; ++i) frames[i - 1] = corner_frame(domain, i);

    AssemblyOptions opt;
    opt.source_subdivision = options.source_subdivision;
    opt.volume_source = [&frames, delta](Point2 p) {
        double f = 0.0;
        for (const auto& fr : frames) {
            const double rho = fr.rho(p);
            if (rho <= 0.5 * delta || rho >= delta) continue;
            f += laplacian_of_cut_mode(rho, fr.theta(p), delta);
        }
        return kappa0 * f;
    };
    const SparseSystem sys = assemble(mesh, opt);
    const FemField w = solve(sys, options.solver);

    const double norm = std::sqrt(dual_square_integral(domain, *mesh, kappa0, delta, w.values()));
    double kappa = kappa0 / norm;
    double scale = 1.0 / norm;
    const Point2 mid{0.0, domain.inner_hy()};
    const double mid_value = cut_modes(domain, kappa, delta, mid) + scale * w.eval(mid);
    if (mid_value > 0.0) {
        kappa = -kappa;
        scale = -scale;
    }
    return DualSingularSolution(domain, w.scaled(scale), kappa, delta, norm);
}

double facet_integral_of_dual(const DualSingularSolution& dual, const BoundaryLabel& facet) {
    if (facet.kind != BoundaryKind::InnerFacet)
        throw InvalidArgument("facet_integral_of_dual: " + to_string(facet) + " is not an inner facet");
    // cos(2 theta / 3) is +1 on horizontal facets (theta = 0) and -1 on vertical ones (theta = 3 pi / 2).
    const double angular = (facet.index == 1 || facet.index == 3) ? 1.0 : -1.0;
    const double singular = 2.0 * dual.kappa() * angular * cut_mode_line_integral(dual.cutoff_radius());

    const Mesh& mesh = dual.mesh();
    const auto nodes = facet_nodes(mesh, facet);
    const auto& w = dual.correction();
    double regular = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double len = distance(mesh.nodes[nodes[k]], mesh.nodes[nodes[k + 1]]);
        regular += 0.5 * len * (w.value(nodes[k]) + w.value(nodes[k + 1]));
    }
    return singular + regular;
}

double extract_coefficient_dual(const DomainSpec& /*domain*/, const DualSingularSolution& dual, double a,
                                double b) {
    if (a == 0.0 && b == 0.0) return 0.0;
    const double alpha = facet_integral_of_dual(dual, {BoundaryKind::InnerFacet, 1});
    const double beta = facet_integral_of_dual(dual, {BoundaryKind::InnerFacet, 4});
    return -2.0 * a * alpha - 2.0 * b * beta;
}

double mode_coefficient_from_dual(const DualSingularSolution& dual, double a, double b) {
    return -extract_coefficient_dual(dual.domain(), dual, a, b) / (4.0 * kPi * dual.kappa());
}

FitRing default_fit_ring(const Mesh& mesh, double cutoff_radius, int corner) {
    FitRing r;
    r.rho_max = 0.5 * cutoff_radius;
    r.rho_min = std::max(4.0 * corner_local_h(mesh, corner), r.rho_max / 50.0);
    return r;
}

FitResult extract_coefficient_fit(const FemField& field, const DomainSpec& domain, int corner, FitRing ring,
                                  double a, double b) {
    const Mesh& mesh = field.mesh();
    const auto nodes = corner_ring_nodes(mesh, corner, ring.rho_min, ring.rho_max);
    const int n = static_cast<int>(nodes.size());
    if (n < 30) throw FitError("fit ring holds fewer than 30 nodes");

    const CornerFrame fr = corner_frame(domain, corner);
    Eigen::MatrixXd B(n, 5);
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) {
        const Point2 p = mesh.nodes[nodes[k]];
        const double dx = p.x - fr.origin.x;
        const double dy = p.y - fr.origin.y;
        const double rho = fr.rho(p);
        const double theta = fr.theta(p);
        B(k, 0) = 1.0;
        B(k, 1) = dx;
        B(k, 2) = dy;
        B(k, 3) = std::pow(rho, 2.0 / 3.0) * std::cos(2.0 * theta / 3.0);
        B(k, 4) = std::pow(rho, 4.0 / 3.0) * std::cos(4.0 * theta / 3.0);
        // Linear part carrying the flux: u_x = -sx b, u_y = -sy a at the corner.
        const double linear = -fr.sx * b * dx - fr.sy * a * dy;
        v(k) = field.value(nodes[k]) - linear;
    }
    Eigen::VectorXd colnorm = B.colwise().norm().transpose();
    for (int j = 0; j < 5; ++j) B.col(j) /= colnorm(j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(4) > 0.0 ? (sv(0) / sv(4)) * (sv(0) / sv(4)) : std::numeric_limits<double>::infinity();
    if (!(cond <= 1e10)) throw FitError("ill-conditioned fit");
    const Eigen::VectorXd x = svd.solve(v);
    const double vn = v.norm();
    const double res = vn > 0.0 ? (v - B * x).norm() / vn : 0.0;
    return {x(3) / colnorm(3), res, n, cond};
}

SingularCoefficientReport coefficient_report(const FemField& field, const DualSingularSolution& dual, double a,
                                             double b) {
    SingularCoefficientReport r;
    r.c_dual_raw = extract_coefficient_dual(dual.domain(), dual, a, b);
    r.c_dual = mode_coefficient_from_dual(dual, a, b);
    const auto fit = extract_coefficient_fit(field, dual.domain(), 1,
                                             default_fit_ring(field.mesh(), dual.cutoff_radius(), 1), a, b);
    r.c_fit = fit.coefficient;
    r.fit_residual = fit.residual;
    r.mesh_level = field.mesh().level;
    return r;
}

std::string to_string(LevelSetClass c) {
    switch (c) {
    case LevelSetClass::A1: return "A1";
    case LevelSetClass::A2: return "A2";
    case LevelSetClass::A3: return "A3";
    }
    return "?";
}

bool LevelSetComponent::connects_corner_to_outer() const {
    if (closed) return false;
    return (start.near_corner() && end.near_outer()) || (end.near_corner() && start.near_outer());
}

LevelSet level_set(const DualSingularSolution& dual, const Mesh& mesh, double offset) {
    const DomainSpec& dom = dual.domain();
    if (offset <= 0.0) offset = 0.1 * (dom.lambda0() - 1.0);
    const std::vector<double> v = dual.nodal_values();
    const std::uint64_t stride = mesh.nodes.size();

    std::array<double, 4> corner_h{};
    std::vector<char> skip(mesh.nodes.size(), 0);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const auto& tag = mesh.node_tags[i];
        skip[i] = tag && tag->kind != BoundaryKind::InnerFacet;
    }
    auto max_edge = [&](const std::array<int, 3>& t) {
        return std::max({distance(mesh.nodes[t[0]], mesh.nodes[t[1]]), distance(mesh.nodes[t[1]], mesh.nodes[t[2]]),
                         distance(mesh.nodes[t[2]], mesh.nodes[t[0]])});
    };

    std::map<std::uint64_t, Point2> point;
    std::map<std::uint64_t, double> edge_h;
    std::map<std::uint64_t, std::vector<std::uint64_t>> adj;
    for (const auto& t : mesh.triangles) {
        bool touches = false;
        for (int k = 0; k < 3; ++k) {
            const auto& tag = mesh.node_tags[t[k]];
            if (tag && tag->kind == BoundaryKind::InnerCorner)
                corner_h[tag->index - 1] = std::max(corner_h[tag->index - 1], max_edge(t));
            touches = touches || skip[t[k]];
        }
        if (touches) continue;
        std::array<std::uint64_t, 2> hits{};
        int nh = 0;
        for (int k = 0; k < 3; ++k) {
            const int i = t[k];
            const int j = t[(k + 1) % 3];
            if ((v[i] > 0.0) == (v[j] > 0.0)) continue;
            const std::uint64_t key = static_cast<std::uint64_t>(std::min(i, j)) * stride + std::max(i, j);
            if (!point.count(key)) {
                const double s = v[i] / (v[i] - v[j]);
                point[key] = mesh.nodes[i] + s * (mesh.nodes[j] - mesh.nodes[i]);
            }
            edge_h[key] = std::max(edge_h[key], max_edge(t));
            hits[nh++] = key;
        }
        if (nh == 2) {
            adj[hits[0]].push_back(hits[1]);
            adj[hits[1]].push_back(hits[0]);
        }
    }

    auto describe = [&](std::uint64_t key) {
        LevelSetEnd e;
        e.p = point.at(key);
        e.local_h = edge_h.at(key);
        e.outer_distance = std::min(dom.outer_hx() - std::abs(e.p.x), dom.outer_hy() - std::abs(e.p.y));
        e.corner_distance = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 4; ++i) {
            const double d = distance(e.p, dom.inner_corner(i));
            if (d < e.corner_distance) {
                e.corner_distance = d;
                e.corner = i;
            }
        }
        e.corner_h = corner_h[e.corner - 1];
        return e;
    };

    LevelSet out;
    out.offset = offset;
    std::map<std::uint64_t, bool> visited;
    auto walk = [&](std::uint64_t first) {
        LevelSetComponent c;
        std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t cur = first;
        while (true) {
            visited[cur] = true;
            c.points.push_back(point.at(cur));
            std::uint64_t next = prev;
            for (auto nb : adj.at(cur))
                if (!visited[nb]) {
                    next = nb;
                    break;
                }
            if (next == prev) {
                c.closed = adj.at(cur).size() == 2 && cur != first;
                if (c.closed) c.points.push_back(point.at(first));
                c.start = describe(first);
                c.end = describe(cur);
                return c;
            }
            prev = cur;
            cur = next;
        }
    };
    for (const auto& [key, nbs] : adj)
        if (nbs.size() == 1 && !visited[key]) out.components.push_back(walk(key));
    for (const auto& [key, nbs] : adj)
        if (!visited[key]) out.components.push_back(walk(key));

    const double sx = (dom.lambda0() - offset) * dom.inner_hx();
    const double sy = (dom.lambda0() - offset) * dom.inner_hy();
    constexpr int per_side = 64;
    const std::array<Point2, 5> ring{Point2{sx, sy}, Point2{-sx, sy}, Point2{-sx, -sy}, Point2{sx, -sy}, Point2{sx, sy}};
    for (int side = 0; side < 4; ++side) {
        for (int k = 0; k < per_side; ++k) {
            const double t = static_cast<double>(k) / per_side;
            const double s = dual.eval(ring[side] + t * (ring[side + 1] - ring[side]));
            if (s > 0.0) ++out.positive_samples;
            else if (s < 0.0) ++out.negative_samples;
        }
    }
    if (out.negative_samples == 0 && out.positive_samples > 0) out.classification = LevelSetClass::A1;
    else if (out.positive_samples == 0 && out.negative_samples > 0) out.classification = LevelSetClass::A2;
    else out.classification = LevelSetClass::A3;
    return out;
}

void write_level_set_csv(const LevelSet& ls, std::ostream& os) {
    os << "component,x,y\n" << std::setprecision(17);
    for (std::size_t c = 0; c < ls.components.size(); ++c)
        for (const auto& p : ls.components[c].points) os << c << ',' << p.x << ',' << p.y << '\n';
}

void write_level_set_svg(const LevelSet& ls, const DomainSpec& domain, std::ostream& os) {
    const double w = domain.outer_hx();
    const double h = domain.outer_hy();
    const double px = 800.0 / (2.0 * std::max(w, h));
    auto X = [&](double x) { return (x + w) * px; };
    auto Y = [&](double y) { return (h - y) * px; };
    auto rect = [&](double hx, double hy, const char* color) {
        os << "<rect x=\"" << X(-hx) << "\" y=\"" << Y(hy) << "\" width=\"" << 2 * hx * px << "\" height=\""
           << 2 * hy * px << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    };
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w * px << "\" height=\"" << 2 * h * px
       << "\">\n";
    rect(domain.outer_hx(), domain.outer_hy(), "black");
    rect(domain.inner_hx(), domain.inner_hy(), "gray");
    for (const auto& c : ls.components) {
        os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : c.points) os << X(p.x) << ',' << Y(p.y) << ' ';
        os << "\"/>\n";
    }
    os << "<text x=\"10\" y=\"20\" font-size=\"16\">class " << to_string(ls.classification) << ", "
       << ls.components.size() << " components</text>\n</svg>\n";
}

} // namespace berglab
