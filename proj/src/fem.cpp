#include "berglab/fem.hpp"

#include "berglab/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace berglab {

namespace {

struct QuadPoint {
    double xi;
    double eta;
    double weight; ///< fraction of the triangle area
};

std::vector<QuadPoint> subdivided_rule(int n) {
    static constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                           {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                           {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    std::vector<QuadPoint> out;
    const double w = 1.0 / (3.0 * n * n);
    auto emit = [&](const std::array<std::array<double, 2>, 3>& v) {
        for (const auto& b : kBary) {
            const double xi = (b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0]) / n;
            const double eta = (b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1]) / n;
            out.push_back({xi, eta, w});
        }
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; i + j < n; ++j) {
            emit({{{double(i), double(j)}, {double(i + 1), double(j)}, {double(i), double(j + 1)}}});
            if (i + j < n - 1)
                emit({{{double(i + 1), double(j)}, {double(i + 1), double(j + 1)}, {double(i), double(j + 1)}}});
        }
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::array<Point2, 3> corners_of(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return {mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]};
}

} // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

double CsrMatrix::at(int i, int j) const {
    const auto first = col.begin() + row_ptr[i];
    const auto last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[it - col.begin()] : 0.0;
}

std::array<std::array<double, 3>, 3> element_stiffness(Point2 p0, Point2 p1, Point2 p2) {
    const std::array<Point2, 3> p{p0, p1, p2};
    const double area2 = cross(p1 - p0, p2 - p0);
    std::array<double, 3> bx{}, by{};
    for (int k = 0; k < 3; ++k) {
        const Point2 a = p[(k + 1) % 3];
        const Point2 b = p[(k + 2) % 3];
        bx[k] = a.y - b.y;
        by[k] = b.x - a.x;
    }
    std::array<std::array<double, 3>, 3> K{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) K[i][j] = (bx[i] * bx[j] + by[i] * by[j]) / (2.0 * area2);
    return K;
}

SparseSystem assemble(std::shared_ptr<const Mesh> mesh_ptr, const AssemblyOptions& options) {
    if (!mesh_ptr) throw InvalidArgument("assemble: null mesh");
    if (!std::isfinite(options.neumann.a) || !std::isfinite(options.neumann.b))
        throw InvalidArgument("assemble: Neumann data must be finite");
    if (options.source_subdivision < 1) throw InvalidArgument("assemble: source_subdivision must be >= 1");
    const Mesh& mesh = *mesh_ptr;
    const int n_nodes = static_cast<int>(mesh.nodes.size());

    SparseSystem sys;
    sys.mesh = mesh_ptr;
    sys.free_index.assign(n_nodes, -1);
    sys.pinned_values.assign(n_nodes, 0.0);
    for (int i = 0; i < n_nodes; ++i) {
        const bool pinned = options.dirichlet_everywhere ? mesh.node_tags[i].has_value() : mesh.is_dirichlet(i);
        if (pinned) {
            if (options.dirichlet_everywhere) sys.pinned_values[i] = options.dirichlet_everywhere(mesh.nodes[i]);
        } else {
            sys.free_index[i] = static_cast<int>(sys.free_nodes.size());
            sys.free_nodes.push_back(i);
        }
    }
    const int n = static_cast<int>(sys.free_nodes.size());

    std::vector<std::vector<int>> cols(n);
    for (const auto& t : mesh.triangles) {
        for (int a = 0; a < 3; ++a) {
            const int fi = sys.free_index[t[a]];
            if (fi < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int fj = sys.free_index[t[b]];
                if (fj >= 0) cols[fi].push_back(fj);
            }
        }
    }
    CsrMatrix& A = sys.matrix;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& c = cols[i];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        A.row_ptr[i + 1] = A.row_ptr[i] + static_cast<int>(c.size());
    }
    A.col.reserve(A.row_ptr[n]);
    for (auto& c : cols) {
        A.col.insert(A.col.end(), c.begin(), c.end());
        std::vector<int>().swap(c);
    }
    A.val.assign(A.col.size(), 0.0);
    sys.rhs.assign(n, 0.0);

    auto slot = [&](int i, int j) {
        const auto first = A.col.begin() + A.row_ptr[i];
        const auto last = A.col.begin() + A.row_ptr[i + 1];
        return static_cast<std::size_t>(std::lower_bound(first, last, j) - A.col.begin());
    };

    for (const auto& t : mesh.triangles) {
        const auto K = element_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
        for (int a = 0; a < 3; ++a) {
            const int fi = sys.free_index[t[a]];
            if (fi < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const int fj = sys.free_index[t[b]];
                if (fj >= 0) A.val[slot(fi, fj)] += K[a][b];
                else sys.rhs[fi] -= K[a][b] * sys.pinned_values[t[b]];
            }
        }
    }

    for (const auto& e : mesh.boundary_edges) {
        if (e.label.kind != BoundaryKind::InnerFacet) continue;
        const double g = (e.label.index == 1 || e.label.index == 3) ? options.neumann.a : options.neumann.b;
        if (g == 0.0) continue;
        const double half = 0.5 * g * distance(mesh.nodes[e.a], mesh.nodes[e.b]);
        for (int v : {e.a, e.b})
            if (sys.free_index[v] >= 0) sys.rhs[sys.free_index[v]] += half;
    }

    if (options.volume_source) {
        const auto rule = subdivided_rule(options.source_subdivision);
        for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
            const auto& t = mesh.triangles[ti];
            const auto p = corners_of(mesh, static_cast<int>(ti));
            const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
            std::array<double, 3> load{};
            for (const auto& q : rule) {
                const Point2 x = p[0] + q.xi * (p[1] - p[0]) + q.eta * (p[2] - p[0]);
                const double f = options.volume_source(x) * q.weight * area;
                if (f == 0.0) continue;
                load[0] += f * (1.0 - q.xi - q.eta);
                load[1] += f * q.xi;
                load[2] += f * q.eta;
            }
            for (int a = 0; a < 3; ++a)
                if (sys.free_index[t[a]] >= 0) sys.rhs[sys.free_index[t[a]]] += load[a];
        }
    }
    return sys;
}

SparseSystem assemble(std::shared_ptr<const Mesh> mesh, NeumannData neumann, ScalarFunction volume_source) {
    AssemblyOptions opt;
    opt.neumann = neumann;
    opt.volume_source = std::move(volume_source);
    return assemble(std::move(mesh), opt);
}

FemField solve(const SparseSystem& system, const SolverOptions& options, SolveInfo* info) {
    const CsrMatrix& A = system.matrix;
    const int n = A.n;
    std::vector<double> x(n, 0.0);
    auto finish = [&](int iters, double res) {
        if (info) *info = {iters, res};
        std::vector<double> values = system.pinned_values;
        for (int i = 0; i < n; ++i) values[system.free_nodes[i]] = x[i];
        return FemField(system.mesh, std::move(values));
    };

    const double bnorm = std::sqrt(dot(system.rhs, system.rhs));
    if (bnorm == 0.0) return finish(0, 0.0);

    std::vector<double> inv_diag(n);
    for (int i = 0; i < n; ++i) {
        const double d = A.at(i, i);
        if (!(d > 0.0)) throw SolverError("non-positive diagonal entry in stiffness matrix", 0, 1.0);
        inv_diag[i] = 1.0 / d;
    }

    std::vector<double> r = system.rhs, z(n), p(n), Ap(n);
    int iter = 0;
    double res = 1.0;
    while (iter < options.max_iter) {
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        while (iter < options.max_iter) {
            A.multiply(p, Ap);
            const double alpha = rz / dot(p, Ap);
            for (int i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * Ap[i];
            }
            ++iter;
            res = std::sqrt(dot(r, r)) / bnorm;
            if (res <= options.tol_rel) break;
            for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        // The recursive residual drifts; confirm with the true one and restart if needed.
        A.multiply(x, Ap);
        for (int i = 0; i < n; ++i) r[i] = system.rhs[i] - Ap[i];
        res = std::sqrt(dot(r, r)) / bnorm;
        if (res <= options.tol_rel) return finish(iter, res);
    }
    throw SolverError("conjugate gradients did not converge", iter, res);
}

double relative_residual(const SparseSystem& system, const FemField& field) {
    const int n = system.matrix.n;
    std::vector<double> x(n), Ax(n);
    for (int i = 0; i < n; ++i) x[i] = field.value(system.free_nodes[i]);
    system.matrix.multiply(x, Ax);
    double rr = 0.0;
    for (int i = 0; i < n; ++i) rr += (system.rhs[i] - Ax[i]) * (system.rhs[i] - Ax[i]);
    const double bnorm = std::sqrt(dot(system.rhs, system.rhs));
    return bnorm > 0.0 ? std::sqrt(rr) / bnorm : std::sqrt(rr);
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
    double xmin = mesh.nodes[0].x, xmax = xmin, ymin = mesh.nodes[0].y, ymax = ymin;
    for (const auto& p : mesh.nodes) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const int side = std::max(1, static_cast<int>(std::sqrt(mesh.triangles.size() / 2.0)));
    nx_ = ny_ = side;
    x0_ = xmin;
    y0_ = ymin;
    dx_ = (xmax - xmin) / nx_;
    dy_ = (ymax - ymin) / ny_;
    auto cell_range = [&](int t) {
        const auto p = corners_of(mesh, t);
        auto cx = [&](double x) { return std::clamp(static_cast<int>((x - x0_) / dx_), 0, nx_ - 1); };
        auto cy = [&](double y) { return std::clamp(static_cast<int>((y - y0_) / dy_), 0, ny_ - 1); };
        return std::array<int, 4>{cx(std::min({p[0].x, p[1].x, p[2].x})), cx(std::max({p[0].x, p[1].x, p[2].x})),
                                  cy(std::min({p[0].y, p[1].y, p[2].y})), cy(std::max({p[0].y, p[1].y, p[2].y}))};
    };
    std::vector<int> count(nx_ * ny_ + 1, 0);
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto r = cell_range(t);
        for (int j = r[2]; j <= r[3]; ++j)
            for (int i = r[0]; i <= r[1]; ++i) ++count[j * nx_ + i + 1];
    }
    for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
    start_ = count;
    items_.resize(count.back());
    for (int t = 0; t < nt; ++t) {
        const auto r = cell_range(t);
        for (int j = r[2]; j <= r[3]; ++j)
            for (int i = r[0]; i <= r[1]; ++i) items_[count[j * nx_ + i]++] = t;
    }
}

std::array<double, 3> PointLocator::barycentric(int t, Point2 p) const {
    const auto v = corners_of(*mesh_, t);
    const double det = cross(v[1] - v[0], v[2] - v[0]);
    const double l1 = cross(p - v[0], v[2] - v[0]) / det;
    const double l2 = cross(v[1] - v[0], p - v[0]) / det;
    return {1.0 - l1 - l2, l1, l2};
}

int PointLocator::find(Point2 p) const {
    if (!(std::isfinite(p.x) && std::isfinite(p.y))) return -1;
    const double fx = (p.x - x0_) / dx_;
    const double fy = (p.y - y0_) / dy_;
    if (fx < -1e-9 || fy < -1e-9 || fx > nx_ + 1e-9 || fy > ny_ + 1e-9) return -1;
    const int i = std::clamp(static_cast<int>(fx), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(fy), 0, ny_ - 1);
    const int cell = j * nx_ + i;
    for (int k = start_[cell]; k < start_[cell + 1]; ++k) {
        const int t = items_[k];
        const auto l = barycentric(t, p);
        if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return t;
    }
    return -1;
}

FemField::FemField(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw InvalidArgument("FemField: null mesh");
    if (values_.size() != mesh_->nodes.size()) throw InvalidArgument("FemField: value count does not match mesh");
}

FemField::FemField(std::shared_ptr<const Mesh> mesh, const ScalarFunction& f) : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidArgument("FemField: null mesh");
    values_.reserve(mesh_->nodes.size());
    for (const auto& p : mesh_->nodes) values_.push_back(f(p));
}

int FemField::locate(Point2 p) const {
    if (!locator_) locator_ = std::make_shared<const PointLocator>(*mesh_);
    const int t = locator_->find(p);
    if (t < 0) throw GeometryError("point outside mesh");
    return t;
}

double FemField::eval(Point2 p) const {
    const int t = locate(p);
    const auto l = locator_->barycentric(t, p);
    const auto& tri = mesh_->triangles[t];
    return l[0] * values_[tri[0]] + l[1] * values_[tri[1]] + l[2] * values_[tri[2]];
}

Point2 FemField::triangle_gradient(int t) const {
    const auto& tri = mesh_->triangles[t];
    const auto v = corners_of(*mesh_, t);
    const Point2 e1 = v[1] - v[0];
    const Point2 e2 = v[2] - v[0];
    const double det = cross(e1, e2);
    const double d1 = values_[tri[1]] - values_[tri[0]];
    const double d2 = values_[tri[2]] - values_[tri[0]];
    return {(d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det};
}

Point2 FemField::eval_grad(Point2 p) const { return triangle_gradient(locate(p)); }

FemField FemField::operator+(const FemField& other) const {
    if (other.mesh_ != mesh_) throw InvalidArgument("FemField: fields live on different meshes");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
    FemField out(mesh_, std::move(v));
    out.locator_ = locator_;
    return out;
}

FemField FemField::scaled(double s) const {
    std::vector<double> v(values_);
    for (auto& x : v) x *= s;
    FemField out(mesh_, std::move(v));
    out.locator_ = locator_;
    return out;
}

std::vector<TraceSample> facet_trace(const FemField& field, const BoundaryLabel& facet, int n_samples) {
    if (n_samples < 3) throw InvalidArgument("facet_trace: n_samples must be >= 3");
    const Segment seg = facet_segment(field.mesh().domain, facet);
    const double len = seg.length();
    std::vector<TraceSample> out;
    out.reserve(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double s = (k + 0.5) * len / n_samples;
        const Point2 p = seg.at(s);
        out.push_back({s, p, field.eval(p)});
    }
    return out;
}

std::vector<LineSample> second_derivative_on_symmetry_line(const FemField& field, double y_lo, double y_hi,
                                                           int n) {
    if (n < 5) throw InvalidArgument("second_derivative_on_symmetry_line: n must be >= 5");
    if (!(y_lo < y_hi)) throw InvalidArgument("second_derivative_on_symmetry_line: empty range");
    const Mesh& mesh = field.mesh();
    const double tol = 1e-12 * (y_hi - y_lo);
    std::vector<int> idx;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Point2 p = mesh.nodes[i];
        if (p.x == 0.0 && p.y >= y_lo - tol && p.y <= y_hi + tol) idx.push_back(static_cast<int>(i));
    }
    if (idx.size() < 4) throw GeometryError("too few mesh nodes on the symmetry line");
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return mesh.nodes[a].y < mesh.nodes[b].y; });

    const std::size_t m = idx.size();
    std::vector<double> y(m), d2(m);
    for (std::size_t k = 0; k < m; ++k) y[k] = mesh.nodes[idx[k]].y;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        const double h1 = y[k] - y[k - 1];
        const double h2 = y[k + 1] - y[k];
        const double u0 = field.value(idx[k - 1]);
        const double u1 = field.value(idx[k]);
        const double u2 = field.value(idx[k + 1]);
        d2[k] = 2.0 * (u2 * h1 - u1 * (h1 + h2) + u0 * h2) / (h1 * h2 * (h1 + h2));
    }
    auto extrapolate = [&](std::size_t end, std::size_t a, std::size_t b) {
        return d2[a] + (d2[b] - d2[a]) * (y[end] - y[a]) / (y[b] - y[a]);
    };
    d2[0] = extrapolate(0, 1, 2);
    d2[m - 1] = extrapolate(m - 1, m - 2, m - 3);

    std::vector<LineSample> out;
    out.reserve(n);
    const double dy = (y_hi - y_lo) / n;
    std::size_t k = 0;
    for (int s = 0; s < n; ++s) {
        const double ys = y_lo + (s + 0.5) * dy;
        while (k + 2 < m && y[k + 1] < ys) ++k;
        const double t = std::clamp((ys - y[k]) / (y[k + 1] - y[k]), 0.0, 1.0);
        const double uyy = d2[k] + t * (d2[k + 1] - d2[k]);
        out.push_back({ys, -uyy});
    }
    return out;
}

double l2_inner(const FemField& f, const FemField& g) {
    if (&f.mesh() != &g.mesh()) throw InvalidArgument("l2_inner: fields live on different meshes");
    const Mesh& mesh = f.mesh();
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = triangle_area(mesh, static_cast<int>(t));
        double local = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                local += f.value(tri[i]) * g.value(tri[j]) * (i == j ? 2.0 : 1.0);
        s += local * area / 12.0;
    }
    return s;
}

double l2_norm(const FemField& field) { return std::sqrt(l2_inner(field, field)); }

double l2_inner(const FemField& f, const ScalarFunction& g) {
    static constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                           {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                           {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    const Mesh& mesh = f.mesh();
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto p = corners_of(mesh, static_cast<int>(t));
        const double area = triangle_area(mesh, static_cast<int>(t));
        for (const auto& b : kBary) {
            const Point2 x = b[0] * p[0] + b[1] * p[1] + b[2] * p[2];
            const double uh = b[0] * f.value(tri[0]) + b[1] * f.value(tri[1]) + b[2] * f.value(tri[2]);
            s += uh * g(x) * area / 3.0;
        }
    }
    return s;
}

double energy(const FemField& field) {
    const Mesh& mesh = field.mesh();
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Point2 g = field.triangle_gradient(static_cast<int>(t));
        s += dot(g, g) * triangle_area(mesh, static_cast<int>(t));
    }
    return s;
}

double energy_error(const FemField& field, const VectorFunction& exact_grad) {
    static constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6},
                                           {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                           {1.0 / 6, 1.0 / 6, 2.0 / 3}};
    const Mesh& mesh = field.mesh();
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Point2 g = field.triangle_gradient(static_cast<int>(t));
        const auto p = corners_of(mesh, static_cast<int>(t));
        const double area = triangle_area(mesh, static_cast<int>(t));
        for (const auto& b : kBary) {
            const Point2 d = g - exact_grad(b[0] * p[0] + b[1] * p[1] + b[2] * p[2]);
            s += dot(d, d) * area / 3.0;
        }
    }
    return std::sqrt(s);
}

double neumann_pairing(const FemField& field, NeumannData data) {
    const Mesh& mesh = field.mesh();
    double s = 0.0;
    for (const auto& e : mesh.boundary_edges) {
        if (e.label.kind != BoundaryKind::InnerFacet) continue;
        const double g = (e.label.index == 1 || e.label.index == 3) ? data.a : data.b;
        s += g * distance(mesh.nodes[e.a], mesh.nodes[e.b]) * 0.5 * (field.value(e.a) + field.value(e.b));
    }
    return s;
}

double symmetry_residual(const Mesh& mesh, std::span<const double> values) {
    if (values.size() != mesh.nodes.size()) throw InvalidArgument("symmetry_residual: size mismatch");
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) continue;
        scale = std::max(scale, std::abs(values[i]));
        for (int m : {mesh.mirror_x[i], mesh.mirror_y[i]})
            if (std::isfinite(values[m])) diff = std::max(diff, std::abs(values[i] - values[m]));
    }
    return scale > 0.0 ? diff / scale : 0.0;
}

void write_field_csv(const FemField& field, std::ostream& os) {
    os << "x,y,value\n" << std::setprecision(17);
    const Mesh& mesh = field.mesh();
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        os << mesh.nodes[i].x << ',' << mesh.nodes[i].y << ',' << field.value(static_cast<int>(i)) << '\n';
}

void write_trace_csv(std::span<const TraceSample> trace, std::ostream& os) {
    os << "s,value\n" << std::setprecision(17);
    for (const auto& t : trace) os << t.s << ',' << t.value << '\n';
}

} // namespace berglab
