#pragma once

#include "berglab/geometry.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace berglab {

/// Parameters of the structured corner-graded triangulation.
struct MeshParams {
    int n_base = 4;              ///< cells across the frame width (lambda0-1)*min(r1,r2)
    double grading_ratio = 1.2;  ///< ratio between consecutive corner bands; 1 disables grading
    int levels = 0;              ///< uniform refinements applied after construction
    double corner_depth = 1e-10; ///< innermost band scale relative to the corner patch size
};

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryLabel label;
};

/// Conforming triangulation of a rectangular annulus.
///
/// Triangles are counterclockwise. Every node on the boundary carries a tag;
/// corner vertices carry corner labels. mirror_x and mirror_y map each node to
/// the node at (-x, y) and (x, -y) respectively.
struct Mesh {
    DomainSpec domain;
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::optional<BoundaryLabel>> node_tags;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<int> mirror_x;
    std::vector<int> mirror_y;
    double h_max = 0.0;
    double grading = 1.0;   ///< effective band ratio used near the corners
    int bands = 0;          ///< number of geometric bands per corner patch
    int patch_cells = 0;    ///< half width of each corner patch in base cells
    int level = 0;          ///< refinements applied since construction

    std::size_t num_nodes() const noexcept { return nodes.size(); }
    std::size_t num_triangles() const noexcept { return triangles.size(); }
    bool is_dirichlet(int node) const {
        const auto& t = node_tags[node];
        return t && !t->is_inner();
    }
};

Mesh build_mesh(const DomainSpec& domain, const MeshParams& params);
Mesh build_mesh(const DomainSpec& domain, int n_base, double grading_ratio, int levels);

/// Regular red refinement: every triangle is split into four by its edge midpoints.
Mesh refine(const Mesh& mesh);

/// Nodes of the closed domain whose distance to inner corner i lies in [rho_min, rho_max].
/// Throws GeometryError("empty ring") when no node qualifies.
std::vector<int> corner_ring_nodes(const Mesh& mesh, int i, double rho_min, double rho_max);

/// Nodes on an inner or outer facet including both end vertices, ordered by
/// increasing x (horizontal facets) or y (vertical facets).
std::vector<int> facet_nodes(const Mesh& mesh, const BoundaryLabel& facet);

/// Length of the shortest boundary edge touching inner corner i.
double corner_local_h(const Mesh& mesh, int i);

/// Length of the boundary edges next to the midpoint of an inner facet.
double facet_center_h(const Mesh& mesh, const BoundaryLabel& facet);

double triangle_area(const Mesh& mesh, int t);
double total_area(const Mesh& mesh);
double min_angle_degrees(const Mesh& mesh);

/// Exact label of a node coordinate, or nullopt for interior points.
std::optional<BoundaryLabel> exact_boundary_tag(const DomainSpec& domain, Point2 p);

/// One record per line: "node i x y tag", "tri t a b c".
void write_mesh_text(const Mesh& mesh, std::ostream& os);
/// Wireframe drawing of the triangulation.
void write_mesh_svg(const Mesh& mesh, std::ostream& os);

} // namespace berglab
