#pragma once

#include <array>
#include <vector>

#include "mmanthro/types.hpp"

namespace mmanthro {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }

    /// Index bounds, distinct corners, finite coordinates.
    void validate() const;

    double surface_area() const;
    void bounding_box(Vec3& lo, Vec3& hi) const;
};

/// Unit normal per face from the right-handed winding. Throws NumericError
/// naming the face on zero area.
std::vector<Vec3> face_normals(const TriangleMesh& mesh);

/// Unit normal per vertex: sum of incident unnormalized cross products
/// (magnitude 2*area, so larger faces weigh more), then renormalized.
/// Throws on isolated vertices and on zero resultants.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// Intersection of the mesh surface with the plane {up-coordinate == height},
/// projected to plane 2D coordinates. Vertices exactly on the plane count as
/// the upper side. Two points per straddling face; empty when nothing crosses.
std::vector<Vec2> slice_mesh(const TriangleMesh& mesh, double height, UpAxis up);

/// Counterclockwise convex hull with collinear boundary points dropped,
/// starting at the lexicographically smallest vertex (monotone chain).
/// Throws NumericError("slice too sparse: ...") for < 3 distinct points or a
/// fully collinear set.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

/// Closed-polygon perimeter (>= 3 vertices).
double perimeter(const std::vector<Vec2>& polygon);

}  // namespace mmanthro
