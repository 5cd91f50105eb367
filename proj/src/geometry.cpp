#include "mmanthro/geometry.hpp"

#include <algorithm>

namespace mmanthro {

void TriangleMesh::validate() const {
    const int nv = static_cast<int>(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (!vertices[i].allFinite())
            throw SchemaError("vertex " + std::to_string(i) + " has non-finite coordinates");
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& [a, b, c] = faces[f];
        if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
            throw SchemaError("face " + std::to_string(f) + " references vertex out of range");
        if (a == b || b == c || a == c)
            throw SchemaError("face " + std::to_string(f) + " repeats a vertex index");
    }
}

double TriangleMesh::surface_area() const {
    double area = 0.0;
    for (const auto& [a, b, c] : faces)
        area += 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]).norm();
    return area;
}

void TriangleMesh::bounding_box(Vec3& lo, Vec3& hi) const {
    if (vertices.empty()) throw NumericError("bounding box of empty mesh");
    lo = hi = vertices[0];
    for (const Vec3& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
}

std::vector<Vec3> face_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> normals;
    normals.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& [a, b, c] = mesh.faces[f];
        const Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
        const double len = n.norm();
        if (len <= 0.0)
            throw NumericError("zero-area face " + std::to_string(f));
        normals.push_back(n / len);
    }
    return normals;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> accum(mesh.vertices.size(), Vec3::Zero());
    std::vector<char> touched(mesh.vertices.size(), 0);
    for (const auto& [a, b, c] : mesh.faces) {
        // Unnormalized cross product: magnitude 2*area gives the area weighting.
        const Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
        accum[a] += n;
        accum[b] += n;
        accum[c] += n;
        touched[a] = touched[b] = touched[c] = 1;
    }
    std::vector<Vec3> normals(mesh.vertices.size());
    for (std::size_t i = 0; i < accum.size(); ++i) {
        if (!touched[i])
            throw NumericError("vertex " + std::to_string(i) + " belongs to no face");
        const double len = accum[i].norm();
        if (len <= 1e-30)
            throw NumericError("vertex " + std::to_string(i) +
                               " has a zero resultant normal (opposing faces)");
        normals[i] = accum[i] / len;
    }
    return normals;
}

namespace {

// Plane 2D coordinates for each up axis: the two remaining axes in a fixed order.
inline Vec2 to_plane(const Vec3& p, int up) {
    switch (up) {
        case 0: return Vec2(p.y(), p.z());
        case 1: return Vec2(p.x(), p.z());
        default: return Vec2(p.x(), p.y());
    }
}

}  // namespace

std::vector<Vec2> slice_mesh(const TriangleMesh& mesh, double height, UpAxis up_axis) {
    const int up = axis_index(up_axis);
    std::vector<Vec2> out;
    for (const auto& face : mesh.faces) {
        // A vertex exactly on the plane counts as the upper side.
        bool above[3];
        int n_above = 0;
        for (int k = 0; k < 3; ++k) {
            above[k] = mesh.vertices[face[k]][up] >= height;
            n_above += above[k];
        }
        if (n_above == 0 || n_above == 3) continue;
        for (int k = 0; k < 3; ++k) {
            const int a = face[k], b = face[(k + 1) % 3];
            if (above[k] == above[(k + 1) % 3]) continue;
            const Vec3& va = mesh.vertices[a];
            const Vec3& vb = mesh.vertices[b];
            const double s = (height - va[up]) / (vb[up] - va[up]);
            out.push_back(to_plane(va + s * (vb - va), up));
        }
    }
    return out;
}

namespace {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline bool lex_less(const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

}  // namespace

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points) {
    std::sort(points.begin(), points.end(), lex_less);
    points.erase(std::unique(points.begin(), points.end(),
                             [](const Vec2& a, const Vec2& b) { return a == b; }),
                 points.end());
    if (points.size() < 3)
        throw NumericError("slice too sparse: fewer than 3 distinct points");

    const std::size_t n = points.size();
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);  // last point repeats the first
    if (hull.size() < 3)
        throw NumericError("slice too sparse: points are collinear");
    return hull;  // counterclockwise, starts at the lexicographically smallest
}

double perimeter(const std::vector<Vec2>& polygon) {
    if (polygon.size() < 3)
        throw NumericError("perimeter needs a polygon with >= 3 vertices");
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        total += (polygon[(i + 1) % polygon.size()] - polygon[i]).norm();
    return total;
}

}  // namespace mmanthro
