// Test-side reference implementations. Everything here is independent of the
// library code paths it checks: brute-force scans, closed forms, finite
// differences, and hand-built meshes.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mmanthro/geometry.hpp"
#include "mmanthro/types.hpp"

namespace oracles {

using mmanthro::TriangleMesh;
using mmanthro::Vec3;

inline std::pair<int, double> brute_force_nn(const std::vector<Vec3>& points, const Vec3& q) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d2 = (points[i] - q).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(i);
        }
    }
    return {best, best_d2};
}

struct BruteChamfer {
    double value = 0.0;
    std::vector<Vec3> d_vertices;
};

// Double-loop evaluation of the weighted bidirectional Chamfer energy.
inline BruteChamfer brute_chamfer(const std::vector<Vec3>& vertices,
                                  const std::vector<double>& weights,
                                  const std::vector<Vec3>& points) {
    const double nv = static_cast<double>(vertices.size());
    const double np = static_cast<double>(points.size());
    BruteChamfer out;
    out.d_vertices.assign(vertices.size(), Vec3::Zero());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            const double d2 = (vertices[i] - points[j]).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(j);
            }
        }
        out.value += weights[i] * best_d2 / nv;
        out.d_vertices[i] += (2.0 * weights[i] / nv) * (vertices[i] - points[best]);
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const double d2 = (points[j] - vertices[i]).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(i);
            }
        }
        out.value += best_d2 / np;
        out.d_vertices[best] += (2.0 / np) * (vertices[best] - points[j]);
    }
    return out;
}

// Closest-point distance to a triangle (Ericson, Real-Time Collision Detection).
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + (d1 / (d1 - d3)) * ab)).norm();
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + (d2 / (d2 - d6)) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + w * (c - b))).norm();
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return (p - (a + v * ab + w * ac)).norm();
}

inline double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b, c] : mesh.faces)
        best = std::min(best, point_triangle_distance(p, mesh.vertices[a], mesh.vertices[b],
                                                      mesh.vertices[c]));
    return best;
}

inline double regular_ngon_perimeter(int n, double r) { return 2.0 * n * r * std::sin(M_PI / n); }

// Central finite difference of a scalar function of a flat parameter vector.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (int i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + step;
        const double hi = f(xp);
        xp[i] = x[i] - step;
        const double lo = f(xp);
        xp[i] = x[i];
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Closed vertical tube along +y with per-ring radii; caps are fans.
inline TriangleMesh make_tube_y(const std::vector<double>& heights,
                                const std::vector<double>& radii, int segments,
                                double cx = 0.0, double cz = 0.0) {
    TriangleMesh mesh;
    const int n = segments;
    for (std::size_t r = 0; r < heights.size(); ++r) {
        for (int s = 0; s < n; ++s) {
            const double phi = 2.0 * M_PI * s / n;
            mesh.vertices.emplace_back(cx + radii[r] * std::sin(phi), heights[r],
                                       cz + radii[r] * std::cos(phi));
        }
    }
    for (std::size_t r = 0; r + 1 < heights.size(); ++r) {
        for (int s = 0; s < n; ++s) {
            const int s1 = (s + 1) % n;
            const int b0 = static_cast<int>(r) * n + s, b1 = static_cast<int>(r) * n + s1;
            const int t0 = b0 + n, t1 = b1 + n;
            mesh.faces.push_back({b0, b1, t1});
            mesh.faces.push_back({b0, t1, t0});
        }
    }
    const int bottom = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(cx, heights.front(), cz);
    const int top = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(cx, heights.back(), cz);
    const int last = static_cast<int>(heights.size() - 1) * n;
    for (int s = 0; s < n; ++s) {
        const int s1 = (s + 1) % n;
        mesh.faces.push_back({bottom, s1, s});
        mesh.faces.push_back({top, last + s, last + s1});
    }
    return mesh;
}

inline TriangleMesh make_cylinder(double radius, double y0, double y1, int segments,
                                  int rings = 2) {
    std::vector<double> heights, radii;
    for (int r = 0; r < rings; ++r) {
        heights.push_back(y0 + (y1 - y0) * r / (rings - 1));
        radii.push_back(radius);
    }
    return make_tube_y(heights, radii, segments);
}

inline TriangleMesh make_frustum(double r_bottom, double r_top, double y0, double y1,
                                 int segments, int rings = 8) {
    std::vector<double> heights, radii;
    for (int r = 0; r < rings; ++r) {
        const double t = static_cast<double>(r) / (rings - 1);
        heights.push_back(y0 + (y1 - y0) * t);
        radii.push_back(r_bottom + (r_top - r_bottom) * t);
    }
    return make_tube_y(heights, radii, segments);
}

inline TriangleMesh make_uv_sphere(double radius, int n_lat, int n_lon,
                                   const Vec3& center = Vec3::Zero()) {
    TriangleMesh mesh;
    for (int i = 1; i < n_lat; ++i) {
        const double theta = M_PI * i / n_lat;
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * M_PI * j / n_lon;
            mesh.vertices.push_back(center + radius * Vec3(std::sin(theta) * std::cos(phi),
                                                           std::cos(theta),
                                                           std::sin(theta) * std::sin(phi)));
        }
    }
    const int north = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(center + radius * Vec3(0, 1, 0));
    const int south = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(center + radius * Vec3(0, -1, 0));
    auto ring = [&](int i, int j) { return (i - 1) * n_lon + (j % n_lon); };
    for (int j = 0; j < n_lon; ++j) {
        mesh.faces.push_back({north, ring(1, j + 1), ring(1, j)});
        mesh.faces.push_back({south, ring(n_lat - 1, j), ring(n_lat - 1, j + 1)});
    }
    for (int i = 1; i + 1 < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            const int a = ring(i, j), b = ring(i, j + 1), c = ring(i + 1, j), d = ring(i + 1, j + 1);
            mesh.faces.push_back({a, b, d});
            mesh.faces.push_back({a, d, c});
        }
    }
    return mesh;
}

// Axis-aligned unit-ish cube [lo, hi]^3, 12 triangles, outward winding.
inline TriangleMesh make_cube(const Vec3& lo, const Vec3& hi) {
    TriangleMesh mesh;
    for (int i = 0; i < 8; ++i)
        mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                                   i & 4 ? hi.z() : lo.z());
    const int quads[6][4] = {
        {0, 2, 3, 1},  // z = lo (normal -z)
        {4, 5, 7, 6},  // z = hi (+z)
        {0, 4, 6, 2},  // x = lo (-x)
        {1, 3, 7, 5},  // x = hi (+x)
        {0, 1, 5, 4},  // y = lo (-y)
        {2, 6, 7, 3},  // y = hi (+y)
    };
    for (const auto& q : quads) {
        mesh.faces.push_back({q[0], q[1], q[2]});
        mesh.faces.push_back({q[0], q[2], q[3]});
    }
    return mesh;
}

}  // namespace oracles
