#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmanthro {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// File/parse failures. CLI exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structurally invalid data (bad schema, violated model invariant). CLI exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical/geometric failure (degenerate face, non-finite energy, sparse slice). CLI exit code 1.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class UpAxis : int { X = 0, Y = 1, Z = 2 };

inline int axis_index(UpAxis a) { return static_cast<int>(a); }

inline UpAxis up_axis_from_string(const std::string& s) {
    if (s == "x") return UpAxis::X;
    if (s == "y") return UpAxis::Y;
    if (s == "z") return UpAxis::Z;
    throw SchemaError("up_axis must be one of x|y|z, got \"" + s + "\"");
}

inline std::string to_string(UpAxis a) {
    switch (a) {
        case UpAxis::X: return "x";
        case UpAxis::Y: return "y";
        default: return "z";
    }
}

struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        RigidTransform inv;
        inv.rotation = rotation.transpose();
        inv.translation = -(rotation.transpose() * translation);
        return inv;
    }

    bool is_valid(double tol = 1e-9) const {
        const Mat3 rtr = rotation.transpose() * rotation;
        return (rtr - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
               std::abs(rotation.determinant() - 1.0) <= tol &&
               translation.allFinite();
    }
};

/// Unordered 3D points in the scanner frame. source_panel is either empty or
/// one entry per point (panel index, -1 for untagged).
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int16_t> source_panel;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_tags() const { return source_panel.size() == points.size() && !points.empty(); }

    Vec3 centroid() const {
        if (points.empty()) throw NumericError("centroid of empty point cloud");
        Vec3 c = Vec3::Zero();
        for (const Vec3& p : points) c += p;
        return c / static_cast<double>(points.size());
    }

    void check_finite() const {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (!points[i].allFinite())
                throw NumericError("point cloud contains non-finite coordinates at index " +
                                   std::to_string(i));
    }
};

constexpr double kMissingDepth = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double depth) { return std::isnan(depth); }

}  // namespace mmanthro
