#pragma once

#include <string>
#include <vector>

#include "mmanthro/types.hpp"

namespace mmanthro {

/// 3D scalar reflectivity grid from one panel scan. values are x-fastest:
/// index = x + nx*(y + ny*z). Increasing depth_axis index moves away from
/// the panel.
struct ReflectivityVolume {
    std::array<int, 3> dims{0, 0, 0};
    Vec3 spacing = Vec3::Zero();   // meters per voxel, per axis
    Vec3 origin = Vec3::Zero();    // scanner-frame position of voxel (0,0,0)
    int depth_axis = 2;
    std::vector<float> values;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    float& at(int x, int y, int z) {
        return values[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(dims[0]) * (y + static_cast<std::size_t>(dims[1]) * z)];
    }
    float at(int x, int y, int z) const {
        return values[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(dims[0]) * (y + static_cast<std::size_t>(dims[1]) * z)];
    }
    void validate() const;
};

/// Per-pixel first-surface depth (meters from the panel-side volume face),
/// kMissingDepth where no surface qualifies. Pixel (r, c) maps to panel-local
/// (c*pixel_spacing, r*pixel_spacing, depth).
struct DepthMap {
    int width = 0;   // columns
    int height = 0;  // rows
    double pixel_spacing = 0.0;
    std::vector<double> depth;  // row-major, height*width
    std::string panel_id = "front";

    double& at(int r, int c) { return depth[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return depth[static_cast<std::size_t>(r) * width + c]; }
};

/// One panel's volume together with the pose mapping its panel-local frame
/// (pixel axes + depth) into the scanner frame. Mirrors the on-disk
/// f32raw + JSON sidecar pair.
struct PanelVolume {
    ReflectivityVolume volume;
    RigidTransform panel_pose;
    std::string panel_id = "front";
};

/// Depth of the first run-maximum >= threshold along depth_axis, searched
/// from the panel inward. A run of equal values counts once, at its first
/// index; boundary runs compare against their single neighbor.
DepthMap extract_depth_map(const ReflectivityVolume& vol, double threshold);

/// Median filter over the (2r+1)^2 window of non-missing depths. Missing
/// pixels stay missing; radius 0 is the identity.
DepthMap smooth_depth_map(const DepthMap& dm, int radius);

/// Panel-local (c*s, r*s, depth) per non-missing pixel, mapped through
/// panel_pose into the scanner frame.
PointCloud project_depth_map(const DepthMap& dm, const RigidTransform& panel_pose,
                             int panel_index = -1);

PointCloud merge_clouds(const std::vector<PointCloud>& clouds);

/// Voxel-grid downsampling: one point per occupied cell, at the centroid of
/// that cell's points. Output ordered by lexicographic cell index.
PointCloud downsample(const PointCloud& cloud, double spacing);

constexpr double kDefaultDownsampleSpacing = 0.01;  // ~1 cm

}  // namespace mmanthro
