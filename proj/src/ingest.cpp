#include "mmanthro/ingest.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace mmanthro {

void ReflectivityVolume::validate() const {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw SchemaError("volume dims must all be >= 1");
    if (!(spacing.array() > 0.0).all())
        throw SchemaError("volume spacing components must be > 0");
    if (depth_axis < 0 || depth_axis > 2)
        throw SchemaError("depth_axis must be 0, 1 or 2");
    if (!origin.allFinite()) throw SchemaError("volume origin must be finite");
    if (values.size() != voxel_count())
        throw SchemaError("volume value count " + std::to_string(values.size()) +
                          " does not match dims product " + std::to_string(voxel_count()));
    for (float v : values)
        if (!std::isfinite(v)) throw SchemaError("volume contains non-finite values");
}

DepthMap extract_depth_map(const ReflectivityVolume& vol, double threshold) {
    vol.validate();
    if (threshold < 0.0) throw SchemaError("threshold must be >= 0");
    const int d = vol.depth_axis;
    if (vol.dims[d] < 3)
        throw SchemaError("volume has fewer than 3 voxels along the depth axis; "
                          "no interior maxima possible");
    const int a1 = (d == 0) ? 1 : 0;            // columns
    const int a2 = (d == 2) ? 1 : 2;            // rows
    if (vol.spacing[a1] != vol.spacing[a2])
        throw SchemaError("transverse voxel spacings differ (" + std::to_string(vol.spacing[a1]) +
                          " vs " + std::to_string(vol.spacing[a2]) +
                          "); depth maps use a single pixel spacing");

    DepthMap dm;
    dm.width = vol.dims[a1];
    dm.height = vol.dims[a2];
    dm.pixel_spacing = vol.spacing[a1];
    dm.depth.assign(static_cast<std::size_t>(dm.width) * dm.height, kMissingDepth);

    const int nd = vol.dims[d];
    std::vector<float> line(nd);
    for (int r = 0; r < dm.height; ++r) {
        for (int c = 0; c < dm.width; ++c) {
            int idx[3];
            idx[a1] = c;
            idx[a2] = r;
            for (int k = 0; k < nd; ++k) {
                idx[d] = k;
                line[k] = vol.at(idx[0], idx[1], idx[2]);
            }
            // First qualifying run-maximum from the panel (index 0) inward.
            int i = 0;
            while (i < nd) {
                int j = i;
                while (j + 1 < nd && line[j + 1] == line[i]) ++j;
                const bool left_ok = (i == 0) || (line[i - 1] < line[i]);
                const bool right_ok = (j == nd - 1) || (line[j + 1] < line[i]);
                if (left_ok && right_ok && line[i] >= threshold) {
                    dm.at(r, c) = i * vol.spacing[d];
                    break;
                }
                i = j + 1;
            }
        }
    }
    return dm;
}

DepthMap smooth_depth_map(const DepthMap& dm, int radius) {
    if (radius < 0) throw SchemaError("smoothing radius must be >= 0");
    if (radius == 0) return dm;
    DepthMap out = dm;
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int r = 0; r < dm.height; ++r) {
        for (int c = 0; c < dm.width; ++c) {
            if (is_missing(dm.at(r, c))) continue;
            window.clear();
            for (int dr = -radius; dr <= radius; ++dr) {
                for (int dc = -radius; dc <= radius; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || cc < 0 || rr >= dm.height || cc >= dm.width) continue;
                    const double v = dm.at(rr, cc);
                    if (!is_missing(v)) window.push_back(v);
                }
            }
            std::sort(window.begin(), window.end());
            const std::size_t n = window.size();
            out.at(r, c) = (n % 2 == 1) ? window[n / 2]
                                        : 0.5 * (window[n / 2 - 1] + window[n / 2]);
        }
    }
    return out;
}

PointCloud project_depth_map(const DepthMap& dm, const RigidTransform& panel_pose,
                             int panel_index) {
    if (!panel_pose.is_valid())
        throw SchemaError("panel pose is not a rigid transform (rotation not orthonormal)");
    PointCloud cloud;
    for (int r = 0; r < dm.height; ++r) {
        for (int c = 0; c < dm.width; ++c) {
            const double d = dm.at(r, c);
            if (is_missing(d)) continue;
            const Vec3 local(c * dm.pixel_spacing, r * dm.pixel_spacing, d);
            cloud.points.push_back(panel_pose.apply(local));
            if (panel_index >= 0) cloud.source_panel.push_back(static_cast<int16_t>(panel_index));
        }
    }
    return cloud;
}

PointCloud merge_clouds(const std::vector<PointCloud>& clouds) {
    PointCloud out;
    bool any_tags = false;
    for (const auto& c : clouds) any_tags |= c.has_tags();
    for (const auto& c : clouds) {
        out.points.insert(out.points.end(), c.points.begin(), c.points.end());
        if (any_tags) {
            if (c.has_tags())
                out.source_panel.insert(out.source_panel.end(), c.source_panel.begin(),
                                        c.source_panel.end());
            else
                out.source_panel.insert(out.source_panel.end(), c.points.size(), int16_t{-1});
        }
    }
    return out;
}

PointCloud downsample(const PointCloud& cloud, double spacing) {
    if (spacing <= 0.0) throw SchemaError("downsample spacing must be > 0");
    cloud.check_finite();

    struct Cell {
        Vec3 sum = Vec3::Zero();
        int count = 0;
        int16_t tag = -1;
        bool tag_uniform = true;
    };
    using Key = std::tuple<int64_t, int64_t, int64_t>;
    std::map<Key, Cell> cells;  // ordered: deterministic output independent of input order
    const bool tagged = cloud.has_tags();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        const Key key{static_cast<int64_t>(std::floor(p.x() / spacing)),
                      static_cast<int64_t>(std::floor(p.y() / spacing)),
                      static_cast<int64_t>(std::floor(p.z() / spacing))};
        Cell& cell = cells[key];
        cell.sum += p;
        if (tagged) {
            const int16_t t = cloud.source_panel[i];
            if (cell.count == 0)
                cell.tag = t;
            else if (cell.tag != t)
                cell.tag_uniform = false;
        }
        ++cell.count;
    }
    PointCloud out;
    out.points.reserve(cells.size());
    if (tagged) out.source_panel.reserve(cells.size());
    for (const auto& [key, cell] : cells) {
        out.points.push_back(cell.sum / cell.count);
        if (tagged) out.source_panel.push_back(cell.tag_uniform ? cell.tag : int16_t{-1});
    }
    return out;
}

}  // namespace mmanthro
