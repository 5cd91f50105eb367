#include "mmanthro/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mmanthro {

void ScanConfig::validate() const {
    if (panels.empty()) throw SchemaError("scan config needs at least one panel");
    for (const Panel& p : panels)
        if (std::abs(p.normal.norm() - 1.0) > 1e-6)
            throw SchemaError("panel normal for \"" + p.id + "\" is not unit length");
    if (dropout < 0.0 || dropout >= 1.0) throw SchemaError("dropout must be in [0, 1)");
    if (noise_sigma < 0.0) throw SchemaError("noise_sigma must be >= 0");
    if (samples_per_area <= 0.0) throw SchemaError("samples_per_area must be > 0");
    if (visibility_exponent < 0.0) throw SchemaError("visibility_exponent must be >= 0");
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Moeller-Trumbore; returns the ray parameter t >= 0 or a negative miss.
double ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                    const Vec3& c) {
    constexpr double kEps = 1e-12;
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < kEps) return -1.0;
    const double inv = 1.0 / det;
    const Vec3 s = origin - a;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) return -1.0;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) return -1.0;
    const double t = e2.dot(q) * inv;
    return t >= 0.0 ? t : -1.0;
}

// First intersection with any face other than skip_face beyond t_min.
bool ray_hits_mesh(const TriangleMesh& mesh, const Vec3& origin, const Vec3& dir, int skip_face,
                   double t_min) {
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (static_cast<int>(f) == skip_face) continue;
        const auto& [a, b, c] = mesh.faces[f];
        const double t =
            ray_triangle(origin, dir, mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        if (t > t_min) return true;
    }
    return false;
}

}  // namespace

PointCloud simulate_scan(const TriangleMesh& mesh, const ScanConfig& config, ScanStats* stats) {
    config.validate();
    mesh.validate();
    const std::vector<Vec3> normals = face_normals(mesh);

    std::vector<double> areas(mesh.faces.size());
    double total_area = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& [a, b, c] = mesh.faces[f];
        areas[f] = 0.5 * (mesh.vertices[b] - mesh.vertices[a])
                             .cross(mesh.vertices[c] - mesh.vertices[a])
                             .norm();
        total_area += areas[f];
    }
    if (total_area <= 0.0) throw NumericError("mesh has zero total area");

    if (stats) {
        stats->candidates.assign(mesh.faces.size(), 0);
        stats->kept.assign(mesh.faces.size(), 0);
        stats->keep_probability.assign(mesh.faces.size(), 0.0);
    }

    PointCloud cloud;
    const std::size_t n_panels = config.panels.size();
    std::vector<char> visible(n_panels);

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        double keep_prob = 0.0;
        for (const Panel& panel : config.panels)
            keep_prob = std::max(keep_prob,
                                 std::pow(std::abs(normals[f].dot(panel.normal)),
                                          config.visibility_exponent));
        if (stats) stats->keep_probability[f] = keep_prob;

        // Per-face substream: parallel and serial sampling agree.
        std::mt19937_64 rng(splitmix64(config.rng_seed + 0x9E3779B97F4A7C15ULL * (f + 1)));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, config.noise_sigma);

        const double expected = areas[f] * config.samples_per_area;
        int count = static_cast<int>(std::floor(expected));
        if (uniform(rng) < expected - std::floor(expected)) ++count;
        if (stats) stats->candidates[f] = count;

        const auto& [ia, ib, ic] = mesh.faces[f];
        const Vec3& a = mesh.vertices[ia];
        const Vec3& b = mesh.vertices[ib];
        const Vec3& c = mesh.vertices[ic];

        for (int s = 0; s < count; ++s) {
            double u = uniform(rng), v = uniform(rng);
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            const Vec3 point = a + u * (b - a) + v * (c - a);

            if (uniform(rng) >= keep_prob) continue;
            if (config.dropout > 0.0 && uniform(rng) < config.dropout) continue;
            if (stats) ++stats->kept[f];

            // Orthographic occlusion: discard when every panel's ray re-enters
            // the body.
            int best_panel = -1;
            double best_cos = -1.0;
            for (std::size_t p = 0; p < n_panels; ++p) {
                visible[p] = !ray_hits_mesh(mesh, point, config.panels[p].normal,
                                            static_cast<int>(f), 1e-9);
                if (visible[p]) {
                    const double cos_p = std::abs(normals[f].dot(config.panels[p].normal));
                    if (cos_p > best_cos) {
                        best_cos = cos_p;
                        best_panel = static_cast<int>(p);
                    }
                }
            }
            if (best_panel < 0) continue;

            Vec3 out = point;
            if (config.noise_sigma > 0.0) out += Vec3(gauss(rng), gauss(rng), gauss(rng));
            cloud.points.push_back(out);
            cloud.source_panel.push_back(static_cast<int16_t>(best_panel));
        }
    }
    return cloud;
}

std::vector<PanelVolume> simulate_volume(const TriangleMesh& mesh, const ScanConfig& config,
                                         double voxel_spacing) {
    config.validate();
    mesh.validate();
    if (voxel_spacing <= 0.0) throw SchemaError("voxel spacing must be > 0");

    std::vector<PanelVolume> out;
    const Vec3 up = Vec3::Unit(axis_index(config.up_axis));

    for (const Panel& panel : config.panels) {
        // Panel-local frame: +z is the depth direction, away from the panel.
        const Vec3 zl = -panel.normal;
        Vec3 ref = up;
        if (std::abs(ref.dot(zl)) > 0.9) ref = Vec3::UnitX();
        const Vec3 yl = (ref - ref.dot(zl) * zl).normalized();
        const Vec3 xl = yl.cross(zl);
        Mat3 rot;
        rot.col(0) = xl;
        rot.col(1) = yl;
        rot.col(2) = zl;

        Vec3 lo = rot.transpose() * mesh.vertices[0], hi = lo;
        for (const Vec3& v : mesh.vertices) {
            const Vec3 l = rot.transpose() * v;
            lo = lo.cwiseMin(l);
            hi = hi.cwiseMax(l);
        }
        const double pad_xy = 2 * voxel_spacing;
        const double pad_z = 6 * voxel_spacing;
        const Vec3 corner = lo - Vec3(pad_xy, pad_xy, pad_z);

        PanelVolume pv;
        pv.panel_id = panel.id;
        pv.panel_pose.rotation = rot;
        pv.panel_pose.translation = rot * corner;
        ReflectivityVolume& vol = pv.volume;
        for (int k = 0; k < 3; ++k) {
            const double pad = k == 2 ? pad_z : pad_xy;
            vol.dims[k] = static_cast<int>(std::ceil((hi[k] - lo[k] + 2 * pad) / voxel_spacing)) + 1;
        }
        vol.spacing = Vec3::Constant(voxel_spacing);
        vol.origin = pv.panel_pose.translation;
        vol.depth_axis = 2;
        vol.values.assign(vol.voxel_count(), 0.0f);

        const Vec3 dir = rot.col(2);
        const double sigma = voxel_spacing;
        const double max_depth = (vol.dims[2] - 1) * voxel_spacing;
        for (int r = 0; r < vol.dims[1]; ++r) {
            for (int c = 0; c < vol.dims[0]; ++c) {
                const Vec3 origin =
                    pv.panel_pose.apply(Vec3(c * voxel_spacing, r * voxel_spacing, 0.0));
                double t_hit = std::numeric_limits<double>::infinity();
                for (const auto& [ia, ib, ic] : mesh.faces) {
                    const double t = ray_triangle(origin, dir, mesh.vertices[ia],
                                                  mesh.vertices[ib], mesh.vertices[ic]);
                    if (t >= 0.0 && t < t_hit) t_hit = t;
                }
                if (!std::isfinite(t_hit)) continue;
                if (t_hit > max_depth)
                    throw NumericError("mesh surface outside the simulated volume extent");
                // Gaussian reflectivity bump centered on the first hit.
                const int k_lo = std::max(0, static_cast<int>((t_hit - 4 * sigma) / voxel_spacing));
                const int k_hi = std::min(vol.dims[2] - 1,
                                          static_cast<int>((t_hit + 4 * sigma) / voxel_spacing) + 1);
                for (int k = k_lo; k <= k_hi; ++k) {
                    const double dz = k * voxel_spacing - t_hit;
                    vol.at(c, r, k) += static_cast<float>(std::exp(-dz * dz / (2 * sigma * sigma)));
                }
            }
        }
        out.push_back(std::move(pv));
    }
    return out;
}

}  // namespace mmanthro
