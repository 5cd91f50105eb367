#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmanthro/geometry.hpp"
#include "mmanthro/ingest.hpp"
#include "mmanthro/types.hpp"

namespace mmanthro {

struct Panel {
    std::string id;  // "front" | "back" | custom
    Vec3 normal;     // unit, points from the subject toward the panel
};

struct ScanConfig {
    std::vector<Panel> panels = {{"front", Vec3(0, 0, 1)}, {"back", Vec3(0, 0, -1)}};
    double visibility_exponent = 2.0;
    double dropout = 0.0;            // in [0, 1)
    double noise_sigma = 0.0;        // meters, isotropic
    double samples_per_area = 20000; // points per m^2
    UpAxis up_axis = UpAxis::Y;      // transverse frame for simulated volumes
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Per-face sampling tallies, for verifying the visibility law.
struct ScanStats {
    std::vector<int> candidates;  // samples drawn on each face
    std::vector<int> kept;        // surviving visibility and dropout rolls
    std::vector<double> keep_probability;  // max over panels |cos|^exponent per face
};

/// Area-weighted surface samples kept with probability
/// max_panels(|n_f . n_panel|)^exponent * (1 - dropout), minus samples
/// occluded from every panel along its normal ray, plus Gaussian noise.
/// Deterministic per seed (per-face substreams).
PointCloud simulate_scan(const TriangleMesh& mesh, const ScanConfig& config,
                         ScanStats* stats = nullptr);

/// Orthographic first-hit depth per panel rasterized as a Gaussian
/// reflectivity bump (sigma = 1 voxel) along each pixel column.
std::vector<PanelVolume> simulate_volume(const TriangleMesh& mesh, const ScanConfig& config,
                                         double voxel_spacing);

}  // namespace mmanthro
