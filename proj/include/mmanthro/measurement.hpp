#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmanthro/body_model.hpp"
#include "mmanthro/geometry.hpp"

namespace mmanthro {

enum class SliceMode { Max, Min };

struct MeasurementSpec {
    std::string name;          // chest | waist | hip | custom
    std::vector<int> region;   // vertex indices bounding the slice heights
    SliceMode mode = SliceMode::Max;
    double slice_step = 0.0025;  // 2.5 mm
};

struct Measurement {
    std::string name;
    double value = 0.0;         // circumference, meters
    double slice_height = 0.0;  // h* of the selected slice
    int slice_points = 0;       // intersection points at h*
};

struct MeasurementReport {
    std::vector<Measurement> measurements;
    double body_height = 0.0;
    std::string gender;
    std::string measurement_pose = "a_pose";
    // Fit diagnostics passthrough (empty unless supplied).
    double fit_final_energy = 0.0;
    int fit_iterations = 0;
    std::string fit_converged_by;

    const Measurement* find(const std::string& name) const;
};

/// Min/max up-coordinate over the region's vertices in this mesh.
std::pair<double, double> region_bounds(const TriangleMesh& mesh, const std::vector<int>& region,
                                        UpAxis up);

/// Sweep slices h_min, h_min + step, ... <= h_max; per slice hull perimeter;
/// degenerate slices are skipped; returns the max/min with its height (ties to
/// the lower height). face_mask, when present, restricts slicing to the
/// enabled faces. Throws NumericError when no slice is measurable.
Measurement circumference(const TriangleMesh& mesh, const MeasurementSpec& spec, UpAxis up,
                          const std::vector<char>* face_mask = nullptr);

/// Max up-coordinate over the head_top group minus y_ground.
double body_height(const TriangleMesh& mesh, const BodyModel& model, double y_ground = 0.0);

struct MeasureOptions {
    double slice_step = 0.0025;
    double y_ground = 0.0;
};

/// Faces whose three vertices all carry summed torso-joint skin weight > 0.5.
/// Empty torso_joints disables gating (all faces enabled).
std::vector<char> torso_face_mask(const BodyModel& model);

/// Chest (max), waist (min), hip (max) and body height measured on `mesh`,
/// which must share the model's topology. No re-posing.
MeasurementReport measure_mesh(const BodyModel& model, const TriangleMesh& mesh,
                               const MeasureOptions& opts = {});

/// Re-poses the fitted shape into the A-pose (theta = pose_prior, feet on
/// y_ground, centered horizontally) and measures it.
MeasurementReport measure_all(const BodyModel& model, const BodyParams& params,
                              const MeasureOptions& opts = {});

}  // namespace mmanthro
