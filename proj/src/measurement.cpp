#include "mmanthro/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace mmanthro {

const Measurement* MeasurementReport::find(const std::string& name) const {
    for (const auto& m : measurements)
        if (m.name == name) return &m;
    return nullptr;
}

std::pair<double, double> region_bounds(const TriangleMesh& mesh, const std::vector<int>& region,
                                        UpAxis up_axis) {
    if (region.empty()) throw NumericError("region_bounds with an empty region");
    const int up = axis_index(up_axis);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i : region) {
        if (i < 0 || i >= static_cast<int>(mesh.vertices.size()))
            throw SchemaError("region index out of range");
        lo = std::min(lo, mesh.vertices[i][up]);
        hi = std::max(hi, mesh.vertices[i][up]);
    }
    return {lo, hi};
}

namespace {

TriangleMesh masked_mesh(const TriangleMesh& mesh, const std::vector<char>* face_mask) {
    if (!face_mask) return mesh;
    if (face_mask->size() != mesh.faces.size())
        throw SchemaError("face mask size does not match face count");
    TriangleMesh out;
    out.vertices = mesh.vertices;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        if ((*face_mask)[f]) out.faces.push_back(mesh.faces[f]);
    return out;
}

}  // namespace

Measurement circumference(const TriangleMesh& mesh, const MeasurementSpec& spec, UpAxis up,
                          const std::vector<char>* face_mask) {
    if (spec.slice_step <= 0) throw SchemaError("slice_step must be > 0");
    const auto [h_min, h_max] = region_bounds(mesh, spec.region, up);
    const TriangleMesh sliced = masked_mesh(mesh, face_mask);

    Measurement best;
    best.name = spec.name;
    bool found = false;
    const int steps = static_cast<int>(std::floor((h_max - h_min) / spec.slice_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double h = h_min + i * spec.slice_step;
        const std::vector<Vec2> section = slice_mesh(sliced, h, up);
        double c;
        try {
            c = perimeter(convex_hull_2d(section));
        } catch (const NumericError&) {
            continue;  // sparse slice at the region edge; skip it
        }
        // Strict improvement only: ties resolve to the lower height.
        const bool better = !found || (spec.mode == SliceMode::Max ? c > best.value : c < best.value);
        if (better) {
            best.value = c;
            best.slice_height = h;
            best.slice_points = static_cast<int>(section.size());
            found = true;
        }
    }
    if (!found) throw NumericError("region produced no measurable slice");
    return best;
}

double body_height(const TriangleMesh& mesh, const BodyModel& model, double y_ground) {
    const auto& top = model.group("head_top");
    const int up = axis_index(model.up_axis);
    double hi = -std::numeric_limits<double>::infinity();
    for (int i : top) hi = std::max(hi, mesh.vertices[i][up]);
    return hi - y_ground;
}

std::vector<char> torso_face_mask(const BodyModel& model) {
    std::vector<char> mask(model.template_mesh.faces.size(), 1);
    if (model.torso_joints.empty()) return mask;
    std::vector<char> torso_joint(model.joint_count(), 0);
    for (int j : model.torso_joints) torso_joint[j] = 1;
    std::vector<char> vertex_ok(model.vertex_count(), 0);
    for (std::size_t i = 0; i < model.vertex_count(); ++i) {
        double w = 0.0;
        for (const auto& [j, wj] : model.skin_weights[i])
            if (torso_joint[j]) w += wj;
        vertex_ok[i] = w > 0.5;
    }
    for (std::size_t f = 0; f < model.template_mesh.faces.size(); ++f) {
        const auto& [a, b, c] = model.template_mesh.faces[f];
        mask[f] = vertex_ok[a] && vertex_ok[b] && vertex_ok[c];
    }
    return mask;
}

MeasurementReport measure_mesh(const BodyModel& model, const TriangleMesh& mesh,
                               const MeasureOptions& opts) {
    if (mesh.vertex_count() != model.vertex_count())
        throw SchemaError("mesh vertex count does not match the model topology");
    const std::vector<char> mask = torso_face_mask(model);

    MeasurementReport report;
    report.gender = model.gender;
    const struct {
        const char* name;
        const char* group;
        SliceMode mode;
    } plan[] = {{"chest", "chest_region", SliceMode::Max},
                {"waist", "waist_region", SliceMode::Min},
                {"hip", "hip_region", SliceMode::Max}};
    for (const auto& p : plan) {
        MeasurementSpec spec;
        spec.name = p.name;
        spec.region = model.group(p.group);
        spec.mode = p.mode;
        spec.slice_step = opts.slice_step;
        report.measurements.push_back(circumference(mesh, spec, model.up_axis, &mask));
    }
    report.body_height = body_height(mesh, model, opts.y_ground);
    return report;
}

MeasurementReport measure_all(const BodyModel& model, const BodyParams& params,
                              const MeasureOptions& opts) {
    // Measure in the canonical A-pose: keep the fitted shape, reset the pose,
    // rest the feet on y_ground and center horizontally.
    BodyParams canonical;
    canonical.beta = params.beta;
    canonical.theta = model.pose_prior;
    canonical.translation = Vec3::Zero();
    TriangleMesh mesh = pose_mesh(model, canonical);

    const int up = axis_index(model.up_axis);
    double lowest_foot = std::numeric_limits<double>::infinity();
    for (int i : model.group("feet")) lowest_foot = std::min(lowest_foot, mesh.vertices[i][up]);
    Vec3 shift = Vec3::Zero();
    shift[up] = opts.y_ground - lowest_foot;
    for (Vec3& v : mesh.vertices) v += shift;

    return measure_mesh(model, mesh, opts);
}

}  // namespace mmanthro
