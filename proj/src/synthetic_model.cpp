#include <cmath>
#include <functional>

#include "mmanthro/body_model.hpp"

namespace mmanthro {

namespace {

// Joint layout of the built-in humanoid.
enum Joint : int {
    kPelvis = 0,
    kSpine = 1,
    kChest = 2,
    kNeck = 3,
    kHipL = 4,
    kKneeL = 5,
    kAnkleL = 6,
    kHipR = 7,
    kKneeR = 8,
    kAnkleR = 9,
    kShoulderL = 10,
    kShoulderR = 11,
    kJointCount = 12,
};

struct Ring {
    Vec3 center;
    double radius_e1;
    double radius_e2;
};

struct TubeResult {
    int first_vertex = 0;
    int vertex_count = 0;
    std::vector<std::vector<int>> ring_vertices;  // per ring, excludes poles
};

// Closed tube of elliptical rings ordered along +axis, where axis = e1 x e2.
// End caps are fans to pole vertices at the first/last ring centers.
TubeResult add_tube(TriangleMesh& mesh, const std::vector<Ring>& rings, const Vec3& e1,
                    const Vec3& e2, int segments) {
    TubeResult res;
    res.first_vertex = static_cast<int>(mesh.vertices.size());
    const int n = segments;
    for (const Ring& ring : rings) {
        std::vector<int> ids;
        ids.reserve(n);
        for (int s = 0; s < n; ++s) {
            const double phi = 2.0 * M_PI * s / n;
            ids.push_back(static_cast<int>(mesh.vertices.size()));
            mesh.vertices.push_back(ring.center + ring.radius_e1 * std::cos(phi) * e1 +
                                    ring.radius_e2 * std::sin(phi) * e2);
        }
        res.ring_vertices.push_back(std::move(ids));
    }
    for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
        const auto& bot = res.ring_vertices[r];
        const auto& top = res.ring_vertices[r + 1];
        for (int s = 0; s < n; ++s) {
            const int s1 = (s + 1) % n;
            mesh.faces.push_back({bot[s], bot[s1], top[s1]});
            mesh.faces.push_back({bot[s], top[s1], top[s]});
        }
    }
    const int bottom_pole = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(rings.front().center);
    const int top_pole = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(rings.back().center);
    for (int s = 0; s < n; ++s) {
        const int s1 = (s + 1) % n;
        mesh.faces.push_back({bottom_pole, res.ring_vertices.front()[s1],
                              res.ring_vertices.front()[s]});
        mesh.faces.push_back({top_pole, res.ring_vertices.back()[s],
                              res.ring_vertices.back()[s1]});
    }
    res.vertex_count = static_cast<int>(mesh.vertices.size()) - res.first_vertex;
    return res;
}

// Raised-cosine bump over (y0, y1): zero at the edges, one at the midpoint.
double window(double y, double y0, double y1) {
    if (y <= y0 || y >= y1) return 0.0;
    return 0.5 - 0.5 * std::cos(2.0 * M_PI * (y - y0) / (y1 - y0));
}

std::vector<SparseWeight> ramp_weights(double y, const std::vector<std::pair<double, int>>& stops) {
    // Piecewise-linear blend between consecutive (height, joint) control stops.
    if (y <= stops.front().first) return {{stops.front().second, 1.0}};
    if (y >= stops.back().first) return {{stops.back().second, 1.0}};
    for (std::size_t s = 0; s + 1 < stops.size(); ++s) {
        const auto& [y0, j0] = stops[s];
        const auto& [y1, j1] = stops[s + 1];
        if (y < y1) {
            const double w1 = (y - y0) / (y1 - y0);
            if (w1 <= 0.0) return {{j0, 1.0}};
            return {{j0, 1.0 - w1}, {j1, w1}};
        }
    }
    return {{stops.back().second, 1.0}};
}

std::vector<SparseWeight> uniform_over(const std::vector<int>& ids) {
    std::vector<SparseWeight> row;
    row.reserve(ids.size());
    const double w = 1.0 / static_cast<double>(ids.size());
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) row.push_back({ids[i], w});
    // Force the row to sum to exactly 1.
    double acc = 0.0;
    for (const auto& sw : row) acc += sw.weight;
    row.push_back({ids.back(), 1.0 - acc});
    return row;
}

}  // namespace

BodyModel synthetic_model() {
    BodyModel model;
    model.gender = "neutral";
    model.up_axis = UpAxis::Y;
    TriangleMesh& mesh = model.template_mesh;

    const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();

    // Torso: vertical elliptical tube (wider across x), hip bulge at 0.95,
    // waist minimum at 1.10, chest bulge at 1.32.
    const std::vector<double> torso_y = {0.85, 0.90, 0.95, 1.00, 1.05, 1.10, 1.15,
                                         1.20, 1.26, 1.32, 1.38, 1.42, 1.45};
    const std::vector<double> torso_r = {0.150, 0.160, 0.166, 0.158, 0.147, 0.138, 0.141,
                                         0.147, 0.153, 0.157, 0.149, 0.136, 0.124};
    std::vector<Ring> torso_rings;
    for (std::size_t i = 0; i < torso_y.size(); ++i)
        torso_rings.push_back({Vec3(0, torso_y[i], 0), 0.80 * torso_r[i], 1.15 * torso_r[i]});
    const TubeResult torso = add_tube(mesh, torso_rings, ez, ex, 24);  // ez x ex = ey

    // Head and neck, overlapping the torso top so the body reads as closed.
    const std::vector<double> head_y = {1.43, 1.47, 1.50, 1.54, 1.60, 1.66, 1.71, 1.74, 1.75};
    const std::vector<double> head_r = {0.056, 0.048, 0.047, 0.056, 0.082, 0.084, 0.068, 0.050, 0.028};
    std::vector<Ring> head_rings;
    for (std::size_t i = 0; i < head_y.size(); ++i)
        head_rings.push_back({Vec3(0, head_y[i], 0), head_r[i], head_r[i]});
    const TubeResult head = add_tube(mesh, head_rings, ez, ex, 14);

    // Legs: flat-soled tubes (bottom cap on y = 0 doubles as the foot sole).
    const std::vector<double> leg_y = {0.00, 0.03, 0.07, 0.12, 0.22, 0.36,
                                       0.48, 0.60, 0.72, 0.85, 0.92, 0.95};
    const std::vector<double> leg_r = {0.056, 0.056, 0.044, 0.046, 0.053, 0.061,
                                       0.058, 0.063, 0.070, 0.077, 0.080, 0.082};
    TubeResult legs[2];
    const double leg_x[2] = {-0.09, 0.09};
    for (int side = 0; side < 2; ++side) {
        std::vector<Ring> rings;
        for (std::size_t i = 0; i < leg_y.size(); ++i)
            rings.push_back({Vec3(leg_x[side], leg_y[i], 0), leg_r[i], leg_r[i]});
        legs[side] = add_tube(mesh, rings, ez, ex, 12);
    }

    // Arms in A-pose: straight tubes angled 38 degrees off vertical.
    const double arm_angle = 38.0 * M_PI / 180.0;
    const std::vector<double> arm_t = {0.00, 0.07, 0.15, 0.24, 0.33, 0.42, 0.50};
    const std::vector<double> arm_r = {0.049, 0.046, 0.041, 0.037, 0.034, 0.031, 0.030};
    TubeResult arms[2];
    Vec3 shoulder_center[2];
    for (int side = 0; side < 2; ++side) {
        const double sx = side == 0 ? -1.0 : 1.0;
        shoulder_center[side] = Vec3(sx * 0.16, 1.42, 0);
        const Vec3 axis(sx * std::sin(arm_angle), -std::cos(arm_angle), 0);
        const Vec3 a1 = axis.cross(ey).normalized();
        const Vec3 a2 = axis.cross(a1);  // a1 x a2 = axis
        std::vector<Ring> rings;
        for (std::size_t i = 0; i < arm_t.size(); ++i)
            rings.push_back({shoulder_center[side] + arm_t[i] * axis, arm_r[i], arm_r[i]});
        arms[side] = add_tube(mesh, rings, a1, a2, 10);
    }

    const int nv = static_cast<int>(mesh.vertices.size());

    // Skinning: height ramps between chain joints; arms ride their shoulder.
    model.kinematic_tree = {-1, kPelvis, kSpine, kChest, kPelvis, kHipL,
                            kKneeL, kPelvis, kHipR, kKneeR, kChest, kChest};
    model.joint_names = {"pelvis", "spine", "chest", "neck", "hip_l", "knee_l",
                         "ankle_l", "hip_r", "knee_r", "ankle_r", "shoulder_l", "shoulder_r"};
    model.torso_joints = {kPelvis, kSpine, kChest, kNeck};
    model.skin_weights.resize(nv);
    const std::vector<std::pair<double, int>> torso_stops = {
        {0.95, kPelvis}, {1.15, kSpine}, {1.32, kChest}, {1.50, kNeck}};
    auto in_part = [](const TubeResult& part, int i) {
        return i >= part.first_vertex && i < part.first_vertex + part.vertex_count;
    };
    for (int i = 0; i < nv; ++i) {
        const double y = mesh.vertices[i].y();
        if (in_part(torso, i) || in_part(head, i)) {
            model.skin_weights[i] = ramp_weights(y, torso_stops);
        } else if (in_part(legs[0], i) || in_part(legs[1], i)) {
            const bool left = in_part(legs[0], i);
            const std::vector<std::pair<double, int>> stops = {
                {0.07, left ? kAnkleL : kAnkleR},
                {0.48, left ? kKneeL : kKneeR},
                {0.92, left ? kHipL : kHipR}};
            model.skin_weights[i] = ramp_weights(y, stops);
        } else {
            model.skin_weights[i] = {{in_part(arms[0], i) ? kShoulderL : kShoulderR, 1.0}};
        }
    }

    // Joints regressed from full rings so girth modes cancel by symmetry.
    model.joint_regressor.resize(kJointCount);
    model.joint_regressor[kPelvis] = uniform_over(torso.ring_vertices[2]);   // y = 0.95
    model.joint_regressor[kSpine] = uniform_over(torso.ring_vertices[6]);    // y = 1.15
    model.joint_regressor[kChest] = uniform_over(torso.ring_vertices[9]);    // y = 1.32
    model.joint_regressor[kNeck] = uniform_over(head.ring_vertices[2]);      // y = 1.50
    for (int side = 0; side < 2; ++side) {
        const int hip = side == 0 ? kHipL : kHipR;
        const int knee = side == 0 ? kKneeL : kKneeR;
        const int ankle = side == 0 ? kAnkleL : kAnkleR;
        model.joint_regressor[hip] = uniform_over(legs[side].ring_vertices[10]);   // y = 0.92
        model.joint_regressor[knee] = uniform_over(legs[side].ring_vertices[6]);   // y = 0.48
        model.joint_regressor[ankle] = uniform_over(legs[side].ring_vertices[2]);  // y = 0.07
        model.joint_regressor[side == 0 ? kShoulderL : kShoulderR] =
            uniform_over(arms[side].ring_vertices[0]);
    }

    model.pose_prior.assign(kJointCount, Vec3::Zero());  // template is the A-pose

    // Shape modes: uniform scale about the ground origin plus three horizontal
    // girth bumps on the torso.
    model.shape_names = {"scale", "torso_girth", "hip_girth", "chest_girth"};
    model.shape_dirs.assign(4, std::vector<Vec3>(nv, Vec3::Zero()));
    for (int i = 0; i < nv; ++i) {
        const Vec3& v = mesh.vertices[i];
        model.shape_dirs[0][i] = v;
        if (in_part(torso, i)) {
            const Vec3 radial(v.x(), 0.0, v.z());
            model.shape_dirs[1][i] = 0.30 * window(v.y(), 0.85, 1.45) * radial;
            model.shape_dirs[2][i] = 0.35 * window(v.y(), 0.85, 1.05) * radial;
            model.shape_dirs[3][i] = 0.35 * window(v.y(), 1.20, 1.45) * radial;
        }
    }

    auto collect = [&](const std::function<bool(int, double)>& pred) {
        std::vector<int> ids;
        for (int i = 0; i < nv; ++i)
            if (pred(i, mesh.vertices[i].y())) ids.push_back(i);
        return ids;
    };
    model.vertex_groups["feet"] =
        collect([&](int i, double y) { return (in_part(legs[0], i) || in_part(legs[1], i)) && y < 0.005; });
    model.vertex_groups["hip_region"] =
        collect([&](int i, double y) { return in_part(torso, i) && y >= 0.88 && y <= 1.02; });
    model.vertex_groups["waist_region"] =
        collect([&](int i, double y) { return in_part(torso, i) && y >= 1.04 && y <= 1.18; });
    model.vertex_groups["chest_region"] =
        collect([&](int i, double y) { return in_part(torso, i) && y >= 1.24 && y <= 1.38; });
    model.vertex_groups["head_top"] =
        collect([&](int i, double y) { return in_part(head, i) && y >= 1.72; });

    model.finalize();
    return model;
}

}  // namespace mmanthro
