#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mmanthro/geometry.hpp"
#include "mmanthro/types.hpp"

namespace mmanthro {

struct SparseWeight {
    int index = 0;
    double weight = 0.0;
};

/// Parametric body mesh V(beta, theta, t): template + linear shape
/// blendshapes, joints regressed from the shaped vertices, axis-angle forward
/// kinematics, linear blend skinning. Immutable after finalize().
struct BodyModel {
    TriangleMesh template_mesh;  // rest pose (A-pose for the synthetic model)
    std::vector<std::string> shape_names;
    std::vector<std::vector<Vec3>> shape_dirs;              // |beta| fields, N_v each
    std::vector<std::vector<SparseWeight>> joint_regressor; // K rows over vertices
    std::vector<int> kinematic_tree;                        // parent per joint, root -1
    std::vector<std::vector<SparseWeight>> skin_weights;    // N_v rows over joints
    UpAxis up_axis = UpAxis::Y;
    std::map<std::string, std::vector<int>> vertex_groups;
    std::vector<Vec3> pose_prior;  // K axis-angle triples
    std::string gender = "neutral";
    std::vector<std::string> joint_names;  // optional
    std::vector<int> torso_joints;         // optional, gates measurement slices

    // Derived by finalize().
    std::vector<int> traversal_order;                  // parents before children
    std::vector<std::vector<Vec3>> joint_shape_dirs;   // [beta][joint] rest-joint derivative

    int joint_count() const { return static_cast<int>(kinematic_tree.size()); }
    int shape_count() const { return static_cast<int>(shape_dirs.size()); }
    std::size_t vertex_count() const { return template_mesh.vertex_count(); }
    int param_count() const { return shape_count() + 3 * joint_count() + 3; }

    const std::vector<int>& group(const std::string& name) const;

    /// Checks every model invariant; throws SchemaError naming the failure.
    void validate() const;
    /// validate() plus derived tables. Call after construction or load.
    void finalize();
};

struct BodyParams {
    Eigen::VectorXd beta;
    std::vector<Vec3> theta;  // axis-angle per joint
    Vec3 translation = Vec3::Zero();

    /// beta = 0, theta = model.pose_prior, t = 0.
    static BodyParams rest(const BodyModel& model);

    /// Flat layout [beta | theta joint-major xyz | t].
    Eigen::VectorXd to_vector() const;
    static BodyParams from_vector(const BodyModel& model, const Eigen::VectorXd& v);

    void validate(const BodyModel& model) const;
};

/// Rotation matrix of an axis-angle vector (exponential map).
Mat3 rodrigues(const Vec3& axis_angle);
/// dR/d(axis_angle component) for the three components.
std::array<Mat3, 3> rodrigues_jacobian(const Vec3& axis_angle);

/// Intermediates of one pose evaluation, reused by the backward pass.
struct PoseCache {
    std::vector<Vec3> shaped;       // shaped template vertices
    std::vector<Vec3> rest_joints;  // regressed from shaped vertices
    std::vector<Mat3> local_rot;    // per-joint Rodrigues
    std::vector<Mat3> world_rot;    // world affine linear part
    std::vector<Vec3> world_trans;  // world affine translation part
    std::vector<Vec3> vertices;     // final posed, translated vertices
};

/// template + sum_k beta_k * shape_dirs[k]; topology unchanged.
TriangleMesh shape_mesh(const BodyModel& model, const Eigen::VectorXd& beta);

PoseCache pose_with_cache(const BodyModel& model, const BodyParams& params);
TriangleMesh pose_mesh(const BodyModel& model, const BodyParams& params);

/// Chain-rule pullback: gradient of a scalar energy w.r.t. the flat parameter
/// vector, given its gradient w.r.t. the posed vertices.
Eigen::VectorXd pose_backward(const BodyModel& model, const BodyParams& params,
                              const PoseCache& cache, const std::vector<Vec3>& d_vertices);

/// Dense Jacobian of all posed vertices w.r.t. the flat parameter vector,
/// rows = 3*N_v (vertex-major xyz), cols = param_count().
Eigen::MatrixXd pose_jacobian(const BodyModel& model, const BodyParams& params);

/// Deterministic built-in humanoid: tube-segment body, K = 12 joints,
/// |beta| = 4 (scale, torso_girth, hip_girth, chest_girth), A-pose template
/// with feet on y = 0, all measurement groups populated.
BodyModel synthetic_model();

BodyModel load_model(const std::string& path);
void save_model(const BodyModel& model, const std::string& path);

}  // namespace mmanthro
