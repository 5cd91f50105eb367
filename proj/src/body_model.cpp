#include "mmanthro/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace mmanthro {

const std::vector<int>& BodyModel::group(const std::string& name) const {
    const auto it = vertex_groups.find(name);
    if (it == vertex_groups.end())
        throw SchemaError("model has no vertex group \"" + name + "\"");
    return it->second;
}

void BodyModel::validate() const {
    template_mesh.validate();
    if (template_mesh.vertex_count() == 0) throw SchemaError("template mesh has no vertices");
    const int nv = static_cast<int>(vertex_count());
    const int k = joint_count();
    if (k < 1) throw SchemaError("kinematic_tree is empty");

    if (!shape_names.empty() && shape_names.size() != shape_dirs.size())
        throw SchemaError("shape_names count does not match shape_dirs count");
    for (std::size_t b = 0; b < shape_dirs.size(); ++b) {
        if (shape_dirs[b].size() != vertex_count())
            throw SchemaError("shape_dirs[" + std::to_string(b) + "] has " +
                              std::to_string(shape_dirs[b].size()) + " rows, expected " +
                              std::to_string(nv));
        for (const Vec3& d : shape_dirs[b])
            if (!d.allFinite())
                throw SchemaError("shape_dirs[" + std::to_string(b) + "] contains non-finite values");
    }

    if (static_cast<int>(joint_regressor.size()) != k)
        throw SchemaError("joint_regressor must have one row per joint");
    for (int j = 0; j < k; ++j) {
        if (joint_regressor[j].empty())
            throw SchemaError("joint_regressor row " + std::to_string(j) + " is empty");
        double sum = 0.0;
        for (const auto& [idx, w] : joint_regressor[j]) {
            if (idx < 0 || idx >= nv)
                throw SchemaError("joint_regressor row " + std::to_string(j) +
                                  " references vertex out of range");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw SchemaError("joint_regressor row " + std::to_string(j) + " sums to " +
                              std::to_string(sum) + " (must be 1 +- 1e-6)");
    }

    int roots = 0;
    for (int j = 0; j < k; ++j) {
        const int parent = kinematic_tree[j];
        if (parent == -1) {
            ++roots;
        } else if (parent < 0 || parent >= k) {
            throw SchemaError("kinematic_tree parent of joint " + std::to_string(j) +
                              " out of range");
        }
    }
    if (roots != 1) throw SchemaError("kinematic_tree must have exactly one root");
    for (int j = 0; j < k; ++j) {  // every joint must reach the root (no cycles)
        int cur = j, steps = 0;
        while (kinematic_tree[cur] != -1) {
            cur = kinematic_tree[cur];
            if (++steps > k)
                throw SchemaError("kinematic_tree contains a cycle through joint " +
                                  std::to_string(j));
        }
    }

    if (static_cast<int>(skin_weights.size()) != nv)
        throw SchemaError("skin_weights must have one row per vertex");
    for (int i = 0; i < nv; ++i) {
        double sum = 0.0;
        for (const auto& [j, w] : skin_weights[i]) {
            if (j < 0 || j >= k)
                throw SchemaError("skin weights row " + std::to_string(i) +
                                  " references joint out of range");
            if (w < 0.0)
                throw SchemaError("skin weights row " + std::to_string(i) +
                                  " has a negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw SchemaError("skin weights row " + std::to_string(i) + " sums to " +
                              std::to_string(sum) + " (must be 1 +- 1e-6)");
    }

    if (static_cast<int>(pose_prior.size()) != k)
        throw SchemaError("pose_prior must have one axis-angle triple per joint");
    for (const Vec3& p : pose_prior)
        if (!p.allFinite()) throw SchemaError("pose_prior contains non-finite values");

    for (const auto& [name, indices] : vertex_groups)
        for (int idx : indices)
            if (idx < 0 || idx >= nv)
                throw SchemaError("vertex group \"" + name + "\" index out of range");

    for (int j : torso_joints)
        if (j < 0 || j >= k) throw SchemaError("torso_joints index out of range");
}

void BodyModel::finalize() {
    validate();
    const int k = joint_count();

    traversal_order.clear();
    traversal_order.reserve(k);
    std::deque<int> queue;
    for (int j = 0; j < k; ++j)
        if (kinematic_tree[j] == -1) queue.push_back(j);
    std::vector<std::vector<int>> children(k);
    for (int j = 0; j < k; ++j)
        if (kinematic_tree[j] != -1) children[kinematic_tree[j]].push_back(j);
    while (!queue.empty()) {
        const int j = queue.front();
        queue.pop_front();
        traversal_order.push_back(j);
        for (int c : children[j]) queue.push_back(c);
    }

    // Rest-joint sensitivities to each shape coefficient (regressor is linear).
    joint_shape_dirs.assign(shape_count(), std::vector<Vec3>(k, Vec3::Zero()));
    for (int b = 0; b < shape_count(); ++b)
        for (int j = 0; j < k; ++j)
            for (const auto& [idx, w] : joint_regressor[j])
                joint_shape_dirs[b][j] += w * shape_dirs[b][idx];
}

BodyParams BodyParams::rest(const BodyModel& model) {
    BodyParams p;
    p.beta = Eigen::VectorXd::Zero(model.shape_count());
    p.theta = model.pose_prior;
    p.translation = Vec3::Zero();
    return p;
}

Eigen::VectorXd BodyParams::to_vector() const {
    Eigen::VectorXd v(beta.size() + 3 * static_cast<int>(theta.size()) + 3);
    v.head(beta.size()) = beta;
    for (std::size_t j = 0; j < theta.size(); ++j) v.segment<3>(beta.size() + 3 * j) = theta[j];
    v.tail<3>() = translation;
    return v;
}

BodyParams BodyParams::from_vector(const BodyModel& model, const Eigen::VectorXd& v) {
    if (v.size() != model.param_count())
        throw SchemaError("parameter vector length " + std::to_string(v.size()) +
                          " does not match model DOF " + std::to_string(model.param_count()));
    BodyParams p;
    const int b = model.shape_count();
    p.beta = v.head(b);
    p.theta.resize(model.joint_count());
    for (int j = 0; j < model.joint_count(); ++j) p.theta[j] = v.segment<3>(b + 3 * j);
    p.translation = v.tail<3>();
    return p;
}

void BodyParams::validate(const BodyModel& model) const {
    if (beta.size() != model.shape_count())
        throw SchemaError("beta has " + std::to_string(beta.size()) + " coefficients, model has " +
                          std::to_string(model.shape_count()));
    if (static_cast<int>(theta.size()) != model.joint_count())
        throw SchemaError("theta has " + std::to_string(theta.size()) + " joints, model has " +
                          std::to_string(model.joint_count()));
    if (!beta.allFinite() || !translation.allFinite())
        throw NumericError("body parameters contain non-finite values");
    for (std::size_t j = 0; j < theta.size(); ++j) {
        if (!theta[j].allFinite())
            throw NumericError("theta joint " + std::to_string(j) + " is non-finite");
        if (theta[j].norm() >= M_PI)
            throw NumericError("theta joint " + std::to_string(j) +
                               " outside the canonical axis-angle range (norm >= pi)");
    }
}

namespace {

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

}  // namespace

Mat3 rodrigues(const Vec3& axis_angle) {
    const double theta2 = axis_angle.squaredNorm();
    const Mat3 k = skew(axis_angle);
    if (theta2 < 1e-16) return Mat3::Identity() + k + 0.5 * (k * k);
    const double theta = std::sqrt(theta2);
    return Mat3::Identity() + (std::sin(theta) / theta) * k +
           ((1.0 - std::cos(theta)) / theta2) * (k * k);
}

std::array<Mat3, 3> rodrigues_jacobian(const Vec3& axis_angle) {
    std::array<Mat3, 3> d;
    const double theta2 = axis_angle.squaredNorm();
    if (theta2 < 1e-14) {
        const Mat3 k = skew(axis_angle);
        for (int c = 0; c < 3; ++c) {
            const Mat3 e = skew(Vec3::Unit(c));
            d[c] = e + 0.5 * (e * k + k * e);
        }
        return d;
    }
    const Mat3 r = rodrigues(axis_angle);
    const Mat3 k = skew(axis_angle);
    const Mat3 imr = Mat3::Identity() - r;
    for (int c = 0; c < 3; ++c) {
        const Vec3 w = axis_angle.cross(imr.col(c));
        d[c] = ((axis_angle[c] * k + skew(w)) / theta2) * r;
    }
    return d;
}

TriangleMesh shape_mesh(const BodyModel& model, const Eigen::VectorXd& beta) {
    if (beta.size() != model.shape_count())
        throw SchemaError("beta has " + std::to_string(beta.size()) + " coefficients, model has " +
                          std::to_string(model.shape_count()));
    TriangleMesh mesh = model.template_mesh;
    for (int b = 0; b < model.shape_count(); ++b) {
        if (beta[b] == 0.0) continue;
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
            mesh.vertices[i] += beta[b] * model.shape_dirs[b][i];
    }
    return mesh;
}

PoseCache pose_with_cache(const BodyModel& model, const BodyParams& params) {
    params.validate(model);
    const int k = model.joint_count();
    PoseCache cache;

    cache.shaped.assign(model.template_mesh.vertices.begin(), model.template_mesh.vertices.end());
    for (int b = 0; b < model.shape_count(); ++b) {
        if (params.beta[b] == 0.0) continue;
        for (std::size_t i = 0; i < cache.shaped.size(); ++i)
            cache.shaped[i] += params.beta[b] * model.shape_dirs[b][i];
    }

    cache.rest_joints.assign(k, Vec3::Zero());
    for (int j = 0; j < k; ++j)
        for (const auto& [idx, w] : model.joint_regressor[j])
            cache.rest_joints[j] += w * cache.shaped[idx];

    cache.local_rot.resize(k);
    for (int j = 0; j < k; ++j) cache.local_rot[j] = rodrigues(params.theta[j]);

    // World affine of joint j = parent's affine composed with the rotation
    // about joint j's rest position.
    cache.world_rot.resize(k);
    cache.world_trans.resize(k);
    for (int j : model.traversal_order) {
        const Vec3 local_trans = cache.rest_joints[j] - cache.local_rot[j] * cache.rest_joints[j];
        const int parent = model.kinematic_tree[j];
        if (parent == -1) {
            cache.world_rot[j] = cache.local_rot[j];
            cache.world_trans[j] = local_trans;
        } else {
            cache.world_rot[j] = cache.world_rot[parent] * cache.local_rot[j];
            cache.world_trans[j] = cache.world_rot[parent] * local_trans + cache.world_trans[parent];
        }
    }

    cache.vertices.resize(cache.shaped.size());
    for (std::size_t i = 0; i < cache.shaped.size(); ++i) {
        Vec3 v = Vec3::Zero();
        for (const auto& [j, w] : model.skin_weights[i])
            v += w * (cache.world_rot[j] * cache.shaped[i] + cache.world_trans[j]);
        cache.vertices[i] = v + params.translation;
    }
    return cache;
}

TriangleMesh pose_mesh(const BodyModel& model, const BodyParams& params) {
    TriangleMesh mesh;
    mesh.vertices = pose_with_cache(model, params).vertices;
    mesh.faces = model.template_mesh.faces;
    return mesh;
}

namespace {

struct WorldDeriv {
    std::vector<Mat3> rot;
    std::vector<Vec3> trans;
    void reset(int k) {
        rot.assign(k, Mat3::Zero());
        trans.assign(k, Vec3::Zero());
    }
};

// d(world affine)/d(theta[m][c]): nonzero on m's subtree only.
void world_deriv_theta(const BodyModel& model, const PoseCache& cache, int m, const Mat3& d_rot_m,
                       WorldDeriv& out) {
    const int k = model.joint_count();
    out.reset(k);
    std::vector<char> active(k, 0);
    const Vec3 d_local_trans = -(d_rot_m * cache.rest_joints[m]);
    const int parent_m = model.kinematic_tree[m];
    if (parent_m == -1) {
        out.rot[m] = d_rot_m;
        out.trans[m] = d_local_trans;
    } else {
        out.rot[m] = cache.world_rot[parent_m] * d_rot_m;
        out.trans[m] = cache.world_rot[parent_m] * d_local_trans;
    }
    active[m] = 1;
    for (int j : model.traversal_order) {
        const int parent = model.kinematic_tree[j];
        if (j == m || parent == -1 || !active[parent]) continue;
        active[j] = 1;
        const Vec3 local_trans = cache.rest_joints[j] - cache.local_rot[j] * cache.rest_joints[j];
        out.rot[j] = out.rot[parent] * cache.local_rot[j];
        out.trans[j] = out.rot[parent] * local_trans + out.trans[parent];
    }
}

// d(world affine)/d(beta[b]): rotations are beta-independent, only the
// rest-joint translations move.
void world_deriv_beta(const BodyModel& model, const PoseCache& cache, int b, WorldDeriv& out) {
    const int k = model.joint_count();
    out.reset(k);
    for (int j : model.traversal_order) {
        const Vec3 d_joint = model.joint_shape_dirs[b][j];
        const Vec3 d_local_trans = d_joint - cache.local_rot[j] * d_joint;
        const int parent = model.kinematic_tree[j];
        if (parent == -1) {
            out.trans[j] = d_local_trans;
        } else {
            out.trans[j] = cache.world_rot[parent] * d_local_trans + out.trans[parent];
        }
    }
}

}  // namespace

Eigen::VectorXd pose_backward(const BodyModel& model, const BodyParams& params,
                              const PoseCache& cache, const std::vector<Vec3>& d_vertices) {
    if (d_vertices.size() != model.vertex_count())
        throw SchemaError("vertex gradient size does not match the model");
    const int k = model.joint_count();
    const int nb = model.shape_count();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.param_count());

    // Per-joint accumulators: <dRw_j, M_j>_F + u_j . dbw_j reproduces
    // sum_i w_ij g_i . (dRw_j s_i + dbw_j) for any parameter.
    std::vector<Mat3> m_acc(k, Mat3::Zero());
    std::vector<Vec3> u_acc(k, Vec3::Zero());
    Vec3 g_sum = Vec3::Zero();
    for (std::size_t i = 0; i < d_vertices.size(); ++i) {
        const Vec3& g = d_vertices[i];
        g_sum += g;
        for (const auto& [j, w] : model.skin_weights[i]) {
            m_acc[j] += (w * g) * cache.shaped[i].transpose();
            u_acc[j] += w * g;
        }
    }

    grad.tail<3>() = g_sum;

    if (nb > 0) {
        // Direct blendshape path: rotated displacement against the gradient.
        std::vector<Vec3> h(d_vertices.size(), Vec3::Zero());
        for (std::size_t i = 0; i < d_vertices.size(); ++i)
            for (const auto& [j, w] : model.skin_weights[i])
                h[i] += w * (cache.world_rot[j].transpose() * d_vertices[i]);
        for (int b = 0; b < nb; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d_vertices.size(); ++i)
                acc += h[i].dot(model.shape_dirs[b][i]);
            grad[b] = acc;
        }
        // Rest-joint path: joints move with beta and drag the skinning frames.
        WorldDeriv deriv;
        for (int b = 0; b < nb; ++b) {
            world_deriv_beta(model, cache, b, deriv);
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += u_acc[j].dot(deriv.trans[j]);
            grad[b] += acc;
        }
    }

    WorldDeriv deriv;
    for (int m = 0; m < k; ++m) {
        const auto d_rot = rodrigues_jacobian(params.theta[m]);
        for (int c = 0; c < 3; ++c) {
            world_deriv_theta(model, cache, m, d_rot[c], deriv);
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
                acc += (deriv.rot[j].array() * m_acc[j].array()).sum();
                acc += u_acc[j].dot(deriv.trans[j]);
            }
            grad[nb + 3 * m + c] = acc;
        }
    }
    return grad;
}

Eigen::MatrixXd pose_jacobian(const BodyModel& model, const BodyParams& params) {
    const PoseCache cache = pose_with_cache(model, params);
    const int k = model.joint_count();
    const int nb = model.shape_count();
    const int nv = static_cast<int>(model.vertex_count());
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * nv, model.param_count());

    WorldDeriv deriv;
    for (int b = 0; b < nb; ++b) {
        world_deriv_beta(model, cache, b, deriv);
        for (int i = 0; i < nv; ++i) {
            Vec3 dv = Vec3::Zero();
            for (const auto& [j, w] : model.skin_weights[i])
                dv += w * (cache.world_rot[j] * model.shape_dirs[b][i] + deriv.trans[j]);
            jac.block<3, 1>(3 * i, b) = dv;
        }
    }
    for (int m = 0; m < k; ++m) {
        const auto d_rot = rodrigues_jacobian(params.theta[m]);
        for (int c = 0; c < 3; ++c) {
            world_deriv_theta(model, cache, m, d_rot[c], deriv);
            for (int i = 0; i < nv; ++i) {
                Vec3 dv = Vec3::Zero();
                for (const auto& [j, w] : model.skin_weights[i])
                    dv += w * (deriv.rot[j] * cache.shaped[i] + deriv.trans[j]);
                jac.block<3, 1>(3 * i, nb + 3 * m + c) = dv;
            }
        }
    }
    for (int i = 0; i < nv; ++i) jac.block<3, 3>(3 * i, nb + 3 * k) = Mat3::Identity();
    return jac;
}

}  // namespace mmanthro
