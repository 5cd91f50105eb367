#include "mmanthro/registration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmanthro/geometry.hpp"

namespace mmanthro {

void FitConfig::validate() const {
    if (lambda_chamfer < 0 || lambda_ground < 0 || lambda_pose < 0 || lambda_shape < 0)
        throw SchemaError("energy coefficients must be >= 0");
    if (learning_rate <= 0) throw SchemaError("learning_rate must be > 0");
    if (max_iters < 1) throw SchemaError("max_iters must be >= 1");
    if (patience < 1) throw SchemaError("patience must be >= 1");
    if (weight_refresh_period < 1) throw SchemaError("weight_refresh_period must be >= 1");
    if (panel_normals.empty()) throw SchemaError("at least one panel normal is required");
    for (const Vec3& n : panel_normals)
        if (std::abs(n.norm() - 1.0) > 1e-6)
            throw SchemaError("panel normals must be unit vectors");
    if (optimizer != "adam" && optimizer != "gd")
        throw SchemaError("optimizer must be \"adam\" or \"gd\"");
}

std::vector<double> visibility_weights(const std::vector<Vec3>& normals,
                                       const std::vector<Vec3>& panel_normals) {
    if (panel_normals.empty()) throw SchemaError("visibility_weights needs panel normals");
    for (const Vec3& n : panel_normals)
        if (std::abs(n.norm() - 1.0) > 1e-6)
            throw NumericError("panel normal is not unit length");
    std::vector<double> weights(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i) {
        if (std::abs(normals[i].norm() - 1.0) > 1e-6)
            throw NumericError("vertex normal " + std::to_string(i) + " is not unit length");
        double w = 0.0;
        for (const Vec3& p : panel_normals) {
            const double c = normals[i].dot(p);
            w = std::max(w, c * c);
        }
        weights[i] = w;
    }
    return weights;
}

VertexEnergy chamfer_energy(const std::vector<Vec3>& vertices, const std::vector<double>& weights,
                            const PointCloud& cloud, const NearestNeighborIndex& cloud_index,
                            const NearestNeighborIndex& vertex_index) {
    if (cloud.empty()) throw NumericError("chamfer energy against an empty cloud");
    if (weights.size() != vertices.size())
        throw SchemaError("weight count does not match vertex count");
    const double nv = static_cast<double>(vertices.size());
    const double np = static_cast<double>(cloud.size());

    VertexEnergy e;
    e.d_vertices.assign(vertices.size(), Vec3::Zero());

    double forward = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto nn = cloud_index.query(vertices[i]);
        forward += weights[i] * nn.squared_distance;
        e.d_vertices[i] += (2.0 * weights[i] / nv) * (vertices[i] - nn.point);
    }
    double backward = 0.0;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
        const auto nn = vertex_index.query(cloud.points[j]);
        backward += nn.squared_distance;
        e.d_vertices[nn.index] += (2.0 / np) * (nn.point - cloud.points[j]);
    }
    e.value = forward / nv + backward / np;
    return e;
}

VertexEnergy ground_energy(const std::vector<Vec3>& vertices, const std::vector<int>& foot_indices,
                           double y_ground, UpAxis up_axis) {
    if (foot_indices.empty()) throw NumericError("ground energy with an empty foot set");
    const int up = axis_index(up_axis);
    const double nf = static_cast<double>(foot_indices.size());
    VertexEnergy e;
    e.d_vertices.assign(vertices.size(), Vec3::Zero());
    for (int i : foot_indices) {
        const double dy = vertices[i][up] - y_ground;
        e.value += dy * dy / nf;
        e.d_vertices[i][up] += 2.0 * dy / nf;
    }
    return e;
}

namespace {

TotalEnergy evaluate_total(const BodyParams& params, const BodyModel& model,
                           const PointCloud& cloud, const NearestNeighborIndex& cloud_index,
                           const std::vector<double>& weights, const FitConfig& config) {
    const PoseCache cache = pose_with_cache(model, params);
    std::vector<Vec3> d_vertices(cache.vertices.size(), Vec3::Zero());

    TotalEnergy total;
    if (config.lambda_chamfer > 0) {
        const NearestNeighborIndex vertex_index(cache.vertices);
        const VertexEnergy cham =
            chamfer_energy(cache.vertices, weights, cloud, cloud_index, vertex_index);
        total.breakdown.chamfer = config.lambda_chamfer * cham.value;
        for (std::size_t i = 0; i < d_vertices.size(); ++i)
            d_vertices[i] += config.lambda_chamfer * cham.d_vertices[i];
    }
    if (config.lambda_ground > 0) {
        const VertexEnergy ground = ground_energy(cache.vertices, model.group("feet"),
                                                  config.y_ground, model.up_axis);
        total.breakdown.ground = config.lambda_ground * ground.value;
        for (std::size_t i = 0; i < d_vertices.size(); ++i)
            d_vertices[i] += config.lambda_ground * ground.d_vertices[i];
    }

    total.d_params = pose_backward(model, params, cache, d_vertices);

    const int nb = model.shape_count();
    if (config.lambda_pose > 0) {
        double e = 0.0;
        for (int j = 0; j < model.joint_count(); ++j) {
            const Vec3 d = params.theta[j] - model.pose_prior[j];
            e += d.squaredNorm();
            total.d_params.segment<3>(nb + 3 * j) += config.lambda_pose * 2.0 * d;
        }
        total.breakdown.pose_prior = config.lambda_pose * e;
    }
    if (config.lambda_shape > 0) {
        total.breakdown.shape_reg = config.lambda_shape * params.beta.squaredNorm();
        total.d_params.head(nb) += config.lambda_shape * 2.0 * params.beta;
    }
    total.value = total.breakdown.total();
    return total;
}

std::vector<double> refresh_weights(const BodyModel& model, const BodyParams& params,
                                    const FitConfig& config) {
    TriangleMesh posed;
    posed.vertices = pose_with_cache(model, params).vertices;
    posed.faces = model.template_mesh.faces;
    return visibility_weights(vertex_normals(posed), config.panel_normals);
}

}  // namespace

TotalEnergy total_energy(const BodyParams& params, const BodyModel& model, const PointCloud& cloud,
                         const NearestNeighborIndex& cloud_index,
                         const std::vector<double>& weights, const FitConfig& config) {
    config.validate();
    return evaluate_total(params, model, cloud, cloud_index, weights, config);
}

TotalEnergy total_energy(const BodyParams& params, const BodyModel& model, const PointCloud& cloud,
                         const std::vector<double>& weights, const FitConfig& config) {
    config.validate();
    const NearestNeighborIndex cloud_index(cloud.points);
    return evaluate_total(params, model, cloud, cloud_index, weights, config);
}

BodyParams rigid_init(const BodyModel& model, const PointCloud& cloud, const FitConfig& config) {
    if (cloud.empty()) throw NumericError("rigid_init with an empty cloud");
    BodyParams params = BodyParams::rest(model);
    const PoseCache cache = pose_with_cache(model, params);
    const int up = axis_index(model.up_axis);

    Vec3 mesh_centroid = Vec3::Zero();
    for (const Vec3& v : cache.vertices) mesh_centroid += v;
    mesh_centroid /= static_cast<double>(cache.vertices.size());
    const Vec3 cloud_centroid = cloud.centroid();

    // Horizontal centroid match; yaw comes from the known panel geometry
    // (the template already faces the front panel).
    Vec3 t = cloud_centroid - mesh_centroid;
    double lowest_foot = std::numeric_limits<double>::infinity();
    for (int i : model.group("feet")) lowest_foot = std::min(lowest_foot, cache.vertices[i][up]);
    t[up] = config.y_ground - lowest_foot;
    params.translation = t;
    return params;
}

FitResult fit(const BodyModel& model, const PointCloud& cloud, const FitConfig& config) {
    config.validate();
    if (cloud.empty()) throw NumericError("fit with an empty cloud");
    cloud.check_finite();

    const NearestNeighborIndex cloud_index(cloud.points);
    BodyParams params = rigid_init(model, cloud, config);
    Eigen::VectorXd x = params.to_vector();

    const int n = static_cast<int>(x.size());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    FitResult result;
    result.params = params;
    double best = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    std::vector<double> weights;

    // Iterations are 0-based in the trace; weights refresh at 0, P, 2P, ...
    for (int iter = 0; iter < config.max_iters; ++iter) {
        params = BodyParams::from_vector(model, x);
        if (iter % config.weight_refresh_period == 0) {
            weights = refresh_weights(model, params, config);
            result.weight_refresh_iterations.push_back(iter);
        }

        const TotalEnergy energy = evaluate_total(params, model, cloud, cloud_index, weights, config);
        if (!std::isfinite(energy.value)) {
            std::ostringstream msg;
            msg << "non-finite energy at iteration " << iter << "; parameters:";
            for (int i = 0; i < x.size(); ++i) msg << " " << x[i];
            throw NumericError(msg.str());
        }
        result.energy_trace.push_back(energy.value);

        if (energy.value < best - kImprovementEpsilon) {
            best = energy.value;
            result.params = params;
            result.breakdown = energy.breakdown;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        result.iterations_run = iter + 1;
        if (since_improvement >= config.patience) {
            result.converged_by = "patience";
            break;
        }
        if (iter + 1 == config.max_iters) {
            result.converged_by = "max_iters";
            break;
        }

        if (config.optimizer == "adam") {
            m = beta1 * m + (1.0 - beta1) * energy.d_params;
            v = beta2 * v + (1.0 - beta2) * energy.d_params.cwiseProduct(energy.d_params);
            const double bc1 = 1.0 - std::pow(beta1, iter + 1);
            const double bc2 = 1.0 - std::pow(beta2, iter + 1);
            for (int i = 0; i < n; ++i)
                x[i] -= config.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        } else {
            x -= config.learning_rate * energy.d_params;
        }
    }

    result.final_energy = best;
    return result;
}

}  // namespace mmanthro
