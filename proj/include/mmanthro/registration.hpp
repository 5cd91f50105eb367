#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mmanthro/body_model.hpp"
#include "mmanthro/nn_index.hpp"
#include "mmanthro/types.hpp"

namespace mmanthro {

struct FitConfig {
    double lambda_chamfer = 1.0;
    double lambda_ground = 0.5;
    double lambda_pose = 0.0;   // optional quadratic pose-prior penalty
    double lambda_shape = 0.0;  // optional quadratic beta penalty
    double learning_rate = 0.001;
    int max_iters = 700;
    int patience = 20;
    int weight_refresh_period = 50;
    double y_ground = 0.0;
    std::vector<Vec3> panel_normals = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
    std::uint64_t rng_seed = 0;
    std::string optimizer = "adam";  // adam | gd

    void validate() const;
};

struct EnergyBreakdown {
    double chamfer = 0.0;     // lambda_chamfer * E_cham
    double ground = 0.0;      // lambda_ground  * E_ground
    double pose_prior = 0.0;  // lambda_pose    * ||theta - theta_prior||^2
    double shape_reg = 0.0;   // lambda_shape   * ||beta||^2

    double total() const { return chamfer + ground + pose_prior + shape_reg; }
};

struct FitResult {
    BodyParams params;
    double final_energy = 0.0;
    EnergyBreakdown breakdown;
    int iterations_run = 0;
    std::string converged_by;  // "patience" | "max_iters"
    std::vector<double> energy_trace;               // energy at iteration i (0-based)
    std::vector<int> weight_refresh_iterations;     // 0, P, 2P, ... while running
};

/// w_i = max over panels of (n_i . n_panel)^2. Inputs must be unit vectors
/// (norm within 1e-6).
std::vector<double> visibility_weights(const std::vector<Vec3>& normals,
                                       const std::vector<Vec3>& panel_normals);

struct VertexEnergy {
    double value = 0.0;
    std::vector<Vec3> d_vertices;
};

/// Visibility-weighted bidirectional Chamfer energy with the nearest-neighbor
/// correspondences held fixed in the gradient.
VertexEnergy chamfer_energy(const std::vector<Vec3>& vertices, const std::vector<double>& weights,
                            const PointCloud& cloud, const NearestNeighborIndex& cloud_index,
                            const NearestNeighborIndex& vertex_index);

/// Mean squared up-axis deviation of the foot vertices from y_ground.
VertexEnergy ground_energy(const std::vector<Vec3>& vertices, const std::vector<int>& foot_indices,
                           double y_ground, UpAxis up);

struct TotalEnergy {
    double value = 0.0;
    Eigen::VectorXd d_params;
    EnergyBreakdown breakdown;
};

/// lambda_C * E_cham + lambda_G * E_ground (+ optional priors), with the
/// parameter gradient pulled back through the pose Jacobian. The visibility
/// weights are treated as constants.
TotalEnergy total_energy(const BodyParams& params, const BodyModel& model, const PointCloud& cloud,
                         const NearestNeighborIndex& cloud_index,
                         const std::vector<double>& weights, const FitConfig& config);
TotalEnergy total_energy(const BodyParams& params, const BodyModel& model, const PointCloud& cloud,
                         const std::vector<double>& weights, const FitConfig& config);

/// theta = pose_prior, beta = 0, t matching the cloud centroid horizontally
/// and resting the lowest foot vertex on y_ground.
BodyParams rigid_init(const BodyModel& model, const PointCloud& cloud, const FitConfig& config);

/// First-order fit from rigid_init with periodic visibility-weight refresh and
/// early stopping (strict decrease > 1e-9 counts as improvement).
FitResult fit(const BodyModel& model, const PointCloud& cloud, const FitConfig& config);

constexpr double kImprovementEpsilon = 1e-9;

}  // namespace mmanthro
