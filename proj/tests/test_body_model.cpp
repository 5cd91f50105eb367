#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "mmanthro/body_model.hpp"
#include "mmanthro/io.hpp"
#include "support/oracles.hpp"

using namespace mmanthro;

namespace {

BodyParams random_params(const BodyModel& model, std::mt19937_64& rng, double beta_scale = 0.2,
                         double theta_scale = 0.15) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BodyParams p = BodyParams::rest(model);
    for (int b = 0; b < model.shape_count(); ++b) p.beta[b] = beta_scale * u(rng);
    for (auto& t : p.theta) t = theta_scale * Vec3(u(rng), u(rng), u(rng));
    p.translation = Vec3(u(rng), u(rng), u(rng)) * 0.3;
    return p;
}

}  // namespace

TEST_CASE("rodrigues matches finite differences") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec3 aa = (trial == 0) ? Vec3::Zero() : Vec3(u(rng), u(rng), u(rng));
        const auto jac = rodrigues_jacobian(aa);
        for (int c = 0; c < 3; ++c) {
            const double h = 1e-6;
            const Mat3 fd = (rodrigues(aa + h * Vec3::Unit(c)) - rodrigues(aa - h * Vec3::Unit(c))) /
                            (2.0 * h);
            CHECK((jac[c] - fd).cwiseAbs().maxCoeff() < 1e-7);
        }
    }
}

TEST_CASE("shape_mesh: zero shape, linearity, superposition") {
    const BodyModel model = synthetic_model();
    const auto zero = shape_mesh(model, Eigen::VectorXd::Zero(4));
    for (std::size_t i = 0; i < zero.vertices.size(); ++i)
        CHECK(zero.vertices[i] == model.template_mesh.vertices[i]);

    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
    e1[1] = 1.0;
    const auto one = shape_mesh(model, e1);
    const auto two = shape_mesh(model, 2 * e1);
    Eigen::VectorXd e12 = e1;
    e12[2] = 1.0;
    Eigen::VectorXd e2 = Eigen::VectorXd::Zero(4);
    e2[2] = 1.0;
    const auto mixed = shape_mesh(model, e12);
    const auto only2 = shape_mesh(model, e2);
    for (std::size_t i = 0; i < zero.vertices.size(); ++i) {
        const Vec3 d1 = one.vertices[i] - zero.vertices[i];
        const Vec3 d2 = two.vertices[i] - zero.vertices[i];
        CHECK((d2 - 2 * d1).norm() < 1e-12);
        const Vec3 sum = d1 + (only2.vertices[i] - zero.vertices[i]);
        CHECK(((mixed.vertices[i] - zero.vertices[i]) - sum).norm() < 1e-12);
    }

    CHECK_THROWS_AS(shape_mesh(model, Eigen::VectorXd::Zero(3)), SchemaError);
}

TEST_CASE("pose_mesh: rest parameters reproduce the template exactly") {
    const BodyModel model = synthetic_model();
    const auto posed = pose_mesh(model, BodyParams::rest(model));
    // Identity kinematics leaves only the skin-weight partition-of-unity
    // rounding: one ulp per accumulated term.
    for (std::size_t i = 0; i < posed.vertices.size(); ++i)
        CHECK((posed.vertices[i] - model.template_mesh.vertices[i]).norm() < 1e-15);
}

TEST_CASE("pose_mesh: pure translation moves every vertex rigidly") {
    const BodyModel model = synthetic_model();
    BodyParams p = BodyParams::rest(model);
    p.translation = Vec3(0.3, 0, 0);
    const auto posed = pose_mesh(model, p);
    for (std::size_t i = 0; i < posed.vertices.size(); ++i)
        CHECK((posed.vertices[i] - (model.template_mesh.vertices[i] + Vec3(0.3, 0, 0))).norm() <
              1e-15);
}

TEST_CASE("pose_mesh: rotating a leaf joint spins exactly its skinned vertices") {
    const BodyModel model = synthetic_model();
    const int shoulder_l = 10;
    BodyParams p = BodyParams::rest(model);
    p.theta[shoulder_l] = Vec3(0, 0, M_PI / 2);

    // Rest position of the joint from the regressor on the template.
    Vec3 joint = Vec3::Zero();
    for (const auto& [idx, w] : model.joint_regressor[shoulder_l])
        joint += w * model.template_mesh.vertices[idx];
    const Mat3 rot = rodrigues(p.theta[shoulder_l]);

    const auto posed = pose_mesh(model, p);
    for (std::size_t i = 0; i < posed.vertices.size(); ++i) {
        double w_joint = 0.0;
        for (const auto& [j, w] : model.skin_weights[i])
            if (j == shoulder_l) w_joint = w;
        const Vec3& rest = model.template_mesh.vertices[i];
        if (w_joint == 1.0) {
            const Vec3 expected = rot * (rest - joint) + joint;
            CHECK((posed.vertices[i] - expected).norm() < 1e-12);
        } else if (w_joint == 0.0) {
            CHECK((posed.vertices[i] - rest).norm() < 1e-15);
        }
    }
}

TEST_CASE("pose_mesh: root rotation rigidly rotates the shaped mesh") {
    const BodyModel model = synthetic_model();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BodyParams p = BodyParams::rest(model);
    p.beta << 0.1, -0.2, 0.05, 0.15;
    p.theta[0] = Vec3(u(rng), u(rng), u(rng)) * 0.6;
    p.translation = Vec3(0.1, 0.2, -0.3);

    const auto shaped = shape_mesh(model, p.beta);
    Vec3 root = Vec3::Zero();
    for (const auto& [idx, w] : model.joint_regressor[0]) root += w * shaped.vertices[idx];
    const Mat3 rot = rodrigues(p.theta[0]);

    const auto posed = pose_mesh(model, p);
    for (std::size_t i = 0; i < posed.vertices.size(); ++i) {
        const Vec3 expected = rot * (shaped.vertices[i] - root) + root + p.translation;
        CHECK((posed.vertices[i] - expected).norm() < 1e-12);
    }
}

TEST_CASE("pose_mesh: translation commutes (rigid consistency)") {
    const BodyModel model = synthetic_model();
    std::mt19937_64 rng(33);
    BodyParams p = random_params(model, rng);
    BodyParams p0 = p;
    p0.translation = Vec3::Zero();
    const auto with_t = pose_mesh(model, p);
    const auto without = pose_mesh(model, p0);
    for (std::size_t i = 0; i < with_t.vertices.size(); ++i)
        CHECK((with_t.vertices[i] - (without.vertices[i] + p.translation)).norm() < 1e-15);
}

TEST_CASE("parameter vector layout covers |beta| + 3K + 3 degrees of freedom") {
    const BodyModel model = synthetic_model();
    CHECK(model.param_count() == 4 + 3 * 12 + 3);
    std::mt19937_64 rng(35);
    const BodyParams p = random_params(model, rng);
    const BodyParams back = BodyParams::from_vector(model, p.to_vector());
    CHECK((back.beta - p.beta).norm() == 0.0);
    CHECK((back.translation - p.translation).norm() == 0.0);
    for (int j = 0; j < model.joint_count(); ++j) CHECK((back.theta[j] - p.theta[j]).norm() == 0.0);
}

TEST_CASE("pose_jacobian matches central finite differences") {
    const BodyModel model = synthetic_model();
    std::mt19937_64 rng(37);
    const BodyParams params = random_params(model, rng);
    const Eigen::MatrixXd jac = pose_jacobian(model, params);

    // Probe a subset of vertices against finite differences of the full pose.
    const double step = 1e-5;
    const Eigen::VectorXd x0 = params.to_vector();
    std::vector<int> probes = {0, 11, 101, 321, 500, 700, static_cast<int>(model.vertex_count()) - 1};
    for (int p : probes) {
        for (int col = 0; col < model.param_count(); ++col) {
            Eigen::VectorXd xp = x0, xm = x0;
            xp[col] += step;
            xm[col] -= step;
            const auto hi = pose_mesh(model, BodyParams::from_vector(model, xp));
            const auto lo = pose_mesh(model, BodyParams::from_vector(model, xm));
            const Vec3 fd = (hi.vertices[p] - lo.vertices[p]) / (2 * step);
            for (int r = 0; r < 3; ++r)
                CHECK(oracles::relative_error(jac(3 * p + r, col), fd[r]) < 1e-4);
        }
    }
}

TEST_CASE("pose_backward agrees with the dense Jacobian transpose") {
    const BodyModel model = synthetic_model();
    std::mt19937_64 rng(39);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const BodyParams params = random_params(model, rng);
    const PoseCache cache = pose_with_cache(model, params);

    std::vector<Vec3> g(model.vertex_count());
    Eigen::VectorXd g_flat(3 * model.vertex_count());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = Vec3(u(rng), u(rng), u(rng));
        g_flat.segment<3>(3 * i) = g[i];
    }
    const Eigen::VectorXd via_backward = pose_backward(model, params, cache, g);
    const Eigen::VectorXd via_jacobian = pose_jacobian(model, params).transpose() * g_flat;
    CHECK((via_backward - via_jacobian).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("synthetic model is deterministic and self-consistent") {
    const BodyModel a = synthetic_model();
    const BodyModel b = synthetic_model();
    REQUIRE(a.vertex_count() == b.vertex_count());
    for (std::size_t i = 0; i < a.vertex_count(); ++i)
        CHECK(a.template_mesh.vertices[i] == b.template_mesh.vertices[i]);
    CHECK(a.template_mesh.faces == b.template_mesh.faces);
    CHECK(a.joint_count() == 12);
    CHECK(a.shape_count() == 4);
    CHECK(a.vertex_count() >= 600);
    CHECK(a.vertex_count() <= 1200);
    for (const char* g : {"feet", "chest_region", "waist_region", "hip_region", "head_top"})
        CHECK_FALSE(a.group(g).empty());
    // Template feet rest on the ground plane.
    for (int i : a.group("feet")) CHECK(a.template_mesh.vertices[i].y() == 0.0);
}

TEST_CASE("model save/load round-trips exactly") {
    const BodyModel model = synthetic_model();
    const std::string path = "roundtrip_model.json";
    save_model(model, path);
    const BodyModel loaded = load_model(path);
    std::remove(path.c_str());

    REQUIRE(loaded.vertex_count() == model.vertex_count());
    for (std::size_t i = 0; i < model.vertex_count(); ++i)
        CHECK(loaded.template_mesh.vertices[i] == model.template_mesh.vertices[i]);
    CHECK(loaded.template_mesh.faces == model.template_mesh.faces);
    CHECK(loaded.kinematic_tree == model.kinematic_tree);
    CHECK(loaded.shape_names == model.shape_names);
    CHECK(loaded.gender == model.gender);
    CHECK(loaded.torso_joints == model.torso_joints);
    for (int b = 0; b < model.shape_count(); ++b)
        for (std::size_t i = 0; i < model.vertex_count(); ++i)
            CHECK(loaded.shape_dirs[b][i] == model.shape_dirs[b][i]);
    for (const auto& [name, ids] : model.vertex_groups) CHECK(loaded.group(name) == ids);
}

TEST_CASE("model load rejects an invalid skin row with its index") {
    const BodyModel model = synthetic_model();
    const std::string path = "tampered_model.json";
    save_model(model, path);
    Json j = read_json_file(path);
    j["skin_weights"][17][0][1] = j["skin_weights"][17][0][1].get<double>() - 0.1;
    write_json_file(j, path);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("skin weights row 17"), SchemaError);
    std::remove(path.c_str());
}

TEST_CASE("parameters outside the canonical axis-angle range are rejected") {
    const BodyModel model = synthetic_model();
    BodyParams p = BodyParams::rest(model);
    p.theta[2] = Vec3(M_PI, 0, 0);
    CHECK_THROWS_AS(pose_mesh(model, p), NumericError);
    p.theta[2] = Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0);
    CHECK_THROWS_AS(pose_mesh(model, p), NumericError);
}
