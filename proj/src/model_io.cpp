#include <fstream>
#include <nlohmann/json.hpp>

#include "mmanthro/body_model.hpp"

namespace mmanthro {

namespace {

using Json = nlohmann::json;

const Json& require(const Json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end()) throw SchemaError(std::string("model file missing field \"") + field + "\"");
    return *it;
}

Vec3 vec3_of(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw SchemaError("expected a 3-vector at " + where);
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::vector<Vec3> vec3_list(const Json& j, const std::string& where) {
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(vec3_of(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<SparseWeight> sparse_row(const Json& j, const std::string& where) {
    std::vector<SparseWeight> row;
    row.reserve(j.size());
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2)
            throw SchemaError("expected [index, weight] pairs at " + where);
        row.push_back({entry[0].get<int>(), entry[1].get<double>()});
    }
    return row;
}

Json sparse_json(const std::vector<SparseWeight>& row) {
    Json j = Json::array();
    for (const auto& [idx, w] : row) j.push_back(Json::array({idx, w}));
    return j;
}

}  // namespace

BodyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw IoError("model file " + path + " is not valid JSON: " + e.what());
    }

    if (require(j, "format").get<std::string>() != "bodymodel/1")
        throw SchemaError("unsupported model format \"" + j["format"].get<std::string>() +
                          "\" (expected bodymodel/1)");

    BodyModel model;
    model.gender = require(j, "gender").get<std::string>();
    model.up_axis = up_axis_from_string(require(j, "up_axis").get<std::string>());
    model.template_mesh.vertices = vec3_list(require(j, "vertices"), "vertices");
    for (const auto& f : require(j, "faces")) {
        if (!f.is_array() || f.size() != 3) throw SchemaError("faces entries must be index triples");
        model.template_mesh.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    const Json& dirs = require(j, "shape_dirs");
    for (std::size_t b = 0; b < dirs.size(); ++b)
        model.shape_dirs.push_back(vec3_list(dirs[b], "shape_dirs[" + std::to_string(b) + "]"));
    if (j.contains("shape_names"))
        model.shape_names = j["shape_names"].get<std::vector<std::string>>();
    model.kinematic_tree = require(j, "kinematic_tree").get<std::vector<int>>();
    const Json& reg = require(j, "joint_regressor");
    for (std::size_t r = 0; r < reg.size(); ++r)
        model.joint_regressor.push_back(sparse_row(reg[r], "joint_regressor[" + std::to_string(r) + "]"));
    const Json& skin = require(j, "skin_weights");
    for (std::size_t r = 0; r < skin.size(); ++r)
        model.skin_weights.push_back(sparse_row(skin[r], "skin_weights[" + std::to_string(r) + "]"));
    model.pose_prior = vec3_list(require(j, "pose_prior"), "pose_prior");
    for (const auto& [name, ids] : require(j, "vertex_groups").items())
        model.vertex_groups[name] = ids.get<std::vector<int>>();
    if (j.contains("joint_names"))
        model.joint_names = j["joint_names"].get<std::vector<std::string>>();
    if (j.contains("torso_joints"))
        model.torso_joints = j["torso_joints"].get<std::vector<int>>();

    model.finalize();
    return model;
}

void save_model(const BodyModel& model, const std::string& path) {
    Json j;
    j["format"] = "bodymodel/1";
    j["gender"] = model.gender;
    j["up_axis"] = to_string(model.up_axis);
    Json verts = Json::array();
    for (const Vec3& v : model.template_mesh.vertices)
        verts.push_back(Json::array({v.x(), v.y(), v.z()}));
    j["vertices"] = std::move(verts);
    Json faces = Json::array();
    for (const auto& [a, b, c] : model.template_mesh.faces) faces.push_back(Json::array({a, b, c}));
    j["faces"] = std::move(faces);
    Json dirs = Json::array();
    for (const auto& field : model.shape_dirs) {
        Json d = Json::array();
        for (const Vec3& v : field) d.push_back(Json::array({v.x(), v.y(), v.z()}));
        dirs.push_back(std::move(d));
    }
    j["shape_dirs"] = std::move(dirs);
    if (!model.shape_names.empty()) j["shape_names"] = model.shape_names;
    j["kinematic_tree"] = model.kinematic_tree;
    Json reg = Json::array();
    for (const auto& row : model.joint_regressor) reg.push_back(sparse_json(row));
    j["joint_regressor"] = std::move(reg);
    Json skin = Json::array();
    for (const auto& row : model.skin_weights) skin.push_back(sparse_json(row));
    j["skin_weights"] = std::move(skin);
    Json prior = Json::array();
    for (const Vec3& p : model.pose_prior) prior.push_back(Json::array({p.x(), p.y(), p.z()}));
    j["pose_prior"] = std::move(prior);
    Json groups = Json::object();
    for (const auto& [name, ids] : model.vertex_groups) groups[name] = ids;
    j["vertex_groups"] = std::move(groups);
    if (!model.joint_names.empty()) j["joint_names"] = model.joint_names;
    if (!model.torso_joints.empty()) j["torso_joints"] = model.torso_joints;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path);
    out << j.dump() << "\n";
}

}  // namespace mmanthro
