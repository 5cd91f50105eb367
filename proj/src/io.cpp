#include "mmanthro/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mmanthro {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    return ext;
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

PointCloud read_point_cloud(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "ply") return read_ply(path);
    if (ext == "xyz") return read_xyz(path);
    throw IoError("unknown point cloud extension for " + path + " (expected .ply or .xyz)");
}

void write_point_cloud(const PointCloud& cloud, const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "ply") return write_ply(cloud, path);
    if (ext == "xyz") return write_xyz(cloud, path);
    throw IoError("unknown point cloud extension for " + path + " (expected .ply or .xyz)");
}

PointCloud read_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
        throw IoError(path + ": not a PLY file (missing magic)");

    std::size_t vertex_count = 0;
    int x_col = -1, y_col = -1, z_col = -1, n_props = 0;
    bool in_vertex_element = false, ascii = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
        } else if (tok == "comment") {
            continue;
        } else if (tok == "element") {
            std::string name;
            std::size_t count;
            ls >> name >> count;
            in_vertex_element = name == "vertex";
            if (in_vertex_element) vertex_count = count;
            else if (count > 0) throw IoError(path + ": unsupported PLY element \"" + name + "\"");
        } else if (tok == "property" && in_vertex_element) {
            std::string type, name;
            ls >> type >> name;
            if (name == "x") x_col = n_props;
            if (name == "y") y_col = n_props;
            if (name == "z") z_col = n_props;
            ++n_props;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii) throw IoError(path + ": only ascii PLY is supported");
    if (x_col < 0 || y_col < 0 || z_col < 0)
        throw IoError(path + ": vertex element lacks x/y/z properties");

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    std::vector<double> row(n_props);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        for (int c = 0; c < n_props; ++c)
            if (!(in >> row[c])) throw IoError(path + ": truncated vertex data");
        cloud.points.emplace_back(row[x_col], row[y_col], row[z_col]);
    }
    cloud.check_finite();
    return cloud;
}

void write_ply(const PointCloud& cloud, const std::string& path) {
    std::string out;
    out.reserve(64 + cloud.size() * 60);
    out += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
           "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    for (const Vec3& p : cloud.points) {
        format_double(out, p.x());
        out += ' ';
        format_double(out, p.y());
        out += ' ';
        format_double(out, p.z());
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << out;
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z))
            throw IoError(path + ":" + std::to_string(line_no) + ": expected `x y z`");
        cloud.points.emplace_back(x, y, z);
    }
    cloud.check_finite();
    return cloud;
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::string out;
    out.reserve(cloud.size() * 60);
    for (const Vec3& p : cloud.points) {
        format_double(out, p.x());
        out += ' ';
        format_double(out, p.y());
        out += ' ';
        format_double(out, p.z());
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << out;
}

TriangleMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TriangleMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("v ", 0) == 0) {
            std::istringstream ls(line.substr(2));
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw IoError(path + ":" + std::to_string(line_no) + ": bad vertex record");
            mesh.vertices.emplace_back(x, y, z);
        } else if (line.rfind("f ", 0) == 0) {
            std::istringstream ls(line.substr(2));
            std::array<int, 3> face;
            std::string tok;
            for (int k = 0; k < 3; ++k) {
                if (!(ls >> tok))
                    throw IoError(path + ":" + std::to_string(line_no) + ": bad face record");
                face[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // 1-based in OBJ
            }
            std::string extra;
            if (ls >> extra)
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": only triangular faces are supported");
            mesh.faces.push_back(face);
        }
    }
    mesh.validate();
    return mesh;
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
    std::string out;
    out.reserve(mesh.vertices.size() * 60 + mesh.faces.size() * 24);
    for (const Vec3& v : mesh.vertices) {
        out += "v ";
        format_double(out, v.x());
        out += ' ';
        format_double(out, v.y());
        out += ' ';
        format_double(out, v.z());
        out += '\n';
    }
    for (const auto& [a, b, c] : mesh.faces) {
        out += "f " + std::to_string(a + 1) + ' ' + std::to_string(b + 1) + ' ' +
               std::to_string(c + 1) + '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << out;
}

namespace {

std::string strip_suffix(const std::string& path, const std::string& suffix) {
    if (path.size() >= suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size());
    return path;
}

}  // namespace

PanelVolume read_volume(const std::string& path) {
    const std::string base = strip_suffix(strip_suffix(path, ".json"), ".f32raw");
    const std::string sidecar_path = base + ".json";
    const std::string raw_path = base + ".f32raw";

    const Json j = read_json_file(sidecar_path);
    PanelVolume pv;
    try {
        const auto dims = j.at("dims").get<std::vector<int>>();
        if (dims.size() != 3) throw SchemaError("dims must have 3 entries");
        pv.volume.dims = {dims[0], dims[1], dims[2]};
        const auto spacing = j.at("spacing").get<std::vector<double>>();
        const auto origin = j.at("origin").get<std::vector<double>>();
        if (spacing.size() != 3 || origin.size() != 3)
            throw SchemaError("spacing/origin must have 3 entries");
        pv.volume.spacing = Vec3(spacing[0], spacing[1], spacing[2]);
        pv.volume.origin = Vec3(origin[0], origin[1], origin[2]);
        const std::string axis = j.at("depth_axis").get<std::string>();
        pv.volume.depth_axis = axis_index(up_axis_from_string(axis));
        pv.panel_pose = rigid_transform_from_json(j.at("panel_pose"));
        pv.panel_id = j.value("panel_id", std::string("front"));
    } catch (const Json::exception& e) {
        throw SchemaError(sidecar_path + ": " + e.what());
    }
    if (!pv.panel_pose.is_valid(1e-6))
        throw SchemaError(sidecar_path + ": panel_pose rotation is not orthonormal");

    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw IoError("cannot open " + raw_path);
    pv.volume.values.resize(pv.volume.voxel_count());
    raw.read(reinterpret_cast<char*>(pv.volume.values.data()),
             static_cast<std::streamsize>(pv.volume.values.size() * sizeof(float)));
    if (raw.gcount() != static_cast<std::streamsize>(pv.volume.values.size() * sizeof(float)))
        throw IoError(raw_path + ": truncated voxel data");
    pv.volume.validate();
    return pv;
}

void write_volume(const PanelVolume& pv, const std::string& base_path) {
    pv.volume.validate();
    Json j;
    j["dims"] = {pv.volume.dims[0], pv.volume.dims[1], pv.volume.dims[2]};
    j["spacing"] = {pv.volume.spacing.x(), pv.volume.spacing.y(), pv.volume.spacing.z()};
    j["origin"] = {pv.volume.origin.x(), pv.volume.origin.y(), pv.volume.origin.z()};
    j["depth_axis"] = to_string(static_cast<UpAxis>(pv.volume.depth_axis));
    j["panel_pose"] = to_json(pv.panel_pose);
    j["panel_id"] = pv.panel_id;
    write_json_file(j, base_path + ".json");

    std::ofstream raw(base_path + ".f32raw", std::ios::binary);
    if (!raw) throw IoError("cannot write " + base_path + ".f32raw");
    raw.write(reinterpret_cast<const char*>(pv.volume.values.data()),
              static_cast<std::streamsize>(pv.volume.values.size() * sizeof(float)));
}

Json to_json(const RigidTransform& t) {
    Json j;
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
    j["rotation"] = std::move(rot);  // row-major
    j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
    return j;
}

RigidTransform rigid_transform_from_json(const Json& j) {
    RigidTransform t;
    const auto rot = j.at("rotation").get<std::vector<double>>();
    if (rot.size() != 9) throw SchemaError("rigid transform rotation must have 9 entries");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t.rotation(r, c) = rot[3 * r + c];
    const auto trans = j.at("translation").get<std::vector<double>>();
    if (trans.size() != 3) throw SchemaError("rigid transform translation must have 3 entries");
    t.translation = Vec3(trans[0], trans[1], trans[2]);
    return t;
}

Json to_json(const BodyParams& p) {
    Json j;
    j["beta"] = std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size());
    Json theta = Json::array();
    for (const Vec3& t : p.theta) theta.push_back({t.x(), t.y(), t.z()});
    j["theta"] = std::move(theta);
    j["translation"] = {p.translation.x(), p.translation.y(), p.translation.z()};
    return j;
}

BodyParams body_params_from_json(const BodyModel& model, const Json& j) {
    BodyParams p;
    const auto beta = j.at("beta").get<std::vector<double>>();
    p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<int>(beta.size()));
    for (const auto& t : j.at("theta")) {
        if (!t.is_array() || t.size() != 3) throw SchemaError("theta entries must be 3-vectors");
        p.theta.emplace_back(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    }
    const auto trans = j.at("translation").get<std::vector<double>>();
    if (trans.size() != 3) throw SchemaError("translation must have 3 entries");
    p.translation = Vec3(trans[0], trans[1], trans[2]);
    p.validate(model);
    return p;
}

Json to_json(const FitConfig& c) {
    Json j;
    j["lambda_chamfer"] = c.lambda_chamfer;
    j["lambda_ground"] = c.lambda_ground;
    j["lambda_pose"] = c.lambda_pose;
    j["lambda_shape"] = c.lambda_shape;
    j["learning_rate"] = c.learning_rate;
    j["max_iters"] = c.max_iters;
    j["patience"] = c.patience;
    j["weight_refresh_period"] = c.weight_refresh_period;
    j["y_ground"] = c.y_ground;
    Json normals = Json::array();
    for (const Vec3& n : c.panel_normals) normals.push_back({n.x(), n.y(), n.z()});
    j["panel_normals"] = std::move(normals);
    j["rng_seed"] = c.rng_seed;
    j["optimizer"] = c.optimizer;
    return j;
}

FitConfig fit_config_from_json(const Json& j) {
    FitConfig c;
    c.lambda_chamfer = j.value("lambda_chamfer", c.lambda_chamfer);
    c.lambda_ground = j.value("lambda_ground", c.lambda_ground);
    c.lambda_pose = j.value("lambda_pose", c.lambda_pose);
    c.lambda_shape = j.value("lambda_shape", c.lambda_shape);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.patience = j.value("patience", c.patience);
    c.weight_refresh_period = j.value("weight_refresh_period", c.weight_refresh_period);
    c.y_ground = j.value("y_ground", c.y_ground);
    if (j.contains("panel_normals")) {
        c.panel_normals.clear();
        for (const auto& n : j["panel_normals"]) {
            if (!n.is_array() || n.size() != 3)
                throw SchemaError("panel_normals entries must be 3-vectors");
            c.panel_normals.emplace_back(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
        }
    }
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.optimizer = j.value("optimizer", c.optimizer);
    c.validate();
    return c;
}

Json to_json(const ScanConfig& c) {
    Json j;
    Json panels = Json::array();
    for (const Panel& p : c.panels) {
        Json pj;
        pj["id"] = p.id;
        pj["normal"] = {p.normal.x(), p.normal.y(), p.normal.z()};
        panels.push_back(std::move(pj));
    }
    j["panels"] = std::move(panels);
    j["visibility_exponent"] = c.visibility_exponent;
    j["dropout"] = c.dropout;
    j["noise_sigma"] = c.noise_sigma;
    j["samples_per_area"] = c.samples_per_area;
    j["up_axis"] = to_string(c.up_axis);
    j["rng_seed"] = c.rng_seed;
    return j;
}

ScanConfig scan_config_from_json(const Json& j) {
    ScanConfig c;
    if (j.contains("panels")) {
        c.panels.clear();
        for (const auto& pj : j["panels"]) {
            const auto n = pj.at("normal").get<std::vector<double>>();
            if (n.size() != 3) throw SchemaError("panel normal must have 3 entries");
            c.panels.push_back({pj.value("id", std::string("panel")), Vec3(n[0], n[1], n[2])});
        }
    }
    c.visibility_exponent = j.value("visibility_exponent", c.visibility_exponent);
    c.dropout = j.value("dropout", c.dropout);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.samples_per_area = j.value("samples_per_area", c.samples_per_area);
    if (j.contains("up_axis")) c.up_axis = up_axis_from_string(j["up_axis"].get<std::string>());
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

Json to_json(const FitResult& r) {
    Json j;
    j["params"] = to_json(r.params);
    j["final_energy"] = r.final_energy;
    Json b;
    b["chamfer"] = r.breakdown.chamfer;
    b["ground"] = r.breakdown.ground;
    b["pose_prior"] = r.breakdown.pose_prior;
    b["shape_reg"] = r.breakdown.shape_reg;
    j["breakdown"] = std::move(b);
    j["iterations_run"] = r.iterations_run;
    j["converged_by"] = r.converged_by;
    j["energy_trace"] = r.energy_trace;
    j["weight_refresh_iterations"] = r.weight_refresh_iterations;
    return j;
}

Json to_json(const MeasurementReport& r) {
    Json j;
    Json measures = Json::object();
    for (const Measurement& m : r.measurements) {
        Json mj;
        mj["value_m"] = m.value;
        mj["slice_height_m"] = m.slice_height;
        mj["slice_points"] = m.slice_points;
        measures[m.name] = std::move(mj);
    }
    j["measurements"] = std::move(measures);
    j["body_height_m"] = r.body_height;
    j["gender"] = r.gender;
    j["measurement_pose"] = r.measurement_pose;
    if (!r.fit_converged_by.empty()) {
        Json d;
        d["final_energy"] = r.fit_final_energy;
        d["iterations_run"] = r.fit_iterations;
        d["converged_by"] = r.fit_converged_by;
        j["fit_diagnostics"] = std::move(d);
    }
    return j;
}

std::string report_csv(const MeasurementReport& r) {
    std::string out = "name,value_m,height_m,slices\n";
    char buf[128];
    for (const Measurement& m : r.measurements) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d\n", m.name.c_str(), m.value,
                      m.slice_height, m.slice_points);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "height,%.6f,,\n", r.body_height);
    out += buf;
    return out;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        Json j;
        in >> j;
        return j;
    } catch (const Json::exception& e) {
        throw IoError(path + ": invalid JSON: " + e.what());
    }
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for digest");
    uint64_t hash = 0xCBF29CE484222325ULL;  // FNV-1a 64
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001B3ULL;
        }
        if (!in) break;
    }
    char out[20];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a64:") + out;
}

}  // namespace mmanthro
