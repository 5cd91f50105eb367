#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmanthro/io.hpp"
#include "mmanthro/version.hpp"

namespace py = pybind11;
using namespace mmanthro;

namespace {

Eigen::MatrixXd to_matrix(const std::vector<Vec3>& rows) {
    Eigen::MatrixXd m(rows.size(), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i];
    return m;
}

std::vector<Vec3> from_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    if (m.cols() != 3) throw SchemaError("expected an N x 3 array");
    std::vector<Vec3> rows(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows[i] = m.row(i);
    return rows;
}

Eigen::MatrixXi faces_matrix(const TriangleMesh& mesh) {
    Eigen::MatrixXi f(mesh.faces.size(), 3);
    for (std::size_t i = 0; i < mesh.faces.size(); ++i)
        f.row(i) << mesh.faces[i][0], mesh.faces[i][1], mesh.faces[i][2];
    return f;
}

TriangleMesh mesh_from_arrays(const Eigen::Ref<const Eigen::MatrixXd>& v,
                              const Eigen::Ref<const Eigen::MatrixXi>& f) {
    TriangleMesh mesh;
    mesh.vertices = from_matrix(v);
    if (f.cols() != 3) throw SchemaError("faces must be M x 3");
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        mesh.faces.push_back({f(i, 0), f(i, 1), f(i, 2)});
    mesh.validate();
    return mesh;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Body-model fitting and anthropometric measurement for panel scans";
    m.attr("__version__") = kVersion;

    py::register_exception<IoError>(m, "IoError");
    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<NumericError>(m, "NumericError");

    py::class_<TriangleMesh>(m, "TriangleMesh")
        .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("faces"))
        .def_property_readonly("vertices", [](const TriangleMesh& t) { return to_matrix(t.vertices); })
        .def_property_readonly("faces", &faces_matrix)
        .def("surface_area", &TriangleMesh::surface_area)
        .def("__repr__", [](const TriangleMesh& t) {
            return "TriangleMesh(" + std::to_string(t.vertex_count()) + " vertices, " +
                   std::to_string(t.face_count()) + " faces)";
        });

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init([](const Eigen::Ref<const Eigen::MatrixXd>& pts) {
                 PointCloud c;
                 c.points = from_matrix(pts);
                 return c;
             }),
             py::arg("points"))
        .def_property_readonly("points", [](const PointCloud& c) { return to_matrix(c.points); })
        .def("__len__", &PointCloud::size);

    py::class_<BodyModel>(m, "BodyModel")
        .def_property_readonly("vertex_count", &BodyModel::vertex_count)
        .def_property_readonly("joint_count", &BodyModel::joint_count)
        .def_property_readonly("shape_count", &BodyModel::shape_count)
        .def_property_readonly("gender", [](const BodyModel& b) { return b.gender; })
        .def_property_readonly("shape_names", [](const BodyModel& b) { return b.shape_names; })
        .def_property_readonly("template_mesh", [](const BodyModel& b) { return b.template_mesh; })
        .def("group", &BodyModel::group, py::arg("name"));

    py::class_<BodyParams>(m, "BodyParams")
        .def_static("rest", &BodyParams::rest, py::arg("model"))
        .def_readwrite("beta", &BodyParams::beta)
        .def_property(
            "theta", [](const BodyParams& p) { return to_matrix(p.theta); },
            [](BodyParams& p, const Eigen::Ref<const Eigen::MatrixXd>& t) {
                p.theta = from_matrix(t);
            })
        .def_readwrite("translation", &BodyParams::translation);

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("lambda_chamfer", &FitConfig::lambda_chamfer)
        .def_readwrite("lambda_ground", &FitConfig::lambda_ground)
        .def_readwrite("lambda_pose", &FitConfig::lambda_pose)
        .def_readwrite("lambda_shape", &FitConfig::lambda_shape)
        .def_readwrite("learning_rate", &FitConfig::learning_rate)
        .def_readwrite("max_iters", &FitConfig::max_iters)
        .def_readwrite("patience", &FitConfig::patience)
        .def_readwrite("weight_refresh_period", &FitConfig::weight_refresh_period)
        .def_readwrite("y_ground", &FitConfig::y_ground)
        .def_readwrite("rng_seed", &FitConfig::rng_seed)
        .def_readwrite("optimizer", &FitConfig::optimizer);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("params", &FitResult::params)
        .def_readonly("final_energy", &FitResult::final_energy)
        .def_readonly("iterations_run", &FitResult::iterations_run)
        .def_readonly("converged_by", &FitResult::converged_by)
        .def_readonly("energy_trace", &FitResult::energy_trace)
        .def_readonly("weight_refresh_iterations", &FitResult::weight_refresh_iterations);

    py::class_<Panel>(m, "Panel")
        .def(py::init([](const std::string& id, const Vec3& normal) {
                 return Panel{id, normal};
             }),
             py::arg("id"), py::arg("normal"))
        .def_readwrite("id", &Panel::id)
        .def_readwrite("normal", &Panel::normal);

    py::class_<ScanConfig>(m, "ScanConfig")
        .def(py::init<>())
        .def_readwrite("panels", &ScanConfig::panels)
        .def_readwrite("visibility_exponent", &ScanConfig::visibility_exponent)
        .def_readwrite("dropout", &ScanConfig::dropout)
        .def_readwrite("noise_sigma", &ScanConfig::noise_sigma)
        .def_readwrite("samples_per_area", &ScanConfig::samples_per_area)
        .def_readwrite("rng_seed", &ScanConfig::rng_seed);

    py::class_<Measurement>(m, "Measurement")
        .def_readonly("name", &Measurement::name)
        .def_readonly("value", &Measurement::value)
        .def_readonly("slice_height", &Measurement::slice_height)
        .def_readonly("slice_points", &Measurement::slice_points);

    py::class_<MeasurementReport>(m, "MeasurementReport")
        .def_readonly("measurements", &MeasurementReport::measurements)
        .def_readonly("body_height", &MeasurementReport::body_height)
        .def_readonly("gender", &MeasurementReport::gender)
        .def("as_dict", [](const MeasurementReport& r) {
            py::dict d;
            for (const auto& m : r.measurements) d[m.name.c_str()] = m.value;
            d["height"] = r.body_height;
            return d;
        });

    m.def("synthetic_model", &synthetic_model, "Deterministic built-in humanoid model");
    m.def("load_model", &load_model, py::arg("path"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("shape_mesh", &shape_mesh, py::arg("model"), py::arg("beta"));
    m.def("pose_mesh", &pose_mesh, py::arg("model"), py::arg("params"));

    m.def("face_normals", [](const TriangleMesh& t) { return to_matrix(face_normals(t)); });
    m.def("vertex_normals", [](const TriangleMesh& t) { return to_matrix(vertex_normals(t)); });

    m.def(
        "downsample",
        [](const PointCloud& c, double spacing) { return downsample(c, spacing); },
        py::arg("cloud"), py::arg("spacing") = kDefaultDownsampleSpacing);
    m.def("merge_clouds", &merge_clouds, py::arg("clouds"));

    m.def(
        "simulate_scan",
        [](const TriangleMesh& mesh, const ScanConfig& config) {
            return simulate_scan(mesh, config);
        },
        py::arg("mesh"), py::arg("config") = ScanConfig{});

    m.def("rigid_init", &rigid_init, py::arg("model"), py::arg("cloud"),
          py::arg("config") = FitConfig{});
    m.def("fit", &fit, py::arg("model"), py::arg("cloud"), py::arg("config") = FitConfig{},
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "measure_all",
        [](const BodyModel& model, const BodyParams& params, double slice_step) {
            MeasureOptions opts;
            opts.slice_step = slice_step;
            return measure_all(model, params, opts);
        },
        py::arg("model"), py::arg("params"), py::arg("slice_step") = 0.0025);
    m.def(
        "measure_mesh",
        [](const BodyModel& model, const TriangleMesh& mesh, double slice_step) {
            MeasureOptions opts;
            opts.slice_step = slice_step;
            return measure_mesh(model, mesh, opts);
        },
        py::arg("model"), py::arg("mesh"), py::arg("slice_step") = 0.0025);

    m.def("read_point_cloud", &read_point_cloud, py::arg("path"));
    m.def("write_point_cloud", &write_point_cloud, py::arg("cloud"), py::arg("path"));
    m.def("read_obj", &read_obj, py::arg("path"));
    m.def("write_obj", &write_obj, py::arg("mesh"), py::arg("path"));
}
