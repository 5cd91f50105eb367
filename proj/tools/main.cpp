#include <CLI11.hpp>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "mmanthro/io.hpp"
#include "mmanthro/version.hpp"

namespace fs = std::filesystem;
using namespace mmanthro;

namespace {

std::string timestamp_utc() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Every command drops a manifest next to its primary output: tool version,
// fully resolved config, input digests. Re-running the same command with the
// same inputs reproduces the outputs byte-for-byte (timestamp aside).
void write_manifest(const std::string& command, const Json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, const std::string& path) {
    Json m;
    m["tool"] = "mmanthro";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = config;
    Json in = Json::object();
    for (const std::string& i : inputs) in[i] = file_digest(i);
    m["inputs"] = std::move(in);
    m["outputs"] = outputs;
    m["timestamp"] = timestamp_utc();
    write_json_file(m, path);
}

// --config accepts either a bare config JSON or a manifest written by a
// previous run (its "config" object is used), so manifests replay directly.
Json load_config_json(const std::string& path) {
    Json j = read_json_file(path);
    if (j.contains("command") && j.contains("config")) return j["config"];
    return j;
}

struct ModelArgs {
    std::string path;
    bool synthetic = false;

    void attach(CLI::App* cmd) {
        auto* opt = cmd->add_option("--model", path, "Body model JSON (bodymodel/1)");
        cmd->add_flag("--synthetic", synthetic, "Use the built-in synthetic humanoid")
            ->excludes(opt);
    }
    BodyModel load(std::vector<std::string>& inputs) const {
        if (synthetic) return synthetic_model();
        if (path.empty()) throw SchemaError("either --model or --synthetic is required");
        inputs.push_back(path);
        return load_model(path);
    }
};

struct FitFlags {
    FitConfig config;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Fit config JSON (overrides flags)");
        cmd->add_option("--lambda-chamfer", config.lambda_chamfer);
        cmd->add_option("--lambda-ground", config.lambda_ground);
        cmd->add_option("--lambda-pose", config.lambda_pose);
        cmd->add_option("--lambda-shape", config.lambda_shape);
        cmd->add_option("--learning-rate", config.learning_rate);
        cmd->add_option("--max-iters", config.max_iters);
        cmd->add_option("--patience", config.patience);
        cmd->add_option("--weight-refresh-period", config.weight_refresh_period);
        cmd->add_option("--y-ground", config.y_ground);
        cmd->add_option("--seed", config.rng_seed);
        cmd->add_option("--optimizer", config.optimizer)->check(CLI::IsMember({"adam", "gd"}));
    }
    FitConfig resolve(std::vector<std::string>& inputs) const {
        if (config_path.empty()) {
            config.validate();
            return config;
        }
        inputs.push_back(config_path);
        return fit_config_from_json(load_config_json(config_path));
    }
};

struct ScanFlags {
    ScanConfig config;
    std::string config_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scan-config", config_path, "Scan config JSON (overrides flags)");
        cmd->add_option("--noise-sigma", config.noise_sigma);
        cmd->add_option("--dropout", config.dropout);
        cmd->add_option("--samples-per-area", config.samples_per_area);
        cmd->add_option("--visibility-exponent", config.visibility_exponent);
        cmd->add_option("--seed", config.rng_seed);
    }
    ScanConfig resolve(std::vector<std::string>& inputs) const {
        if (config_path.empty()) {
            config.validate();
            return config;
        }
        inputs.push_back(config_path);
        return scan_config_from_json(load_config_json(config_path));
    }
};

BodyParams load_params(const BodyModel& model, const std::string& path,
                       std::vector<std::string>& inputs) {
    if (path.empty()) return BodyParams::rest(model);
    inputs.push_back(path);
    return body_params_from_json(model, read_json_file(path));
}

MeasurementReport attach_diagnostics(MeasurementReport report, const Json& fit_json) {
    report.fit_final_energy = fit_json.value("final_energy", 0.0);
    report.fit_iterations = fit_json.value("iterations_run", 0);
    report.fit_converged_by = fit_json.value("converged_by", std::string());
    return report;
}

int cmd_ingest(const std::vector<std::string>& volumes, double threshold, int smooth_radius,
               double spacing, const std::string& output) {
    std::vector<std::string> inputs;
    std::vector<PointCloud> clouds;
    for (std::size_t i = 0; i < volumes.size(); ++i) {
        const PanelVolume pv = read_volume(volumes[i]);
        inputs.push_back(volumes[i]);
        DepthMap dm = extract_depth_map(pv.volume, threshold);
        dm.panel_id = pv.panel_id;
        dm = smooth_depth_map(dm, smooth_radius);
        clouds.push_back(project_depth_map(dm, pv.panel_pose, static_cast<int>(i)));
    }
    const PointCloud cloud = downsample(merge_clouds(clouds), spacing);
    write_point_cloud(cloud, output);

    Json config;
    config["threshold"] = threshold;
    config["smooth_radius"] = smooth_radius;
    config["spacing"] = spacing;
    write_manifest("ingest", config, inputs, {output}, output + ".manifest.json");
    std::cout << "wrote " << output << " (" << cloud.size() << " points)\n";
    return 0;
}

int cmd_fit(const std::string& cloud_path, const ModelArgs& model_args, const FitFlags& fit_flags,
            const std::string& output, const std::string& mesh_out) {
    std::vector<std::string> inputs;
    const BodyModel model = model_args.load(inputs);
    const FitConfig config = fit_flags.resolve(inputs);
    inputs.push_back(cloud_path);
    const PointCloud cloud = read_point_cloud(cloud_path);

    const FitResult result = fit(model, cloud, config);

    Json j = to_json(result);
    j["config"] = to_json(config);
    write_json_file(j, output);
    write_obj(pose_mesh(model, result.params), mesh_out);
    write_manifest("fit", to_json(config), inputs, {output, mesh_out}, output + ".manifest.json");
    std::cout << "fit converged by " << result.converged_by << " after " << result.iterations_run
              << " iterations, energy " << result.final_energy << "\n";
    return 0;
}

int cmd_measure(const std::string& fit_path, const std::string& mesh_path,
                const ModelArgs& model_args, double slice_step, double y_ground,
                const std::string& output, const std::string& csv_path) {
    std::vector<std::string> inputs;
    const BodyModel model = model_args.load(inputs);
    MeasureOptions opts;
    opts.slice_step = slice_step;
    opts.y_ground = y_ground;

    MeasurementReport report;
    if (!fit_path.empty()) {
        inputs.push_back(fit_path);
        const Json fit_json = read_json_file(fit_path);
        const BodyParams params = body_params_from_json(model, fit_json.at("params"));
        report = attach_diagnostics(measure_all(model, params, opts), fit_json);
    } else if (!mesh_path.empty()) {
        inputs.push_back(mesh_path);
        report = measure_mesh(model, read_obj(mesh_path), opts);
    } else {
        throw SchemaError("either --fit or --mesh is required");
    }

    write_json_file(to_json(report), output);
    std::vector<std::string> outputs = {output};
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw IoError("cannot write " + csv_path);
        csv << report_csv(report);
        outputs.push_back(csv_path);
    }
    Json config;
    config["slice_step"] = slice_step;
    config["y_ground"] = y_ground;
    write_manifest("measure", config, inputs, outputs, output + ".manifest.json");
    for (const auto& m : report.measurements)
        std::cout << m.name << ": " << m.value << " m at h = " << m.slice_height << "\n";
    std::cout << "height: " << report.body_height << " m\n";
    return 0;
}

int cmd_simulate(const ModelArgs& model_args, const std::string& mesh_path,
                 const std::string& params_path, const ScanFlags& scan_flags,
                 const std::string& output, const std::string& mesh_out,
                 const std::string& volume_base, double voxel_spacing) {
    std::vector<std::string> inputs;
    TriangleMesh mesh;
    if (!mesh_path.empty()) {
        inputs.push_back(mesh_path);
        mesh = read_obj(mesh_path);
    } else {
        const BodyModel model = model_args.load(inputs);
        mesh = pose_mesh(model, load_params(model, params_path, inputs));
    }
    const ScanConfig config = scan_flags.resolve(inputs);

    std::vector<std::string> outputs;
    const PointCloud cloud = simulate_scan(mesh, config);
    write_point_cloud(cloud, output);
    outputs.push_back(output);
    if (!mesh_out.empty()) {
        write_obj(mesh, mesh_out);
        outputs.push_back(mesh_out);
    }
    if (!volume_base.empty()) {
        for (const PanelVolume& pv : simulate_volume(mesh, config, voxel_spacing)) {
            const std::string base = volume_base + "_" + pv.panel_id;
            write_volume(pv, base);
            outputs.push_back(base + ".json");
            outputs.push_back(base + ".f32raw");
        }
    }
    write_manifest("simulate", to_json(config), inputs, outputs, output + ".manifest.json");
    std::cout << "simulated " << cloud.size() << " points\n";
    return 0;
}

int cmd_pipeline(const ModelArgs& model_args, const std::string& params_path,
                 const ScanFlags& scan_flags, const FitFlags& fit_flags, double spacing,
                 double slice_step, bool via_volume, double voxel_spacing, bool csv,
                 const std::string& out_dir) {
    std::vector<std::string> inputs;
    const BodyModel model = model_args.load(inputs);
    const BodyParams gt_params = load_params(model, params_path, inputs);
    const ScanConfig scan_config = scan_flags.resolve(inputs);
    const FitConfig fit_config = fit_flags.resolve(inputs);

    fs::create_directories(out_dir);
    const auto in_dir = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
    std::vector<std::string> outputs;

    const TriangleMesh gt_mesh = pose_mesh(model, gt_params);
    write_obj(gt_mesh, in_dir("gt_mesh.obj"));
    outputs.push_back(in_dir("gt_mesh.obj"));

    // Acquisition: sampled scan by default; --via-volume runs the full
    // volumetric route (rasterize, extract, smooth, project).
    PointCloud raw;
    if (via_volume) {
        std::vector<PointCloud> clouds;
        int panel_index = 0;
        for (const PanelVolume& pv : simulate_volume(gt_mesh, scan_config, voxel_spacing)) {
            const std::string base = in_dir("volume_" + pv.panel_id);
            write_volume(pv, base);
            outputs.push_back(base + ".json");
            outputs.push_back(base + ".f32raw");
            const DepthMap dm = smooth_depth_map(extract_depth_map(pv.volume, 0.5), 1);
            clouds.push_back(project_depth_map(dm, pv.panel_pose, panel_index++));
        }
        raw = merge_clouds(clouds);
    } else {
        raw = simulate_scan(gt_mesh, scan_config);
    }
    const PointCloud cloud = downsample(raw, spacing);
    write_point_cloud(cloud, in_dir("cloud.ply"));
    outputs.push_back(in_dir("cloud.ply"));

    const FitResult result = fit(model, cloud, fit_config);
    Json fit_json = to_json(result);
    fit_json["config"] = to_json(fit_config);
    write_json_file(fit_json, in_dir("fit.json"));
    write_obj(pose_mesh(model, result.params), in_dir("fitted.obj"));
    outputs.push_back(in_dir("fit.json"));
    outputs.push_back(in_dir("fitted.obj"));

    MeasureOptions opts;
    opts.slice_step = slice_step;
    MeasurementReport report = measure_all(model, result.params, opts);
    report.fit_final_energy = result.final_energy;
    report.fit_iterations = result.iterations_run;
    report.fit_converged_by = result.converged_by;
    write_json_file(to_json(report), in_dir("report.json"));
    outputs.push_back(in_dir("report.json"));

    const MeasurementReport gt_report = measure_all(model, gt_params, opts);
    write_json_file(to_json(gt_report), in_dir("gt_report.json"));
    outputs.push_back(in_dir("gt_report.json"));

    if (csv) {
        std::ofstream f(in_dir("report.csv"), std::ios::binary);
        if (!f) throw IoError("cannot write report.csv");
        f << report_csv(report);
        outputs.push_back(in_dir("report.csv"));
    }

    Json config;
    config["scan"] = to_json(scan_config);
    config["fit"] = to_json(fit_config);
    config["spacing"] = spacing;
    config["slice_step"] = slice_step;
    config["via_volume"] = via_volume;
    config["voxel_spacing"] = voxel_spacing;
    write_manifest("pipeline", config, inputs, outputs, in_dir("manifest.json"));

    std::cout << "pipeline complete: " << cloud.size() << " points, fit energy "
              << result.final_energy << " (" << result.converged_by << ")\n";
    for (const auto& m : report.measurements) {
        const auto* gt = gt_report.find(m.name);
        std::cout << "  " << m.name << ": " << m.value << " m (ground truth " << gt->value
                  << ")\n";
    }
    std::cout << "  height: " << report.body_height << " m (ground truth "
              << gt_report.body_height << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Body-model fitting and anthropometric measurement for panel scans"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Volumes -> merged downsampled point cloud");
    std::vector<std::string> volumes;
    double threshold = 0.5, in_spacing = kDefaultDownsampleSpacing;
    int smooth_radius = 1;
    std::string ingest_out = "cloud.ply";
    ingest->add_option("volumes", volumes, "Volume sidecar (.json) or base paths")->required();
    ingest->add_option("--threshold", threshold, "Reflectivity threshold");
    ingest->add_option("--smooth-radius", smooth_radius, "Median filter radius (pixels)");
    ingest->add_option("--spacing", in_spacing, "Downsample cell size (m)");
    ingest->add_option("-o,--output", ingest_out, "Output cloud (.ply or .xyz)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit the body model to a point cloud");
    std::string fit_cloud, fit_out = "fit.json", fit_mesh_out = "fitted.obj";
    ModelArgs fit_model;
    FitFlags fit_flags;
    fit_cmd->add_option("cloud", fit_cloud, "Point cloud (.ply or .xyz)")->required();
    fit_model.attach(fit_cmd);
    fit_flags.attach(fit_cmd);
    fit_cmd->add_option("-o,--output", fit_out, "Fit result JSON");
    fit_cmd->add_option("--mesh-out", fit_mesh_out, "Fitted mesh OBJ");

    // measure
    auto* measure = app.add_subcommand("measure", "Extract circumferences and height");
    std::string measure_fit, measure_mesh_path, measure_out = "report.json", measure_csv;
    double slice_step = 0.0025, y_ground = 0.0;
    ModelArgs measure_model;
    measure->add_option("--fit", measure_fit, "Fit result JSON (re-poses to the A-pose)");
    measure->add_option("--mesh", measure_mesh_path, "Mesh OBJ measured as-is");
    measure_model.attach(measure);
    measure->add_option("--slice-step", slice_step, "Slice increment (m)");
    measure->add_option("--y-ground", y_ground, "Ground height (m)");
    measure->add_option("-o,--output", measure_out, "Report JSON");
    measure->add_option("--csv", measure_csv, "Also write a CSV report");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Synthesize a scan from a mesh or model");
    ModelArgs sim_model;
    ScanFlags sim_scan;
    std::string sim_mesh, sim_params, sim_out = "scan.ply", sim_mesh_out, sim_volume_base;
    double sim_voxel = kDefaultDownsampleSpacing;
    sim_model.attach(simulate);
    simulate->add_option("--mesh", sim_mesh, "Mesh OBJ to scan directly");
    simulate->add_option("--params", sim_params, "Body params JSON for posing the model");
    sim_scan.attach(simulate);
    simulate->add_option("-o,--output", sim_out, "Output cloud");
    simulate->add_option("--mesh-out", sim_mesh_out, "Write the scanned mesh OBJ");
    simulate->add_option("--emit-volume", sim_volume_base,
                         "Also write per-panel volumes at this base path");
    simulate->add_option("--voxel-spacing", sim_voxel, "Voxel size for emitted volumes (m)");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "simulate -> ingest -> fit -> measure");
    ModelArgs pipe_model;
    ScanFlags pipe_scan;
    FitFlags pipe_fit;
    std::string pipe_params, pipe_dir = "pipeline_out";
    double pipe_spacing = kDefaultDownsampleSpacing, pipe_slice_step = 0.0025,
           pipe_voxel = kDefaultDownsampleSpacing;
    bool via_volume = false, pipe_csv = false;
    pipe_model.attach(pipeline);
    pipeline->add_option("--params", pipe_params, "Ground-truth body params JSON");
    pipe_scan.attach(pipeline);
    pipe_fit.attach(pipeline);
    pipeline->add_option("--spacing", pipe_spacing, "Downsample cell size (m)");
    pipeline->add_option("--slice-step", pipe_slice_step, "Measurement slice increment (m)");
    pipeline->add_flag("--via-volume", via_volume, "Route the scan through reflectivity volumes");
    pipeline->add_option("--voxel-spacing", pipe_voxel, "Voxel size for --via-volume (m)");
    pipeline->add_flag("--csv", pipe_csv, "Also write report.csv");
    pipeline->add_option("--out-dir", pipe_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(volumes, threshold, smooth_radius, in_spacing, ingest_out);
        if (*fit_cmd) return cmd_fit(fit_cloud, fit_model, fit_flags, fit_out, fit_mesh_out);
        if (*measure)
            return cmd_measure(measure_fit, measure_mesh_path, measure_model, slice_step, y_ground,
                               measure_out, measure_csv);
        if (*simulate)
            return cmd_simulate(sim_model, sim_mesh, sim_params, sim_scan, sim_out, sim_mesh_out,
                                sim_volume_base, sim_voxel);
        if (*pipeline)
            return cmd_pipeline(pipe_model, pipe_params, pipe_scan, pipe_fit, pipe_spacing,
                                pipe_slice_step, via_volume, pipe_voxel, pipe_csv, pipe_dir);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
