#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "mmanthro/body_model.hpp"
#include "mmanthro/geometry.hpp"
#include "mmanthro/ingest.hpp"
#include "mmanthro/measurement.hpp"
#include "mmanthro/registration.hpp"
#include "mmanthro/simulator.hpp"

namespace mmanthro {

using Json = nlohmann::json;

// Point clouds: ASCII PLY (x y z float properties) and plain XYZ.
PointCloud read_point_cloud(const std::string& path);  // dispatch on extension
void write_point_cloud(const PointCloud& cloud, const std::string& path);
PointCloud read_ply(const std::string& path);
void write_ply(const PointCloud& cloud, const std::string& path);
PointCloud read_xyz(const std::string& path);
void write_xyz(const PointCloud& cloud, const std::string& path);

// Meshes: Wavefront OBJ, v/f records, 1-based indices.
TriangleMesh read_obj(const std::string& path);
void write_obj(const TriangleMesh& mesh, const std::string& path);

// Volumes: <base>.f32raw (raw LE float32, x-fastest) + <base>.json sidecar.
// `path` may be the sidecar path or the base path.
PanelVolume read_volume(const std::string& path);
void write_volume(const PanelVolume& pv, const std::string& base_path);

// JSON conversions.
Json to_json(const RigidTransform& t);
RigidTransform rigid_transform_from_json(const Json& j);
Json to_json(const BodyParams& p);
BodyParams body_params_from_json(const BodyModel& model, const Json& j);
Json to_json(const FitConfig& c);
FitConfig fit_config_from_json(const Json& j);          // missing keys keep defaults
Json to_json(const ScanConfig& c);
ScanConfig scan_config_from_json(const Json& j);
Json to_json(const FitResult& r);
Json to_json(const MeasurementReport& r);
std::string report_csv(const MeasurementReport& r);

Json read_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, hex encoded.
std::string file_digest(const std::string& path);

}  // namespace mmanthro
