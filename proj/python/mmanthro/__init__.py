"""Body-model fitting and anthropometric measurement for panel scans."""

from ._core import (
    BodyModel,
    BodyParams,
    FitConfig,
    FitResult,
    IoError,
    Measurement,
    MeasurementReport,
    NumericError,
    Panel,
    PointCloud,
    ScanConfig,
    SchemaError,
    TriangleMesh,
    __version__,
    downsample,
    face_normals,
    fit,
    load_model,
    measure_all,
    measure_mesh,
    merge_clouds,
    pose_mesh,
    read_obj,
    read_point_cloud,
    rigid_init,
    save_model,
    shape_mesh,
    simulate_scan,
    synthetic_model,
    vertex_normals,
    write_obj,
    write_point_cloud,
)

__all__ = [
    "BodyModel",
    "BodyParams",
    "FitConfig",
    "FitResult",
    "IoError",
    "Measurement",
    "MeasurementReport",
    "NumericError",
    "Panel",
    "PointCloud",
    "ScanConfig",
    "SchemaError",
    "TriangleMesh",
    "__version__",
    "downsample",
    "face_normals",
    "fit",
    "load_model",
    "measure_all",
    "measure_mesh",
    "merge_clouds",
    "pose_mesh",
    "read_obj",
    "read_point_cloud",
    "rigid_init",
    "save_model",
    "shape_mesh",
    "simulate_scan",
    "synthetic_model",
    "vertex_normals",
    "write_obj",
    "write_point_cloud",
]
