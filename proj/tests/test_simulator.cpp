#include <doctest.h>

#include "mmanthro/body_model.hpp"
#include "mmanthro/simulator.hpp"
#include "support/oracles.hpp"

using namespace mmanthro;

TEST_CASE("simulate_scan: noiseless samples lie on the surface") {
    const auto sphere = oracles::make_uv_sphere(0.4, 10, 20);
    ScanConfig config;
    config.samples_per_area = 3000;
    config.rng_seed = 5;
    const PointCloud cloud = simulate_scan(sphere, config);
    REQUIRE(cloud.size() > 200);
    for (std::size_t i = 0; i < cloud.size(); i += 7)
        CHECK(oracles::point_mesh_distance(cloud.points[i], sphere) < 1e-9);
}

TEST_CASE("simulate_scan: fixed seed reproduces the cloud exactly") {
    const auto sphere = oracles::make_uv_sphere(0.3, 8, 16);
    ScanConfig config;
    config.samples_per_area = 2000;
    config.noise_sigma = 0.003;
    config.dropout = 0.2;
    config.rng_seed = 7;
    const PointCloud a = simulate_scan(sphere, config);
    const PointCloud b = simulate_scan(sphere, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
    CHECK(a.source_panel == b.source_panel);

    ScanConfig other = config;
    other.rng_seed = 8;
    const PointCloud c = simulate_scan(sphere, other);
    CHECK(a.size() != c.size());
}

TEST_CASE("simulate_scan: faces perpendicular to both panels are never sampled") {
    // Cube: only the +-z faces have nonzero cosine against the z panels.
    const auto cube = oracles::make_cube(Vec3(-0.2, 0.0, -0.2), Vec3(0.2, 0.4, 0.2));
    ScanConfig config;
    config.samples_per_area = 20000;
    config.rng_seed = 3;
    const PointCloud cloud = simulate_scan(cube, config);
    REQUIRE(cloud.size() > 500);
    for (const Vec3& p : cloud.points) CHECK(std::abs(std::abs(p.z()) - 0.2) < 1e-12);
}

TEST_CASE("simulate_scan: occlusion discards points hidden from both panels") {
    // Small sphere tucked behind a large plate: every panel ray from the
    // sphere crosses the plate (front) or the sphere itself (back).
    auto scene = oracles::make_uv_sphere(0.1, 8, 16, Vec3(0, 0, -0.5));
    TriangleMesh plate;  // large quad at z = 0 facing +z
    plate.vertices = {{-2, -2, 0}, {2, -2, 0}, {2, 2, 0}, {-2, 2, 0},
                      {-2, -2, -1.2}, {2, -2, -1.2}, {2, 2, -1.2}, {-2, 2, -1.2}};
    plate.faces = {{0, 1, 2}, {0, 2, 3}, {4, 6, 5}, {4, 7, 6}};
    const int sphere_faces = static_cast<int>(scene.faces.size());
    const int base = static_cast<int>(scene.vertices.size());
    for (const Vec3& v : plate.vertices) scene.vertices.push_back(v);
    for (auto f : plate.faces)
        scene.faces.push_back({f[0] + base, f[1] + base, f[2] + base});

    ScanConfig config;
    config.samples_per_area = 5000;
    config.rng_seed = 11;
    ScanStats stats;
    const PointCloud cloud = simulate_scan(scene, config, &stats);
    // The sphere sits between two full-width walls: nothing from it survives.
    int sphere_candidates = 0;
    for (int f = 0; f < sphere_faces; ++f) sphere_candidates += stats.candidates[f];
    CHECK(sphere_candidates > 100);
    for (const Vec3& p : cloud.points) CHECK((std::abs(p.z()) < 1e-9 || std::abs(p.z() + 1.2) < 1e-9));
}

TEST_CASE("simulate_scan: stats tally candidates and survivors coherently") {
    const auto sphere = oracles::make_uv_sphere(0.5, 12, 24);
    ScanConfig config;
    config.samples_per_area = 4000;
    config.dropout = 0.1;
    config.rng_seed = 13;
    ScanStats stats;
    simulate_scan(sphere, config, &stats);
    REQUIRE(stats.candidates.size() == sphere.faces.size());
    for (std::size_t f = 0; f < sphere.faces.size(); ++f) {
        CHECK(stats.kept[f] <= stats.candidates[f]);
        CHECK(stats.keep_probability[f] >= 0.0);
        CHECK(stats.keep_probability[f] <= 1.0);
    }
}

TEST_CASE("simulate_volume: panel-parallel plane recovers its depth") {
    // Thin slab facing both panels, front surface at z = 0.2.
    const auto slab = oracles::make_cube(Vec3(-0.3, -0.3, 0.14), Vec3(0.3, 0.3, 0.2));
    ScanConfig config;
    const double spacing = 0.01;
    const auto volumes = simulate_volume(slab, config, spacing);
    REQUIRE(volumes.size() == 2);

    for (const auto& pv : volumes) {
        const DepthMap dm = extract_depth_map(pv.volume, 0.5);
        const PointCloud cloud = project_depth_map(dm, pv.panel_pose);
        REQUIRE(cloud.size() > 100);
        // Front panel sees z = 0.2, back panel sees z = 0.14.
        const double expected = pv.panel_id == "front" ? 0.2 : 0.14;
        for (const Vec3& p : cloud.points)
            CHECK(std::abs(p.z() - expected) <= spacing / 2 + 1e-9);
    }
}

TEST_CASE("simulate_volume: uncovered pixels come out missing") {
    const auto slab = oracles::make_cube(Vec3(-0.05, -0.05, 0.0), Vec3(0.05, 0.05, 0.05));
    const auto volumes = simulate_volume(slab, ScanConfig{}, 0.01);
    const DepthMap dm = extract_depth_map(volumes[0].volume, 0.5);
    CHECK(is_missing(dm.at(0, 0)));  // padding corner is never covered
    int covered = 0;
    for (double d : dm.depth) covered += !is_missing(d);
    CHECK(covered > 0);
}

TEST_CASE("simulate -> ingest keeps the cloud within a voxel of the mesh") {
    const BodyModel model = synthetic_model();
    const TriangleMesh mesh = model.template_mesh;
    ScanConfig config;
    const double spacing = 0.02;  // coarse for test speed; acceptance runs 1 cm
    const auto volumes = simulate_volume(mesh, config, spacing);

    std::vector<PointCloud> clouds;
    for (const auto& pv : volumes) {
        const DepthMap dm = smooth_depth_map(extract_depth_map(pv.volume, 0.5), 1);
        clouds.push_back(project_depth_map(dm, pv.panel_pose));
    }
    const PointCloud merged = downsample(merge_clouds(clouds), 0.01);
    REQUIRE(merged.size() > 1000);

    std::vector<double> dist;
    for (const Vec3& p : merged.points) dist.push_back(oracles::point_mesh_distance(p, mesh));
    std::sort(dist.begin(), dist.end());
    CHECK(dist[static_cast<std::size_t>(0.95 * dist.size())] <= spacing);
}
