#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mmanthro/body_model.hpp"
#include "mmanthro/ingest.hpp"
#include "support/oracles.hpp"

using namespace mmanthro;

namespace {

ReflectivityVolume line_volume(const std::vector<float>& values, double spacing = 0.01) {
    ReflectivityVolume vol;
    vol.dims = {1, 1, static_cast<int>(values.size())};
    vol.spacing = Vec3::Constant(spacing);
    vol.depth_axis = 2;
    vol.values = values;
    return vol;
}

}  // namespace

TEST_CASE("extract_depth_map: first qualifying local maximum wins") {
    const auto dm = extract_depth_map(line_volume({0, 0, 9, 0, 0}), 1.0);
    CHECK(dm.width == 1);
    CHECK(dm.height == 1);
    CHECK(dm.at(0, 0) == doctest::Approx(0.02).epsilon(1e-15));

    // First maximum wins even when a larger one sits deeper.
    const auto first = extract_depth_map(line_volume({0, 5, 0, 9, 0}), 1.0);
    CHECK(first.at(0, 0) == doctest::Approx(0.01).epsilon(1e-15));

    const auto none = extract_depth_map(line_volume({0, 0, 0, 0}), 1.0);
    CHECK(is_missing(none.at(0, 0)));
}

TEST_CASE("extract_depth_map: plateau runs count once at their first index") {
    const auto dm = extract_depth_map(line_volume({0, 5, 5, 0}), 1.0);
    CHECK(dm.at(0, 0) == doctest::Approx(0.01).epsilon(1e-15));

    // A rising shoulder is not a maximum.
    const auto shoulder = extract_depth_map(line_volume({0, 5, 5, 9, 0}), 1.0);
    CHECK(shoulder.at(0, 0) == doctest::Approx(0.03).epsilon(1e-15));
}

TEST_CASE("extract_depth_map: boundary voxels compare to their single neighbor") {
    const auto dm = extract_depth_map(line_volume({9, 1, 0}), 1.0);
    CHECK(dm.at(0, 0) == 0.0);

    const auto tail = extract_depth_map(line_volume({0, 1, 9}), 2.0);
    CHECK(tail.at(0, 0) == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("extract_depth_map: too-thin volume and threshold validation") {
    CHECK_THROWS_AS(extract_depth_map(line_volume({1, 2}), 0.5), SchemaError);
    CHECK_THROWS_AS(extract_depth_map(line_volume({1, 2, 3}), -1.0), SchemaError);
}

TEST_CASE("extract_depth_map is monotone in the threshold") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(0.0f, 10.0f);
    ReflectivityVolume vol;
    vol.dims = {6, 5, 24};
    vol.spacing = Vec3::Constant(0.005);
    vol.depth_axis = 2;
    vol.values.resize(vol.voxel_count());
    for (float& v : vol.values) v = u(rng);

    const auto low = extract_depth_map(vol, 2.0);
    const auto high = extract_depth_map(vol, 6.0);
    for (int r = 0; r < low.height; ++r) {
        for (int c = 0; c < low.width; ++c) {
            if (is_missing(low.at(r, c))) {
                CHECK(is_missing(high.at(r, c)));
            } else if (!is_missing(high.at(r, c))) {
                CHECK(high.at(r, c) >= low.at(r, c));
            }
        }
    }
}

TEST_CASE("smooth_depth_map: radius 0 is identity, outliers take the window median") {
    DepthMap dm;
    dm.width = 3;
    dm.height = 3;
    dm.pixel_spacing = 0.01;
    dm.depth.assign(9, 0.5);
    dm.at(1, 1) = 9.0;  // outlier

    const auto same = smooth_depth_map(dm, 0);
    CHECK(same.at(1, 1) == 9.0);

    const auto smoothed = smooth_depth_map(dm, 1);
    CHECK(smoothed.at(1, 1) == 0.5);
    CHECK(smoothed.at(0, 0) == 0.5);
}

TEST_CASE("smooth_depth_map: missing pixels stay missing, singletons are unchanged") {
    DepthMap dm;
    dm.width = 3;
    dm.height = 3;
    dm.pixel_spacing = 0.01;
    dm.depth.assign(9, kMissingDepth);
    dm.at(1, 1) = 0.7;

    const auto out = smooth_depth_map(dm, 1);
    CHECK(out.at(1, 1) == 0.7);
    CHECK(is_missing(out.at(0, 0)));
}

TEST_CASE("smooth_depth_map: idempotent on constants, bounded by window extremes") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    DepthMap dm;
    dm.width = 7;
    dm.height = 6;
    dm.pixel_spacing = 0.01;
    dm.depth.resize(42);
    double lo = 1.0, hi = 0.0;
    for (double& d : dm.depth) {
        d = u(rng);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const auto once = smooth_depth_map(dm, 1);
    for (double d : once.depth) {
        CHECK(d >= lo);
        CHECK(d <= hi);
    }
    DepthMap constant = dm;
    for (double& d : constant.depth) d = 0.42;
    const auto still = smooth_depth_map(constant, 2);
    for (double d : still.depth) CHECK(d == 0.42);
}

TEST_CASE("project_depth_map: identity pose, back-panel yaw, round trip") {
    DepthMap dm;
    dm.width = 1;
    dm.height = 1;
    dm.pixel_spacing = 0.002;
    dm.depth = {0.5};

    const auto cloud = project_depth_map(dm, RigidTransform{});
    REQUIRE(cloud.size() == 1);
    CHECK(cloud.points[0] == Vec3(0, 0, 0.5));

    RigidTransform yaw180;  // 180 degrees about y
    yaw180.rotation << -1, 0, 0, 0, 1, 0, 0, 0, -1;
    DepthMap dm2;
    dm2.width = 3;
    dm2.height = 2;
    dm2.pixel_spacing = 0.002;
    dm2.depth.assign(6, 0.25);
    const auto front = project_depth_map(dm2, RigidTransform{});
    const auto back = project_depth_map(dm2, yaw180);
    for (std::size_t i = 0; i < front.size(); ++i) {
        CHECK(back.points[i].x() == -front.points[i].x());
        CHECK(back.points[i].y() == front.points[i].y());
        CHECK(back.points[i].z() == -front.points[i].z());
    }

}

TEST_CASE("project_depth_map: inverse pose recovers panel-local coordinates") {
    DepthMap dm;
    dm.width = 4;
    dm.height = 3;
    dm.pixel_spacing = 0.01;
    dm.depth.assign(12, kMissingDepth);
    dm.at(0, 0) = 0.31;
    dm.at(2, 3) = 0.44;
    dm.at(1, 2) = 0.05;

    RigidTransform pose;
    pose.rotation = rodrigues(Vec3(0.3, -1.1, 0.7));
    pose.translation = Vec3(0.4, -2.0, 1.25);
    const auto cloud = project_depth_map(dm, pose);
    REQUIRE(cloud.size() == 3);

    const RigidTransform inv = pose.inverse();
    std::vector<Vec3> expected = {{0.0, 0.0, 0.31}, {0.02, 0.01, 0.05}, {0.03, 0.02, 0.44}};
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((inv.apply(cloud.points[i]) - expected[i]).norm() < 1e-9);
}

TEST_CASE("project_depth_map: empty map and invalid pose") {
    DepthMap empty;
    empty.width = 2;
    empty.height = 2;
    empty.pixel_spacing = 0.01;
    empty.depth.assign(4, kMissingDepth);
    CHECK(project_depth_map(empty, RigidTransform{}).empty());

    RigidTransform bad;
    bad.rotation(0, 0) = 2.0;
    CHECK_THROWS_AS(project_depth_map(empty, bad), SchemaError);
}

TEST_CASE("merge_clouds: concatenation with tag preservation") {
    PointCloud a, b;
    for (int i = 0; i < 10; ++i) {
        a.points.emplace_back(i, 0, 0);
        a.source_panel.push_back(0);
    }
    for (int i = 0; i < 7; ++i) b.points.emplace_back(0, i, 0);
    const auto merged = merge_clouds({a, b});
    CHECK(merged.size() == 17);
    REQUIRE(merged.has_tags());
    CHECK(merged.source_panel[0] == 0);
    CHECK(merged.source_panel[12] == -1);

    CHECK(merge_clouds({a}).size() == a.size());
    CHECK(merge_clouds({PointCloud{}, PointCloud{}}).empty());
}

TEST_CASE("downsample: same-cell points collapse to their centroid") {
    PointCloud cloud;
    cloud.points.emplace_back(0.001, 0.001, 0.001);
    cloud.points.emplace_back(0.003, 0.001, 0.001);  // 2 mm apart, same 1 cm cell
    const auto out = downsample(cloud, 0.01);
    REQUIRE(out.size() == 1);
    CHECK((out.points[0] - Vec3(0.002, 0.001, 0.001)).norm() < 1e-15);
}

TEST_CASE("downsample: separated points survive, occupied cells are unique") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    PointCloud cloud;
    for (int i = 0; i < 500; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    const double spacing = 0.05;
    const auto out = downsample(cloud, spacing);
    std::set<std::tuple<int64_t, int64_t, int64_t>> cells;
    for (const Vec3& p : out.points) {
        const auto key = std::make_tuple(static_cast<int64_t>(std::floor(p.x() / spacing)),
                                         static_cast<int64_t>(std::floor(p.y() / spacing)),
                                         static_cast<int64_t>(std::floor(p.z() / spacing)));
        CHECK(cells.insert(key).second);  // no cell twice
    }

    PointCloud sparse;
    sparse.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    CHECK(downsample(sparse, 0.01).size() == 4);
}

TEST_CASE("downsample: output does not depend on input order") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    PointCloud cloud;
    for (int i = 0; i < 300; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    PointCloud shuffled = cloud;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);

    const auto a = downsample(cloud, 0.03);
    const auto b = downsample(shuffled, 0.03);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK((a.points[i] - b.points[i]).norm() < 1e-12);
}
