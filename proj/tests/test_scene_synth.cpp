#include <doctest.h>

#include <cmath>
#include <unordered_set>

#include "rangerec/mesh_query.hpp"
#include "rangerec/scene_synth.hpp"
#include "rangerec/shapes.hpp"
#include "test_support.hpp"

using namespace rangerec;

namespace {

ObjectModel box_model(int class_id, const Vec3& lo, const Vec3& hi) {
    ObjectModel m;
    m.class_id = class_id;
    m.mesh = make_box_mesh(lo, hi);
    m.mesh.validate();
    return m;
}

} // namespace

TEST_SUITE("scene_synth") {

TEST_CASE("flat square is sampled uniformly when f is constant") {
    // Thin slab; the z=0 face is the only one facing the sensor.
    ObjectModel slab = box_model(1, Vec3(0, 0, 0), Vec3(100, 100, 2));
    SynthParams sp;
    sp.falloff = 0.0;
    sp.surface_point_budget = 20000;
    sp.pixel_pitch = 0.5;
    sp.rng_seed = 42;
    RangeScan scan = sample_object_scan(slab, Pose::identity(), Vec3(0, 0, 1), sp);

    // Quadrant counts of the front-face points: chi-square with 3 dof.
    std::array<int, 4> quad = {0, 0, 0, 0};
    int front = 0;
    for (const auto& p : scan.points) {
        if (p.z() > 1e-9) continue;
        ++front;
        int qx = p.x() < 50 ? 0 : 1;
        int qy = p.y() < 50 ? 0 : 1;
        ++quad[2 * qy + qx];
    }
    REQUIRE(front > 10000);
    double expect = front / 4.0;
    double chi2 = 0;
    for (int c : quad) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 16.27); // p = 0.001 at 3 dof
}

TEST_CASE("face intensities follow the angle falloff") {
    ObjectModel cube = box_model(1, Vec3(0, 0, 0), Vec3(100, 100, 100));
    const double tilt = 0.05, a = 4.0;
    Vec3 gaze(std::sin(tilt), 0, std::cos(tilt));
    SynthParams sp;
    sp.falloff = a;
    sp.surface_point_budget = 100000;
    sp.pixel_pitch = 0.1;
    sp.rng_seed = 7;
    RangeScan scan = sample_object_scan(cube, Pose::identity(), gaze, sp);

    // Expected share of the grazing x=0 face from the closed-form weights.
    double f_front = std::exp(2 * a * (std::cos(tilt) - 1.0));
    double f_side = std::exp(2 * a * (std::sin(tilt) - 1.0));
    double p_side = f_side / (f_front + f_side);
    int side = 0;
    for (const auto& p : scan.points)
        if (p.x() < 1e-9) ++side;
    double mu = sp.surface_point_budget * p_side;
    double sigma = std::sqrt(sp.surface_point_budget * p_side * (1 - p_side));
    CHECK(side > mu - 5 * sigma);
    CHECK(side < mu + 5 * sigma);
}

TEST_CASE("objects fully behind others contribute no points") {
    ObjectModel front = box_model(1, Vec3(0, 0, 0), Vec3(100, 100, 10));
    ObjectModel rear = box_model(2, Vec3(20, 20, 50), Vec3(80, 80, 60));
    SynthParams sp;
    sp.surface_point_budget = 50000;
    sp.pixel_pitch = 2.0;
    sp.rng_seed = 3;
    ScenePlacement pf{&front, Pose::identity()}, pr{&rear, Pose::identity()};
    RangeScan scan = compose_scene({pf, pr}, Vec3(0, 0, 1), sp);
    for (const auto& p : scan.points) CHECK(p.z() < 20.0);
}

TEST_CASE("one point per depth-buffer pixel") {
    ObjectModel block = test::make_block_a(1);
    SynthParams sp;
    sp.surface_point_budget = 8000;
    sp.noise_sigma = 1.0;
    sp.outlier_count = 500;
    sp.pixel_pitch = 2.0;
    sp.rng_seed = 11;
    Vec3 gaze = Vec3(0.1, -0.2, -1).normalized();
    RangeScan scan = sample_object_scan(block, Pose::identity(), gaze, sp);

    Vec3 u, v;
    gaze_frame(gaze, u, v);
    std::unordered_set<uint64_t> pixels;
    for (const auto& p : scan.points) {
        int64_t pu = static_cast<int64_t>(std::floor(u.dot(p) / sp.pixel_pitch));
        int64_t pv = static_cast<int64_t>(std::floor(v.dot(p) / sp.pixel_pitch));
        uint64_t key = (static_cast<uint64_t>(pu & 0xFFFFFFFFll) << 32) |
                       static_cast<uint64_t>(pv & 0xFFFFFFFFll);
        CHECK(pixels.insert(key).second);
    }
}

TEST_CASE("noiseless points lie on the posed visible surface") {
    ObjectModel block = test::make_block_b(2);
    Rng rng(31);
    Pose pose = test::random_pose(rng, 30);
    SynthParams sp;
    sp.surface_point_budget = 3000;
    sp.rng_seed = 13;
    Vec3 gaze(0, 0, -1);
    RangeScan scan = sample_object_scan(block, pose, gaze, sp);
    MeshQuery q(block.mesh);
    Pose inv = pose.inverse();
    Vec3 gaze_model = inv.rotation * gaze;
    for (const auto& p : scan.points) {
        SurfaceHit hit = q.nearest_facing_surface(inv.apply(p), gaze_model);
        CHECK(hit.distance < 1e-9);
    }
}

TEST_CASE("same seed gives bit-identical scans") {
    ObjectModel block = test::make_block_a(1);
    SynthParams sp;
    sp.surface_point_budget = 2000;
    sp.noise_sigma = 0.7;
    sp.outlier_count = 100;
    sp.rng_seed = 99;
    Vec3 gaze(0, 0, -1);
    RangeScan a = sample_object_scan(block, Pose::identity(), gaze, sp);
    RangeScan b = sample_object_scan(block, Pose::identity(), gaze, sp);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i] == b.points[i]);

    sp.rng_seed = 100;
    RangeScan c = sample_object_scan(block, Pose::identity(), gaze, sp);
    CHECK(a.points != c.points);
}

TEST_CASE("single placement equals sample_object_scan") {
    ObjectModel block = test::make_block_b(2);
    SynthParams sp;
    sp.surface_point_budget = 1500;
    sp.rng_seed = 5;
    Vec3 gaze(0, 0, -1);
    ScenePlacement pl{&block, Pose::identity()};
    RangeScan a = compose_scene({pl}, gaze, sp);
    RangeScan b = sample_object_scan(block, Pose::identity(), gaze, sp);
    CHECK(a.points == b.points);
}

TEST_CASE("stacked scene keeps both objects and flags occluded features") {
    ObjectModel big = test::make_block_a(1);
    ObjectModel small = test::make_block_b(2);
    // Sensor above looking down; the small block sits on top of the big one.
    Pose top;
    top.translation = Vec3(20, 14, 50);
    ScenePlacement p1{&big, Pose::identity()}, p2{&small, top};
    SynthParams sp;
    sp.surface_point_budget = 9000;
    sp.pixel_pitch = 1.5;
    sp.rng_seed = 21;
    Vec3 gaze(0, 0, -1);
    RangeScan scan = compose_scene({p1, p2}, gaze, sp);

    int near_big_top = 0, near_small_top = 0;
    for (const auto& p : scan.points) {
        if (std::abs(p.z() - 50.0) < 1.0) ++near_big_top;
        if (std::abs(p.z() - 78.0) < 1.0) ++near_small_top;
    }
    CHECK(near_big_top > 200);   // exposed part of the big block's top face
    CHECK(near_small_top > 200); // small block's top face

    REQUIRE(scan.truth.has_value());
    CHECK(scan.truth->placements.size() == 2);
    // Big-block top corners under the small block are occluded; its exposed
    // top-side corners stay visible.
    int visible_big = 0;
    for (size_t i = 0; i < big.features.size(); ++i)
        if (scan.truth->features[i].visible) ++visible_big;
    CHECK(visible_big >= 2);
    // The covered region: big block's top corner near (24,16,50) region is
    // beneath the small block footprint [20,86]x[14,58].
    // Its bite-2 concave corner (24,16,40) must be occluded.
    bool concave_occluded = !scan.truth->features[7].visible;
    CHECK(concave_occluded);
}

TEST_CASE("feature visibility on a single block") {
    ObjectModel block = test::make_block_a(1);
    SynthParams sp;
    sp.surface_point_budget = 1000;
    sp.rng_seed = 2;
    RangeScan scan = sample_object_scan(block, Pose::identity(), Vec3(0, 0, -1), sp);
    REQUIRE(scan.truth.has_value());
    const auto& feats = scan.truth->features;
    REQUIRE(feats.size() == block.features.size());
    // Looking down: top corners (z=50) and both bite corners are visible,
    // bottom corners (z=0) are not.
    for (size_t i = 0; i < feats.size(); ++i) {
        bool expect_visible = block.features[i].position.z() > 30.0;
        CHECK(feats[i].visible == expect_visible);
    }
}

TEST_CASE("parameter validation") {
    SynthParams sp;
    sp.pixel_pitch = 0;
    CHECK_THROWS_AS(sp.validate(), Error);
    sp = SynthParams{};
    sp.noise_sigma = -1;
    CHECK_THROWS_AS(sp.validate(), Error);
    sp = SynthParams{};
    CHECK_THROWS_AS(compose_scene({}, Vec3(0, 0, 1), sp), Error);
}

} // TEST_SUITE
