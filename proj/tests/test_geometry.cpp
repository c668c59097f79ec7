#include <doctest.h>

#include "rangerec/mesh_query.hpp"
#include "rangerec/shapes.hpp"
#include "test_support.hpp"

using namespace rangerec;

TEST_SUITE("geometry") {

TEST_CASE("apply_pose basics") {
    CHECK((apply_pose(Pose::identity(), Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() == 0);

    Pose rot;
    rot.rotation = test::rot_z(M_PI / 2);
    CHECK((apply_pose(rot, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);

    Pose moved = rot;
    moved.translation = Vec3(10, 0, 0);
    CHECK((apply_pose(moved, Vec3(1, 0, 0)) - Vec3(10, 1, 0)).norm() < 1e-12);
}

TEST_CASE("pose composition is associative and rigid") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Pose a = test::random_pose(rng, 10), b = test::random_pose(rng, 10),
             c = test::random_pose(rng, 10);
        Pose lhs = a.compose(b).compose(c);
        Pose rhs = a.compose(b.compose(c));
        CHECK((lhs.rotation - rhs.rotation).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((lhs.translation - rhs.translation).norm() < 1e-9);

        Vec3 p = Vec3(rng.normal(), rng.normal(), rng.normal()) * 20;
        Vec3 q = Vec3(rng.normal(), rng.normal(), rng.normal()) * 20;
        CHECK(std::abs((a.apply(p) - a.apply(q)).norm() - (p - q).norm()) < 1e-9);
    }
}

TEST_CASE("solve_rigid_from_triple identity") {
    std::array<Vec3, 3> src = {Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(0, 7, 0)};
    Pose p = solve_rigid_from_triple(src, src);
    CHECK((p.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(p.translation.norm() < 1e-9);
}

TEST_CASE("solve_rigid_from_triple recovers a known transform") {
    std::array<Vec3, 3> src = {Vec3(1, 2, 3), Vec3(9, -1, 4), Vec3(-3, 6, 2)};
    Pose truth;
    truth.rotation = test::rot_z(M_PI / 2);
    truth.translation = Vec3(10, 0, 0);
    std::array<Vec3, 3> dst;
    for (int i = 0; i < 3; ++i) dst[i] = truth.apply(src[i]);
    Pose got = solve_rigid_from_triple(src, dst);
    CHECK((got.rotation - truth.rotation).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((got.translation - truth.translation).norm() < 1e-9);
}

TEST_CASE("solve_rigid_from_triple rejects collinear input") {
    std::array<Vec3, 3> src = {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)};
    std::array<Vec3, 3> dst = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK_THROWS_AS(solve_rigid_from_triple(src, dst), DegenerateTriple);
}

TEST_CASE("solve_rigid_from_triple is left-invariant") {
    Rng rng(11);
    std::array<Vec3, 3> src = {Vec3(4, 0, 1), Vec3(-2, 5, 3), Vec3(0, -1, 8)};
    for (int trial = 0; trial < 20; ++trial) {
        std::array<Vec3, 3> dst;
        Pose base = test::random_pose(rng, 15);
        for (int i = 0; i < 3; ++i)
            dst[i] = base.apply(src[i]) + 0.01 * Vec3(rng.normal(), rng.normal(), rng.normal());
        Pose sol = solve_rigid_from_triple(src, dst);
        Pose q = test::random_pose(rng, 15);
        std::array<Vec3, 3> moved;
        for (int i = 0; i < 3; ++i) moved[i] = q.apply(dst[i]);
        Pose sol_moved = solve_rigid_from_triple(src, moved);
        Pose expect = q.compose(sol);
        CHECK((sol_moved.rotation - expect.rotation).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((sol_moved.translation - expect.translation).norm() < 1e-9);
    }
}

TEST_CASE("classify_point on a cube") {
    TriMesh cube = make_box_mesh(Vec3(0, 0, 0), Vec3(100, 100, 100));
    cube.validate();
    MeshQuery q(cube);
    Vec3 gaze(0, 0, 1);

    auto center = classify_point(q, Pose::identity(), Vec3(50, 50, 50), gaze, 2.0);
    CHECK(center.kind == PointClass::Interior);

    auto front = classify_point(q, Pose::identity(), Vec3(50, 50, 0), gaze, 2.0);
    CHECK(front.kind == PointClass::Surface);
    CHECK((front.normal - Vec3(0, 0, 1)).norm() < 1e-12);

    auto far = classify_point(q, Pose::identity(), Vec3(50, 50, -20), gaze, 2.0);
    CHECK(far.kind == PointClass::Outside);
}

TEST_CASE("classify_point consistency") {
    TriMesh block = test::make_block_a().mesh;
    MeshQuery q(block);
    Vec3 gaze = Vec3(0.2, -0.1, 1).normalized();
    const double delta = 2.0;
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        Vec3 p(rng.uniform(-20, 140), rng.uniform(-20, 100), rng.uniform(-20, 70));
        auto c = classify_point(q, Pose::identity(), p, gaze, delta);
        double facing = q.nearest_facing_surface(p, gaze).distance;
        if (c.kind == PointClass::Surface) {
            CHECK(q.nearest_surface(p).distance <= delta + 1e-12);
        } else if (c.kind == PointClass::Interior) {
            CHECK(facing > delta);
            CHECK(q.contains(p));
        } else {
            CHECK(facing > delta);
            CHECK_FALSE(q.contains(p));
        }
    }
}

TEST_CASE("non-watertight mesh is rejected") {
    TriMesh open;
    open.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    open.triangles = {{0, 1, 2}};
    open.compute_inward_normals();
    CHECK_THROWS_AS(open.validate(), NonWatertightMesh);
}

TEST_CASE("box complex meshes are watertight with expected volume") {
    ObjectModel a = test::make_block_a();
    double expected = 120.0 * 80 * 50 - 30.0 * 20 * 12 - 24.0 * 16 * 10;
    CHECK(a.mesh.enclosed_volume() == doctest::Approx(expected).epsilon(1e-12));
    ObjectModel b = test::make_block_b();
    CHECK(b.mesh.enclosed_volume() ==
          doctest::Approx(66.0 * 44 * 28 - 18.0 * 12 * 8).epsilon(1e-12));
}

TEST_CASE("point grid matches brute force") {
    Rng rng(5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 400; ++i)
        pts.push_back(Vec3(rng.uniform(0, 60), rng.uniform(0, 60), rng.uniform(0, 60)));
    PointGrid grid(pts, 10.0);
    std::vector<int> got;
    for (int trial = 0; trial < 30; ++trial) {
        Vec3 c(rng.uniform(0, 60), rng.uniform(0, 60), rng.uniform(0, 60));
        grid.query(c, 10.0, got);
        std::vector<int> expect;
        for (int i = 0; i < static_cast<int>(pts.size()); ++i)
            if ((pts[i] - c).norm() < 10.0) expect.push_back(i);
        CHECK(got == expect);
    }
}

TEST_CASE("icosphere volume approaches the sphere") {
    TriMesh s = make_icosphere(50.0, 3);
    s.validate();
    double vol = s.enclosed_volume();
    double exact = 4.0 / 3.0 * M_PI * 50.0 * 50.0 * 50.0;
    CHECK(vol < exact);
    CHECK(vol > 0.99 * exact);
}

} // TEST_SUITE
