#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rangerec/io.hpp"
#include "rangerec/relation_density.hpp"
#include "test_support.hpp"

using namespace rangerec;

namespace {

RelationConfig small_cfg() {
    RelationConfig cfg;
    cfg.neighborhood_radius = 15.0;
    cfg.ring_tolerance = 1.0;
    cfg.sample_len = 50;
    cfg.bins = {15, 20, 10};
    return cfg;
}

DeltaSample random_ring_tetra(Rng& rng, Vec3& c, std::array<Vec3, 3>& x, Vec3& gaze, double R) {
    c = Vec3(rng.normal(), rng.normal(), rng.normal()) * 20;
    gaze = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    double r = rng.uniform(0.05 * R, 0.95 * R);
    for (auto& xi : x) {
        Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        xi = c + dir * (r + rng.uniform(-0.4, 0.4));
    }
    return delta_map(c, x[0], x[1], x[2], R, gaze);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("relation_density") {

TEST_CASE("delta_map saturates on the in-plane equilateral configuration") {
    Vec3 c(0, 0, 0), gaze(0, 0, 1);
    double h = 0.8 * std::sqrt(3.0) / 2.0;
    DeltaSample d =
        delta_map(c, Vec3(0.8, 0, 0.6), Vec3(-0.4, h, 0.6), Vec3(-0.4, -h, 0.6), 2.0, gaze);
    CHECK(d.u1 == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(d.u2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.u3 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("delta_map matches the hand evaluation") {
    DeltaSample d = delta_map(Vec3(0, 0, 0), Vec3(3, 0, 4), Vec3(0, 3, 4), Vec3(-3, 0, 4), 10.0,
                              Vec3(0, 0, 1));
    CHECK(d.u1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.u2 == doctest::Approx(0.9409343522578713).epsilon(1e-12));
    CHECK(d.u3 == doctest::Approx(0.769800358919501).epsilon(1e-12));
}

TEST_CASE("delta_map error cases") {
    Vec3 g(0, 0, 1);
    CHECK_THROWS_AS(delta_map(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), 5.0, g),
                    DegenerateTriple);
    CHECK_THROWS_AS(delta_map(Vec3(0, 0, 0), Vec3(9, 0, 0), Vec3(0, 9, 0), Vec3(0, 0, 9), 5.0, g),
                    OutOfNeighborhood);
}

TEST_CASE("delta_map output stays in range") {
    Rng rng(101);
    Vec3 c, gaze;
    std::array<Vec3, 3> x;
    for (int i = 0; i < 10000; ++i) {
        DeltaSample d = random_ring_tetra(rng, c, x, gaze, 10.0);
        CHECK(d.u1 >= 0.0);
        CHECK(d.u1 <= 1.0);
        CHECK(d.u2 >= -1.0);
        CHECK(d.u2 <= 1.0);
        CHECK(d.u3 >= 0.0);
        CHECK(d.u3 <= 1.0);
    }
}

TEST_CASE("delta_map is rigid-invariant") {
    Rng rng(55);
    Vec3 c, gaze;
    std::array<Vec3, 3> x;
    for (int i = 0; i < 200; ++i) {
        DeltaSample d = random_ring_tetra(rng, c, x, gaze, 10.0);
        Pose q = test::random_pose(rng, 30);
        DeltaSample dt = delta_map(q.apply(c), q.apply(x[0]), q.apply(x[1]), q.apply(x[2]), 10.0,
                                   q.rotation * gaze);
        CHECK(dt.u1 == doctest::Approx(d.u1).epsilon(1e-9));
        CHECK(dt.u2 == doctest::Approx(d.u2).epsilon(1e-9));
        CHECK(dt.u3 == doctest::Approx(d.u3).epsilon(1e-9));
    }
}

TEST_CASE("negating the gaze negates u2 and fixes u1, u3") {
    Rng rng(56);
    Vec3 c, gaze;
    std::array<Vec3, 3> x;
    for (int i = 0; i < 200; ++i) {
        DeltaSample d = random_ring_tetra(rng, c, x, gaze, 10.0);
        DeltaSample dn = delta_map(c, x[0], x[1], x[2], 10.0, -gaze);
        CHECK(dn.u1 == d.u1);
        CHECK(dn.u2 == doctest::Approx(-d.u2).epsilon(1e-12));
        CHECK(dn.u3 == d.u3);
    }
}

TEST_CASE("sample_tetra returns the single forced triple once") {
    RangeScan scan;
    scan.gaze = Vec3(0, 0, 1);
    scan.points = {Vec3(5, 0, 0), Vec3(0, 5.2, 0), Vec3(0, 0, 5.4), Vec3(40, 40, 40)};
    RelationConfig cfg = small_cfg();
    auto samples = sample_tetra(scan, Vec3(0, 0, 0), cfg, 1);
    REQUIRE(samples.size() == 1);
    DeltaSample expect =
        delta_map(Vec3(0, 0, 0), scan.points[0], scan.points[1], scan.points[2], 15.0, scan.gaze);
    CHECK(samples[0].u1 == expect.u1);
    CHECK(samples[0].u2 == expect.u2);
    CHECK(samples[0].u3 == expect.u3);
}

TEST_CASE("sample_tetra on coplanar points gives u2 = 0") {
    Rng rng(77);
    RangeScan scan;
    scan.gaze = Vec3(0, 0, 1);
    for (int i = 0; i < 200; ++i) {
        double ang = rng.uniform(0, 2 * M_PI), rad = std::sqrt(rng.uniform()) * 12.0;
        scan.points.push_back(Vec3(rad * std::cos(ang), rad * std::sin(ang), 0));
    }
    RelationConfig cfg = small_cfg();
    auto samples = sample_tetra(scan, Vec3(0, 0, 0), cfg, 9);
    REQUIRE(samples.size() == 50);
    for (const auto& s : samples) CHECK(std::abs(s.u2) < 1e-9);
}

TEST_CASE("sample_tetra is deterministic and honors the ring constraint") {
    Rng rng(78);
    RangeScan scan;
    scan.gaze = Vec3(0, 0, 1);
    // Two well-separated distance rings around the origin.
    for (int i = 0; i < 40; ++i) {
        Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        scan.points.push_back(dir * rng.uniform(5.0, 5.9));
        dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        scan.points.push_back(dir * rng.uniform(9.0, 9.9));
    }
    RelationConfig cfg = small_cfg();
    auto a = sample_tetra(scan, Vec3(0, 0, 0), cfg, 1234);
    auto b = sample_tetra(scan, Vec3(0, 0, 0), cfg, 1234);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].u1 == b[i].u1);
        CHECK(a[i].u2 == b[i].u2);
        CHECK(a[i].u3 == b[i].u3);
    }
    // Triples never straddle rings: the mean radius stays within one ring.
    for (const auto& s : a) {
        double r = s.u1 * cfg.neighborhood_radius;
        bool ring_low = r > 4.9 && r < 6.0;
        bool ring_high = r > 8.9 && r < 10.0;
        CHECK((ring_low || ring_high));
    }
}

TEST_CASE("train_density smoothing has the closed form") {
    RelationConfig cfg = small_cfg();
    cfg.bins = {2, 2, 2};
    std::vector<DeltaSample> in_one_bin(17, DeltaSample{0.1, -0.9, 0.1});
    std::vector<std::vector<DeltaSample>> per_class = {in_one_bin, in_one_bin};
    DensityModel dm = train_density(per_class, cfg, 0.5);
    const auto& grid = dm.grids[1];
    const double n = 17.0;
    int hot = grid.bin_index(DeltaSample{0.1, -0.9, 0.1});
    for (int b = 0; b < 8; ++b) {
        double expect = b == hot ? (n + 0.5) / (n + 4.0) : 0.5 / (n + 4.0);
        CHECK(grid.mass[b] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("trained grids are normalized") {
    Rng rng(31);
    RelationConfig cfg = small_cfg();
    std::vector<std::vector<DeltaSample>> per_class(3);
    for (auto& cls : per_class)
        for (int i = 0; i < 500; ++i)
            cls.push_back(DeltaSample{rng.uniform(), rng.uniform(-1, 1), rng.uniform()});
    DensityModel dm = train_density(per_class, cfg, 0.5);
    CHECK(dm.num_classes == 2);
    for (const auto& grid : dm.grids) {
        double sum = 0;
        for (double m : grid.mass) {
            CHECK(m > 0);
            sum += m;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("train_density rejects empty classes") {
    RelationConfig cfg = small_cfg();
    std::vector<std::vector<DeltaSample>> per_class(2);
    per_class[0].push_back(DeltaSample{0.5, 0, 0.5});
    CHECK_THROWS_AS(train_density(per_class, cfg, 0.5), EmptyClass);
}

TEST_CASE("phi is zero for identical grids and the ln-ratio for one sample") {
    RelationConfig cfg = small_cfg();
    cfg.bins = {2, 1, 1};
    DensityModel dm;
    dm.num_classes = 1;
    dm.config = cfg;
    DensityGrid base;
    base.bins = cfg.bins;
    base.mass = {0.25, 0.75};
    dm.grids = {base, base};
    std::vector<DeltaSample> samples = {{0.1, 0, 0.5}, {0.9, 0, 0.5}, {0.2, 0, 0.5}};
    CHECK(phi_from_samples(samples, 1, dm) == 0.0);

    // p(Delta|s) = e^2 * p(Delta|0) in the sampled bin.
    double q = 0.1;
    dm.grids[1].mass = {std::exp(2.0) * q, 1.0 - std::exp(2.0) * q};
    dm.grids[0].mass = {q, 1.0 - q};
    std::vector<DeltaSample> one = {{0.1, 0, 0.5}};
    CHECK(phi_from_samples(one, 1, dm) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("phi equals the hand-summed table lookups") {
    RelationConfig cfg = small_cfg();
    cfg.bins = {2, 2, 2};
    DensityModel dm;
    dm.num_classes = 1;
    dm.config = cfg;
    DensityGrid bg, fg;
    bg.bins = fg.bins = cfg.bins;
    bg.mass = {0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1};
    fg.mass = {0.3, 0.05, 0.05, 0.1, 0.2, 0.1, 0.1, 0.1};
    dm.grids = {bg, fg};
    std::vector<DeltaSample> samples = {{0.2, -0.5, 0.1}, {0.7, 0.5, 0.9}, {0.2, 0.5, 0.2},
                                        {0.9, -0.1, 0.8}, {0.4, 0.9, 0.4}};
    double expect = 0;
    for (const auto& s : samples)
        expect += std::log(fg.mass[fg.bin_index(s)]) - std::log(bg.mass[bg.bin_index(s)]);
    CHECK(phi_from_samples(samples, 1, dm) == doctest::Approx(expect).epsilon(1e-12));

    // Additivity over a fixed split.
    std::vector<DeltaSample> a(samples.begin(), samples.begin() + 2);
    std::vector<DeltaSample> b(samples.begin() + 2, samples.end());
    CHECK(phi_from_samples(samples, 1, dm) ==
          doctest::Approx(phi_from_samples(a, 1, dm) + phi_from_samples(b, 1, dm))
              .epsilon(1e-12));
}

TEST_CASE("phi_score returns the no-evidence sentinel on empty neighborhoods") {
    RangeScan scan;
    scan.gaze = Vec3(0, 0, 1);
    scan.points = {Vec3(100, 100, 100), Vec3(120, 100, 100)};
    RelationConfig cfg = small_cfg();
    std::vector<std::vector<DeltaSample>> per_class = {{DeltaSample{0.5, 0, 0.5}},
                                                       {DeltaSample{0.5, 0, 0.5}}};
    DensityModel dm = train_density(per_class, cfg, 0.5);
    double phi = phi_score(scan, 1, Vec3(0, 0, 0), dm, 3);
    CHECK(phi == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(phi_score(scan, 7, Vec3(0, 0, 0), dm, 3), Error);
}

TEST_CASE("density files round-trip byte-identically") {
    Rng rng(41);
    RelationConfig cfg = small_cfg();
    std::vector<std::vector<DeltaSample>> per_class(3);
    for (auto& cls : per_class)
        for (int i = 0; i < 300; ++i)
            cls.push_back(DeltaSample{rng.uniform(), rng.uniform(-1, 1), rng.uniform()});
    DensityModel dm = train_density(per_class, cfg, 0.5);

    std::string p1 = "/tmp/rr_density_1.txt", p2 = "/tmp/rr_density_2.txt";
    write_density(dm, p1);
    DensityModel loaded = load_density(p1);
    write_density(loaded, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(loaded.num_classes == dm.num_classes);
    CHECK(loaded.config.sample_len == dm.config.sample_len);
    CHECK(loaded.grids[1].mass == dm.grids[1].mass);
    std::string text = slurp(p1);
    CHECK(text.rfind("density m=2 R=15 eps=1 l=50 bins=15x20x10 alpha=0.5", 0) == 0);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

} // TEST_SUITE
