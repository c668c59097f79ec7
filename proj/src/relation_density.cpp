#include "rangerec/relation_density.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "rangerec/io.hpp"
#include "rangerec/rng.hpp"

namespace rangerec {

namespace {
const double kRegularityNorm = 4.0 / (3.0 * std::sqrt(3.0)); // 4a/(3*sqrt(3)) factor
} // namespace

void RelationConfig::validate() const {
    if (neighborhood_radius <= 0)
        throw Error("neighborhood radius must be positive");
    if (ring_tolerance <= 0 || ring_tolerance >= neighborhood_radius)
        throw Error("ring tolerance must be in (0, R)");
    if (sample_len < 1)
        throw Error("sample length must be >= 1");
    for (int b : bins)
        if (b < 1)
            throw Error("bin counts must be >= 1");
}

DeltaSample delta_map(const Vec3& center, const Vec3& x1, const Vec3& x2, const Vec3& x3,
                      double neighborhood_radius, const Vec3& gaze) {
    constexpr double kCoincident = 1e-12;
    if ((x1 - x2).norm() < kCoincident || (x2 - x3).norm() < kCoincident ||
        (x3 - x1).norm() < kCoincident)
        throw DegenerateTriple("coincident points in delta_map");

    const double r = ((x1 - center).norm() + (x2 - center).norm() + (x3 - center).norm()) / 3.0;
    if (r >= neighborhood_radius)
        throw OutOfNeighborhood("mean radius reaches the neighborhood radius");

    Vec3 cross = (x2 - x1).cross(x3 - x1);
    double cross_norm = cross.norm();
    double area = 0.5 * cross_norm;
    double d = 0;
    if (cross_norm > 1e-12) {
        double plane_dist = std::abs((x1 - center).dot(cross)) / cross_norm;
        Vec3 centroid = (x1 + x2 + x3) / 3.0;
        double side = gaze.dot(centroid - center);
        int sign = (side > 0) - (side < 0);
        d = sign * plane_dist;
    } else {
        area = 0; // collinear limit: no plane, treat as flat
    }

    DeltaSample out;
    out.u1 = std::clamp(r / neighborhood_radius, 0.0, 1.0);

    double denom2_sq = r * r - kRegularityNorm * area;
    if (denom2_sq < 1e-18) {
        out.u2 = (d > 0) - (d < 0); // equilateral limit
    } else {
        out.u2 = std::clamp(d / std::sqrt(denom2_sq), -1.0, 1.0);
    }

    double denom3 = r * r - d * d;
    if (denom3 < 1e-18) {
        out.u3 = area > 0 ? 1.0 : 0.0;
    } else {
        out.u3 = std::clamp(kRegularityNorm * area / denom3, 0.0, 1.0);
    }
    return out;
}

namespace {

struct RingSet {
    // Per ring: indices of scan points, ring triple count, cumulative count.
    std::vector<std::vector<int>> members;
    std::vector<uint64_t> cumulative; // cumulative triple counts
    uint64_t total = 0;
};

uint64_t triples_of(size_t k) { return k < 3 ? 0 : static_cast<uint64_t>(k) * (k - 1) * (k - 2) / 6; }

RingSet build_rings(const std::vector<Vec3>& points, const std::vector<int>& in_range,
                    const Vec3& center, const RelationConfig& cfg) {
    std::map<int, std::vector<int>> by_ring;
    for (int idx : in_range) {
        double dist = (points[idx] - center).norm();
        if (dist >= cfg.neighborhood_radius) continue;
        by_ring[static_cast<int>(dist / cfg.ring_tolerance)].push_back(idx);
    }
    RingSet rings;
    for (auto& [ring, members] : by_ring) {
        if (members.size() < 3) continue;
        rings.total += triples_of(members.size());
        rings.cumulative.push_back(rings.total);
        rings.members.push_back(std::move(members));
    }
    return rings;
}

} // namespace

std::vector<DeltaSample> sample_tetra(const RangeScan& scan, const PointGrid& grid,
                                      const Vec3& center, const RelationConfig& cfg,
                                      uint64_t seed) {
    cfg.validate();
    std::vector<int> in_range;
    grid.query(center, cfg.neighborhood_radius, in_range);
    RingSet rings = build_rings(scan.points, in_range, center, cfg);

    std::vector<DeltaSample> out;
    if (rings.total == 0) return out;

    auto emit = [&](const std::vector<int>& m, int i, int j, int k) {
        out.push_back(delta_map(center, scan.points[m[i]], scan.points[m[j]], scan.points[m[k]],
                                cfg.neighborhood_radius, scan.gaze));
    };

    const uint64_t want = static_cast<uint64_t>(cfg.sample_len);
    if (rings.total <= want) {
        for (const auto& m : rings.members) {
            const int n = static_cast<int>(m.size());
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int k = j + 1; k < n; ++k) emit(m, i, j, k);
        }
        return out;
    }

    Rng rng(seed);
    std::unordered_set<uint64_t> drawn;
    out.reserve(want);
    while (out.size() < want) {
        uint64_t pick = rng.below(rings.total);
        size_t ring = std::upper_bound(rings.cumulative.begin(), rings.cumulative.end(), pick) -
                      rings.cumulative.begin();
        const auto& m = rings.members[ring];
        const uint64_t n = m.size();
        uint64_t a = rng.below(n), b = rng.below(n), c = rng.below(n);
        if (a == b || b == c || a == c) continue;
        uint64_t lo = std::min({a, b, c}), hi = std::max({a, b, c});
        uint64_t mid = a + b + c - lo - hi;
        uint64_t key = (static_cast<uint64_t>(ring) << 48) | (lo << 32) | (mid << 16) | hi;
        if (!drawn.insert(key).second) continue;
        emit(m, static_cast<int>(lo), static_cast<int>(mid), static_cast<int>(hi));
    }
    return out;
}

std::vector<DeltaSample> sample_tetra(const RangeScan& scan, const Vec3& center,
                                      const RelationConfig& cfg, uint64_t seed) {
    PointGrid grid(scan.points, cfg.neighborhood_radius);
    return sample_tetra(scan, grid, center, cfg, seed);
}

int DensityGrid::bin_index(const DeltaSample& d) const {
    auto idx = [](double v, double lo, double hi, int n) {
        int i = static_cast<int>((v - lo) / (hi - lo) * n);
        return std::clamp(i, 0, n - 1);
    };
    int i1 = idx(d.u1, 0.0, 1.0, bins[0]);
    int i2 = idx(d.u2, -1.0, 1.0, bins[1]);
    int i3 = idx(d.u3, 0.0, 1.0, bins[2]);
    return (i1 * bins[1] + i2) * bins[2] + i3;
}

const DensityGrid& DensityModel::grid_for(int shape_class) const {
    if (shape_class < 0 || shape_class > num_classes)
        throw Error("unknown shape class " + std::to_string(shape_class));
    return grids[shape_class];
}

DensityModel train_density(const std::vector<std::vector<DeltaSample>>& samples_per_class,
                           const RelationConfig& cfg, double alpha) {
    cfg.validate();
    if (alpha <= 0)
        throw Error("smoothing pseudo-count must be positive");
    if (samples_per_class.empty())
        throw EmptyClass("need at least the non-feature class 0");

    DensityModel dm;
    dm.config = cfg;
    dm.num_classes = static_cast<int>(samples_per_class.size()) - 1;
    const int total_bins = cfg.bins[0] * cfg.bins[1] * cfg.bins[2];
    for (size_t s = 0; s < samples_per_class.size(); ++s) {
        const auto& samples = samples_per_class[s];
        if (samples.empty())
            throw EmptyClass("no training samples for class " + std::to_string(s));
        DensityGrid grid;
        grid.bins = cfg.bins;
        grid.pseudo_count = alpha;
        grid.sample_count = static_cast<int64_t>(samples.size());
        std::vector<int64_t> counts(total_bins, 0);
        for (const auto& d : samples) ++counts[grid.bin_index(d)];
        grid.mass.resize(total_bins);
        const double denom = static_cast<double>(samples.size()) + alpha * total_bins;
        for (int b = 0; b < total_bins; ++b) grid.mass[b] = (counts[b] + alpha) / denom;
        dm.grids.push_back(std::move(grid));
    }
    return dm;
}

double phi_from_samples(const std::vector<DeltaSample>& samples, int shape_class,
                        const DensityModel& dm) {
    if (shape_class < 1 || shape_class > dm.num_classes)
        throw Error("unknown shape class " + std::to_string(shape_class));
    const DensityGrid& fg = dm.grids[shape_class];
    const DensityGrid& bg = dm.grids[0];
    double phi = 0;
    for (const auto& d : samples) phi += std::log(fg.mass_at(d)) - std::log(bg.mass_at(d));
    return phi;
}

double phi_score(const RangeScan& scan, const PointGrid& grid, int shape_class, const Vec3& f,
                 const DensityModel& dm, uint64_t seed) {
    if (shape_class < 1 || shape_class > dm.num_classes)
        throw Error("unknown shape class " + std::to_string(shape_class));
    auto samples = sample_tetra(scan, grid, f, dm.config, seed);
    if (samples.empty())
        return -std::numeric_limits<double>::infinity(); // NoEvidence
    return phi_from_samples(samples, shape_class, dm);
}

double phi_score(const RangeScan& scan, int shape_class, const Vec3& f, const DensityModel& dm,
                 uint64_t seed) {
    PointGrid grid(scan.points, dm.config.neighborhood_radius);
    return phi_score(scan, grid, shape_class, f, dm, seed);
}

DensityModel load_density(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    std::string tag;
    DensityModel dm;
    int m = -1, l = 0, n1 = 0, n2 = 0, n3 = 0;
    double r = 0, eps = 0, alpha = 0;
    in >> tag;
    if (tag != "density")
        throw ParseError(path + ": missing 'density' header");
    std::string kv;
    for (int i = 0; i < 6; ++i) {
        in >> kv;
        if (std::sscanf(kv.c_str(), "m=%d", &m) == 1) continue;
        if (std::sscanf(kv.c_str(), "R=%lf", &r) == 1) continue;
        if (std::sscanf(kv.c_str(), "eps=%lf", &eps) == 1) continue;
        if (std::sscanf(kv.c_str(), "l=%d", &l) == 1) continue;
        if (std::sscanf(kv.c_str(), "bins=%dx%dx%d", &n1, &n2, &n3) == 3) continue;
        if (std::sscanf(kv.c_str(), "alpha=%lf", &alpha) == 1) continue;
        throw ParseError(path + ": bad header field '" + kv + "'");
    }
    if (m < 0 || n1 < 1 || n2 < 1 || n3 < 1)
        throw ParseError(path + ": incomplete density header");
    dm.num_classes = m;
    dm.config.neighborhood_radius = r;
    dm.config.ring_tolerance = eps;
    dm.config.sample_len = l;
    dm.config.bins = {n1, n2, n3};
    dm.config.validate();
    const int total_bins = n1 * n2 * n3;
    for (int s = 0; s <= m; ++s) {
        int got_class = -1;
        int64_t count = 0;
        in >> tag >> got_class >> kv;
        if (!in || tag != "class" || got_class != s ||
            std::sscanf(kv.c_str(), "count=%" SCNd64, &count) != 1)
            throw ParseError(path + ": bad class record for class " + std::to_string(s));
        DensityGrid grid;
        grid.bins = {n1, n2, n3};
        grid.pseudo_count = alpha;
        grid.sample_count = count;
        grid.mass.resize(total_bins);
        double sum = 0;
        for (int b = 0; b < total_bins; ++b) {
            if (!(in >> grid.mass[b]))
                throw ParseError(path + ": truncated mass table for class " + std::to_string(s));
            if (grid.mass[b] <= 0)
                throw ParseError(path + ": non-positive bin mass");
            sum += grid.mass[b];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ParseError(path + ": class " + std::to_string(s) + " masses do not sum to 1");
        dm.grids.push_back(std::move(grid));
    }
    return dm;
}

void write_density(const DensityModel& dm, const std::string& path) {
    std::ostringstream out;
    out << "density m=" << dm.num_classes << " R=" << fmt_double(dm.config.neighborhood_radius)
        << " eps=" << fmt_double(dm.config.ring_tolerance) << " l=" << dm.config.sample_len
        << " bins=" << dm.config.bins[0] << "x" << dm.config.bins[1] << "x" << dm.config.bins[2]
        << " alpha=" << fmt_double(dm.grids.empty() ? 0.5 : dm.grids[0].pseudo_count) << "\n";
    for (int s = 0; s < static_cast<int>(dm.grids.size()); ++s) {
        const auto& grid = dm.grids[s];
        out << "class " << s << " count=" << grid.sample_count << "\n";
        const int row = grid.bins[2];
        for (size_t b = 0; b < grid.mass.size(); ++b) {
            out << fmt_double(grid.mass[b]);
            out << ((static_cast<int>(b) % row == row - 1) ? "\n" : " ");
        }
    }
    std::ofstream of(path, std::ios::binary);
    if (!of)
        throw Error("cannot write " + path);
    of << out.str();
}

} // namespace rangerec
