#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rangerec/geometry.hpp"

namespace rangerec {

/// Normalized tetrahedron geometry around an inspection point:
/// u1 = r/R (mean radius), u2 = signed plane distance over its bound,
/// u3 = triangle regularity. Lives in [0,1] x [-1,1] x [0,1].
struct DeltaSample {
    double u1 = 0, u2 = 0, u3 = 0;
};

struct RelationConfig {
    double neighborhood_radius = 15.0; // R, mm
    double ring_tolerance = 1.0;       // eps, mm: max-min distance spread
    int sample_len = 50;               // l
    std::array<int, 3> bins = {15, 20, 10};

    void validate() const;
};

/// Maps an inspection point and a data-point triple to a DeltaSample.
/// The plane-distance sign follows the gaze via the triangle centroid;
/// components are clamped to their intervals. Throws DegenerateTriple for
/// coincident points and OutOfNeighborhood when the mean radius reaches R.
DeltaSample delta_map(const Vec3& center, const Vec3& x1, const Vec3& x2, const Vec3& x3,
                      double neighborhood_radius, const Vec3& gaze);

/// Draws up to cfg.sample_len DeltaSamples from triples of scan points that
/// are within R of `center` and mutually equidistant from it within eps
/// (bucketed into distance rings of width eps). Uniform over qualifying
/// triples, deterministic per seed. Returns fewer samples only when fewer
/// qualifying triples exist; empty when fewer than 3 points are in range.
std::vector<DeltaSample> sample_tetra(const RangeScan& scan, const Vec3& center,
                                      const RelationConfig& cfg, uint64_t seed);

/// Same, reusing a prebuilt neighbor grid over scan.points (cell size >= R).
std::vector<DeltaSample> sample_tetra(const RangeScan& scan, const PointGrid& grid,
                                      const Vec3& center, const RelationConfig& cfg,
                                      uint64_t seed);

/// Binned density over Delta-space for one shape class. Smoothed so every
/// bin carries positive mass; masses sum to 1.
struct DensityGrid {
    std::array<int, 3> bins = {15, 20, 10};
    std::vector<double> mass;  // row-major (u1, u2, u3)
    double pseudo_count = 0.5; // alpha
    int64_t sample_count = 0;

    int bin_index(const DeltaSample& d) const;
    double mass_at(const DeltaSample& d) const { return mass[bin_index(d)]; }
};

/// Per-class point-relation densities p(Delta|s); class 0 is the non-feature
/// class. Immutable after training.
struct DensityModel {
    int num_classes = 0; // m; grids has m+1 entries, index = class label
    std::vector<DensityGrid> grids;
    RelationConfig config;

    const DensityGrid& grid_for(int shape_class) const;
};

/// Counts per-class samples into bins with Laplace smoothing alpha:
/// mass = (count + alpha) / (N + alpha * #bins). samples_per_class[0] is the
/// non-feature class; throws EmptyClass if any class has no samples.
DensityModel train_density(const std::vector<std::vector<DeltaSample>>& samples_per_class,
                           const RelationConfig& cfg, double alpha);

/// Sum of log-ratio lookups for a fixed sample list.
double phi_from_samples(const std::vector<DeltaSample>& samples, int shape_class,
                        const DensityModel& dm);

/// Feature log-probability: draws sample_len tetrahedra at f and returns
/// sum_i [ln p(Delta_i|s) - ln p(Delta_i|0)]. Returns -infinity when no
/// samples are available.
double phi_score(const RangeScan& scan, int shape_class, const Vec3& f, const DensityModel& dm,
                 uint64_t seed);
double phi_score(const RangeScan& scan, const PointGrid& grid, int shape_class, const Vec3& f,
                 const DensityModel& dm, uint64_t seed);

DensityModel load_density(const std::string& path);
void write_density(const DensityModel& dm, const std::string& path);

} // namespace rangerec
