#pragma once

#include <cstdint>
#include <vector>

#include "rangerec/geometry.hpp"

namespace rangerec {

struct SynthParams {
    double falloff = 4.0;        // a: surface intensity exp(2a(cos phi - 1))
    double background = 1e-9;    // b: background density motivating uniform outliers
    double noise_sigma = 0.0;    // mm, isotropic Gaussian
    int outlier_count = 0;
    double pixel_pitch = 2.0;    // mm, depth-buffer resolution
    int surface_point_budget = 5000;
    uint64_t rng_seed = 1;

    void validate() const;
};

struct ScenePlacement {
    const ObjectModel* model = nullptr;
    Pose pose;
};

/// Forward-samples the generative range-data model for a single view:
/// area-weighted surface sampling thinned by f(phi), Gaussian noise, uniform
/// outliers in the inflated scene bounding box, and a single depth-buffer
/// pass along the gaze (one nearest point per occupied pixel). Ground truth
/// (placements and visibility-flagged posed features) is attached.
RangeScan compose_scene(const std::vector<ScenePlacement>& placements, const Vec3& gaze,
                        const SynthParams& params);

RangeScan sample_object_scan(const ObjectModel& model, const Pose& pose, const Vec3& gaze,
                             const SynthParams& params);

/// Orthonormal frame (u, v) completing the gaze to a right-handed basis;
/// used by the depth buffer and exposed for tests.
void gaze_frame(const Vec3& gaze, Vec3& u, Vec3& v);

} // namespace rangerec
