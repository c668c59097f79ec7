#pragma once

#include <map>

#include "rangerec/geometry.hpp"
#include "rangerec/mesh_query.hpp"

namespace rangerec {

struct LikelihoodParams {
    double falloff = 4.0;           // a: surface density falloff with gaze angle
    double background = 1e-9;       // b: interior-to-peak density ratio
    double shell_halfwidth = 2.0;   // delta_S, mm
    double accept_threshold = 0.0;  // Theta, log-likelihood units
    bool occlusion_test = false;
    std::map<int, double> ln_normalization; // per-class ln N(c)

    double ln_n(int class_id) const;
};

/// Angle-weighted visible-surface integral: sum over sensor-facing triangles
/// of area * exp(2a(cos phi - 1)), with phi constant per triangle.
double visible_flux_integral(const TriMesh& mesh, const Vec3& gaze, double falloff);

/// Sensor-facing surface area.
double visible_area(const TriMesh& mesh, const Vec3& gaze);

/// ln N(c) of the generative model at the model's canonical pose:
/// 1/N = 2 delta_S * integral_visible f(phi) dA + b * (vol - 2 delta_S * A_visible).
double normalization(const ObjectModel& model, const LikelihoodParams& params, const Vec3& gaze);

struct LikelihoodValue {
    double log_likelihood = 0;
    int points_in_volume = 0; // points classified Surface or Interior
};

/// Log-likelihood of the scan under object (model, pose): Surface points add
/// 2a[n.g - 1] + ln N(c), Interior points add ln b + ln N(c), points outside
/// the volume contribute nothing.
LikelihoodValue log_likelihood(const RangeScan& scan, const ObjectModel& model,
                               const MeshQuery& query, const Pose& pose,
                               const LikelihoodParams& params);
LikelihoodValue log_likelihood(const RangeScan& scan, const ObjectModel& model, const Pose& pose,
                               const LikelihoodParams& params);

} // namespace rangerec
