#include "rangerec/likelihood.hpp"

#include <cmath>

namespace rangerec {

double LikelihoodParams::ln_n(int class_id) const {
    auto it = ln_normalization.find(class_id);
    if (it == ln_normalization.end())
        throw Error("missing ln N(c) for class " + std::to_string(class_id));
    if (!std::isfinite(it->second))
        throw Error("ln N(c) must be finite");
    return it->second;
}

double visible_flux_integral(const TriMesh& mesh, const Vec3& gaze, double falloff) {
    double flux = 0;
    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        double cos_phi = mesh.inward_normals[i].dot(gaze);
        if (cos_phi <= 0) continue;
        flux += mesh.area_of(static_cast<int>(i)) * std::exp(2.0 * falloff * (cos_phi - 1.0));
    }
    return flux;
}

double visible_area(const TriMesh& mesh, const Vec3& gaze) {
    double area = 0;
    for (size_t i = 0; i < mesh.triangles.size(); ++i)
        if (mesh.inward_normals[i].dot(gaze) > 0) area += mesh.area_of(static_cast<int>(i));
    return area;
}

double normalization(const ObjectModel& model, const LikelihoodParams& params, const Vec3& gaze) {
    if (params.falloff < 0 || params.background <= 0 || params.shell_halfwidth <= 0)
        throw Error("invalid likelihood parameters");
    model.mesh.validate();
    const double flux = visible_flux_integral(model.mesh, gaze, params.falloff);
    const double area = visible_area(model.mesh, gaze);
    const double vol = model.mesh.enclosed_volume();
    const double inv_n = 2.0 * params.shell_halfwidth * flux +
                         params.background * (vol - 2.0 * params.shell_halfwidth * area);
    if (inv_n <= 0)
        throw Error("normalization is not positive; shell too thick for this mesh");
    return -std::log(inv_n);
}

LikelihoodValue log_likelihood(const RangeScan& scan, const ObjectModel& model,
                               const MeshQuery& query, const Pose& pose,
                               const LikelihoodParams& params) {
    const double ln_n = params.ln_n(model.class_id);
    const double ln_b = std::log(params.background);
    LikelihoodValue out;
    for (const auto& pt : scan.points) {
        PointClassification c = classify_point(query, pose, pt, scan.gaze,
                                               params.shell_halfwidth, params.occlusion_test);
        if (c.kind == PointClass::Surface) {
            out.log_likelihood += 2.0 * params.falloff * (c.normal.dot(scan.gaze) - 1.0) + ln_n;
            ++out.points_in_volume;
        } else if (c.kind == PointClass::Interior) {
            out.log_likelihood += ln_b + ln_n;
            ++out.points_in_volume;
        }
    }
    return out;
}

LikelihoodValue log_likelihood(const RangeScan& scan, const ObjectModel& model, const Pose& pose,
                               const LikelihoodParams& params) {
    MeshQuery query(model.mesh);
    return log_likelihood(scan, model, query, pose, params);
}

} // namespace rangerec
