#include "rangerec/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "rangerec/mesh_query.hpp"
#include "rangerec/rng.hpp"

namespace rangerec {

void SynthParams::validate() const {
    if (falloff < 0)
        throw Error("falloff must be non-negative");
    if (background <= 0)
        throw Error("background density must be positive");
    if (noise_sigma < 0)
        throw Error("noise sigma must be non-negative");
    if (pixel_pitch <= 0)
        throw Error("pixel pitch must be positive");
    if (surface_point_budget < 1)
        throw Error("surface point budget must be >= 1");
    if (outlier_count < 0)
        throw Error("outlier count must be non-negative");
}

void gaze_frame(const Vec3& gaze, Vec3& u, Vec3& v) {
    int k = 0;
    Vec3 a = gaze.cwiseAbs();
    if (a[1] < a[k]) k = 1;
    if (a[2] < a[k]) k = 2;
    Vec3 e = Vec3::Zero();
    e[k] = 1.0;
    u = e.cross(gaze).normalized();
    v = gaze.cross(u);
}

RangeScan compose_scene(const std::vector<ScenePlacement>& placements, const Vec3& gaze,
                        const SynthParams& params) {
    params.validate();
    if (placements.empty())
        throw Error("scene needs at least one placement");
    require_unit(gaze, 1e-6);

    // Visible triangles of all placements with sampling weight area * f(phi).
    struct VisTri {
        const ScenePlacement* placement;
        int tri;
    };
    std::vector<VisTri> tris;
    std::vector<double> cumulative;
    double total_weight = 0;
    Vec3 scene_lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 scene_hi = -scene_lo;
    for (const auto& pl : placements) {
        if (!pl.model)
            throw Error("placement without a model");
        const TriMesh& mesh = pl.model->mesh;
        for (const auto& v : mesh.vertices) {
            Vec3 w = pl.pose.apply(v);
            scene_lo = scene_lo.cwiseMin(w);
            scene_hi = scene_hi.cwiseMax(w);
        }
        for (size_t t = 0; t < mesh.triangles.size(); ++t) {
            double cos_phi = (pl.pose.rotation * mesh.inward_normals[t]).dot(gaze);
            if (cos_phi <= 0) continue;
            double w = mesh.area_of(static_cast<int>(t)) *
                       std::exp(2.0 * params.falloff * (cos_phi - 1.0));
            if (w <= 0) continue;
            total_weight += w;
            tris.push_back({&pl, static_cast<int>(t)});
            cumulative.push_back(total_weight);
        }
    }
    if (tris.empty() || total_weight <= 0)
        throw EmptyView("no sensor-facing surface in the scene");

    Rng rng(params.rng_seed);
    std::vector<Vec3> candidates;
    candidates.reserve(static_cast<size_t>(params.surface_point_budget) + params.outlier_count);
    for (int i = 0; i < params.surface_point_budget; ++i) {
        double pick = rng.uniform() * total_weight;
        size_t idx = std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
                     cumulative.begin();
        if (idx >= tris.size()) idx = tris.size() - 1;
        const auto& vt = tris[idx];
        const TriMesh& mesh = vt.placement->model->mesh;
        const auto& t = mesh.triangles[vt.tri];
        double r1 = std::sqrt(rng.uniform());
        double r2 = rng.uniform();
        Vec3 p = (1 - r1) * mesh.vertices[t[0]] + r1 * (1 - r2) * mesh.vertices[t[1]] +
                 r1 * r2 * mesh.vertices[t[2]];
        p = vt.placement->pose.apply(p);
        if (params.noise_sigma > 0)
            p += params.noise_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
        candidates.push_back(p);
    }

    Vec3 span = scene_hi - scene_lo;
    Vec3 out_lo = scene_lo - 0.05 * span;
    Vec3 out_hi = scene_hi + 0.05 * span;
    for (int i = 0; i < params.outlier_count; ++i)
        candidates.push_back(Vec3(rng.uniform(out_lo.x(), out_hi.x()),
                                  rng.uniform(out_lo.y(), out_hi.y()),
                                  rng.uniform(out_lo.z(), out_hi.z())));

    // Single shared depth buffer: one nearest point per pixel along the gaze.
    Vec3 ub, vb;
    gaze_frame(gaze, ub, vb);
    std::unordered_map<uint64_t, int> front; // pixel -> candidate index
    front.reserve(candidates.size() * 2);
    for (size_t i = 0; i < candidates.size(); ++i) {
        const Vec3& p = candidates[i];
        int64_t pu = static_cast<int64_t>(std::floor(ub.dot(p) / params.pixel_pitch));
        int64_t pv = static_cast<int64_t>(std::floor(vb.dot(p) / params.pixel_pitch));
        uint64_t key = (static_cast<uint64_t>(pu & 0xFFFFFFFFll) << 32) |
                       static_cast<uint64_t>(pv & 0xFFFFFFFFll);
        auto [it, inserted] = front.emplace(key, static_cast<int>(i));
        if (!inserted && gaze.dot(p) < gaze.dot(candidates[it->second]))
            it->second = static_cast<int>(i);
    }
    std::vector<char> keep(candidates.size(), 0);
    for (const auto& [key, idx] : front) keep[idx] = 1;

    RangeScan scan;
    scan.gaze = gaze;
    for (size_t i = 0; i < candidates.size(); ++i)
        if (keep[i]) scan.points.push_back(candidates[i]);
    if (scan.points.empty())
        throw EmptyView("no points survived the depth buffer");

    // Ground truth with per-feature visibility.
    GroundTruth truth;
    std::vector<MeshQuery> queries;
    queries.reserve(placements.size());
    for (const auto& pl : placements) queries.emplace_back(pl.model->mesh);
    const double reach = 2.0 * span.norm() + 10.0;
    // Rays exactly through mesh vertices can graze triangle edges, so each
    // feature is probed with a bundle of slightly offset sensor rays; one
    // unblocked ray suffices.
    const std::array<Vec3, 5> offsets = {Vec3::Zero(), 0.35 * ub, -0.35 * ub, 0.35 * vb,
                                         -0.35 * vb};
    for (size_t k = 0; k < placements.size(); ++k) {
        const auto& pl = placements[k];
        truth.placements.push_back({pl.model->class_id, pl.pose});
        Pose inv = pl.pose.inverse();
        Vec3 gaze_model = inv.rotation * gaze;
        for (const auto& f : pl.model->features) {
            FeatureTruth ft;
            ft.shape_class = f.shape_class;
            ft.position = pl.pose.apply(f.position);
            bool facing =
                queries[k].nearest_facing_surface(f.position, gaze_model).distance <= 1e-6;
            bool reachable = false;
            for (const auto& off : offsets) {
                if (reachable || !facing) break;
                bool blocked = false;
                for (size_t q = 0; q < placements.size() && !blocked; ++q) {
                    Pose qinv = placements[q].pose.inverse();
                    Vec3 origin = qinv.apply(ft.position + off - reach * gaze);
                    Vec3 dir = qinv.rotation * gaze;
                    if (queries[q].first_ray_hit(origin, dir) < reach - 1e-3) blocked = true;
                }
                reachable = !blocked;
            }
            ft.visible = facing && reachable;
            truth.features.push_back(ft);
        }
    }
    scan.truth = std::move(truth);
    return scan;
}

RangeScan sample_object_scan(const ObjectModel& model, const Pose& pose, const Vec3& gaze,
                             const SynthParams& params) {
    ScenePlacement pl{&model, pose};
    return compose_scene({pl}, gaze, params);
}

} // namespace rangerec
