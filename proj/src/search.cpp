#include "rangerec/search.hpp"

#include <algorithm>
#include <cmath>

namespace rangerec {

std::vector<FeatureCandidate> select_candidates(const RangeScan& scan, const DensityModel& dm,
                                                double threshold, uint64_t seed) {
    std::vector<FeatureCandidate> out;
    if (dm.num_classes < 1) return out;
    PointGrid grid(scan.points, dm.config.neighborhood_radius);
    for (size_t i = 0; i < scan.points.size(); ++i) {
        // One tetrahedron draw per point, shared across shape classes;
        // matches phi_score called with the same per-point seed.
        auto samples =
            sample_tetra(scan, grid, scan.points[i], dm.config, mix_seed(seed, i));
        for (int s = 1; s <= dm.num_classes; ++s) {
            double phi = samples.empty() ? -std::numeric_limits<double>::infinity()
                                         : phi_from_samples(samples, s, dm);
            if (phi > threshold)
                out.push_back({s, scan.points[i], static_cast<int>(i), phi});
        }
    }
    std::sort(out.begin(), out.end(), [](const FeatureCandidate& a, const FeatureCandidate& b) {
        if (a.phi != b.phi) return a.phi > b.phi;
        if (a.point_index != b.point_index) return a.point_index < b.point_index;
        return a.shape_class < b.shape_class;
    });
    return out;
}

namespace {

bool pose_lex_less(const Pose& a, const Pose& b) {
    for (int i = 0; i < 3; ++i) {
        if (a.translation[i] != b.translation[i]) return a.translation[i] < b.translation[i];
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            if (a.rotation(r, c) != b.rotation(r, c)) return a.rotation(r, c) < b.rotation(r, c);
        }
    return false;
}

bool same_hypothesis(const Hypothesis& a, const Hypothesis& b, const SearchConfig& cfg) {
    if (a.class_id != b.class_id) return false;
    if ((a.pose.translation - b.pose.translation).norm() >= cfg.dedup_translation) return false;
    return rotation_angle_between(a.pose.rotation, b.pose.rotation) < cfg.dedup_rotation;
}

} // namespace

bool hypothesis_order(const Hypothesis& a, const Hypothesis& b) {
    if (a.tp != b.tp) return a.tp > b.tp;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    return pose_lex_less(a.pose, b.pose);
}

std::vector<Hypothesis> generate_hypotheses(const std::vector<FeatureCandidate>& candidates,
                                            const GeomHashIndex& index, const SearchConfig& cfg) {
    const int n = static_cast<int>(candidates.size());
    const double maxd = cfg.max_triple_distance > 0 ? cfg.max_triple_distance
                                                    : std::numeric_limits<double>::infinity();
    std::vector<Hypothesis> all;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double dij = (candidates[i].position - candidates[j].position).norm();
            if (dij > maxd || dij < 1e-9) continue;
            for (int k = j + 1; k < n; ++k) {
                double dik = (candidates[i].position - candidates[k].position).norm();
                double djk = (candidates[j].position - candidates[k].position).norm();
                if (dik > maxd || djk > maxd || dik < 1e-9 || djk < 1e-9) continue;
                std::array<Feature, 3> triple = {
                    Feature{candidates[i].shape_class, candidates[i].position},
                    Feature{candidates[j].shape_class, candidates[j].position},
                    Feature{candidates[k].shape_class, candidates[k].position}};
                for (const auto& hit : query(index, triple)) {
                    Hypothesis h;
                    h.class_id = hit.class_id;
                    h.pose = hit.pose;
                    h.tp = std::log(hit.gamma) + candidates[i].phi + candidates[j].phi +
                           candidates[k].phi;
                    h.triple = {i, j, k};
                    h.gamma = hit.gamma;
                    h.entry = hit.ref;
                    all.push_back(std::move(h));
                }
            }
        }
    }
    std::sort(all.begin(), all.end(), hypothesis_order);
    // Greedy skip of duplicates in rank order realizes the max-merge.
    std::vector<Hypothesis> kept;
    for (const auto& h : all) {
        bool dup = false;
        for (const auto& k : kept) {
            if (same_hypothesis(h, k, cfg)) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(h);
    }
    return kept;
}

RecognitionResult recognize(const RangeScan& scan, const std::vector<ObjectModel>& models,
                            const DensityModel& dm, const GeomHashIndex& index,
                            const LikelihoodParams& lp, const SearchConfig& cfg, uint64_t seed) {
    SearchConfig effective = cfg;
    if (effective.max_triple_distance <= 0) {
        // Triples wider than any model triple cannot hit the index.
        double maxd = 0;
        for (const auto& m : models) maxd = std::max(maxd, m.max_feature_pair_distance());
        effective.max_triple_distance = maxd + 2.0 * index.quantization;
    }

    auto candidates = select_candidates(scan, dm, cfg.candidate_threshold, seed);
    auto hypotheses = generate_hypotheses(candidates, index, effective);

    std::vector<MeshQuery> queries;
    queries.reserve(models.size());
    for (const auto& m : models) queries.emplace_back(m.mesh);
    auto model_slot = [&](int class_id) -> int {
        for (size_t i = 0; i < models.size(); ++i)
            if (models[i].class_id == class_id) return static_cast<int>(i);
        throw Error("hypothesis references unknown class " + std::to_string(class_id));
    };

    RecognitionResult result;
    int best = -1;
    double best_l = -std::numeric_limits<double>::infinity();
    for (const auto& h : hypotheses) {
        if (cfg.max_evaluations > 0 && result.evaluations >= cfg.max_evaluations) break;
        int slot = model_slot(h.class_id);
        LikelihoodValue lv = log_likelihood(scan, models[slot], queries[slot], h.pose, lp);
        result.hypothesis_log.emplace_back(h.tp, lv.log_likelihood);
        ++result.evaluations;
        if (lv.log_likelihood > best_l) {
            best_l = lv.log_likelihood;
            best = static_cast<int>(result.hypothesis_log.size()) - 1;
        }
        if (lv.log_likelihood > cfg.accept_threshold) {
            result.outcome = Outcome::Accepted;
            result.class_id = h.class_id;
            result.pose = h.pose;
            result.log_likelihood = lv.log_likelihood;
            result.tp = h.tp;
            return result;
        }
    }
    if (cfg.return_best_fallback && best >= 0) {
        // hypotheses[best] is the argmax-L among the evaluated prefix.
        const Hypothesis& h = hypotheses[best];
        result.outcome = Outcome::BestEffort;
        result.class_id = h.class_id;
        result.pose = h.pose;
        result.log_likelihood = best_l;
        result.tp = h.tp;
        return result;
    }
    result.outcome = Outcome::NoneFound;
    return result;
}

std::vector<RecognitionResult> recognize_sequential(const RangeScan& scan,
                                                    const std::vector<ObjectModel>& models,
                                                    const DensityModel& dm,
                                                    const GeomHashIndex& index,
                                                    const LikelihoodParams& lp,
                                                    const SearchConfig& cfg, uint64_t seed,
                                                    int max_objects) {
    if (max_objects < 1)
        throw Error("max_objects must be >= 1");
    std::vector<RecognitionResult> results;
    RangeScan working = scan;
    std::vector<MeshQuery> queries;
    queries.reserve(models.size());
    for (const auto& m : models) queries.emplace_back(m.mesh);

    for (int round = 0; round < max_objects; ++round) {
        if (working.points.empty()) break;
        RecognitionResult r = recognize(working, models, dm, index, lp, cfg,
                                        mix_seed(seed, static_cast<uint64_t>(round)));
        results.push_back(r);
        if (r.outcome != Outcome::Accepted) break;

        int slot = -1;
        for (size_t i = 0; i < models.size(); ++i)
            if (models[i].class_id == r.class_id) slot = static_cast<int>(i);
        std::vector<Vec3> remaining;
        remaining.reserve(working.points.size());
        for (const auto& p : working.points) {
            PointClassification c = classify_point(queries[slot], r.pose, p, working.gaze,
                                                   lp.shell_halfwidth, lp.occlusion_test);
            if (c.kind == PointClass::Outside) remaining.push_back(p);
        }
        working.points = std::move(remaining);
    }
    return results;
}

} // namespace rangerec
