#pragma once

#include <cstdint>
#include <vector>

#include "rangerec/likelihood.hpp"
#include "rangerec/model_index.hpp"
#include "rangerec/relation_density.hpp"

namespace rangerec {

struct FeatureCandidate {
    int shape_class = 0;
    Vec3 position = Vec3::Zero();
    int point_index = -1;
    double phi = 0;
};

struct Hypothesis {
    int class_id = 0;
    Pose pose;
    double tp = 0;
    std::array<int, 3> triple = {-1, -1, -1}; // candidate indices that drew it
    double gamma = 0;
    EntryRef entry;
};

struct SearchConfig {
    double candidate_threshold = 0.0; // Xi; -infinity disables the cut
    double accept_threshold = 0.0;    // Theta
    int64_t max_evaluations = 0;      // K; 0 = unlimited
    double dedup_rotation = 1.0 * M_PI / 180.0; // radians
    double dedup_translation = 2.0;             // mm
    double max_triple_distance = 0;             // 0 = auto from the model set
    bool return_best_fallback = false;
};

enum class Outcome { Accepted, BestEffort, NoneFound };

struct RecognitionResult {
    Outcome outcome = Outcome::NoneFound;
    int class_id = 0;
    Pose pose;
    double log_likelihood = 0;
    double tp = 0;
    int evaluations = 0;
    std::vector<std::pair<double, double>> hypothesis_log; // (tp, L) in evaluation order
};

/// Scores every (shape class, data point) pair and keeps those with
/// phi > threshold, sorted by phi descending. Deterministic per seed.
std::vector<FeatureCandidate> select_candidates(const RangeScan& scan, const DensityModel& dm,
                                                double threshold, uint64_t seed);

/// Total order used to rank hypotheses: tp descending, then class id, then
/// lexicographic pose.
bool hypothesis_order(const Hypothesis& a, const Hypothesis& b);

/// Enumerates candidate triples within the pairwise-distance bound, queries
/// the index, scores tp = ln gamma + phi1 + phi2 + phi3, and merges
/// duplicate poses (same class, rotation/translation within the dedup
/// thresholds) keeping the highest tp. Sorted by hypothesis_order.
std::vector<Hypothesis> generate_hypotheses(const std::vector<FeatureCandidate>& candidates,
                                            const GeomHashIndex& index, const SearchConfig& cfg);

/// TP-ordered hypothesize-and-test: evaluates the likelihood in tp order and
/// stops at the first L > Theta.
RecognitionResult recognize(const RangeScan& scan, const std::vector<ObjectModel>& models,
                            const DensityModel& dm, const GeomHashIndex& index,
                            const LikelihoodParams& lp, const SearchConfig& cfg, uint64_t seed);

/// Sequential multi-object search: after each acceptance, removes the scan
/// points explained by the accepted object and restarts. Stops at
/// max_objects or the first non-acceptance (which is included in the
/// returned list).
std::vector<RecognitionResult> recognize_sequential(const RangeScan& scan,
                                                    const std::vector<ObjectModel>& models,
                                                    const DensityModel& dm,
                                                    const GeomHashIndex& index,
                                                    const LikelihoodParams& lp,
                                                    const SearchConfig& cfg, uint64_t seed,
                                                    int max_objects);

} // namespace rangerec
