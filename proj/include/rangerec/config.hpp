#pragma once

#include <string>

#include "rangerec/likelihood.hpp"
#include "rangerec/relation_density.hpp"
#include "rangerec/scene_synth.hpp"
#include "rangerec/search.hpp"

namespace rangerec {

/// All pipeline parameters, parsed from a line-oriented `key = value` file
/// with `#` comments. Every field has a default; load_config validates
/// ranges and reports line-precise errors.
struct Config {
    // Relation densities (defaults follow the reference experiment scale).
    double neighborhood_radius = 15.0; // R, mm
    double ring_tolerance = 1.0;       // eps, mm
    int sample_len = 50;               // l
    std::array<int, 3> bins = {15, 20, 10};
    double alpha = 0.5; // smoothing pseudo-count

    // Likelihood.
    double falloff = 4.0;      // a
    double background = 1e-9;  // b
    double shell_halfwidth = 2.0; // delta_s, mm
    double theta = 0.0;        // acceptance threshold
    double ln_n_offset = 0.0;  // added to computed ln N(c); selects the density unit
    bool occlusion_test = false;

    // Geometric hash index.
    double quantization = 5.0; // q_d, mm
    double gamma_init = 1.0 / 3.0;

    // Search.
    double xi = 0.0;               // candidate threshold; -inf disables
    int64_t max_evaluations = 0;   // K; 0 = unlimited
    double dedup_rot_deg = 1.0;
    double dedup_trans = 2.0; // mm
    double max_triple_dist = 0.0; // 0 = auto
    bool fallback_best = false;
    int max_objects = 2;

    // Scene synthesis.
    double noise_sigma = 1.0; // mm
    int outlier_count = 0;
    double pixel_pitch = 2.0; // mm
    int surface_point_budget = 5000;
    Vec3 gaze = Vec3(0, 0, 1);

    uint64_t seed = 1;

    // Training and evaluation harness.
    int train_nonfeature_per_scan = 300;
    double nonfeature_margin = 7.5;  // mm, min distance of class-0 centers to true features
    double rank_match_radius = 3.0;  // mm, true feature to nearest data point
    int rank_hist_bins = 20;

    RelationConfig relation_config() const;
    SynthParams synth_params() const;
    LikelihoodParams likelihood_params() const; // ln N table left to the caller
    SearchConfig search_config() const;

    void validate() const; // throws Error with the offending key
};

Config load_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& name);

} // namespace rangerec
