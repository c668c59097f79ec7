#include "rangerec/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rangerec {

RelationConfig Config::relation_config() const {
    RelationConfig rc;
    rc.neighborhood_radius = neighborhood_radius;
    rc.ring_tolerance = ring_tolerance;
    rc.sample_len = sample_len;
    rc.bins = bins;
    return rc;
}

SynthParams Config::synth_params() const {
    SynthParams sp;
    sp.falloff = falloff;
    sp.background = background;
    sp.noise_sigma = noise_sigma;
    sp.outlier_count = outlier_count;
    sp.pixel_pitch = pixel_pitch;
    sp.surface_point_budget = surface_point_budget;
    sp.rng_seed = seed;
    return sp;
}

LikelihoodParams Config::likelihood_params() const {
    LikelihoodParams lp;
    lp.falloff = falloff;
    lp.background = background;
    lp.shell_halfwidth = shell_halfwidth;
    lp.accept_threshold = theta;
    lp.occlusion_test = occlusion_test;
    return lp;
}

SearchConfig Config::search_config() const {
    SearchConfig sc;
    sc.candidate_threshold = xi;
    sc.accept_threshold = theta;
    sc.max_evaluations = max_evaluations;
    sc.dedup_rotation = dedup_rot_deg * M_PI / 180.0;
    sc.dedup_translation = dedup_trans;
    sc.max_triple_distance = max_triple_dist;
    sc.return_best_fallback = fallback_best;
    return sc;
}

void Config::validate() const {
    relation_config().validate();
    if (alpha <= 0) throw Error("alpha must be positive");
    if (falloff < 0) throw Error("a must be non-negative");
    if (background <= 0) throw Error("b must be positive");
    if (shell_halfwidth <= 0) throw Error("delta_s must be positive");
    if (!std::isfinite(ln_n_offset)) throw Error("ln_n_offset must be finite");
    if (quantization <= 0) throw Error("q_d must be positive");
    if (gamma_init <= 0 || gamma_init >= 1) throw Error("gamma_init must be in (0,1)");
    if (max_evaluations < 0) throw Error("k_max must be >= 0");
    if (dedup_rot_deg < 0) throw Error("dedup_rot_deg must be >= 0");
    if (dedup_trans < 0) throw Error("dedup_trans must be >= 0");
    if (max_triple_dist < 0) throw Error("max_triple_dist must be >= 0");
    if (max_objects < 1) throw Error("max_objects must be >= 1");
    if (noise_sigma < 0) throw Error("noise_sigma must be >= 0");
    if (outlier_count < 0) throw Error("outlier_count must be >= 0");
    if (pixel_pitch <= 0) throw Error("pixel_pitch must be positive");
    if (surface_point_budget < 1) throw Error("surface_point_budget must be >= 1");
    if (std::abs(gaze.norm() - 1.0) > 1e-6) throw Error("gaze must be unit-norm");
    if (train_nonfeature_per_scan < 0) throw Error("train_nonfeature_per_scan must be >= 0");
    if (nonfeature_margin < 0) throw Error("nonfeature_margin must be >= 0");
    if (rank_match_radius <= 0) throw Error("rank_match_radius must be positive");
    if (rank_hist_bins < 1) throw Error("rank_hist_bins must be >= 1");
}

namespace {

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") { out = true; return true; }
    if (v == "false" || v == "0") { out = false; return true; }
    return false;
}

} // namespace

Config parse_config_text(const std::string& text, const std::string& name) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t h = line.find('#');
        if (h != std::string::npos) line.resize(h);
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        size_t eq = line.find('=');
        auto fail = [&](const std::string& msg) -> void {
            throw ParseError(name + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (eq == std::string::npos) fail("expected 'key = value'");
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail("expected 'key = value'");

        auto as_double = [&](double& out) {
            char* end = nullptr;
            out = std::strtod(value.c_str(), &end);
            if (end == value.c_str() || *end != '\0') fail("bad number '" + value + "'");
        };
        auto as_int = [&](auto& out) {
            char* end = nullptr;
            long long v = std::strtoll(value.c_str(), &end, 10);
            if (end == value.c_str() || *end != '\0') fail("bad integer '" + value + "'");
            out = static_cast<std::decay_t<decltype(out)>>(v);
        };

        if (key == "R") as_double(cfg.neighborhood_radius);
        else if (key == "eps") as_double(cfg.ring_tolerance);
        else if (key == "l") as_int(cfg.sample_len);
        else if (key == "bins") {
            if (std::sscanf(value.c_str(), "%dx%dx%d", &cfg.bins[0], &cfg.bins[1],
                            &cfg.bins[2]) != 3)
                fail("bins must look like 15x20x10");
        } else if (key == "alpha") as_double(cfg.alpha);
        else if (key == "a") as_double(cfg.falloff);
        else if (key == "b") as_double(cfg.background);
        else if (key == "delta_s") as_double(cfg.shell_halfwidth);
        else if (key == "theta") as_double(cfg.theta);
        else if (key == "ln_n_offset") as_double(cfg.ln_n_offset);
        else if (key == "occlusion_test") {
            if (!parse_bool(value, cfg.occlusion_test)) fail("bad boolean '" + value + "'");
        } else if (key == "q_d") as_double(cfg.quantization);
        else if (key == "gamma_init") as_double(cfg.gamma_init);
        else if (key == "xi") as_double(cfg.xi);
        else if (key == "k_max") as_int(cfg.max_evaluations);
        else if (key == "dedup_rot_deg") as_double(cfg.dedup_rot_deg);
        else if (key == "dedup_trans") as_double(cfg.dedup_trans);
        else if (key == "max_triple_dist") as_double(cfg.max_triple_dist);
        else if (key == "fallback_best") {
            if (!parse_bool(value, cfg.fallback_best)) fail("bad boolean '" + value + "'");
        } else if (key == "max_objects") as_int(cfg.max_objects);
        else if (key == "noise_sigma") as_double(cfg.noise_sigma);
        else if (key == "outlier_count") as_int(cfg.outlier_count);
        else if (key == "pixel_pitch") as_double(cfg.pixel_pitch);
        else if (key == "surface_point_budget") as_int(cfg.surface_point_budget);
        else if (key == "gaze") {
            Vec3 g;
            if (std::sscanf(value.c_str(), "%lf %lf %lf", &g.x(), &g.y(), &g.z()) != 3)
                fail("gaze must be three numbers");
            if (g.norm() < 1e-12) fail("gaze must be non-zero");
            cfg.gaze = g.normalized();
        } else if (key == "seed") as_int(cfg.seed);
        else if (key == "train_nonfeature_per_scan") as_int(cfg.train_nonfeature_per_scan);
        else if (key == "nonfeature_margin") as_double(cfg.nonfeature_margin);
        else if (key == "rank_match_radius") as_double(cfg.rank_match_radius);
        else if (key == "rank_hist_bins") as_int(cfg.rank_hist_bins);
        else fail("unknown key '" + key + "'");
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw ParseError(name + ": " + e.what());
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

} // namespace rangerec
