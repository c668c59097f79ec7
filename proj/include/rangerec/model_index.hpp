#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "rangerec/geometry.hpp"

namespace rangerec {

/// Pose-invariant key of a feature triple: canonically ordered shape labels
/// plus quantized pairwise distances. Identical for all orderings of the
/// same triple.
struct HashKey {
    std::array<int, 3> labels = {0, 0, 0};
    std::array<int, 3> dist_bins = {0, 0, 0};

    bool operator==(const HashKey&) const = default;
    bool operator<(const HashKey& o) const;
};

struct HashKeyHasher {
    size_t operator()(const HashKey& k) const;
};

/// One stored model triple under a key, with its correspondence order and
/// learned grouping weight state.
struct HashEntry {
    int class_id = 0;
    std::array<Vec3, 3> model_points; // correspondence order matches the key's canonical order
    double gamma = 1.0 / 3.0;         // raw weight before the per-key cap
    int64_t draws = 0;
    int64_t successes = 0;
};

struct EntryRef {
    HashKey key;
    int entry_idx = -1;
};

struct QueryHit {
    int class_id = 0;
    Pose pose; // maps the stored model triple onto the query triple
    double gamma = 0;
    EntryRef ref;
};

/// Geometric hash table over model feature triples. Effective weights are
/// the raw gammas rescaled per key so they sum to at most gamma_cap,
/// keeping sum_i gamma_i < 1.
class GeomHashIndex {
  public:
    double quantization = 5.0; // q_d, mm
    double gamma_init = 1.0 / 3.0;
    double gamma_cap = 0.9;

    std::unordered_map<HashKey, std::vector<HashEntry>, HashKeyHasher> table;

    double key_scale(const HashKey& key) const;
    double effective_gamma(const EntryRef& ref) const;
    const HashEntry& entry(const EntryRef& ref) const;
    size_t total_entries() const;
};

/// Canonical key of a feature-value triple. Throws DegenerateTriple when
/// two locations coincide.
HashKey make_key(const std::array<Feature, 3>& triple, double quantization);

/// Inserts every 3-subset of each model's features; symmetric triples
/// (tied label/opposite-side sort ranks) are stored once per compatible
/// correspondence so symmetric objects yield all pose hypotheses.
GeomHashIndex build_index(const std::vector<ObjectModel>& models, double quantization,
                          double gamma_init);

/// Probes the key bin and its +-1 neighbors per distance dimension, keeps
/// entries whose exact distances match within the quantization, and solves
/// the model-to-scene rigid pose for each. Inconsistent triples return an
/// empty list.
std::vector<QueryHit> query(const GeomHashIndex& index, const std::array<Feature, 3>& triple);

/// Records a draw outcome and returns the entry's new effective weight.
double update_weights(GeomHashIndex& index, const EntryRef& ref, bool success);

GeomHashIndex load_index(const std::string& path);
void write_index(const GeomHashIndex& index, const std::string& path);

} // namespace rangerec
