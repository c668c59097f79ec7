#include "rangerec/model_index.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rangerec/io.hpp"

namespace rangerec {

bool HashKey::operator<(const HashKey& o) const {
    if (labels != o.labels) return labels < o.labels;
    return dist_bins < o.dist_bins;
}

size_t HashKeyHasher::operator()(const HashKey& k) const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](int v) {
        h ^= static_cast<uint64_t>(static_cast<uint32_t>(v));
        h *= 1099511628211ull;
    };
    for (int v : k.labels) mix(v);
    for (int v : k.dist_bins) mix(v);
    return static_cast<size_t>(h);
}

namespace {

// Length of the side opposite each triple entry.
std::array<double, 3> opposite_sides(const std::array<Feature, 3>& t) {
    return {(t[1].position - t[2].position).norm(), (t[2].position - t[0].position).norm(),
            (t[0].position - t[1].position).norm()};
}

// Canonical rank: shape class ascending, opposite side descending.
bool canonical_le(int sa, double oppa, int sb, double oppb) {
    if (sa != sb) return sa < sb;
    return oppa >= oppb;
}

void check_distinct(const std::array<Feature, 3>& t) {
    if ((t[0].position - t[1].position).norm() < 1e-9 ||
        (t[1].position - t[2].position).norm() < 1e-9 ||
        (t[2].position - t[0].position).norm() < 1e-9)
        throw DegenerateTriple("coincident feature locations");
}

std::array<int, 3> canonical_order(const std::array<Feature, 3>& t) {
    auto opp = opposite_sides(t);
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (t[a].shape_class != t[b].shape_class) return t[a].shape_class < t[b].shape_class;
        return opp[a] > opp[b];
    });
    return order;
}

std::array<double, 3> consecutive_distances(const std::array<Vec3, 3>& p) {
    return {(p[0] - p[1]).norm(), (p[1] - p[2]).norm(), (p[2] - p[0]).norm()};
}

int quantize(double len, double q) { return static_cast<int>(std::floor(len / q)); }

HashKey key_from_ordered(const std::array<Feature, 3>& t, const std::array<int, 3>& order,
                         double q) {
    HashKey key;
    std::array<Vec3, 3> pts;
    for (int i = 0; i < 3; ++i) {
        key.labels[i] = t[order[i]].shape_class;
        pts[i] = t[order[i]].position;
    }
    auto dist = consecutive_distances(pts);
    for (int i = 0; i < 3; ++i) key.dist_bins[i] = quantize(dist[i], q);
    return key;
}

} // namespace

double GeomHashIndex::key_scale(const HashKey& key) const {
    auto it = table.find(key);
    if (it == table.end()) return 1.0;
    double sum = 0;
    for (const auto& e : it->second) sum += e.gamma;
    return sum > gamma_cap ? gamma_cap / sum : 1.0;
}

double GeomHashIndex::effective_gamma(const EntryRef& ref) const {
    return entry(ref).gamma * key_scale(ref.key);
}

const HashEntry& GeomHashIndex::entry(const EntryRef& ref) const {
    auto it = table.find(ref.key);
    if (it == table.end() || ref.entry_idx < 0 ||
        ref.entry_idx >= static_cast<int>(it->second.size()))
        throw Error("dangling hash entry reference");
    return it->second[ref.entry_idx];
}

size_t GeomHashIndex::total_entries() const {
    size_t n = 0;
    for (const auto& [k, v] : table) n += v.size();
    return n;
}

HashKey make_key(const std::array<Feature, 3>& triple, double quantization) {
    if (quantization <= 0)
        throw Error("quantization bin width must be positive");
    check_distinct(triple);
    return key_from_ordered(triple, canonical_order(triple), quantization);
}

GeomHashIndex build_index(const std::vector<ObjectModel>& models, double quantization,
                          double gamma_init) {
    if (gamma_init <= 0 || gamma_init >= 1)
        throw Error("gamma_init must be in (0, 1)");
    GeomHashIndex index;
    index.quantization = quantization;
    index.gamma_init = gamma_init;

    static const std::array<std::array<int, 3>, 6> kPerms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

    for (const auto& model : models) {
        const auto& feats = model.features;
        if (feats.size() < 3)
            throw Error("model " + std::to_string(model.class_id) + " has fewer than 3 features");
        const int n = static_cast<int>(feats.size());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    std::array<Feature, 3> triple = {feats[i], feats[j], feats[k]};
                    check_distinct(triple);
                    auto opp = opposite_sides(triple);
                    // Store every ordering consistent with the canonical
                    // sort; ties (symmetric triples) yield several.
                    for (const auto& perm : kPerms) {
                        bool compatible =
                            canonical_le(triple[perm[0]].shape_class, opp[perm[0]],
                                         triple[perm[1]].shape_class, opp[perm[1]]) &&
                            canonical_le(triple[perm[1]].shape_class, opp[perm[1]],
                                         triple[perm[2]].shape_class, opp[perm[2]]);
                        if (!compatible) continue;
                        HashKey key = key_from_ordered(triple, perm, quantization);
                        HashEntry entry;
                        entry.class_id = model.class_id;
                        for (int v = 0; v < 3; ++v) entry.model_points[v] = triple[perm[v]].position;
                        entry.gamma = gamma_init;
                        index.table[key].push_back(entry);
                    }
                }
    }
    return index;
}

std::vector<QueryHit> query(const GeomHashIndex& index, const std::array<Feature, 3>& triple) {
    check_distinct(triple);
    auto order = canonical_order(triple);
    std::array<Vec3, 3> scene_pts;
    std::array<int, 3> labels;
    for (int i = 0; i < 3; ++i) {
        scene_pts[i] = triple[order[i]].position;
        labels[i] = triple[order[i]].shape_class;
    }
    auto scene_dist = consecutive_distances(scene_pts);
    const double q = index.quantization;

    std::vector<QueryHit> hits;
    HashKey probe;
    probe.labels = labels;
    for (int d0 = -1; d0 <= 1; ++d0)
        for (int d1 = -1; d1 <= 1; ++d1)
            for (int d2 = -1; d2 <= 1; ++d2) {
                probe.dist_bins = {quantize(scene_dist[0], q) + d0,
                                   quantize(scene_dist[1], q) + d1,
                                   quantize(scene_dist[2], q) + d2};
                if (probe.dist_bins[0] < 0 || probe.dist_bins[1] < 0 || probe.dist_bins[2] < 0)
                    continue;
                auto it = index.table.find(probe);
                if (it == index.table.end()) continue;
                double scale = index.key_scale(probe);
                for (size_t e = 0; e < it->second.size(); ++e) {
                    const HashEntry& entry = it->second[e];
                    auto model_dist = consecutive_distances(entry.model_points);
                    if (std::abs(model_dist[0] - scene_dist[0]) > q ||
                        std::abs(model_dist[1] - scene_dist[1]) > q ||
                        std::abs(model_dist[2] - scene_dist[2]) > q)
                        continue;
                    QueryHit hit;
                    hit.class_id = entry.class_id;
                    hit.pose = solve_rigid_from_triple(entry.model_points, scene_pts);
                    hit.gamma = entry.gamma * scale;
                    hit.ref = {probe, static_cast<int>(e)};
                    hits.push_back(std::move(hit));
                }
            }
    return hits;
}

double update_weights(GeomHashIndex& index, const EntryRef& ref, bool success) {
    auto it = index.table.find(ref.key);
    if (it == index.table.end() || ref.entry_idx < 0 ||
        ref.entry_idx >= static_cast<int>(it->second.size()))
        throw Error("dangling hash entry reference");
    HashEntry& entry = it->second[ref.entry_idx];
    entry.draws += 1;
    if (success) entry.successes += 1;
    // Beta-mean estimate with prior alpha0=1, beta0=2.
    entry.gamma = (static_cast<double>(entry.successes) + 1.0) /
                  (static_cast<double>(entry.draws) + 3.0);
    return index.effective_gamma(ref);
}

GeomHashIndex load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    GeomHashIndex index;
    std::string tag, kv;
    in >> tag >> kv;
    double qd = 0;
    if (tag != "ghash" || std::sscanf(kv.c_str(), "qd=%lf", &qd) != 1 || qd <= 0)
        throw ParseError(path + ": bad ghash header");
    index.quantization = qd;
    HashKey key;
    bool have_key = false;
    while (in >> tag) {
        if (tag == "key") {
            if (!(in >> key.labels[0] >> key.labels[1] >> key.labels[2] >> key.dist_bins[0] >>
                  key.dist_bins[1] >> key.dist_bins[2]))
                throw ParseError(path + ": bad key record");
            have_key = true;
        } else if (tag == "entry") {
            if (!have_key)
                throw ParseError(path + ": entry before any key");
            HashEntry e;
            if (!(in >> e.class_id >> e.gamma >> e.draws >> e.successes))
                throw ParseError(path + ": bad entry record");
            for (auto& p : e.model_points)
                if (!(in >> p.x() >> p.y() >> p.z()))
                    throw ParseError(path + ": bad entry points");
            if (e.gamma <= 0 || e.gamma >= 1)
                throw ParseError(path + ": entry gamma out of (0,1)");
            index.table[key].push_back(e);
        } else {
            throw ParseError(path + ": unknown record '" + tag + "'");
        }
    }
    return index;
}

void write_index(const GeomHashIndex& index, const std::string& path) {
    std::vector<const HashKey*> keys;
    keys.reserve(index.table.size());
    for (const auto& [k, v] : index.table) keys.push_back(&k);
    std::sort(keys.begin(), keys.end(), [](const HashKey* a, const HashKey* b) { return *a < *b; });

    std::ostringstream out;
    out << "ghash qd=" << fmt_double(index.quantization) << "\n";
    for (const HashKey* k : keys) {
        out << "key " << k->labels[0] << " " << k->labels[1] << " " << k->labels[2] << " "
            << k->dist_bins[0] << " " << k->dist_bins[1] << " " << k->dist_bins[2] << "\n";
        for (const auto& e : index.table.at(*k)) {
            out << "entry " << e.class_id << " " << fmt_double(e.gamma) << " " << e.draws << " "
                << e.successes;
            for (const auto& p : e.model_points)
                out << " " << fmt_double(p.x()) << " " << fmt_double(p.y()) << " "
                    << fmt_double(p.z());
            out << "\n";
        }
    }
    std::ofstream of(path, std::ios::binary);
    if (!of)
        throw Error("cannot write " + path);
    of << out.str();
}

} // namespace rangerec
