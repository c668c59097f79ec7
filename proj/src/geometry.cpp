#include "rangerec/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace rangerec {

bool Pose::is_valid(double tol) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > tol * 10) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol * 10;
}

Vec3 apply_pose(const Pose& pose, const Vec3& pt) { return pose.apply(pt); }

double rotation_angle_between(const Mat3& a, const Mat3& b) {
    Mat3 rel = a.transpose() * b;
    double c = (rel.trace() - 1.0) / 2.0;
    return std::acos(std::clamp(c, -1.0, 1.0));
}

Vec3 require_unit(const Vec3& v, double tol) {
    if (std::abs(v.norm() - 1.0) > tol)
        throw Error("vector is not unit-norm");
    return v;
}

void TriMesh::compute_inward_normals() {
    inward_normals.resize(triangles.size());
    for (size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        Vec3 outward = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
        double n = outward.norm();
        if (n <= 0)
            throw Error("degenerate triangle in mesh");
        inward_normals[i] = -outward / n;
    }
}

void TriMesh::validate() const {
    const int nv = static_cast<int>(vertices.size());
    if (triangles.empty())
        throw Error("mesh has no triangles");
    if (inward_normals.size() != triangles.size())
        throw Error("mesh normals not computed");

    // Directed-edge pairing: watertight iff every directed edge appears once
    // and its reverse appears once.
    std::vector<uint64_t> edges;
    edges.reserve(triangles.size() * 3);
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (a < 0 || a >= nv || b < 0 || b >= nv)
                throw Error("triangle index out of range");
            if (a == b)
                throw Error("degenerate triangle edge");
            edges.push_back((static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b));
        }
    }
    std::vector<uint64_t> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw NonWatertightMesh("duplicate directed edge (inconsistent orientation)");
    for (uint64_t e : edges) {
        uint64_t rev = (e << 32) | (e >> 32);
        if (!std::binary_search(sorted.begin(), sorted.end(), rev))
            throw NonWatertightMesh("unmatched mesh edge (open boundary)");
    }

    for (size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        Vec3 outward = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
        double n = outward.norm();
        if (n <= 1e-12)
            throw Error("degenerate triangle in mesh");
        if ((inward_normals[i] + outward / n).norm() > 1e-9)
            throw Error("inward normal disagrees with winding");
    }

    if (enclosed_volume() <= 0)
        throw Error("mesh volume not positive; winding must be CCW from outside");
}

double TriMesh::area_of(int tri) const {
    const auto& t = triangles[tri];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vec3 TriMesh::centroid_of(int tri) const {
    const auto& t = triangles[tri];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double TriMesh::total_area() const {
    double a = 0;
    for (size_t i = 0; i < triangles.size(); ++i) a += area_of(static_cast<int>(i));
    return a;
}

double TriMesh::enclosed_volume() const {
    // Divergence theorem over CCW-from-outside winding.
    double v = 0;
    for (const auto& t : triangles)
        v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    return v / 6.0;
}

void TriMesh::bounding_box(Vec3& lo, Vec3& hi) const {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
}

double ObjectModel::max_feature_pair_distance() const {
    double d = 0;
    for (size_t i = 0; i < features.size(); ++i)
        for (size_t j = i + 1; j < features.size(); ++j)
            d = std::max(d, (features[i].position - features[j].position).norm());
    return d;
}

Pose solve_rigid_from_triple(const std::array<Vec3, 3>& src, const std::array<Vec3, 3>& dst) {
    auto area = [](const std::array<Vec3, 3>& p) {
        return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    };
    if (area(src) <= 1e-6 || area(dst) <= 1e-6)
        throw DegenerateTriple("collinear or coincident triple");

    Vec3 sc = (src[0] + src[1] + src[2]) / 3.0;
    Vec3 dc = (dst[0] + dst[1] + dst[2]) / 3.0;
    Mat3 h = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
        h += (src[i] - sc) * (dst[i] - dc).transpose();

    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU(), v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    d(2, 2) = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;
    Pose pose;
    pose.rotation = v * d * u.transpose();
    pose.translation = dc - pose.rotation * sc;
    return pose;
}

PointGrid::PointGrid(const std::vector<Vec3>& points, double cell_size)
    : points_(&points), cell_(cell_size) {
    std::vector<std::pair<uint64_t, int>> keyed(points.size());
    for (size_t i = 0; i < points.size(); ++i)
        keyed[i] = {cell_key(points[i]), static_cast<int>(i)};
    std::sort(keyed.begin(), keyed.end());
    order_.resize(points.size());
    for (size_t i = 0; i < keyed.size(); ++i) order_[i] = keyed[i].second;
    for (size_t i = 0; i < keyed.size(); ++i) {
        if (i == 0 || keyed[i].first != keyed[i - 1].first) {
            cell_keys_.push_back(keyed[i].first);
            cell_begin_.push_back(static_cast<int>(i));
        }
    }
    cell_begin_.push_back(static_cast<int>(keyed.size()));
}

uint64_t PointGrid::cell_key(const Vec3& p) const {
    auto q = [&](double x) {
        return static_cast<uint64_t>(static_cast<int64_t>(std::floor(x / cell_)) & 0x1FFFFF);
    };
    return (q(p.x()) << 42) | (q(p.y()) << 21) | q(p.z());
}

void PointGrid::query(const Vec3& center, double radius, std::vector<int>& out) const {
    out.clear();
    if (!points_) return;
    const double r2 = radius * radius;
    int span = static_cast<int>(std::ceil(radius / cell_));
    int64_t cx = static_cast<int64_t>(std::floor(center.x() / cell_));
    int64_t cy = static_cast<int64_t>(std::floor(center.y() / cell_));
    int64_t cz = static_cast<int64_t>(std::floor(center.z() / cell_));
    for (int64_t dx = -span; dx <= span; ++dx)
        for (int64_t dy = -span; dy <= span; ++dy)
            for (int64_t dz = -span; dz <= span; ++dz) {
                uint64_t key = ((static_cast<uint64_t>((cx + dx) & 0x1FFFFF)) << 42) |
                               ((static_cast<uint64_t>((cy + dy) & 0x1FFFFF)) << 21) |
                               (static_cast<uint64_t>((cz + dz) & 0x1FFFFF));
                auto it = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), key);
                if (it == cell_keys_.end() || *it != key) continue;
                size_t c = static_cast<size_t>(it - cell_keys_.begin());
                for (int i = cell_begin_[c]; i < cell_begin_[c + 1]; ++i) {
                    int idx = order_[i];
                    if (((*points_)[idx] - center).squaredNorm() < r2) out.push_back(idx);
                }
            }
    std::sort(out.begin(), out.end());
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace rangerec
