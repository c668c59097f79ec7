#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rangerec/errors.hpp"

namespace rangerec {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform: world point = rotation * model point + translation.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    Pose compose(const Pose& rhs) const {
        return {rotation * rhs.rotation, rotation * rhs.translation + translation};
    }

    Pose inverse() const {
        Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    bool is_valid(double tol = 1e-9) const;
};

Vec3 apply_pose(const Pose& pose, const Vec3& pt);

/// Angle in radians of the relative rotation between two poses.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Throws if v is not unit-norm within tol; returns v unchanged.
Vec3 require_unit(const Vec3& v, double tol = 1e-9);

/// Triangle mesh with per-triangle inward unit normals. Watertight,
/// consistently oriented (triangle winding counter-clockwise seen from
/// outside). Volume queries rely on these invariants; `validate` enforces
/// them at construction.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> inward_normals; // one per triangle

    void compute_inward_normals();
    /// Checks index bounds, normal consistency, watertightness, and
    /// positive enclosed volume. Throws NonWatertightMesh / Error.
    void validate() const;

    double area_of(int tri) const;
    Vec3 centroid_of(int tri) const;
    double total_area() const;
    double enclosed_volume() const;
    void bounding_box(Vec3& lo, Vec3& hi) const;
};

/// A labeled point feature: local surface shape class plus location.
struct Feature {
    int shape_class = 0;
    Vec3 position = Vec3::Zero();
};

struct ObjectModel {
    int class_id = 0;
    TriMesh mesh;
    std::vector<Feature> features; // model coordinates, on the surface

    double max_feature_pair_distance() const;
};

struct PlacementTruth {
    int class_id = 0;
    Pose pose;
};

struct FeatureTruth {
    int shape_class = 0;
    Vec3 position = Vec3::Zero(); // world coordinates
    bool visible = false;
};

struct GroundTruth {
    std::vector<PlacementTruth> placements;
    std::vector<FeatureTruth> features;
};

/// One single-view set of range-data points with the sensor gaze direction.
struct RangeScan {
    std::vector<Vec3> points;
    Vec3 gaze = Vec3(0, 0, 1); // unit vector from the sensor into the scene
    std::optional<GroundTruth> truth;
};

/// Least-squares rigid alignment of two non-collinear point triples.
/// Returns the pose minimizing sum |pose(src_i) - dst_i|^2; the rotation is
/// the closest proper rotation to the match-implied linear map.
Pose solve_rigid_from_triple(const std::array<Vec3, 3>& src, const std::array<Vec3, 3>& dst);

/// Uniform hash grid over scan points for radius queries.
class PointGrid {
  public:
    PointGrid() = default;
    PointGrid(const std::vector<Vec3>& points, double cell_size);

    /// Indices of points with |p - center| < radius (strict).
    void query(const Vec3& center, double radius, std::vector<int>& out) const;

  private:
    struct CellHash {
        size_t operator()(uint64_t k) const { return std::hash<uint64_t>()(k); }
    };
    uint64_t cell_key(const Vec3& p) const;

    const std::vector<Vec3>* points_ = nullptr;
    double cell_ = 1.0;
    std::vector<int> order_;          // point indices grouped by cell
    std::vector<uint64_t> cell_keys_; // sorted unique keys
    std::vector<int> cell_begin_;     // offsets into order_
};

/// Deterministic seed mixing (splitmix64 step).
uint64_t mix_seed(uint64_t seed, uint64_t salt);

} // namespace rangerec
