#pragma once

#include <memory>
#include <vector>

#include "rangerec/geometry.hpp"

namespace rangerec {

enum class PointClass { Surface, Interior, Outside };

struct PointClassification {
    PointClass kind = PointClass::Outside;
    Vec3 normal = Vec3::Zero(); // inward normal of the nearest facing surface point (Surface only)
};

struct SurfaceHit {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 point = Vec3::Zero();
    Vec3 inward_normal = Vec3::Zero();
    int triangle = -1;
};

/// AABB tree over a mesh for nearest-surface, inside/outside, and ray
/// queries. All queries run in the mesh's own (model) frame.
class MeshQuery {
  public:
    explicit MeshQuery(const TriMesh& mesh);

    const TriMesh& mesh() const { return *mesh_; }

    /// Nearest surface point over all triangles.
    SurfaceHit nearest_surface(const Vec3& p) const;

    /// Nearest surface point among sensor-facing triangles (inward normal
    /// dot gaze > 0). Returns an infinite-distance hit if none face the
    /// sensor.
    SurfaceHit nearest_facing_surface(const Vec3& p, const Vec3& gaze) const;

    /// Ray-parity volume membership. The mesh must be watertight.
    bool contains(const Vec3& p) const;

    /// Smallest t > t_min with origin + t*dir on the surface; +inf if none.
    double first_ray_hit(const Vec3& origin, const Vec3& dir, double t_min = 1e-9) const;

  private:
    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1; // internal children
        int begin = 0, end = 0;    // leaf triangle range in order_
    };

    int build(int begin, int end, std::vector<Vec3>& centroids);
    void nearest(const Vec3& p, const Vec3* gaze, SurfaceHit& best) const;

    const TriMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<int> order_;
    int root_ = -1;
};

/// Classifies a point against a posed mesh: Surface if within
/// shell_halfwidth of the nearest sensor-facing surface point, Interior if
/// inside the volume and not Surface, Outside otherwise. If occlusion_test
/// is set, a facing surface point hidden behind the mesh along the gaze does
/// not count as facing.
PointClassification classify_point(const MeshQuery& query, const Pose& pose, const Vec3& pt,
                                   const Vec3& gaze, double shell_halfwidth,
                                   bool occlusion_test = false);

} // namespace rangerec
