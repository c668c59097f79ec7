#pragma once

#include "rangerec/geometry.hpp"

namespace rangerec {

/// Principal curvatures in 1/mm, c1 >= c2; positive curves toward the sensor.
struct CurvaturePair {
    double c1 = 0;
    double c2 = 0;
};

enum class CornerType { Convex, Concave };

/// Maps a shape-class label to the corner type used by the curvature
/// baseline (1 = convex, 2 = concave). Throws on other labels.
CornerType corner_type_from_class(int shape_class);

/// Least-squares quadric fit over the scan points within `radius` of f:
/// height over the local best-fit plane (axis aligned with the gaze) as
/// w = a u^2 + b uv + c v^2 + d u + e v + f0, returning the eigenvalues of
/// the Hessian [[2a, b], [b, 2c]]. Throws InsufficientSupport with fewer
/// than 6 neighbors and DegenerateFit on rank-deficient systems.
CurvaturePair fit_quadric(const RangeScan& scan, const Vec3& f, double radius);

/// Cornerness score: convex -> min(c1, c2); concave -> min(-c1, -c2).
double c_score(CornerType type, const CurvaturePair& pair);

} // namespace rangerec
