#pragma once

#include <utility>
#include <vector>

#include "rangerec/geometry.hpp"

namespace rangerec {

/// Axis-aligned box [lo, hi], 12 triangles, CCW winding seen from outside.
TriMesh make_box_mesh(const Vec3& lo, const Vec3& hi);

/// Watertight mesh of a union of axis-aligned boxes minus another union
/// (e.g. notched blocks). Box corners must lie on the voxel lattice; the
/// surface is extracted exactly at occupancy boundaries.
TriMesh make_box_complex(const std::vector<std::pair<Vec3, Vec3>>& solid,
                         const std::vector<std::pair<Vec3, Vec3>>& cut, double voxel);

/// Subdivided icosahedron projected onto a sphere around the origin.
TriMesh make_icosphere(double radius, int subdivisions);

} // namespace rangerec
