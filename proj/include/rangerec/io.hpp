#pragma once

#include <string>

#include "rangerec/geometry.hpp"

namespace rangerec {

/// Shortest round-trippable decimal form of a double.
std::string fmt_double(double v);

/// Model file: `model <class_id>`, `v x y z` vertices (mm), `t i j k`
/// triangles (0-based, CCW seen from outside), `f s x y z` features.
ObjectModel load_model(const std::string& path);
void write_model(const ObjectModel& model, const std::string& path);

/// Scan file: `gaze gx gy gz` header, then `p x y z` lines (mm).
RangeScan load_scan(const std::string& path);
void write_scan(const RangeScan& scan, const std::string& path);

/// Ground-truth sidecar: `truth` header, `place <class> qw qx qy qz tx ty tz`
/// and `feat <s> <x> <y> <z> <vis>` lines.
GroundTruth load_truth(const std::string& path);
void write_truth(const GroundTruth& truth, const std::string& path);

/// foo.scan -> foo.truth (replaces the extension, or appends one).
std::string truth_path_for(const std::string& scan_path);

} // namespace rangerec
