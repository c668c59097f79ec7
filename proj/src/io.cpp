#include "rangerec/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "rangerec/mesh_query.hpp"

namespace rangerec {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

struct LineReader {
    std::ifstream in;
    std::string path;
    int line_no = 0;

    explicit LineReader(const std::string& p) : in(p), path(p) {
        if (!in)
            throw ParseError(p + ": cannot open file");
    }

    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            size_t h = line.find('#');
            if (h != std::string::npos) line.resize(h);
            size_t e = line.find_last_not_of(" \t\r");
            if (e == std::string::npos) continue;
            line.resize(e + 1);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + msg);
    }
};

} // namespace

ObjectModel load_model(const std::string& path) {
    LineReader r(path);
    std::string line;
    ObjectModel model;
    bool have_header = false;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "model") {
            if (!(ss >> model.class_id) || model.class_id < 1) r.fail("bad model header");
            have_header = true;
        } else if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x() >> v.y() >> v.z())) r.fail("bad vertex line");
            model.mesh.vertices.push_back(v);
        } else if (tag == "t") {
            std::array<int, 3> t;
            if (!(ss >> t[0] >> t[1] >> t[2])) r.fail("bad triangle line");
            model.mesh.triangles.push_back(t);
        } else if (tag == "f") {
            Feature f;
            if (!(ss >> f.shape_class >> f.position.x() >> f.position.y() >> f.position.z()))
                r.fail("bad feature line");
            if (f.shape_class < 1) r.fail("feature shape class must be >= 1");
            model.features.push_back(f);
        } else {
            r.fail("unknown record '" + tag + "'");
        }
    }
    if (!have_header)
        throw ParseError(path + ": missing 'model' header");
    model.mesh.compute_inward_normals();
    model.mesh.validate();
    MeshQuery q(model.mesh);
    for (const auto& f : model.features) {
        if (q.nearest_surface(f.position).distance > 1e-6)
            throw ParseError(path + ": feature not on the mesh surface");
    }
    return model;
}

void write_model(const ObjectModel& model, const std::string& path) {
    std::ostringstream out;
    out << "model " << model.class_id << "\n";
    for (const auto& v : model.mesh.vertices)
        out << "v " << fmt_double(v.x()) << " " << fmt_double(v.y()) << " " << fmt_double(v.z())
            << "\n";
    for (const auto& t : model.mesh.triangles)
        out << "t " << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& f : model.features)
        out << "f " << f.shape_class << " " << fmt_double(f.position.x()) << " "
            << fmt_double(f.position.y()) << " " << fmt_double(f.position.z()) << "\n";
    std::ofstream of(path, std::ios::binary);
    if (!of)
        throw Error("cannot write " + path);
    of << out.str();
}

RangeScan load_scan(const std::string& path) {
    LineReader r(path);
    std::string line;
    RangeScan scan;
    bool have_gaze = false;
    std::unordered_set<std::string> seen;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "gaze") {
            Vec3 g;
            if (!(ss >> g.x() >> g.y() >> g.z())) r.fail("bad gaze line");
            if (std::abs(g.norm() - 1.0) > 1e-6) r.fail("gaze is not unit-norm");
            scan.gaze = g.normalized();
            have_gaze = true;
        } else if (tag == "p") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z())) r.fail("bad point line");
            if (!seen.insert(line).second) r.fail("duplicate scan point");
            scan.points.push_back(p);
        } else {
            r.fail("unknown record '" + tag + "'");
        }
    }
    if (!have_gaze)
        throw ParseError(path + ": missing 'gaze' header");
    return scan;
}

void write_scan(const RangeScan& scan, const std::string& path) {
    std::ostringstream out;
    out << "gaze " << fmt_double(scan.gaze.x()) << " " << fmt_double(scan.gaze.y()) << " "
        << fmt_double(scan.gaze.z()) << "\n";
    for (const auto& p : scan.points)
        out << "p " << fmt_double(p.x()) << " " << fmt_double(p.y()) << " " << fmt_double(p.z())
            << "\n";
    std::ofstream of(path, std::ios::binary);
    if (!of)
        throw Error("cannot write " + path);
    of << out.str();
}

GroundTruth load_truth(const std::string& path) {
    LineReader r(path);
    std::string line;
    GroundTruth truth;
    bool have_header = false;
    while (r.next(line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "truth") {
            have_header = true;
        } else if (tag == "place") {
            PlacementTruth p;
            double qw, qx, qy, qz;
            Vec3 t;
            if (!(ss >> p.class_id >> qw >> qx >> qy >> qz >> t.x() >> t.y() >> t.z()))
                r.fail("bad place line");
            Eigen::Quaterniond q(qw, qx, qy, qz);
            if (q.norm() < 1e-9) r.fail("zero quaternion");
            q.normalize();
            p.pose.rotation = q.toRotationMatrix();
            p.pose.translation = t;
            truth.placements.push_back(p);
        } else if (tag == "feat") {
            FeatureTruth f;
            int vis;
            if (!(ss >> f.shape_class >> f.position.x() >> f.position.y() >> f.position.z() >>
                  vis))
                r.fail("bad feat line");
            f.visible = vis != 0;
            truth.features.push_back(f);
        } else {
            r.fail("unknown record '" + tag + "'");
        }
    }
    if (!have_header)
        throw ParseError(path + ": missing 'truth' header");
    return truth;
}

void write_truth(const GroundTruth& truth, const std::string& path) {
    std::ostringstream out;
    out << "truth\n";
    for (const auto& p : truth.placements) {
        Eigen::Quaterniond q(p.pose.rotation);
        if (q.w() < 0) q.coeffs() *= -1.0;
        out << "place " << p.class_id << " " << fmt_double(q.w()) << " " << fmt_double(q.x())
            << " " << fmt_double(q.y()) << " " << fmt_double(q.z()) << " "
            << fmt_double(p.pose.translation.x()) << " " << fmt_double(p.pose.translation.y())
            << " " << fmt_double(p.pose.translation.z()) << "\n";
    }
    for (const auto& f : truth.features)
        out << "feat " << f.shape_class << " " << fmt_double(f.position.x()) << " "
            << fmt_double(f.position.y()) << " " << fmt_double(f.position.z()) << " "
            << (f.visible ? 1 : 0) << "\n";
    std::ofstream of(path, std::ios::binary);
    if (!of)
        throw Error("cannot write " + path);
    of << out.str();
}

std::string truth_path_for(const std::string& scan_path) {
    size_t slash = scan_path.find_last_of('/');
    size_t dot = scan_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return scan_path + ".truth";
    return scan_path.substr(0, dot) + ".truth";
}

} // namespace rangerec
