#include "rangerec/shapes.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace rangerec {

TriMesh make_box_mesh(const Vec3& lo, const Vec3& hi) {
    return make_box_complex({{lo, hi}}, {}, (hi - lo).minCoeff());
}

namespace {

struct VoxelGrid {
    Vec3 origin;
    double voxel;
    int nx, ny, nz;
    std::vector<uint8_t> occ;

    bool at(int i, int j, int k) const {
        if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return false;
        return occ[(static_cast<size_t>(k) * ny + j) * nx + i] != 0;
    }
};

} // namespace

TriMesh make_box_complex(const std::vector<std::pair<Vec3, Vec3>>& solid,
                         const std::vector<std::pair<Vec3, Vec3>>& cut, double voxel) {
    if (solid.empty() || voxel <= 0)
        throw Error("box complex needs at least one solid box and a positive voxel size");

    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& b : solid) {
        lo = lo.cwiseMin(b.first);
        hi = hi.cwiseMax(b.second);
    }

    VoxelGrid g;
    g.origin = lo;
    g.voxel = voxel;
    g.nx = static_cast<int>(std::lround((hi - lo).x() / voxel));
    g.ny = static_cast<int>(std::lround((hi - lo).y() / voxel));
    g.nz = static_cast<int>(std::lround((hi - lo).z() / voxel));
    g.occ.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, 0);

    auto inside = [](const Vec3& p, const std::pair<Vec3, Vec3>& b) {
        return (p.array() > b.first.array()).all() && (p.array() < b.second.array()).all();
    };
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Vec3 c = g.origin + voxel * Vec3(i + 0.5, j + 0.5, k + 0.5);
                bool in = false;
                for (const auto& b : solid)
                    if (inside(c, b)) { in = true; break; }
                if (in)
                    for (const auto& b : cut)
                        if (inside(c, b)) { in = false; break; }
                g.occ[(static_cast<size_t>(k) * g.ny + j) * g.nx + i] = in ? 1 : 0;
            }

    TriMesh mesh;
    std::unordered_map<uint64_t, int> corner_index;
    auto vertex = [&](int i, int j, int k) {
        uint64_t key = (static_cast<uint64_t>(i) << 42) | (static_cast<uint64_t>(j) << 21) |
                       static_cast<uint64_t>(k);
        auto it = corner_index.find(key);
        if (it != corner_index.end()) return it->second;
        int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(g.origin + voxel * Vec3(i, j, k));
        corner_index.emplace(key, idx);
        return idx;
    };

    // Emits the quad for an occupied voxel's face whose outward direction is
    // +axis (positive=true) or -axis. Corners ordered CCW from outside.
    auto emit_face = [&](int i, int j, int k, int axis, bool positive) {
        int base[3] = {i, j, k};
        if (positive) base[axis] += 1;
        int b_axis = (axis + 1) % 3, c_axis = (axis + 2) % 3;
        int q[4][3];
        int db[4] = {0, 1, 1, 0};
        int dc[4] = {0, 0, 1, 1};
        for (int v = 0; v < 4; ++v) {
            q[v][axis] = base[axis];
            q[v][b_axis] = base[b_axis] + db[v];
            q[v][c_axis] = base[c_axis] + dc[v];
        }
        int a = vertex(q[0][0], q[0][1], q[0][2]);
        int b = vertex(q[1][0], q[1][1], q[1][2]);
        int c = vertex(q[2][0], q[2][1], q[2][2]);
        int d = vertex(q[3][0], q[3][1], q[3][2]);
        if (positive) {
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        } else {
            mesh.triangles.push_back({a, c, b});
            mesh.triangles.push_back({a, d, c});
        }
    };

    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.at(i, j, k)) continue;
                if (!g.at(i + 1, j, k)) emit_face(i, j, k, 0, true);
                if (!g.at(i - 1, j, k)) emit_face(i, j, k, 0, false);
                if (!g.at(i, j + 1, k)) emit_face(i, j, k, 1, true);
                if (!g.at(i, j - 1, k)) emit_face(i, j, k, 1, false);
                if (!g.at(i, j, k + 1)) emit_face(i, j, k, 2, true);
                if (!g.at(i, j, k - 1)) emit_face(i, j, k, 2, false);
            }

    if (mesh.triangles.empty())
        throw Error("box complex produced an empty surface");
    mesh.compute_inward_normals();
    return mesh;
}

TriMesh make_icosphere(double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v = v.normalized() * radius;
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int level = 0; level < subdivisions; ++level) {
        std::unordered_map<uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            uint64_t key = a < b ? (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b)
                                 : (static_cast<uint64_t>(b) << 32) | static_cast<uint32_t>(a);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = static_cast<int>(verts.size());
            verts.push_back(((verts[a] + verts[b]) / 2.0).normalized() * radius);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriMesh mesh;
    mesh.vertices = std::move(verts);
    mesh.triangles = std::move(faces);
    if (mesh.enclosed_volume() < 0)
        for (auto& f : mesh.triangles) std::swap(f[1], f[2]);
    mesh.compute_inward_normals();
    return mesh;
}

} // namespace rangerec
