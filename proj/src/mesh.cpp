#include "texbake/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "texbake/image.hpp"

namespace texbake {

Aabb bounding_box(const Mesh& mesh) {
    if (mesh.positions.empty()) throw std::runtime_error("bounding_box: mesh has no vertices");
    Aabb box{mesh.positions[0], mesh.positions[0]};
    for (const Vec3& p : mesh.positions) {
        box.lo = min3(box.lo, p);
        box.hi = max3(box.hi, p);
    }
    return box;
}

void validate_mesh(const Mesh& mesh) {
    int nv = int(mesh.positions.size());
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k)
            if (tri[k] < 0 || tri[k] >= nv) throw std::runtime_error("mesh: triangle index out of range");
    if (!mesh.corner_uvs.empty() && mesh.corner_uvs.size() != mesh.triangles.size())
        throw std::runtime_error("mesh: corner_uvs size does not match triangles");
    if (!mesh.vertex_normals.empty() && mesh.vertex_normals.size() != mesh.positions.size())
        throw std::runtime_error("mesh: vertex_normals size does not match positions");
}

namespace {

struct ObjIndex {
    int v = 0, vt = 0, vn = 0;  // 0 = absent, else 1-based (negatives resolved)
};

ObjIndex parse_face_token(const std::string& token, size_t nv, size_t nvt, size_t nvn, int line_no) {
    ObjIndex idx;
    int part = 0;
    size_t start = 0;
    auto resolve = [&](long raw, size_t count, const char* what) -> int {
        if (raw == 0) throw std::runtime_error("obj line " + std::to_string(line_no) + ": zero " + what + " index");
        long r = raw > 0 ? raw : long(count) + raw + 1;
        if (r < 1 || r > long(count))
            throw std::runtime_error("obj line " + std::to_string(line_no) + ": " + what + " index out of range");
        return int(r);
    };
    for (size_t i = 0; i <= token.size(); ++i) {
        if (i == token.size() || token[i] == '/') {
            if (i > start) {
                long raw = std::strtol(token.substr(start, i - start).c_str(), nullptr, 10);
                if (part == 0) idx.v = resolve(raw, nv, "vertex");
                else if (part == 1) idx.vt = resolve(raw, nvt, "texcoord");
                else if (part == 2) idx.vn = resolve(raw, nvn, "normal");
                else throw std::runtime_error("obj line " + std::to_string(line_no) + ": too many '/' in face token");
            }
            ++part;
            start = i + 1;
        }
    }
    if (idx.v == 0) throw std::runtime_error("obj line " + std::to_string(line_no) + ": face token missing vertex index");
    return idx;
}

bool normals_valid(const std::vector<Vec3>& normals) {
    for (const Vec3& n : normals) {
        double len = length(n);
        if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-3) return false;
    }
    return true;
}

}  // namespace

Mesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open mesh file: " + path);

    std::vector<Vec3> positions, normals_raw;
    std::vector<Vec2> texcoords;
    struct Corner { ObjIndex idx; };
    std::vector<std::array<ObjIndex, 3>> faces;

    std::string line;
    int line_no = 0;
    int skipped_degenerate = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x >> p.y >> p.z)) throw std::runtime_error("obj line " + std::to_string(line_no) + ": malformed vertex");
            positions.push_back(p);
        } else if (tag == "vt") {
            Vec2 t;
            if (!(ss >> t.x >> t.y)) throw std::runtime_error("obj line " + std::to_string(line_no) + ": malformed texcoord");
            texcoords.push_back(t);
        } else if (tag == "vn") {
            Vec3 n;
            if (!(ss >> n.x >> n.y >> n.z)) throw std::runtime_error("obj line " + std::to_string(line_no) + ": malformed normal");
            normals_raw.push_back(n);
        } else if (tag == "f") {
            std::vector<ObjIndex> poly;
            std::string token;
            while (ss >> token)
                poly.push_back(parse_face_token(token, positions.size(), texcoords.size(), normals_raw.size(), line_no));
            if (poly.size() < 3) throw std::runtime_error("obj line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
            for (size_t k = 2; k < poly.size(); ++k) faces.push_back({poly[0], poly[k - 1], poly[k]});
        }
        // Other tags (o, g, s, usemtl, mtllib, ...) are ignored.
    }

    Mesh mesh;
    mesh.positions = positions;

    size_t uv_corners = 0, normal_corners = 0;
    for (const auto& face : faces) {
        const Vec3& a = positions[face[0].v - 1];
        const Vec3& b = positions[face[1].v - 1];
        const Vec3& c = positions[face[2].v - 1];
        if (length(cross(b - a, c - a)) == 0.0 || face[0].v == face[1].v || face[1].v == face[2].v || face[0].v == face[2].v) {
            ++skipped_degenerate;
            continue;
        }
        mesh.triangles.push_back({face[0].v - 1, face[1].v - 1, face[2].v - 1});
        std::array<Vec2, 3> uv{};
        int have_uv = 0;
        for (int k = 0; k < 3; ++k)
            if (face[k].vt) {
                uv[k] = texcoords[face[k].vt - 1];
                ++have_uv;
            }
        uv_corners += size_t(have_uv);
        mesh.corner_uvs.push_back(uv);
        for (int k = 0; k < 3; ++k)
            if (face[k].vn) ++normal_corners;
    }
    if (skipped_degenerate > 0)
        diag_warn("load_mesh: skipped " + std::to_string(skipped_degenerate) + " degenerate face(s) in " + path);
    if (mesh.triangles.empty()) throw std::runtime_error("mesh has no (non-degenerate) triangles: " + path);

    size_t total_corners = mesh.triangles.size() * 3;
    if (uv_corners == 0) {
        mesh.corner_uvs.clear();
    } else if (uv_corners < total_corners) {
        diag_warn("load_mesh: only some face corners carry texcoords; dropping UVs for " + path);
        mesh.corner_uvs.clear();
    } else {
        int clamped = 0;
        for (auto& uv : mesh.corner_uvs)
            for (auto& t : uv) {
                double cu = std::min(1.0, std::max(0.0, t.x));
                double cv = std::min(1.0, std::max(0.0, t.y));
                if (cu != t.x || cv != t.y) ++clamped;
                t = {cu, cv};
            }
        if (clamped > 0)
            diag_warn("load_mesh: clamped " + std::to_string(clamped) + " UV corner(s) outside [0,1] in " + path);
    }

    bool use_file_normals = normal_corners == total_corners && !normals_raw.empty();
    if (use_file_normals) {
        mesh.vertex_normals.assign(mesh.positions.size(), Vec3{0, 0, 0});
        for (const auto& face : faces) {
            const Vec3& a = positions[face[0].v - 1];
            const Vec3& b = positions[face[1].v - 1];
            const Vec3& c = positions[face[2].v - 1];
            if (length(cross(b - a, c - a)) == 0.0 || face[0].v == face[1].v || face[1].v == face[2].v || face[0].v == face[2].v)
                continue;
            for (int k = 0; k < 3; ++k)
                if (face[k].vn) mesh.vertex_normals[face[k].v - 1] = normals_raw[face[k].vn - 1];
        }
        for (Vec3& n : mesh.vertex_normals) n = normalized(n);
        if (!normals_valid(mesh.vertex_normals)) {
            diag_warn("load_mesh: invalid normals in " + path + "; recomputing");
            use_file_normals = false;
        }
    }
    if (!use_file_normals) mesh = compute_vertex_normals(std::move(mesh));

    validate_mesh(mesh);
    return mesh;
}

void save_mesh(const std::string& path, const Mesh& mesh) {
    validate_mesh(mesh);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    char buf[256];
    for (const Vec3& p : mesh.positions) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
        f << buf;
    }
    bool have_normals = mesh.vertex_normals.size() == mesh.positions.size();
    if (have_normals)
        for (const Vec3& n : mesh.vertex_normals) {
            std::snprintf(buf, sizeof buf, "vn %.9g %.9g %.9g\n", n.x, n.y, n.z);
            f << buf;
        }
    bool have_uvs = mesh.has_uvs();
    std::vector<std::array<int, 3>> uv_index(have_uvs ? mesh.triangles.size() : 0);
    if (have_uvs) {
        std::vector<Vec2> unique;
        auto key = [](const Vec2& t) {
            uint64_t a, b;
            std::memcpy(&a, &t.x, 8);
            std::memcpy(&b, &t.y, 8);
            return a * 0x9e3779b97f4a7c15ull ^ b;
        };
        std::unordered_map<uint64_t, std::vector<int>> buckets;
        for (size_t i = 0; i < mesh.corner_uvs.size(); ++i)
            for (int k = 0; k < 3; ++k) {
                const Vec2& t = mesh.corner_uvs[i][k];
                auto& bucket = buckets[key(t)];
                int found = -1;
                for (int cand : bucket)
                    if (unique[size_t(cand)] == t) {
                        found = cand;
                        break;
                    }
                if (found < 0) {
                    found = int(unique.size());
                    unique.push_back(t);
                    bucket.push_back(found);
                }
                uv_index[i][k] = found;
            }
        for (const Vec2& t : unique) {
            std::snprintf(buf, sizeof buf, "vt %.9g %.9g\n", t.x, t.y);
            f << buf;
        }
    }
    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& tri = mesh.triangles[i];
        f << "f";
        for (int k = 0; k < 3; ++k) {
            int v = tri[k] + 1;
            if (have_uvs && have_normals)
                f << ' ' << v << '/' << uv_index[i][k] + 1 << '/' << v;
            else if (have_uvs)
                f << ' ' << v << '/' << uv_index[i][k] + 1;
            else if (have_normals)
                f << ' ' << v << "//" << v;
            else
                f << ' ' << v;
        }
        f << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

Mesh normalize_unit(const Mesh& mesh) {
    Aabb box = bounding_box(mesh);
    Vec3 center = box.center();
    double longest = box.longest_side();
    if (!(longest > 0.0)) throw std::runtime_error("normalize_unit: mesh has zero extent");
    if (length(center) < 1e-12 && std::abs(longest - 1.0) < 1e-12) return mesh;  // exact idempotence
    Mesh out = mesh;
    double inv = 1.0 / longest;
    for (Vec3& p : out.positions) p = (p - center) * inv;
    return out;
}

Mesh compute_vertex_normals(Mesh mesh) {
    mesh.vertex_normals.assign(mesh.positions.size(), Vec3{0, 0, 0});
    for (const auto& tri : mesh.triangles) {
        const Vec3& a = mesh.positions[tri[0]];
        Vec3 n = cross(mesh.positions[tri[1]] - a, mesh.positions[tri[2]] - a);  // length = 2 * area
        for (int k = 0; k < 3; ++k) mesh.vertex_normals[tri[k]] += n;
    }
    int isolated = 0;
    for (Vec3& n : mesh.vertex_normals) {
        double len = length(n);
        if (len > 1e-20) {
            n = n * (1.0 / len);
        } else {
            n = {0, 0, 1};
            ++isolated;
        }
    }
    if (isolated > 0)
        diag_warn("compute_vertex_normals: " + std::to_string(isolated) +
                  " vertex(es) without a non-degenerate incident face; normal set to +Z");
    return mesh;
}

Mesh generate_fallback_atlas(const Mesh& mesh, int texture_resolution) {
    if (mesh.triangles.empty()) throw std::runtime_error("generate_fallback_atlas: mesh has no triangles");
    if (texture_resolution < 1) throw std::runtime_error("generate_fallback_atlas: bad resolution");
    int n = int(mesh.triangles.size());
    int grid = int(std::ceil(std::sqrt(double(n))));
    double cell = 1.0 / grid;
    double inset = 1.0 / texture_resolution;  // one texel per side => >=2 texel gutter between charts
    double side_texels = cell * texture_resolution - 2.0;
    if (side_texels < 4.0)
        throw std::runtime_error(
            "generate_fallback_atlas: chart side would be under 4 texels (" + std::to_string(side_texels) +
            "); increase texture_resolution to at least " + std::to_string(int(std::ceil((4.0 + 2.0) * grid))));
    Mesh out = mesh;
    out.corner_uvs.assign(mesh.triangles.size(), {});
    for (int t = 0; t < n; ++t) {
        int col = t % grid;
        int row = t / grid;
        double u0 = col * cell + inset, u1 = (col + 1) * cell - inset;
        double v0 = row * cell + inset, v1 = (row + 1) * cell - inset;
        out.corner_uvs[size_t(t)] = {Vec2{u0, v0}, Vec2{u1, v0}, Vec2{u0, v1}};
    }
    return out;
}

}  // namespace texbake
