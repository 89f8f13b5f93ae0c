#include "support/shapes.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <random>
#include <stdexcept>

#include "texbake/raster.hpp"

namespace texbake::testsupport {

Mesh make_quad(double half) {
    Mesh mesh;
    mesh.positions = {{-half, -half, 0}, {half, -half, 0}, {half, half, 0}, {-half, half, 0}};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.corner_uvs = {{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}}, {Vec2{0, 0}, Vec2{1, 1}, Vec2{0, 1}}};
    mesh.vertex_normals.assign(4, Vec3{0, 0, 1});
    return mesh;
}

Mesh make_cube(double half) {
    Mesh mesh;
    for (int z = -1; z <= 1; z += 2)
        for (int y = -1; y <= 1; y += 2)
            for (int x = -1; x <= 1; x += 2) mesh.positions.push_back({x * half, y * half, z * half});
    auto quad = [&](int a, int b, int c, int d) {
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
    };
    // indices: bit0 = +x, bit1 = +y, bit2 = +z
    quad(1, 3, 7, 5);  // +x
    quad(0, 4, 6, 2);  // -x
    quad(2, 6, 7, 3);  // +y
    quad(0, 1, 5, 4);  // -y
    quad(4, 5, 7, 6);  // +z
    quad(0, 2, 3, 1);  // -z
    return compute_vertex_normals(std::move(mesh));
}

Mesh make_icosphere(int subdiv) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : verts) v = normalized(v) * 0.5;
    std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdiv; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = normalized(verts[size_t(a)] + verts[size_t(b)]) * 0.5;
            int idx = int(verts.size());
            verts.push_back(m);
            midpoint[key] = idx;
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
    Mesh mesh;
    mesh.positions = std::move(verts);
    mesh.triangles = std::move(faces);
    mesh.vertex_normals.reserve(mesh.positions.size());
    for (const Vec3& p : mesh.positions) mesh.vertex_normals.push_back(normalized(p));
    return mesh;
}

Mesh make_plane_grid(int n) {
    Mesh mesh;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.positions.push_back({double(i) / n - 0.5, double(j) / n - 0.5, 0.0});
    auto uv_of = [&](int i, int j) { return Vec2{double(i) / n, double(j) / n}; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int a = j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
            mesh.triangles.push_back({a, b, c});
            mesh.corner_uvs.push_back({uv_of(i, j), uv_of(i + 1, j), uv_of(i + 1, j + 1)});
            mesh.triangles.push_back({a, c, d});
            mesh.corner_uvs.push_back({uv_of(i, j), uv_of(i + 1, j + 1), uv_of(i, j + 1)});
        }
    mesh.vertex_normals.assign(mesh.positions.size(), Vec3{0, 0, 1});
    return mesh;
}

Vec3 smooth_field(const Vec3& p) {
    return {0.5 + 0.45 * std::sin(6.0 * p.x + 1.7) * std::cos(3.0 * p.y),
            0.5 + 0.45 * std::sin(5.0 * p.y + 0.6) * std::cos(4.0 * p.z),
            0.5 + 0.45 * std::sin(4.0 * p.z + 2.9) * std::cos(5.0 * p.x)};
}

Texture bake_field_texture(const Mesh& mesh, int resolution, const std::function<Vec3(const Vec3&)>& field,
                           int dilate_rounds) {
    if (!mesh.has_uvs()) throw std::runtime_error("bake_field_texture: mesh has no UVs");
    Texture tex(resolution, resolution, 0.5, 0.5, 0.5);
    Mask owned(resolution, resolution, 0);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& uv = mesh.corner_uvs[t];
        const Vec3& pa = mesh.positions[mesh.triangles[t][0]];
        const Vec3& pb = mesh.positions[mesh.triangles[t][1]];
        const Vec3& pc = mesh.positions[mesh.triangles[t][2]];
        double denom = cross2(uv[1] - uv[0], uv[2] - uv[0]);
        if (denom == 0.0) continue;
        uv_triangle_texels(uv, resolution, [&](int x, int y) {
            Vec2 p{(x + 0.5) / resolution, 1.0 - (y + 0.5) / resolution};
            double b1 = cross2(p - uv[0], uv[2] - uv[0]) / denom;
            double b2 = cross2(uv[1] - uv[0], p - uv[0]) / denom;
            b1 = std::min(1.0, std::max(0.0, b1));
            b2 = std::min(1.0, std::max(0.0, b2));
            if (b1 + b2 > 1.0) {
                double s = b1 + b2;
                b1 /= s;
                b2 /= s;
            }
            Vec3 pos = pa * (1.0 - b1 - b2) + pb * b1 + pc * b2;
            Vec3 c = field(pos);
            tex.at(x, y, 0) = c.x;
            tex.at(x, y, 1) = c.y;
            tex.at(x, y, 2) = c.z;
            owned.at(x, y) = 1;
        });
    }
    for (int round = 0; round < dilate_rounds; ++round) {
        Mask next = owned;
        Texture back = tex;
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x) {
                if (owned.at(x, y)) continue;
                double acc[3] = {0, 0, 0};
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= resolution || ny < 0 || ny >= resolution || !owned.at(nx, ny)) continue;
                        for (int c = 0; c < 3; ++c) acc[c] += back.at(nx, ny, c);
                        ++n;
                    }
                if (n > 0) {
                    for (int c = 0; c < 3; ++c) tex.at(x, y, c) = acc[c] / n;
                    next.at(x, y) = 1;
                }
            }
        owned = std::move(next);
    }
    return tex;
}

Texture random_texture(int w, int h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Texture tex(w, h, 0, 0, 0);
    for (double& v : tex.data) v = uni(rng);
    return tex;
}

ImageRGB random_image(int w, int h, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ImageRGB img(w, h);
    for (double& v : img.data) v = uni(rng);
    return img;
}

Mask random_mask(int w, int h, double density, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Mask mask(w, h, 0);
    for (uint8_t& v : mask.data) v = uni(rng) < density ? 1 : 0;
    return mask;
}

std::string make_temp_dir(const std::string& hint) {
    std::string tmpl = "/tmp/texbake_" + hint + "_XXXXXX";
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    return std::string(buf.data());
}

}  // namespace texbake::testsupport
