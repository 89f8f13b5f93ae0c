#include "texbake/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace texbake {

ViewPlan make_view_plan(int image_size, double radius, double fov_y) {
    if (image_size < 1) throw std::runtime_error("make_view_plan: bad image size");
    static const char* kEquatorial[8] = {"front",      "left front", "left",  "left back",
                                         "back",       "right back", "right", "right front"};
    ViewPlan plan;
    for (int i = 0; i < 8; ++i) {
        Camera cam;
        cam.azimuth = i * (M_PI / 4.0);
        cam.elevation = 0.0;
        cam.radius = radius;
        cam.fov_y = fov_y;
        cam.width = cam.height = image_size;
        cam.descriptor = kEquatorial[i];
        plan.cameras.push_back(cam);
    }
    Camera top;
    top.azimuth = 0.0;
    top.elevation = M_PI / 2.0;
    top.radius = radius;
    top.fov_y = fov_y;
    top.width = top.height = image_size;
    top.descriptor = "top";
    plan.cameras.push_back(top);
    Camera bottom = top;
    bottom.elevation = -M_PI / 2.0;
    bottom.descriptor = "bottom";
    plan.cameras.push_back(bottom);
    plan.symmetric_pairs = {{0, 4}, {1, 5}, {2, 6}, {3, 7}};
    return plan;
}

namespace {

struct ClipVert {
    Vec3 cam;  // camera-space (right, up, forward-depth)
    Vec3 world;
    Vec3 normal;
    Vec2 uv;
};

ClipVert lerp(const ClipVert& a, const ClipVert& b, double t) {
    ClipVert out;
    out.cam = a.cam + (b.cam - a.cam) * t;
    out.world = a.world + (b.world - a.world) * t;
    out.normal = a.normal + (b.normal - a.normal) * t;
    out.uv = a.uv + (b.uv - a.uv) * t;
    return out;
}

struct ScreenVert {
    double sx, sy, zc;
    Vec3 world, normal;
    Vec2 uv;
};

struct ScreenTri {
    int tri_id;
    ScreenVert v[3];
    double area2;
    int x0, x1, y0, y1;  // inclusive pixel ranges
};

inline double edge_fn(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

GBuffer rasterize(const Mesh& mesh, const Camera& camera, const Texture* texture) {
    validate_mesh(mesh);
    if (texture && !mesh.has_uvs()) throw std::runtime_error("rasterize: texture given but mesh has no UVs");
    if (camera.width < 1 || camera.height < 1) throw std::runtime_error("rasterize: bad image size");
    if (mesh.vertex_normals.size() != mesh.positions.size())
        throw std::runtime_error("rasterize: mesh has no vertex normals");

    const int w = camera.width, h = camera.height;
    GBuffer gb(w, h);

    Vec3 right, up, forward;
    camera.basis(right, up, forward);
    const Vec3 eye = camera.eye();
    const double tanf = std::tan(camera.fov_y * 0.5);
    const double aspect = double(w) / double(h);
    const double znear = 1e-4;

    std::vector<ScreenTri> packets;
    packets.reserve(mesh.triangles.size());
    const bool has_uvs = mesh.has_uvs();

    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec3& p0 = mesh.positions[tri[0]];
        const Vec3& p1 = mesh.positions[tri[1]];
        const Vec3& p2 = mesh.positions[tri[2]];
        Vec3 face_n = cross(p1 - p0, p2 - p0);
        if (dot(face_n, eye - p0) <= 0.0) continue;  // back-facing or edge-on

        ClipVert verts[3];
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = mesh.positions[tri[k]];
            Vec3 d = p - eye;
            verts[k].cam = {dot(right, d), dot(up, d), dot(forward, d)};
            verts[k].world = p;
            verts[k].normal = mesh.vertex_normals[tri[k]];
            verts[k].uv = has_uvs ? mesh.corner_uvs[t][size_t(k)] : Vec2{0.0, 0.0};
        }

        // Near-plane clip (Sutherland-Hodgman against zc > znear).
        ClipVert poly[4];
        int n_poly = 0;
        for (int k = 0; k < 3; ++k) {
            const ClipVert& cur = verts[k];
            const ClipVert& nxt = verts[(k + 1) % 3];
            bool in_cur = cur.cam.z > znear, in_nxt = nxt.cam.z > znear;
            if (in_cur) poly[n_poly++] = cur;
            if (in_cur != in_nxt) {
                double tt = (znear - cur.cam.z) / (nxt.cam.z - cur.cam.z);
                poly[n_poly++] = lerp(cur, nxt, tt);
            }
        }
        if (n_poly < 3) continue;

        for (int f = 2; f < n_poly; ++f) {
            const ClipVert* cv[3] = {&poly[0], &poly[f - 1], &poly[f]};
            ScreenTri pk;
            pk.tri_id = int(t);
            for (int k = 0; k < 3; ++k) {
                const ClipVert& v = *cv[k];
                pk.v[k].sx = (v.cam.x / (v.cam.z * tanf * aspect) + 1.0) * 0.5 * w;
                pk.v[k].sy = (1.0 - v.cam.y / (v.cam.z * tanf)) * 0.5 * h;
                pk.v[k].zc = v.cam.z;
                pk.v[k].world = v.world;
                pk.v[k].normal = v.normal;
                pk.v[k].uv = v.uv;
            }
            pk.area2 = edge_fn(pk.v[0].sx, pk.v[0].sy, pk.v[1].sx, pk.v[1].sy, pk.v[2].sx, pk.v[2].sy);
            if (pk.area2 == 0.0) continue;
            if (pk.area2 < 0.0) {
                std::swap(pk.v[1], pk.v[2]);
                pk.area2 = -pk.area2;
            }
            double sx_min = std::min({pk.v[0].sx, pk.v[1].sx, pk.v[2].sx});
            double sx_max = std::max({pk.v[0].sx, pk.v[1].sx, pk.v[2].sx});
            double sy_min = std::min({pk.v[0].sy, pk.v[1].sy, pk.v[2].sy});
            double sy_max = std::max({pk.v[0].sy, pk.v[1].sy, pk.v[2].sy});
            pk.x0 = std::max(0, int(std::ceil(sx_min - 0.5)));
            pk.x1 = std::min(w - 1, int(std::floor(sx_max - 0.5)));
            pk.y0 = std::max(0, int(std::ceil(sy_min - 0.5)));
            pk.y1 = std::min(h - 1, int(std::floor(sy_max - 0.5)));
            if (pk.x0 > pk.x1 || pk.y0 > pk.y1) continue;
            packets.push_back(pk);
        }
    }

    // Fixed row bands with disjoint writes keep the result identical at any
    // thread count; within a band, packet order resolves depth ties.
    const int band_h = 16;
    const int n_bands = (h + band_h - 1) / band_h;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int band = 0; band < n_bands; ++band) {
        const int by0 = band * band_h;
        const int by1 = std::min(h, by0 + band_h) - 1;
        for (const ScreenTri& pk : packets) {
            int yy0 = std::max(pk.y0, by0), yy1 = std::min(pk.y1, by1);
            for (int y = yy0; y <= yy1; ++y) {
                double py = y + 0.5;
                for (int x = pk.x0; x <= pk.x1; ++x) {
                    double px = x + 0.5;
                    double w0 = edge_fn(pk.v[1].sx, pk.v[1].sy, pk.v[2].sx, pk.v[2].sy, px, py);
                    double w1 = edge_fn(pk.v[2].sx, pk.v[2].sy, pk.v[0].sx, pk.v[0].sy, px, py);
                    double w2 = edge_fn(pk.v[0].sx, pk.v[0].sy, pk.v[1].sx, pk.v[1].sy, px, py);
                    if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                    double l0 = w0 / pk.area2, l1 = w1 / pk.area2, l2 = w2 / pk.area2;
                    double inv_z = l0 / pk.v[0].zc + l1 / pk.v[1].zc + l2 / pk.v[2].zc;
                    if (!(inv_z > 0.0)) continue;
                    double z = 1.0 / inv_z;
                    size_t idx = size_t(y) * w + x;
                    if (z >= gb.depth[idx]) continue;
                    double b0 = l0 / pk.v[0].zc / inv_z;
                    double b1 = l1 / pk.v[1].zc / inv_z;
                    double b2 = l2 / pk.v[2].zc / inv_z;
                    Vec3 world = pk.v[0].world * b0 + pk.v[1].world * b1 + pk.v[2].world * b2;
                    Vec3 normal = normalized(pk.v[0].normal * b0 + pk.v[1].normal * b1 + pk.v[2].normal * b2);
                    Vec2 uv = pk.v[0].uv * b0 + pk.v[1].uv * b1 + pk.v[2].uv * b2;
                    gb.depth[idx] = z;
                    gb.tri_id[idx] = pk.tri_id;
                    gb.normal[idx] = normal;
                    gb.uv[idx] = uv;
                    gb.facing_cos[idx] = dot(normal, normalized(eye - world));
                    gb.coverage.data[idx] = 1;
                }
            }
        }
    }

    // Color pass: bilinear texture lookup (or flat gray) over the final UVs.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t idx = size_t(y) * w + x;
            if (!gb.coverage.data[idx]) continue;  // stays white
            Vec3 c = texture ? sample_bilinear(*texture, gb.uv[idx]) : Vec3{0.8, 0.8, 0.8};
            gb.color.data[idx * 3 + 0] = c.x;
            gb.color.data[idx * 3 + 1] = c.y;
            gb.color.data[idx * 3 + 2] = c.z;
        }
    }
    return gb;
}

Mask classify_keep_update(const GBuffer& gb, double threshold, bool literal) {
    Mask mask(gb.width, gb.height, 0);
    const double cos_thresh = std::cos(threshold);
    for (size_t i = 0; i < mask.data.size(); ++i) {
        if (!gb.coverage.data[i]) continue;
        bool facing = gb.facing_cos[i] > cos_thresh;
        mask.data[i] = (facing != literal) ? 1 : 0;
    }
    return mask;
}

namespace {

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return length(p - a);
    double t = std::min(1.0, std::max(0.0, dot(p - a, ab) / len2));
    return length(p - (a + ab * t));
}

}  // namespace

void uv_triangle_texels(const std::array<Vec2, 3>& uv, int resolution, const std::function<void(int, int)>& fn) {
    const double half_texel = 0.5 / resolution;
    double umin = std::min({uv[0].x, uv[1].x, uv[2].x}) - half_texel;
    double umax = std::max({uv[0].x, uv[1].x, uv[2].x}) + half_texel;
    double vmin = std::min({uv[0].y, uv[1].y, uv[2].y}) - half_texel;
    double vmax = std::max({uv[0].y, uv[1].y, uv[2].y}) + half_texel;
    int x0 = std::max(0, int(std::floor(umin * resolution - 0.5)));
    int x1 = std::min(resolution - 1, int(std::ceil(umax * resolution - 0.5)));
    int y0 = std::max(0, int(std::floor((1.0 - vmax) * resolution - 0.5)));
    int y1 = std::min(resolution - 1, int(std::ceil((1.0 - vmin) * resolution - 0.5)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            Vec2 p{(x + 0.5) / resolution, 1.0 - (y + 0.5) / resolution};
            double s0 = cross2(uv[1] - uv[0], p - uv[0]);
            double s1 = cross2(uv[2] - uv[1], p - uv[1]);
            double s2 = cross2(uv[0] - uv[2], p - uv[2]);
            bool inside = (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0);
            if (!inside) {
                double d = std::min({point_segment_dist(p, uv[0], uv[1]), point_segment_dist(p, uv[1], uv[2]),
                                     point_segment_dist(p, uv[2], uv[0])});
                inside = d <= half_texel;
            }
            if (inside) fn(x, y);
        }
    }
}

Mask rasterize_uv_coverage(const Mesh& mesh, int resolution) {
    if (!mesh.has_uvs()) throw std::runtime_error("rasterize_uv_coverage: mesh has no UVs");
    if (resolution < 1) throw std::runtime_error("rasterize_uv_coverage: bad resolution");
    Mask mask(resolution, resolution, 0);
    for (const auto& uv : mesh.corner_uvs)
        uv_triangle_texels(uv, resolution, [&](int x, int y) { mask.at(x, y) = 1; });
    return mask;
}

ImageGray normalize_depth(const GBuffer& gb) {
    ImageGray out(gb.width, gb.height, 0.0);
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < gb.depth.size(); ++i)
        if (gb.coverage.data[i]) {
            dmin = std::min(dmin, gb.depth[i]);
            dmax = std::max(dmax, gb.depth[i]);
        }
    if (!(dmax >= dmin)) return out;  // nothing covered
    double span = dmax - dmin;
    for (size_t i = 0; i < gb.depth.size(); ++i)
        if (gb.coverage.data[i]) out.data[i] = span > 0.0 ? (dmax - gb.depth[i]) / span : 1.0;
    return out;
}

}  // namespace texbake
