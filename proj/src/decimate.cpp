#include "texbake/decimate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

#include "texbake/image.hpp"

namespace texbake {

void Quadric::add_plane(const Vec3& n, double d, double weight) {
    double p[4] = {n.x, n.y, n.z, d};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] += weight * p[i] * p[j];
}

double Quadric::error(const Vec3& v) const {
    double p[4] = {v.x, v.y, v.z, 1.0};
    double e = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) e += p[i] * m[i][j] * p[j];
    return e;
}

Quadric& Quadric::operator+=(const Quadric& o) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] += o.m[i][j];
    return *this;
}

Quadric Quadric::operator+(const Quadric& o) const {
    Quadric q = *this;
    q += o;
    return q;
}

std::vector<Quadric> compute_vertex_quadrics(const Mesh& mesh) {
    std::vector<Quadric> quadrics(mesh.positions.size());
    for (const auto& tri : mesh.triangles) {
        const Vec3& a = mesh.positions[tri[0]];
        Vec3 raw = cross(mesh.positions[tri[1]] - a, mesh.positions[tri[2]] - a);
        double len = length(raw);
        if (len == 0.0) continue;
        double area = 0.5 * len;
        Vec3 n = raw * (1.0 / len);
        double d = -dot(n, a);
        for (int k = 0; k < 3; ++k) quadrics[tri[k]].add_plane(n, d, area);
    }
    return quadrics;
}

CollapseCandidate collapse_cost(const Quadric& qa, const Quadric& qb, const Vec3& a, const Vec3& b) {
    Quadric q = qa + qb;
    const auto& m = q.m;
    double A[3][3] = {{m[0][0], m[0][1], m[0][2]}, {m[1][0], m[1][1], m[1][2]}, {m[2][0], m[2][1], m[2][2]}};
    double rhs[3] = {-m[0][3], -m[1][3], -m[2][3]};

    double det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                 A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                 A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);

    CollapseCandidate out;
    if (det != 0.0) {
        double inv[3][3] = {
            {(A[1][1] * A[2][2] - A[1][2] * A[2][1]) / det, (A[0][2] * A[2][1] - A[0][1] * A[2][2]) / det,
             (A[0][1] * A[1][2] - A[0][2] * A[1][1]) / det},
            {(A[1][2] * A[2][0] - A[1][0] * A[2][2]) / det, (A[0][0] * A[2][2] - A[0][2] * A[2][0]) / det,
             (A[0][2] * A[1][0] - A[0][0] * A[1][2]) / det},
            {(A[1][0] * A[2][1] - A[1][1] * A[2][0]) / det, (A[0][1] * A[2][0] - A[0][0] * A[2][1]) / det,
             (A[0][0] * A[1][1] - A[0][1] * A[1][0]) / det}};
        auto norm_inf = [](const double mat[3][3]) {
            double best = 0.0;
            for (int i = 0; i < 3; ++i)
                best = std::max(best, std::abs(mat[i][0]) + std::abs(mat[i][1]) + std::abs(mat[i][2]));
            return best;
        };
        double cond = norm_inf(A) * norm_inf(inv);
        if (std::isfinite(cond) && cond < 1e8) {
            Vec3 x{inv[0][0] * rhs[0] + inv[0][1] * rhs[1] + inv[0][2] * rhs[2],
                   inv[1][0] * rhs[0] + inv[1][1] * rhs[1] + inv[1][2] * rhs[2],
                   inv[2][0] * rhs[0] + inv[2][1] * rhs[1] + inv[2][2] * rhs[2]};
            out.position = x;
            out.cost = std::max(0.0, q.error(x));
            out.solved = true;
            return out;
        }
    }
    Vec3 candidates[3] = {(a + b) * 0.5, a, b};
    out.position = candidates[0];
    out.cost = q.error(candidates[0]);
    for (int i = 1; i < 3; ++i) {
        double e = q.error(candidates[i]);
        if (e < out.cost) {
            out.cost = e;
            out.position = candidates[i];
        }
    }
    out.cost = std::max(0.0, out.cost);
    return out;
}

namespace {

struct HeapEntry {
    double cost;
    int a, b;          // a < b; a survives
    int ver_a, ver_b;  // vertex versions at push time
    Vec3 position;
};

struct HeapCmp {
    bool operator()(const HeapEntry& x, const HeapEntry& y) const {
        if (x.cost != y.cost) return x.cost > y.cost;  // min-heap
        if (x.a != y.a) return x.a > y.a;
        if (x.b != y.b) return x.b > y.b;
        if (x.ver_a != y.ver_a) return x.ver_a > y.ver_a;
        return x.ver_b > y.ver_b;
    }
};

}  // namespace

DecimateResult decimate(const Mesh& input, int target_faces, bool preserve_uv_seams) {
    if (target_faces < 1) throw std::runtime_error("decimate: target face count must be positive");
    validate_mesh(input);

    DecimateResult result;
    if (int(input.triangles.size()) <= target_faces) {
        result.mesh = input;
        return result;
    }

    const bool has_uvs = input.has_uvs();
    std::vector<Vec3> pos = input.positions;
    std::vector<std::array<int, 3>> tris = input.triangles;
    std::vector<std::array<Vec2, 3>> uvs = input.corner_uvs;
    std::vector<Quadric> quadrics = compute_vertex_quadrics(input);
    std::vector<char> vertex_alive(pos.size(), 1);
    std::vector<char> tri_alive(tris.size(), 1);
    std::vector<int> version(pos.size(), 0);
    std::vector<std::vector<int>> incident(pos.size());
    for (size_t t = 0; t < tris.size(); ++t)
        for (int k = 0; k < 3; ++k) incident[size_t(tris[t][size_t(k)])].push_back(int(t));

    double scale = bounding_box(input).longest_side();
    const double min_cross = 2.0 * 1e-12 * scale * scale;  // |cross| = 2 * area

    auto tri_has = [&](int t, int v) {
        return tris[size_t(t)][0] == v || tris[size_t(t)][1] == v || tris[size_t(t)][2] == v;
    };
    // Alive triangles currently incident to v, ascending (lists may hold stale entries).
    auto alive_incident = [&](int v, std::vector<int>& out_list) {
        out_list.clear();
        for (int t : incident[size_t(v)])
            if (tri_alive[size_t(t)] && tri_has(t, v)) out_list.push_back(t);
        std::sort(out_list.begin(), out_list.end());
        out_list.erase(std::unique(out_list.begin(), out_list.end()), out_list.end());
    };
    auto wedge_count = [&](int v, const std::vector<int>& tris_of_v) {
        if (!has_uvs) return size_t(1);
        std::vector<Vec2> distinct;
        for (int t : tris_of_v)
            for (int k = 0; k < 3; ++k)
                if (tris[size_t(t)][size_t(k)] == v) {
                    const Vec2& uv = uvs[size_t(t)][size_t(k)];
                    bool seen = false;
                    for (const Vec2& d : distinct)
                        if (d == uv) {
                            seen = true;
                            break;
                        }
                    if (!seen) distinct.push_back(uv);
                }
        return distinct.size();
    };

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapCmp> heap;
    auto push_edge = [&](int va, int vb) {
        if (va > vb) std::swap(va, vb);
        CollapseCandidate cand = collapse_cost(quadrics[size_t(va)], quadrics[size_t(vb)], pos[size_t(va)], pos[size_t(vb)]);
        heap.push({cand.cost, va, vb, version[size_t(va)], version[size_t(vb)], cand.position});
    };

    {
        std::set<std::pair<int, int>> edges;
        for (const auto& tri : tris)
            for (int k = 0; k < 3; ++k) {
                int va = tri[size_t(k)], vb = tri[size_t((k + 1) % 3)];
                edges.insert({std::min(va, vb), std::max(va, vb)});
            }
        for (const auto& [va, vb] : edges) push_edge(va, vb);
    }

    long faces_alive = long(tris.size());
    std::vector<int> tris_a, tris_b;
    while (faces_alive > target_faces && !heap.empty()) {
        HeapEntry e = heap.top();
        heap.pop();
        ++result.heap_pops;
        int a = e.a, b = e.b;
        if (!vertex_alive[size_t(a)] || !vertex_alive[size_t(b)]) continue;
        if (e.ver_a != version[size_t(a)] || e.ver_b != version[size_t(b)]) continue;

        alive_incident(a, tris_a);
        alive_incident(b, tris_b);

        if (preserve_uv_seams && (wedge_count(a, tris_a) > 1 || wedge_count(b, tris_b) > 1)) continue;

        // Geometric legality: no surviving neighbor face may flip or collapse.
        const Vec3 p = e.position;
        bool legal = true;
        for (int pass = 0; pass < 2 && legal; ++pass) {
            const std::vector<int>& list = pass == 0 ? tris_a : tris_b;
            int moved = pass == 0 ? a : b;
            for (int t : list) {
                const auto& tri = tris[size_t(t)];
                if (tri_has(t, a) && tri_has(t, b)) continue;  // dies with the collapse
                Vec3 before[3], after[3];
                for (int k = 0; k < 3; ++k) {
                    before[k] = pos[size_t(tri[size_t(k)])];
                    after[k] = tri[size_t(k)] == moved ? p : before[k];
                }
                Vec3 nb = cross(before[1] - before[0], before[2] - before[0]);
                Vec3 na = cross(after[1] - after[0], after[2] - after[0]);
                if (length(na) <= min_cross || dot(nb, na) < 0.0) {
                    legal = false;
                    break;
                }
            }
        }
        if (!legal) continue;

        // Representative wedge of the survivor: corner UV in its lowest-index face.
        Vec2 rep_uv{};
        if (has_uvs && !tris_a.empty()) {
            int t0 = tris_a[0];
            for (int k = 0; k < 3; ++k)
                if (tris[size_t(t0)][size_t(k)] == a) rep_uv = uvs[size_t(t0)][size_t(k)];
        }

        result.accepted_costs.push_back(e.cost);
        pos[size_t(a)] = p;
        quadrics[size_t(a)] += quadrics[size_t(b)];
        vertex_alive[size_t(b)] = 0;
        ++version[size_t(a)];

        for (int t : tris_b) {
            auto& tri = tris[size_t(t)];
            if (tri_has(t, a)) {  // shared face dies
                tri_alive[size_t(t)] = 0;
                --faces_alive;
                continue;
            }
            for (int k = 0; k < 3; ++k)
                if (tri[size_t(k)] == b) {
                    tri[size_t(k)] = a;
                    if (has_uvs) uvs[size_t(t)][size_t(k)] = rep_uv;
                }
            incident[size_t(a)].push_back(t);
        }

        // Refresh candidates for every edge at the survivor.
        alive_incident(a, tris_a);
        std::set<int> neighbors;
        for (int t : tris_a)
            for (int k = 0; k < 3; ++k) {
                int v = tris[size_t(t)][size_t(k)];
                if (v != a && vertex_alive[size_t(v)]) neighbors.insert(v);
            }
        for (int v : neighbors) push_edge(a, v);
    }

    if (faces_alive > target_faces) {
        diag_warn("decimate: stopped at " + std::to_string(faces_alive) + " faces; no legal collapse left (target " +
                  std::to_string(target_faces) + ")");
        result.reached_target = false;
    }

    // Compact the surviving mesh, preserving original ordering; collapses can
    // strand an alive vertex with no face, so keep only referenced ones.
    std::vector<char> referenced(pos.size(), 0);
    for (size_t t = 0; t < tris.size(); ++t)
        if (tri_alive[t])
            for (int k = 0; k < 3; ++k) referenced[size_t(tris[t][size_t(k)])] = 1;
    std::vector<int> remap(pos.size(), -1);
    Mesh out;
    for (size_t v = 0; v < pos.size(); ++v)
        if (vertex_alive[v] && referenced[v]) {
            remap[v] = int(out.positions.size());
            out.positions.push_back(pos[v]);
        }
    for (size_t t = 0; t < tris.size(); ++t) {
        if (!tri_alive[t]) continue;
        out.triangles.push_back({remap[size_t(tris[t][0])], remap[size_t(tris[t][1])], remap[size_t(tris[t][2])]});
        if (has_uvs) out.corner_uvs.push_back(uvs[t]);
    }
    out = compute_vertex_normals(std::move(out));
    validate_mesh(out);
    result.mesh = std::move(out);
    return result;
}

}  // namespace texbake
