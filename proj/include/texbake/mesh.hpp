#pragma once
#include <array>
#include <string>
#include <vector>

#include "texbake/vecmath.hpp"

namespace texbake {

// Triangle mesh with per-corner (wedge) UVs so charts can meet at seams without
// splitting vertex positions. corner_uvs is either empty or parallel to triangles.
struct Mesh {
    std::vector<Vec3> positions;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<Vec2, 3>> corner_uvs;
    std::vector<Vec3> vertex_normals;

    bool has_uvs() const { return !triangles.empty() && corner_uvs.size() == triangles.size(); }
};

struct Aabb {
    Vec3 lo, hi;
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    double longest_side() const {
        Vec3 e = extent();
        return std::max(e.x, std::max(e.y, e.z));
    }
};

Aabb bounding_box(const Mesh& mesh);

// Throws std::runtime_error on malformed input (unreadable file, bad indices,
// zero triangles). Degenerate faces are skipped with a warning; UVs outside
// [0,1] are clamped with a warning; missing/invalid normals are recomputed.
Mesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const Mesh& mesh);

// Translates the bounding-box center to the origin and scales uniformly so the
// longest box side is 1. Throws if the mesh has zero extent. Exact no-op for
// already-normalized input.
Mesh normalize_unit(const Mesh& mesh);

// Area-weighted face-normal accumulation. Vertices with no non-degenerate
// incident face get +Z and a diagnostic.
Mesh compute_vertex_normals(Mesh mesh);

// Assigns every triangle its own axis-aligned right-triangle chart in a
// ceil(sqrt(n)) x ceil(sqrt(n)) grid with a >=2 texel gutter between charts at
// the given texture resolution. Throws if a chart would be under 4 texels on a
// side or the mesh has no triangles.
Mesh generate_fallback_atlas(const Mesh& mesh, int texture_resolution);

// Checks structural invariants (index ranges, array sizes); throws on violation.
void validate_mesh(const Mesh& mesh);

}  // namespace texbake
