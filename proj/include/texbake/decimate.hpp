#pragma once
#include <vector>

#include "texbake/mesh.hpp"

namespace texbake {

// Symmetric 4x4 error quadric accumulated from area-weighted face planes.
struct Quadric {
    double m[4][4] = {};

    void add_plane(const Vec3& n, double d, double weight);
    double error(const Vec3& p) const;
    Quadric& operator+=(const Quadric& o);
    Quadric operator+(const Quadric& o) const;
};

std::vector<Quadric> compute_vertex_quadrics(const Mesh& mesh);

struct CollapseCandidate {
    double cost = 0.0;
    Vec3 position;
    bool solved = false;  // true if the 3x3 system drove the position
};

// Optimal collapse target for the edge (a, b): solve for the quadric minimum
// when the system is well conditioned (condition estimate < 1e8), otherwise the
// best of the midpoint and the two endpoints.
CollapseCandidate collapse_cost(const Quadric& qa, const Quadric& qb, const Vec3& a, const Vec3& b);

struct DecimateResult {
    Mesh mesh;
    std::vector<double> accepted_costs;  // in acceptance order
    long heap_pops = 0;                  // total pops, stale entries included
    bool reached_target = true;
};

// Greedy edge collapse with a lazy heap down to target_faces (or until no legal
// collapse remains, with a diagnostic). Collapses that flip a neighboring face
// normal or create a near-zero-area face are rejected. With preserve_uv_seams,
// edges with an endpoint carrying more than one distinct UV wedge are kept.
DecimateResult decimate(const Mesh& mesh, int target_faces, bool preserve_uv_seams = false);

}  // namespace texbake
