#pragma once
#include <functional>
#include <limits>

#include "texbake/camera.hpp"
#include "texbake/image.hpp"
#include "texbake/mesh.hpp"
#include "texbake/texture.hpp"

namespace texbake {

// Per-pixel geometry buffers. Uncovered pixels hold: white color, +inf depth,
// normal (0,0,1), uv (0,0), tri_id -1, facing_cos 0.
struct GBuffer {
    int width = 0, height = 0;
    ImageRGB color;
    std::vector<double> depth;  // camera-space distance along the view axis
    std::vector<Vec3> normal;
    std::vector<Vec2> uv;
    std::vector<int> tri_id;
    std::vector<double> facing_cos;  // dot(interpolated normal, dir to eye)
    Mask coverage;

    GBuffer() = default;
    GBuffer(int w, int h)
        : width(w),
          height(h),
          color(w, h, 1.0),
          depth(size_t(w) * h, std::numeric_limits<double>::infinity()),
          normal(size_t(w) * h, Vec3{0, 0, 1}),
          uv(size_t(w) * h),
          tri_id(size_t(w) * h, -1),
          facing_cos(size_t(w) * h, 0.0),
          coverage(w, h, 0) {}
};

// Z-buffered rasterization with perspective-correct interpolation, back-face
// culling and near-plane clipping. texture == nullptr shades covered pixels
// 0.8 gray; otherwise color = bilinear texture lookup at the pixel's UV.
// Requires UVs when a texture is given. Deterministic at any thread count.
GBuffer rasterize(const Mesh& mesh, const Camera& camera, const Texture* texture = nullptr);

// Update mask over covered pixels. Default semantics: update where the surface
// faces the camera within `threshold` radians (facing_cos > cos(threshold));
// literal=true selects the exact complement over covered pixels.
Mask classify_keep_update(const GBuffer& gbuffer, double threshold, bool literal = false);

// Texels whose center lies inside a UV triangle or within half a texel of its
// boundary. Serial and deterministic.
Mask rasterize_uv_coverage(const Mesh& mesh, int resolution);

// Calls fn(x, y) for each texel claimed by one UV triangle (same rule as
// rasterize_uv_coverage).
void uv_triangle_texels(const std::array<Vec2, 3>& uv, int resolution, const std::function<void(int, int)>& fn);

// Depth mapped to [0,1]: nearest covered pixel = 1, farthest = 0, uncovered 0.
ImageGray normalize_depth(const GBuffer& gbuffer);

}  // namespace texbake
