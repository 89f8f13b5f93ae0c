#pragma once
#include <vector>

#include "texbake/image.hpp"
#include "texbake/vecmath.hpp"

namespace texbake {

// Optimizable RGB texture. data holds doubles in [0,1]; update_magnitude
// accumulates the absolute per-texel parameter movement (summed over channels)
// applied by the optimizer, so texels never reached by any gradient stay at 0.
struct Texture {
    int width = 0, height = 0;
    std::vector<double> data;              // 3 per texel, row-major, row 0 = v=1 (image top)
    std::vector<double> update_magnitude;  // 1 per texel

    Texture() = default;
    Texture(int w, int h, double r, double g, double b)
        : width(w), height(h), data(size_t(w) * h * 3), update_magnitude(size_t(w) * h, 0.0) {
        for (size_t i = 0; i < size_t(w) * h; ++i) {
            data[i * 3 + 0] = r;
            data[i * 3 + 1] = g;
            data[i * 3 + 2] = b;
        }
    }
    double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
    size_t texel_count() const { return size_t(width) * height; }
};

// Footprint of one bilinear tap: up to four distinct texels with weights
// summing to 1 (duplicates from border clamping are merged).
struct BilinearFootprint {
    int count = 0;
    int x[4] = {}, y[4] = {};
    double w[4] = {};
};

// UV (0,0) is the bottom-left of the texture image; texel centers sit at
// ((x+0.5)/W, 1-(y+0.5)/H). Coordinates clamp at the borders.
BilinearFootprint bilinear_footprint(int width, int height, const Vec2& uv);
Vec3 sample_bilinear(const Texture& tex, const Vec2& uv);

Texture downsample_box(const Texture& tex, int factor);
// Adjoint of the box filter: splats lo-resolution gradients (3 per texel) back
// onto the hi grid with weight 1/factor^2.
std::vector<double> downsample_box_adjoint(const std::vector<double>& lo_grad, int lo_w, int lo_h, int factor);

// Bilinear resample at texel centers; identity when sizes already match.
Texture resample_texture(const Texture& src, int width, int height);

ImageRGB texture_to_image(const Texture& tex);
Texture texture_from_image(const ImageRGB& img);
void save_texture_png(const std::string& path, const Texture& tex);
Texture load_texture_png(const std::string& path);

}  // namespace texbake
