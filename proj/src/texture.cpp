#include "texbake/texture.hpp"

#include <cmath>
#include <stdexcept>

namespace texbake {

BilinearFootprint bilinear_footprint(int width, int height, const Vec2& uv) {
    double px = uv.x * width - 0.5;
    double py = (1.0 - uv.y) * height - 0.5;
    double fx0 = std::floor(px), fy0 = std::floor(py);
    double fx = px - fx0, fy = py - fy0;
    int x0 = int(fx0), y0 = int(fy0);
    auto clampx = [&](int x) { return std::min(width - 1, std::max(0, x)); };
    auto clampy = [&](int y) { return std::min(height - 1, std::max(0, y)); };
    int xs[4] = {clampx(x0), clampx(x0 + 1), clampx(x0), clampx(x0 + 1)};
    int ys[4] = {clampy(y0), clampy(y0), clampy(y0 + 1), clampy(y0 + 1)};
    double ws[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    BilinearFootprint fp;
    for (int i = 0; i < 4; ++i) {
        if (ws[i] == 0.0) continue;  // zero taps must not mark texels as touched
        int found = -1;
        for (int j = 0; j < fp.count; ++j)
            if (fp.x[j] == xs[i] && fp.y[j] == ys[i]) {
                found = j;
                break;
            }
        if (found >= 0) {
            fp.w[found] += ws[i];
        } else {
            fp.x[fp.count] = xs[i];
            fp.y[fp.count] = ys[i];
            fp.w[fp.count] = ws[i];
            ++fp.count;
        }
    }
    return fp;
}

Vec3 sample_bilinear(const Texture& tex, const Vec2& uv) {
    BilinearFootprint fp = bilinear_footprint(tex.width, tex.height, uv);
    Vec3 out{0, 0, 0};
    for (int i = 0; i < fp.count; ++i) {
        size_t base = (size_t(fp.y[i]) * tex.width + fp.x[i]) * 3;
        out.x += fp.w[i] * tex.data[base + 0];
        out.y += fp.w[i] * tex.data[base + 1];
        out.z += fp.w[i] * tex.data[base + 2];
    }
    return out;
}

Texture downsample_box(const Texture& tex, int factor) {
    if (factor < 1 || tex.width % factor != 0 || tex.height % factor != 0)
        throw std::runtime_error("downsample_box: factor must divide both texture dimensions");
    int lw = tex.width / factor, lh = tex.height / factor;
    Texture lo(lw, lh, 0.0, 0.0, 0.0);
    const double inv = 1.0 / (double(factor) * factor);
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x) {
            double acc[3] = {0, 0, 0};
            for (int dy = 0; dy < factor; ++dy) {
                size_t row = (size_t(y) * factor + dy) * tex.width + size_t(x) * factor;
                for (int dx = 0; dx < factor; ++dx)
                    for (int c = 0; c < 3; ++c) acc[c] += tex.data[(row + dx) * 3 + c];
            }
            size_t base = (size_t(y) * lw + x) * 3;
            for (int c = 0; c < 3; ++c) lo.data[base + c] = acc[c] * inv;
        }
    return lo;
}

std::vector<double> downsample_box_adjoint(const std::vector<double>& lo_grad, int lo_w, int lo_h, int factor) {
    if (lo_grad.size() != size_t(lo_w) * lo_h * 3) throw std::runtime_error("downsample_box_adjoint: bad gradient size");
    int hw = lo_w * factor, hh = lo_h * factor;
    std::vector<double> hi(size_t(hw) * hh * 3, 0.0);
    const double inv = 1.0 / (double(factor) * factor);
    for (int y = 0; y < lo_h; ++y)
        for (int x = 0; x < lo_w; ++x) {
            size_t base = (size_t(y) * lo_w + x) * 3;
            double g[3] = {lo_grad[base] * inv, lo_grad[base + 1] * inv, lo_grad[base + 2] * inv};
            for (int dy = 0; dy < factor; ++dy) {
                size_t row = (size_t(y) * factor + dy) * hw + size_t(x) * factor;
                for (int dx = 0; dx < factor; ++dx)
                    for (int c = 0; c < 3; ++c) hi[(row + dx) * 3 + c] += g[c];
            }
        }
    return hi;
}

Texture resample_texture(const Texture& src, int width, int height) {
    Texture out(width, height, 0.0, 0.0, 0.0);
    if (src.width == width && src.height == height) {
        out.data = src.data;  // identity; update_magnitude starts fresh
        return out;
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            Vec2 uv{(x + 0.5) / width, 1.0 - (y + 0.5) / height};
            Vec3 c = sample_bilinear(src, uv);
            size_t base = (size_t(y) * width + x) * 3;
            out.data[base + 0] = c.x;
            out.data[base + 1] = c.y;
            out.data[base + 2] = c.z;
        }
    return out;
}

ImageRGB texture_to_image(const Texture& tex) {
    ImageRGB img(tex.width, tex.height);
    img.data = tex.data;
    return img;
}

Texture texture_from_image(const ImageRGB& img) {
    Texture tex(img.width, img.height, 0.0, 0.0, 0.0);
    tex.data = img.data;
    return tex;
}

void save_texture_png(const std::string& path, const Texture& tex) { save_png_rgb8(path, texture_to_image(tex)); }

Texture load_texture_png(const std::string& path) { return texture_from_image(load_png_rgb8(path)); }

}  // namespace texbake
