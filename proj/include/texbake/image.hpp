#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace texbake {

// All image payloads are double-precision in [0, 1]; row 0 is the top of the image.

struct ImageRGB {
    int width = 0, height = 0;
    std::vector<double> data;  // 3 channels per pixel, row-major

    ImageRGB() = default;
    ImageRGB(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h * 3, fill) {}
    double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
    size_t pixel_count() const { return size_t(width) * height; }
};

struct ImageGray {
    int width = 0, height = 0;
    std::vector<double> data;

    ImageGray() = default;
    ImageGray(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h, fill) {}
    double& at(int x, int y) { return data[size_t(y) * width + x]; }
    double at(int x, int y) const { return data[size_t(y) * width + x]; }
};

struct Mask {
    int width = 0, height = 0;
    std::vector<uint8_t> data;  // 0 or 1

    Mask() = default;
    Mask(int w, int h, uint8_t fill = 0) : width(w), height(h), data(size_t(w) * h, fill) {}
    uint8_t& at(int x, int y) { return data[size_t(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[size_t(y) * width + x]; }
    size_t count() const;
};

// Quantization used for every 8/16-bit export: round-to-nearest after clamping to [0, 1].
uint8_t quantize8(double v);
uint16_t quantize16(double v);

std::vector<uint8_t> encode_png_rgb8(const ImageRGB& img);
ImageRGB decode_png_rgb8(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_png_gray16(const ImageGray& img);
ImageGray decode_png_gray16(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_png_mask(const Mask& mask);
Mask decode_png_mask(const std::vector<uint8_t>& bytes);

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> read_file_bytes(const std::string& path);

void save_png_rgb8(const std::string& path, const ImageRGB& img);
ImageRGB load_png_rgb8(const std::string& path);
void save_png_gray16(const std::string& path, const ImageGray& img);
void save_png_mask(const std::string& path, const Mask& mask);
Mask load_png_mask(const std::string& path);

// One-line diagnostics on stderr.
void diag_warn(const std::string& msg);
void diag_error(const std::string& msg);

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

}  // namespace texbake
