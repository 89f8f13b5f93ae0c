#include "texbake/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace texbake {

size_t Mask::count() const {
    size_t n = 0;
    for (uint8_t v : data) n += v ? 1 : 0;
    return n;
}

uint8_t quantize8(double v) {
    v = std::min(1.0, std::max(0.0, v));
    return uint8_t(std::lround(v * 255.0));
}

uint16_t quantize16(double v) {
    v = std::min(1.0, std::max(0.0, v));
    return uint16_t(std::lround(v * 65535.0));
}

void diag_warn(const std::string& msg) { std::fprintf(stderr, "WARN: %s\n", msg.c_str()); }
void diag_error(const std::string& msg) { std::fprintf(stderr, "ERROR: %s\n", msg.c_str()); }

namespace {

std::vector<uint8_t> write_png(png_image& image, const void* buffer) {
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, 0, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + image.message);
    std::vector<uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer, 0, nullptr))
        throw std::runtime_error(std::string("png encode failed: ") + image.message);
    out.resize(size);
    return out;
}

void begin_read(png_image& image, const std::vector<uint8_t>& bytes) {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
}

}  // namespace

std::vector<uint8_t> encode_png_rgb8(const ImageRGB& img) {
    if (img.width <= 0 || img.height <= 0) throw std::runtime_error("png encode: empty image");
    std::vector<uint8_t> buf(img.pixel_count() * 3);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = quantize8(img.data[i]);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width);
    image.height = png_uint_32(img.height);
    image.format = PNG_FORMAT_RGB;
    return write_png(image, buf.data());
}

ImageRGB decode_png_rgb8(const std::vector<uint8_t>& bytes) {
    png_image image;
    begin_read(image, bytes);
    image.format = PNG_FORMAT_RGB;
    std::vector<uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
    ImageRGB out(int(image.width), int(image.height));
    for (size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] / 255.0;
    return out;
}

std::vector<uint8_t> encode_png_gray16(const ImageGray& img) {
    if (img.width <= 0 || img.height <= 0) throw std::runtime_error("png encode: empty image");
    std::vector<uint16_t> buf(size_t(img.width) * img.height);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = quantize16(img.data[i]);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width);
    image.height = png_uint_32(img.height);
    image.format = PNG_FORMAT_LINEAR_Y;
    return write_png(image, buf.data());
}

ImageGray decode_png_gray16(const std::vector<uint8_t>& bytes) {
    png_image image;
    begin_read(image, bytes);
    image.format = PNG_FORMAT_LINEAR_Y;
    std::vector<uint16_t> buf(PNG_IMAGE_SIZE(image) / 2);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
    ImageGray out(int(image.width), int(image.height));
    for (size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] / 65535.0;
    return out;
}

std::vector<uint8_t> encode_png_mask(const Mask& mask) {
    if (mask.width <= 0 || mask.height <= 0) throw std::runtime_error("png encode: empty mask");
    std::vector<uint8_t> buf(size_t(mask.width) * mask.height);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = mask.data[i] ? 255 : 0;
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(mask.width);
    image.height = png_uint_32(mask.height);
    image.format = PNG_FORMAT_GRAY;
    return write_png(image, buf.data());
}

Mask decode_png_mask(const std::vector<uint8_t>& bytes) {
    png_image image;
    begin_read(image, bytes);
    image.format = PNG_FORMAT_GRAY;
    std::vector<uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
        throw std::runtime_error(std::string("png decode failed: ") + image.message);
    Mask out(int(image.width), int(image.height));
    for (size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] >= 128 ? 1 : 0;
    return out;
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) throw std::runtime_error("read failed: " + path);
    return bytes;
}

void save_png_rgb8(const std::string& path, const ImageRGB& img) { write_file_bytes(path, encode_png_rgb8(img)); }
ImageRGB load_png_rgb8(const std::string& path) { return decode_png_rgb8(read_file_bytes(path)); }
void save_png_gray16(const std::string& path, const ImageGray& img) { write_file_bytes(path, encode_png_gray16(img)); }
void save_png_mask(const std::string& path, const Mask& mask) { write_file_bytes(path, encode_png_mask(mask)); }
Mask load_png_mask(const std::string& path) { return decode_png_mask(read_file_bytes(path)); }

static const char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        uint32_t v = (uint32_t(bytes[i]) << 16) | (uint32_t(bytes[i + 1]) << 8) | bytes[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    size_t rem = bytes.size() - i;
    if (rem == 1) {
        uint32_t v = uint32_t(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        uint32_t v = (uint32_t(bytes[i]) << 16) | (uint32_t(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    int8_t lut[256];
    std::memset(lut, -1, sizeof lut);
    for (int i = 0; i < 64; ++i) lut[uint8_t(kB64Alphabet[i])] = int8_t(i);
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int8_t v = lut[uint8_t(c)];
        if (v < 0) throw std::runtime_error("base64: invalid character");
        acc = (acc << 6) | uint32_t(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(uint8_t((acc >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace texbake
