#include "texbake/metrics.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace texbake {

double image_mse(const ImageRGB& a, const ImageRGB& b, const Mask* mask) {
    if (a.width != b.width || a.height != b.height) throw std::runtime_error("image_mse: size mismatch");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw std::runtime_error("image_mse: mask size mismatch");
    double acc = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < a.pixel_count(); ++i) {
        if (mask && !mask->data[i]) continue;
        for (int c = 0; c < 3; ++c) {
            double d = a.data[i * 3 + c] - b.data[i * 3 + c];
            acc += d * d;
        }
        ++n;
    }
    if (n == 0) throw std::runtime_error("image_mse: empty mask");
    return acc / (3.0 * double(n));
}

double psnr(const ImageRGB& a, const ImageRGB& b, const Mask* mask) {
    double mse = image_mse(a, b, mask);
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

FiniteDiffReport finite_diff_check(const std::function<double(const Texture&)>& loss, const Texture& at,
                                   const std::vector<double>& analytic_grad, int samples, double h, uint64_t seed) {
    if (analytic_grad.size() != at.data.size()) throw std::runtime_error("finite_diff_check: gradient size mismatch");
    if (at.data.empty()) throw std::runtime_error("finite_diff_check: empty texture");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, at.data.size() - 1);
    FiniteDiffReport report;
    Texture probe = at;
    for (int s = 0; s < samples; ++s) {
        size_t k = pick(rng);
        double orig = probe.data[k];
        probe.data[k] = orig + h;
        double up = loss(probe);
        probe.data[k] = orig - h;
        double down = loss(probe);
        probe.data[k] = orig;
        double numeric = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(analytic_grad[k]), std::abs(numeric), 1e-8});
        double rel = std::abs(numeric - analytic_grad[k]) / denom;
        report.max_rel_error = std::max(report.max_rel_error, rel);
        report.mean_rel_error += rel;
        ++report.samples;
    }
    if (report.samples > 0) report.mean_rel_error /= report.samples;
    return report;
}

}  // namespace texbake
