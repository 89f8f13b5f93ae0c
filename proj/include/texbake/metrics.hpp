#pragma once
#include <cstdint>
#include <functional>

#include "texbake/image.hpp"
#include "texbake/texture.hpp"

namespace texbake {

// Mean squared error over channel samples (3 per pixel), optionally restricted
// to masked pixels. Black vs white = 1.0.
double image_mse(const ImageRGB& a, const ImageRGB& b, const Mask* mask = nullptr);

// -10 * log10(mse); returns +infinity for identical inputs.
double psnr(const ImageRGB& a, const ImageRGB& b, const Mask* mask = nullptr);

struct FiniteDiffReport {
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    int samples = 0;
};

// Central-difference probe of an analytic texture gradient: perturbs `samples`
// randomly chosen texture parameters (seeded) by +-h and compares the loss
// delta against the provided gradient. Relative error uses
// max(|analytic|, |numeric|, 1e-8) as the denominator.
FiniteDiffReport finite_diff_check(const std::function<double(const Texture&)>& loss, const Texture& at,
                                   const std::vector<double>& analytic_grad, int samples, double h, uint64_t seed);

}  // namespace texbake
