#include "texbake/texopt.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace texbake {

void BakeConfig::validate() const {
    if (hi_resolution < 1 || lo_resolution < 1) throw std::runtime_error("config: resolutions must be positive");
    if (lo_resolution > hi_resolution) throw std::runtime_error("config: lo resolution exceeds hi resolution");
    if (hi_resolution % lo_resolution != 0) throw std::runtime_error("config: lo resolution must divide hi resolution");
    if (steps_per_view < 0) throw std::runtime_error("config: negative step count");
    if (learning_rate <= 0.0) throw std::runtime_error("config: learning rate must be positive");
    if (uv_loss_weight < 0.0) throw std::runtime_error("config: negative uv loss weight");
    if (keep_update_threshold <= 0.0 || keep_update_threshold >= M_PI)
        throw std::runtime_error("config: keep/update threshold must lie in (0, pi)");
    if (views < 1 || views > 10) throw std::runtime_error("config: views must be in [1, 10]");
    if (image_size < 1) throw std::runtime_error("config: bad image size");
    if (camera_radius <= 0.0) throw std::runtime_error("config: camera radius must be positive");
    if (fov_y <= 0.0 || fov_y >= M_PI) throw std::runtime_error("config: fov must lie in (0, pi)");
    if (denoise_steps < 1) throw std::runtime_error("config: denoise steps must be positive");
    if (noise_strength > 1.0) throw std::runtime_error("config: noise strength above 1");
    if (checkerboard_band < 0) throw std::runtime_error("config: negative checkerboard band");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0 || adam_eps <= 0.0)
        throw std::runtime_error("config: bad optimizer constants");
}

ViewLossGrad view_loss_and_grad(const Texture& tex, const GBuffer& gb, const ImageRGB& target, const Mask& pixel_mask) {
    if (target.width != gb.width || target.height != gb.height || pixel_mask.width != gb.width ||
        pixel_mask.height != gb.height)
        throw std::runtime_error("view_loss_and_grad: image/mask size mismatch");
    ViewLossGrad out;
    out.grad.assign(tex.data.size(), 0.0);
    size_t n = pixel_mask.count();
    if (n == 0) {
        diag_warn("view_loss_and_grad: empty pixel mask; loss is 0");
        return out;
    }
    const double denom = 1.0 / (3.0 * double(n));
    double loss = 0.0;
    for (int y = 0; y < gb.height; ++y)
        for (int x = 0; x < gb.width; ++x) {
            size_t idx = size_t(y) * gb.width + x;
            if (!pixel_mask.data[idx]) continue;
            Vec3 rendered{1.0, 1.0, 1.0};
            BilinearFootprint fp;
            bool covered = gb.coverage.data[idx] != 0;
            if (covered) {
                fp = bilinear_footprint(tex.width, tex.height, gb.uv[idx]);
                rendered = {0, 0, 0};
                for (int i = 0; i < fp.count; ++i) {
                    size_t base = (size_t(fp.y[i]) * tex.width + fp.x[i]) * 3;
                    rendered.x += fp.w[i] * tex.data[base + 0];
                    rendered.y += fp.w[i] * tex.data[base + 1];
                    rendered.z += fp.w[i] * tex.data[base + 2];
                }
            }
            size_t pbase = idx * 3;
            double d[3] = {rendered.x - target.data[pbase], rendered.y - target.data[pbase + 1],
                           rendered.z - target.data[pbase + 2]};
            loss += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if (covered)
                for (int i = 0; i < fp.count; ++i) {
                    size_t base = (size_t(fp.y[i]) * tex.width + fp.x[i]) * 3;
                    double s = 2.0 * fp.w[i] * denom;
                    out.grad[base + 0] += s * d[0];
                    out.grad[base + 1] += s * d[1];
                    out.grad[base + 2] += s * d[2];
                }
        }
    out.loss = loss * denom;
    return out;
}

ImageRGB render_view(const Texture& tex, const GBuffer& gb) {
    ImageRGB img(gb.width, gb.height, 1.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < gb.height; ++y)
        for (int x = 0; x < gb.width; ++x) {
            size_t idx = size_t(y) * gb.width + x;
            if (!gb.coverage.data[idx]) continue;
            Vec3 c = sample_bilinear(tex, gb.uv[idx]);
            img.data[idx * 3 + 0] = c.x;
            img.data[idx * 3 + 1] = c.y;
            img.data[idx * 3 + 2] = c.z;
        }
    return img;
}

UvLossGrad uv_self_supervision(const Texture& hi, const Texture& lo, const Mask& lo_mask) {
    if (lo.width != lo_mask.width || lo.height != lo_mask.height)
        throw std::runtime_error("uv_self_supervision: mask/texture size mismatch");
    if (lo.width < 1 || hi.width % lo.width != 0 || hi.height % lo.height != 0 ||
        hi.width / lo.width != hi.height / lo.height)
        throw std::runtime_error("uv_self_supervision: resolutions are not an integer ratio");
    size_t n = lo_mask.count();
    if (n == 0) throw std::runtime_error("uv_self_supervision: mask selects no texels");
    const int factor = hi.width / lo.width;
    const double inv_f2 = 1.0 / (double(factor) * factor);
    const double denom = 1.0 / (3.0 * double(n));

    UvLossGrad out;
    out.grad_hi.assign(hi.data.size(), 0.0);
    double loss = 0.0;
    for (int y = 0; y < lo.height; ++y)
        for (int x = 0; x < lo.width; ++x) {
            if (!lo_mask.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int dy = 0; dy < factor; ++dy) {
                    size_t row = (size_t(y) * factor + dy) * hi.width + size_t(x) * factor;
                    for (int dx = 0; dx < factor; ++dx) acc += hi.data[(row + dx) * 3 + c];
                }
                double d = acc * inv_f2 - lo.at(x, y, c);
                loss += d * d;
                double g = 2.0 * d * denom * inv_f2;
                for (int dy = 0; dy < factor; ++dy) {
                    size_t row = (size_t(y) * factor + dy) * hi.width + size_t(x) * factor;
                    for (int dx = 0; dx < factor; ++dx) out.grad_hi[(row + dx) * 3 + c] += g;
                }
            }
        }
    out.loss = loss * denom;
    return out;
}

TexelOptimizer::TexelOptimizer(const BakeConfig& config, size_t param_count)
    : kind_(config.optimizer),
      lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps) {
    if (kind_ == BakeConfig::Optimizer::adam) {
        m_.assign(param_count, 0.0);
        v_.assign(param_count, 0.0);
    }
}

void TexelOptimizer::apply(Texture& tex, const std::vector<double>& grad) {
    if (grad.size() != tex.data.size()) throw std::runtime_error("optimizer: gradient size mismatch");
    ++step_;
    const long n_texels = long(tex.texel_count());
    if (kind_ == BakeConfig::Optimizer::adam) {
        const double bc1 = 1.0 - std::pow(beta1_, double(step_));
        const double bc2 = 1.0 - std::pow(beta2_, double(step_));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long i = 0; i < n_texels; ++i) {
            double moved = 0.0;
            for (int c = 0; c < 3; ++c) {
                size_t k = size_t(i) * 3 + c;
                double g = grad[k];
                if (g == 0.0 && m_[k] == 0.0 && v_[k] == 0.0) continue;  // never-touched channel
                m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
                v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
                double step = -lr_ * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + eps_);
                double nv = std::min(1.0, std::max(0.0, tex.data[k] + step));
                moved += std::abs(nv - tex.data[k]);
                tex.data[k] = nv;
            }
            tex.update_magnitude[size_t(i)] += moved;
        }
    } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long i = 0; i < n_texels; ++i) {
            double moved = 0.0;
            for (int c = 0; c < 3; ++c) {
                size_t k = size_t(i) * 3 + c;
                double g = grad[k];
                if (g == 0.0) continue;
                double nv = std::min(1.0, std::max(0.0, tex.data[k] - lr_ * g));
                moved += std::abs(nv - tex.data[k]);
                tex.data[k] = nv;
            }
            tex.update_magnitude[size_t(i)] += moved;
        }
    }
}

ViewOptResult optimize_view(Texture& hi, Texture& lo, const GBuffer& gb, const ImageRGB& target,
                            const Mask& update_mask, const Mask& lo_mask, const BakeConfig& config,
                            const Mask* view_anchored) {
    ViewOptResult res;
    if (update_mask.count() == 0) {
        diag_warn("optimize_view: empty update mask; view skipped");
        return res;
    }
    if (view_anchored && (view_anchored->width != hi.width || view_anchored->height != hi.height))
        throw std::runtime_error("optimize_view: anchored mask does not match the hi texture");
    TexelOptimizer opt_hi(config, hi.data.size());
    TexelOptimizer opt_lo(config, lo.data.size());
    const bool use_uv = config.uv_loss_weight > 0.0 && lo_mask.count() > 0;
    if (config.uv_loss_weight > 0.0 && lo_mask.count() == 0)
        diag_warn("optimize_view: empty lo mask; dual-resolution term skipped");
    std::vector<double> combined;
    for (int step = 0; step < config.steps_per_view; ++step) {
        ViewLossGrad view = view_loss_and_grad(hi, gb, target, update_mask);
        double total = view.loss;
        if (use_uv) {
            UvLossGrad uv = uv_self_supervision(hi, lo, lo_mask);
            total += config.uv_loss_weight * uv.loss;
            combined = std::move(view.grad);
            const double w = config.uv_loss_weight;
            if (view_anchored) {
                for (size_t i = 0; i < combined.size(); ++i)
                    if (!view_anchored->data[i / 3]) combined[i] += w * uv.grad_hi[i];
            } else {
                for (size_t i = 0; i < combined.size(); ++i) combined[i] += w * uv.grad_hi[i];
            }
            opt_hi.apply(hi, combined);
        } else {
            opt_hi.apply(hi, view.grad);
        }
        ViewLossGrad lo_view = view_loss_and_grad(lo, gb, target, update_mask);
        opt_lo.apply(lo, lo_view.grad);
        res.loss_curve.push_back(total);
    }
    return res;
}

ImageRGB blend_keep_update(const ImageRGB& generated, const ImageRGB& init, const Mask& update_mask) {
    if (generated.width != init.width || generated.height != init.height || update_mask.width != init.width ||
        update_mask.height != init.height)
        throw std::runtime_error("blend_keep_update: size mismatch");
    ImageRGB out = init;
    for (size_t i = 0; i < update_mask.data.size(); ++i)
        if (update_mask.data[i])
            for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = generated.data[i * 3 + c];
    return out;
}

Mask checkerboard_boundary(const Mask& update_mask, const Mask& coverage, int band) {
    if (coverage.width != update_mask.width || coverage.height != update_mask.height)
        throw std::runtime_error("checkerboard_boundary: size mismatch");
    const int w = update_mask.width, h = update_mask.height;
    Mask dilated = update_mask;
    Mask prev(w, h);
    for (int it = 0; it < band; ++it) {
        prev.data = dilated.data;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (prev.at(x, y)) continue;
                bool near = false;
                for (int dy = -1; dy <= 1 && !near; ++dy)
                    for (int dx = -1; dx <= 1 && !near; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && nx < w && ny >= 0 && ny < h && prev.at(nx, ny)) near = true;
                    }
                if (near) dilated.at(x, y) = 1;
            }
    }
    Mask out = update_mask;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t idx = size_t(y) * w + x;
            if (out.data[idx] || !dilated.data[idx] || !coverage.data[idx]) continue;
            if (((x >> 1) + (y >> 1)) % 2 == 0) out.data[idx] = 1;
        }
    return out;
}

std::vector<std::vector<int>> pair_symmetric_views(const ViewPlan& plan, int views) {
    if (views < 1 || views > int(plan.cameras.size())) throw std::runtime_error("pair_symmetric_views: bad view count");
    std::vector<std::vector<int>> groups;
    std::vector<char> taken(plan.cameras.size(), 0);
    for (const auto& [a, b] : plan.symmetric_pairs)
        if (a < views && b < views) {
            groups.push_back({a, b});
            taken[size_t(a)] = taken[size_t(b)] = 1;
        }
    for (int i = 0; i < views; ++i)
        if (!taken[size_t(i)]) groups.push_back({i});
    return groups;
}

nlohmann::json config_to_json(const BakeConfig& c) {
    return nlohmann::json{{"hi_resolution", c.hi_resolution},
                          {"lo_resolution", c.lo_resolution},
                          {"steps_per_view", c.steps_per_view},
                          {"learning_rate", c.learning_rate},
                          {"uv_loss_weight", c.uv_loss_weight},
                          {"keep_update_threshold", c.keep_update_threshold},
                          {"literal_angle", c.literal_angle},
                          {"optimizer", c.optimizer == BakeConfig::Optimizer::adam ? "adam" : "sgd"},
                          {"adam_beta1", c.adam_beta1},
                          {"adam_beta2", c.adam_beta2},
                          {"adam_eps", c.adam_eps},
                          {"checkerboard", c.checkerboard},
                          {"checkerboard_band", c.checkerboard_band},
                          {"init_texture", c.init_texture},
                          {"seed", c.seed},
                          {"prompt", c.prompt},
                          {"negative_prompt", c.negative_prompt},
                          {"denoise_steps", c.denoise_steps},
                          {"noise_strength", c.effective_noise_strength()},
                          {"views", c.views},
                          {"image_size", c.image_size},
                          {"camera_radius", c.camera_radius},
                          {"fov_y", c.fov_y},
                          {"gap_epsilon", c.gap_epsilon}};
}

nlohmann::json BakeReport::to_json() const {
    nlohmann::json jviews = nlohmann::json::array();
    for (const ViewReport& v : views)
        jviews.push_back({{"descriptor", v.descriptor},
                          {"update_pixels", v.update_pixels},
                          {"loss_first", v.loss_first},
                          {"loss_final", v.loss_final},
                          {"loss_curve", v.loss_curve},
                          {"seconds", v.seconds}});
    return nlohmann::json{{"config", config},
                          {"views", jviews},
                          {"gaps",
                           {{"epsilon", gaps.epsilon},
                            {"region_texels", gaps.region_texels},
                            {"gap_texels", gaps.gap_texels},
                            {"fraction", gaps.fraction}}},
                          {"timings", {{"total_seconds", total_seconds}}},
                          {"provider", provider},
                          {"status", status},
                          {"error", error}};
}

std::pair<long, Mask> scan_point_gaps(const Texture& tex, const Mask& region, double epsilon) {
    if (region.width != tex.width || region.height != tex.height)
        throw std::runtime_error("scan_point_gaps: mask/texture size mismatch");
    Mask gaps(tex.width, tex.height, 0);
    long count = 0;
    for (size_t i = 0; i < region.data.size(); ++i)
        if (region.data[i] && tex.update_magnitude[i] <= epsilon) {
            gaps.data[i] = 1;
            ++count;
        }
    return {count, gaps};
}

BakeResult bake(const Mesh& mesh, const ViewPlan& plan, ImageSource& source, const BakeConfig& config) {
    config.validate();
    validate_mesh(mesh);
    if (!mesh.has_uvs()) throw std::runtime_error("bake: mesh has no UV atlas");
    if (int(plan.cameras.size()) < config.views) throw std::runtime_error("bake: view plan smaller than configured views");

    auto t_start = std::chrono::steady_clock::now();
    BakeResult result;
    result.report.config = config_to_json(config);
    result.report.provider = source.name();

    const int hi_res = config.hi_resolution;
    const int factor = hi_res / config.lo_resolution;
    if (config.init_texture.empty()) {
        result.hi = Texture(hi_res, hi_res, 1.0, 1.0, 1.0);
    } else {
        Texture init = load_texture_png(config.init_texture);
        result.hi = resample_texture(init, hi_res, hi_res);
    }
    result.lo = downsample_box(result.hi, factor);
    result.region = Mask(hi_res, hi_res, 0);

    // Texels any view's masked pixels have sampled so far. The dual-resolution
    // term only fills texels outside this set; texels with direct evidence keep
    // following their view gradients untouched by later views' average pulls.
    Mask anchored(hi_res, hi_res, 0);

    std::vector<std::vector<int>> groups = pair_symmetric_views(plan, config.views);
    bool aborted = false;
    for (const auto& group : groups) {
        if (aborted) break;
        std::vector<ViewInput> inputs;
        std::vector<GBuffer> gbuffers;
        for (int vi : group) {
            const Camera& cam = plan.cameras[size_t(vi)];
            GBuffer gb = rasterize(mesh, cam, &result.hi);
            Mask update = classify_keep_update(gb, config.keep_update_threshold, config.literal_angle);
            if (config.checkerboard) update = checkerboard_boundary(update, gb.coverage, config.checkerboard_band);
            ViewInput in;
            in.view_index = vi;
            in.descriptor = cam.descriptor;
            in.camera = cam;
            in.depth_norm = normalize_depth(gb);
            in.init_render = gb.color;
            in.update_mask = update;
            inputs.push_back(std::move(in));
            gbuffers.push_back(std::move(gb));
        }

        std::vector<ImageRGB> generated;
        try {
            generated = source.generate(inputs, config);
            if (generated.size() != inputs.size())
                throw std::runtime_error("provider returned " + std::to_string(generated.size()) + " images for " +
                                         std::to_string(inputs.size()) + " views");
        } catch (const std::exception& e) {
            result.ok = false;
            result.error = e.what();
            result.report.status = "error";
            result.report.error = e.what();
            diag_error(std::string("bake: image provider failed: ") + e.what());
            aborted = true;
            break;
        }

        for (size_t gi = 0; gi < group.size(); ++gi) {
            const ViewInput& in = inputs[gi];
            const GBuffer& gb = gbuffers[gi];
            auto t_view = std::chrono::steady_clock::now();

            ImageRGB target = blend_keep_update(generated[gi], in.init_render, in.update_mask);

            // Texture-space update region (per-triangle), the lo-grid texels
            // reachable from this view's masked pixels, and the hi texels those
            // pixels sample directly (which become anchored).
            Mask lo_mask(config.lo_resolution, config.lo_resolution, 0);
            std::set<int> tris;
            for (int y = 0; y < gb.height; ++y)
                for (int x = 0; x < gb.width; ++x) {
                    size_t idx = size_t(y) * gb.width + x;
                    if (!in.update_mask.data[idx]) continue;
                    if (gb.tri_id[idx] >= 0) tris.insert(gb.tri_id[idx]);
                    BilinearFootprint fp = bilinear_footprint(config.lo_resolution, config.lo_resolution, gb.uv[idx]);
                    for (int i = 0; i < fp.count; ++i) lo_mask.at(fp.x[i], fp.y[i]) = 1;
                    BilinearFootprint hfp = bilinear_footprint(hi_res, hi_res, gb.uv[idx]);
                    for (int i = 0; i < hfp.count; ++i) anchored.at(hfp.x[i], hfp.y[i]) = 1;
                }
            for (int t : tris)
                uv_triangle_texels(mesh.corner_uvs[size_t(t)], hi_res,
                                   [&](int x, int y) { result.region.at(x, y) = 1; });

            ViewOptResult opt =
                optimize_view(result.hi, result.lo, gb, target, in.update_mask, lo_mask, config, &anchored);

            ViewReport vr;
            vr.descriptor = in.descriptor;
            vr.update_pixels = long(in.update_mask.count());
            vr.loss_curve = opt.loss_curve;
            vr.loss_first = opt.loss_curve.empty() ? 0.0 : opt.loss_curve.front();
            vr.loss_final = opt.loss_curve.empty() ? 0.0 : opt.loss_curve.back();
            vr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_view).count();
            result.report.views.push_back(std::move(vr));
        }
    }

    auto [gap_count, gap_mask] = scan_point_gaps(result.hi, result.region, config.gap_epsilon);
    result.gap_mask = std::move(gap_mask);
    result.report.gaps.epsilon = config.gap_epsilon;
    result.report.gaps.region_texels = long(result.region.count());
    result.report.gaps.gap_texels = gap_count;
    result.report.gaps.fraction =
        result.report.gaps.region_texels > 0 ? double(gap_count) / double(result.report.gaps.region_texels) : 0.0;
    result.report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace texbake
