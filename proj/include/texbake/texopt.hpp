#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "texbake/camera.hpp"
#include "texbake/raster.hpp"
#include "texbake/texture.hpp"

namespace texbake {

struct BakeConfig {
    int hi_resolution = 1024;
    int lo_resolution = 256;
    int steps_per_view = 200;
    double learning_rate = 0.01;
    double uv_loss_weight = 1.0;  // weight of the dual-resolution consistency term
    double keep_update_threshold = M_PI / 5.0;
    bool literal_angle = false;
    enum class Optimizer { adam, sgd };
    Optimizer optimizer = Optimizer::adam;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
    bool checkerboard = false;  // dither the keep/update boundary band
    int checkerboard_band = 8;
    std::string init_texture;  // PNG path; empty = constant white
    uint64_t seed = 0;
    std::string prompt, negative_prompt;
    int denoise_steps = 100;
    double noise_strength = -1.0;  // <0 = auto: 1.0 for white init, 0.6 otherwise
    int views = 10;
    int image_size = 1024;
    double camera_radius = 2.0;
    double fov_y = M_PI / 4.0;
    double gap_epsilon = 1e-9;

    void validate() const;  // throws std::runtime_error on bad combinations
    double effective_noise_strength() const {
        return noise_strength >= 0.0 ? noise_strength : (init_texture.empty() ? 1.0 : 0.6);
    }
};

// ---- per-view photometric loss ----------------------------------------------

// Mean squared error over masked pixels (mean over pixel count * 3 channels)
// between the texture rendered through the gbuffer UVs and the target image,
// with the gradient scattered onto the texture through the bilinear footprints.
// An empty mask yields loss 0, zero gradient and a diagnostic.
struct ViewLossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as Texture::data
};
ViewLossGrad view_loss_and_grad(const Texture& tex, const GBuffer& gb, const ImageRGB& target, const Mask& pixel_mask);

// Texture rendered through the gbuffer UVs; uncovered pixels are white.
ImageRGB render_view(const Texture& tex, const GBuffer& gb);

// ---- dual-resolution consistency --------------------------------------------

// MSE between the box-downsampled hi texture and the (detached) lo texture over
// masked lo texels; the gradient flows into the hi texture only. Throws if the
// mask is all false or shapes disagree.
struct UvLossGrad {
    double loss = 0.0;
    std::vector<double> grad_hi;
};
UvLossGrad uv_self_supervision(const Texture& hi, const Texture& lo, const Mask& lo_mask);

// ---- optimizer ---------------------------------------------------------------

// Per-texel gradient step with clamping to [0,1]. Accumulates the post-clamp
// parameter movement into Texture::update_magnitude. Adam keeps first/second
// moments per channel; texels that have never seen a gradient are left
// bit-exactly untouched.
class TexelOptimizer {
  public:
    TexelOptimizer(const BakeConfig& config, size_t param_count);
    void apply(Texture& tex, const std::vector<double>& grad);

  private:
    BakeConfig::Optimizer kind_;
    double lr_, beta1_, beta2_, eps_;
    long step_ = 0;
    std::vector<double> m_, v_;
};

// ---- view optimization -------------------------------------------------------

struct ViewOptResult {
    std::vector<double> loss_curve;  // combined objective per step, pre-update
};

// Runs config.steps_per_view joint steps: the hi texture follows the masked
// view loss plus uv_loss_weight times the dual-resolution term; the lo texture
// follows its own masked view loss against the same target. Fresh optimizer
// state per call.
//
// view_anchored (optional, hi-texture dimensions): texels that carry direct
// photometric evidence — any view's masked pixels have sampled them. The
// dual-resolution gradient is withheld from those texels: its job is to spread
// average color into texels no view footprint reaches, and letting it fight
// direct evidence drags fitted texels toward block averages that can mix
// unrelated charts. Pass null to apply the term everywhere.
ViewOptResult optimize_view(Texture& hi, Texture& lo, const GBuffer& gb, const ImageRGB& target,
                            const Mask& update_mask, const Mask& lo_mask, const BakeConfig& config,
                            const Mask* view_anchored = nullptr);

// ---- keep/update blending ----------------------------------------------------

// out = generated where mask, init elsewhere (bit-exact copies).
ImageRGB blend_keep_update(const ImageRGB& generated, const ImageRGB& init, const Mask& update_mask);

// Dithers the keep side of the boundary: keep pixels covered by geometry and
// within `band` pixels (Chebyshev) of the update region flip to update on a
// 2x2 checker pattern.
Mask checkerboard_boundary(const Mask& update_mask, const Mask& coverage, int band);

// ---- image providers ---------------------------------------------------------

struct ViewInput {
    int view_index = -1;
    std::string descriptor;
    Camera camera;
    ImageGray depth_norm;   // [0,1], near = 1
    ImageRGB init_render;   // current texture rendered from this view
    Mask update_mask;
};

class ImageSource {
  public:
    virtual ~ImageSource() = default;
    virtual std::string name() const = 0;
    // One generated image per input, same size as the camera framebuffer.
    virtual std::vector<ImageRGB> generate(const std::vector<ViewInput>& inputs, const BakeConfig& config) = 0;
};

// Groups opposite equatorial views into two-view requests, then singletons, in
// plan order: {0,4},{1,5},{2,6},{3,7},{8},{9} restricted to `views` cameras.
std::vector<std::vector<int>> pair_symmetric_views(const ViewPlan& plan, int views);

// ---- bake --------------------------------------------------------------------

struct ViewReport {
    std::string descriptor;
    long update_pixels = 0;
    double loss_first = 0.0, loss_final = 0.0;
    std::vector<double> loss_curve;
    double seconds = 0.0;
};

struct GapReport {
    double epsilon = 0.0;
    long region_texels = 0;  // union of per-view texture-space update regions
    long gap_texels = 0;
    double fraction = 0.0;
};

struct BakeReport {
    nlohmann::json config;
    std::vector<ViewReport> views;
    GapReport gaps;
    double total_seconds = 0.0;
    std::string provider;
    std::string status = "ok";
    std::string error;
    nlohmann::json to_json() const;
};

struct BakeResult {
    Texture hi;
    Texture lo;
    Mask region;    // union of texture-space update regions (hi grid)
    Mask gap_mask;  // region texels never moved by the optimizer
    BakeReport report;
    bool ok = true;
    std::string error;
};

// Full pipeline over the view plan: rasterize with the current texture,
// classify keep/update, fetch provider images per symmetric group, blend via
// the keep/update rule, then optimize hi and lo textures per view. Provider
// failures abort remaining views and return ok = false with a partial report.
BakeResult bake(const Mesh& mesh, const ViewPlan& plan, ImageSource& source, const BakeConfig& config);

// Gap scan: texels inside `region` whose accumulated update magnitude is at
// most epsilon.
std::pair<long, Mask> scan_point_gaps(const Texture& tex, const Mask& region, double epsilon);

nlohmann::json config_to_json(const BakeConfig& config);

}  // namespace texbake
