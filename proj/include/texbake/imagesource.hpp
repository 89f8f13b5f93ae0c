#pragma once
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "texbake/mesh.hpp"
#include "texbake/texopt.hpp"

namespace texbake {

// ---- generation wire protocol -------------------------------------------------
//
// POST <endpoint>/v1/generate with a JSON body; images travel as base64 PNGs
// (depth: 16-bit grayscale, init: 8-bit RGB, mask: 8-bit gray 0/255). A 200
// response carries {"images_png_b64": [...]}; errors carry {"error": "..."}.

struct RequestView {
    std::string descriptor;
    std::vector<uint8_t> depth_png, init_png, mask_png;
    Camera camera;
};

struct GenerationRequest {
    std::string prompt, negative_prompt;
    int denoise_steps = 100;
    double noise_strength = 1.0;
    uint64_t seed = 0;
    std::vector<RequestView> views;

    nlohmann::json to_json() const;
    static GenerationRequest from_json(const nlohmann::json& j);  // throws on missing/bad fields
};

enum class RemoteErrorKind { connection, http_status, malformed, size_mismatch };

struct RemoteError : std::runtime_error {
    RemoteErrorKind kind;
    RemoteError(RemoteErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Sends one generation request; returns the decoded per-view images. A
// response carrying a single horizontally spliced image for a two-view request
// is split at the first view's width.
std::vector<ImageRGB> remote_generate(const std::string& url, const GenerationRequest& request);

// ---- two-view splicing ---------------------------------------------------------

ImageRGB splice_condition(const ImageRGB& a, const ImageRGB& b);
ImageGray splice_condition(const ImageGray& a, const ImageGray& b);
std::pair<ImageRGB, ImageRGB> split_condition(const ImageRGB& spliced, int width_a);
std::pair<ImageGray, ImageGray> split_condition(const ImageGray& spliced, int width_a);

// ---- providers -----------------------------------------------------------------

// Renders a ground-truth mesh/texture from the requested cameras.
class OracleSource : public ImageSource {
  public:
    OracleSource(Mesh gt_mesh, Texture gt_texture);
    std::string name() const override { return "oracle"; }
    std::vector<ImageRGB> generate(const std::vector<ViewInput>& inputs, const BakeConfig& config) override;

  private:
    Mesh mesh_;
    Texture texture_;
};

// Reads <dir>/<descriptor with spaces replaced by underscores>.png.
class FilesSource : public ImageSource {
  public:
    explicit FilesSource(std::string dir) : dir_(std::move(dir)) {}
    std::string name() const override { return "files"; }
    std::vector<ImageRGB> generate(const std::vector<ViewInput>& inputs, const BakeConfig& config) override;

  private:
    std::string dir_;
};

// Forwards each view group to a generation endpoint.
class RemoteSource : public ImageSource {
  public:
    explicit RemoteSource(std::string url) : url_(std::move(url)) {}
    std::string name() const override { return "remote"; }
    std::vector<ImageRGB> generate(const std::vector<ViewInput>& inputs, const BakeConfig& config) override;

  private:
    std::string url_;
};

std::string descriptor_to_filename(const std::string& descriptor);

}  // namespace texbake
