#include "texbake/imagesource.hpp"

#include <httplib.h>

#include "texbake/raster.hpp"

namespace texbake {

nlohmann::json GenerationRequest::to_json() const {
    nlohmann::json jviews = nlohmann::json::array();
    for (const RequestView& v : views)
        jviews.push_back({{"descriptor", v.descriptor},
                          {"depth_png_b64", base64_encode(v.depth_png)},
                          {"init_png_b64", base64_encode(v.init_png)},
                          {"mask_png_b64", base64_encode(v.mask_png)},
                          {"camera",
                           {{"azimuth", v.camera.azimuth},
                            {"elevation", v.camera.elevation},
                            {"radius", v.camera.radius},
                            {"fov_y", v.camera.fov_y},
                            {"width", v.camera.width},
                            {"height", v.camera.height}}}});
    return nlohmann::json{{"prompt", prompt},
                          {"negative_prompt", negative_prompt},
                          {"denoise_steps", denoise_steps},
                          {"noise_strength", noise_strength},
                          {"seed", seed},
                          {"views", jviews}};
}

GenerationRequest GenerationRequest::from_json(const nlohmann::json& j) {
    GenerationRequest req;
    req.prompt = j.at("prompt").get<std::string>();
    req.negative_prompt = j.at("negative_prompt").get<std::string>();
    req.denoise_steps = j.at("denoise_steps").get<int>();
    req.noise_strength = j.at("noise_strength").get<double>();
    req.seed = j.at("seed").get<uint64_t>();
    if (!j.at("views").is_array() || j.at("views").empty())
        throw std::runtime_error("request has no views");
    for (const auto& jv : j.at("views")) {
        RequestView v;
        v.descriptor = jv.at("descriptor").get<std::string>();
        v.depth_png = base64_decode(jv.at("depth_png_b64").get<std::string>());
        v.init_png = base64_decode(jv.at("init_png_b64").get<std::string>());
        v.mask_png = base64_decode(jv.at("mask_png_b64").get<std::string>());
        const auto& jc = jv.at("camera");
        v.camera.azimuth = jc.at("azimuth").get<double>();
        v.camera.elevation = jc.at("elevation").get<double>();
        v.camera.radius = jc.at("radius").get<double>();
        v.camera.fov_y = jc.at("fov_y").get<double>();
        v.camera.width = jc.at("width").get<int>();
        v.camera.height = jc.at("height").get<int>();
        v.camera.descriptor = v.descriptor;
        req.views.push_back(std::move(v));
    }
    return req;
}

ImageRGB splice_condition(const ImageRGB& a, const ImageRGB& b) {
    if (a.height != b.height) throw std::runtime_error("splice_condition: height mismatch");
    ImageRGB out(a.width + b.width, a.height);
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = a.at(x, y, c);
        for (int x = 0; x < b.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(a.width + x, y, c) = b.at(x, y, c);
    }
    return out;
}

ImageGray splice_condition(const ImageGray& a, const ImageGray& b) {
    if (a.height != b.height) throw std::runtime_error("splice_condition: height mismatch");
    ImageGray out(a.width + b.width, a.height);
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) out.at(x, y) = a.at(x, y);
        for (int x = 0; x < b.width; ++x) out.at(a.width + x, y) = b.at(x, y);
    }
    return out;
}

std::pair<ImageRGB, ImageRGB> split_condition(const ImageRGB& spliced, int width_a) {
    if (width_a < 1 || width_a >= spliced.width) throw std::runtime_error("split_condition: bad split width");
    ImageRGB a(width_a, spliced.height), b(spliced.width - width_a, spliced.height);
    for (int y = 0; y < spliced.height; ++y) {
        for (int x = 0; x < a.width; ++x)
            for (int c = 0; c < 3; ++c) a.at(x, y, c) = spliced.at(x, y, c);
        for (int x = 0; x < b.width; ++x)
            for (int c = 0; c < 3; ++c) b.at(x, y, c) = spliced.at(width_a + x, y, c);
    }
    return {std::move(a), std::move(b)};
}

std::pair<ImageGray, ImageGray> split_condition(const ImageGray& spliced, int width_a) {
    if (width_a < 1 || width_a >= spliced.width) throw std::runtime_error("split_condition: bad split width");
    ImageGray a(width_a, spliced.height), b(spliced.width - width_a, spliced.height);
    for (int y = 0; y < spliced.height; ++y) {
        for (int x = 0; x < a.width; ++x) a.at(x, y) = spliced.at(x, y);
        for (int x = 0; x < b.width; ++x) b.at(x, y) = spliced.at(width_a + x, y);
    }
    return {std::move(a), std::move(b)};
}

std::string descriptor_to_filename(const std::string& descriptor) {
    std::string name = descriptor;
    for (char& c : name)
        if (c == ' ') c = '_';
    return name + ".png";
}

OracleSource::OracleSource(Mesh gt_mesh, Texture gt_texture) : mesh_(std::move(gt_mesh)), texture_(std::move(gt_texture)) {
    validate_mesh(mesh_);
    if (!mesh_.has_uvs()) throw std::runtime_error("oracle source: ground-truth mesh has no UVs");
}

std::vector<ImageRGB> OracleSource::generate(const std::vector<ViewInput>& inputs, const BakeConfig&) {
    std::vector<ImageRGB> out;
    for (const ViewInput& in : inputs) {
        ImageRGB img = rasterize(mesh_, in.camera, &texture_).color;
        // Every real provider hands back 8-bit images, so the oracle emulates
        // the same domain; bakes against it then match bakes through the wire
        // protocol bit for bit instead of merely within quantization error.
        for (double& v : img.data) v = quantize8(v) / 255.0;
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<ImageRGB> FilesSource::generate(const std::vector<ViewInput>& inputs, const BakeConfig&) {
    std::vector<ImageRGB> out;
    for (const ViewInput& in : inputs) {
        std::string path = dir_ + "/" + descriptor_to_filename(in.descriptor);
        ImageRGB img = load_png_rgb8(path);
        if (img.width != in.camera.width || img.height != in.camera.height)
            throw std::runtime_error("files source: " + path + " is " + std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + ", expected " + std::to_string(in.camera.width) +
                                     "x" + std::to_string(in.camera.height));
        out.push_back(std::move(img));
    }
    return out;
}

namespace {

// Accepts "http://host:port", with or without a path; the generation endpoint
// path is appended when absent.
void parse_remote_url(const std::string& url, std::string& base, std::string& path) {
    size_t scheme = url.find("://");
    size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    size_t slash = url.find('/', host_start);
    if (slash == std::string::npos) {
        base = url;
        path = "/v1/generate";
    } else {
        base = url.substr(0, slash);
        path = url.substr(slash);
        if (path == "/" || path.empty()) path = "/v1/generate";
    }
}

}  // namespace

std::vector<ImageRGB> remote_generate(const std::string& url, const GenerationRequest& request) {
    std::string base, path;
    parse_remote_url(url, base, path);
    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(300, 0);
    client.set_write_timeout(300, 0);

    httplib::Result result = client.Post(path, request.to_json().dump(), "application/json");
    if (!result)
        throw RemoteError(RemoteErrorKind::connection,
                          "cannot reach " + base + ": " + httplib::to_string(result.error()));
    if (result->status != 200) {
        std::string detail;
        try {
            detail = nlohmann::json::parse(result->body).value("error", "");
        } catch (...) {
        }
        throw RemoteError(RemoteErrorKind::http_status, "endpoint returned status " + std::to_string(result->status) +
                                                            (detail.empty() ? "" : ": " + detail));
    }

    nlohmann::json body;
    std::vector<std::string> b64;
    try {
        body = nlohmann::json::parse(result->body);
        b64 = body.at("images_png_b64").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
        throw RemoteError(RemoteErrorKind::malformed, std::string("malformed response body: ") + e.what());
    }

    std::vector<ImageRGB> images;
    try {
        for (const std::string& s : b64) images.push_back(decode_png_rgb8(base64_decode(s)));
    } catch (const std::exception& e) {
        throw RemoteError(RemoteErrorKind::malformed, std::string("undecodable response image: ") + e.what());
    }

    size_t n = request.views.size();
    if (images.size() == 1 && n == 2) {
        int wa = request.views[0].camera.width;
        if (images[0].width != wa + request.views[1].camera.width)
            throw RemoteError(RemoteErrorKind::size_mismatch, "spliced response width does not cover both views");
        auto [a, second] = split_condition(images[0], wa);
        images.clear();
        images.push_back(std::move(a));
        images.push_back(std::move(second));
    }
    if (images.size() != n)
        throw RemoteError(RemoteErrorKind::size_mismatch, "endpoint returned " + std::to_string(images.size()) +
                                                              " images for " + std::to_string(n) + " views");
    for (size_t i = 0; i < n; ++i)
        if (images[i].width != request.views[i].camera.width || images[i].height != request.views[i].camera.height)
            throw RemoteError(RemoteErrorKind::size_mismatch,
                              "response image " + std::to_string(i) + " has wrong dimensions");
    return images;
}

std::vector<ImageRGB> RemoteSource::generate(const std::vector<ViewInput>& inputs, const BakeConfig& config) {
    GenerationRequest req;
    req.prompt = config.prompt;
    req.negative_prompt = config.negative_prompt;
    req.denoise_steps = config.denoise_steps;
    req.noise_strength = config.effective_noise_strength();
    req.seed = config.seed;
    for (const ViewInput& in : inputs) {
        RequestView v;
        v.descriptor = in.descriptor;
        v.depth_png = encode_png_gray16(in.depth_norm);
        v.init_png = encode_png_rgb8(in.init_render);
        v.mask_png = encode_png_mask(in.update_mask);
        v.camera = in.camera;
        req.views.push_back(std::move(v));
    }
    return remote_generate(url_, req);
}

}  // namespace texbake
