#include "texbake/mockserver.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "texbake/imagesource.hpp"
#include "texbake/raster.hpp"
#include "texbake/texopt.hpp"

namespace texbake {

struct MockServer::Impl {
    Mesh mesh;
    Texture texture;
    httplib::Server server;
    std::thread thread;
};

MockServer::MockServer(Mesh gt_mesh, Texture gt_texture) : impl_(new Impl) {
    validate_mesh(gt_mesh);
    if (!gt_mesh.has_uvs()) throw std::runtime_error("mock server: ground-truth mesh has no UVs");
    impl_->mesh = std::move(gt_mesh);
    impl_->texture = std::move(gt_texture);

    impl_->server.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
        auto fail = [&res](int status, const std::string& msg) {
            res.status = status;
            res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
        };
        GenerationRequest gen;
        try {
            gen = GenerationRequest::from_json(nlohmann::json::parse(req.body));
        } catch (const std::exception& e) {
            fail(400, std::string("malformed request: ") + e.what());
            return;
        }
        try {
            std::vector<std::string> images;
            for (const RequestView& view : gen.views) {
                if (view.camera.width < 1 || view.camera.height < 1 || view.camera.radius <= 0.0 ||
                    view.camera.fov_y <= 0.0 || view.camera.fov_y >= M_PI) {
                    fail(400, "bad camera for view '" + view.descriptor + "'");
                    return;
                }
                ImageRGB img = rasterize(impl_->mesh, view.camera, &impl_->texture).color;
                if (!view.mask_png.empty()) {
                    ImageRGB init;
                    Mask mask;
                    try {
                        init = decode_png_rgb8(view.init_png);
                        mask = decode_png_mask(view.mask_png);
                    } catch (const std::exception& e) {
                        fail(400, std::string("undecodable init/mask image: ") + e.what());
                        return;
                    }
                    if (init.width != img.width || init.height != img.height || mask.width != img.width ||
                        mask.height != img.height) {
                        fail(400, "init/mask size does not match camera for view '" + view.descriptor + "'");
                        return;
                    }
                    img = blend_keep_update(img, init, mask);
                }
                images.push_back(base64_encode(encode_png_rgb8(img)));
            }
            res.status = 200;
            res.set_content(nlohmann::json{{"images_png_b64", images}}.dump(), "application/json");
        } catch (const std::exception& e) {
            fail(500, std::string("generation failed: ") + e.what());
        }
    });
    impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port) {
    if (impl_->thread.joinable()) throw std::runtime_error("mock server: already running");
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port("0.0.0.0");
        if (port_ < 0) throw std::runtime_error("mock server: cannot bind a port");
    } else {
        if (!impl_->server.bind_to_port("0.0.0.0", port))
            throw std::runtime_error("mock server: cannot bind port " + std::to_string(port));
        port_ = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    while (!impl_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    return port_;
}

void MockServer::stop() {
    if (!impl_) return;
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

bool MockServer::running() const { return impl_ && impl_->server.is_running(); }

}  // namespace texbake
