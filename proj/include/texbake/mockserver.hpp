#pragma once
#include <memory>

#include "texbake/mesh.hpp"
#include "texbake/texture.hpp"

namespace texbake {

// In-process generation endpoint that answers /v1/generate by rendering a
// ground-truth mesh/texture from the requested cameras, applying the
// keep/update blend server-side when a mask is supplied. Malformed requests
// get 400 {"error": ...}; internal failures get 500.
class MockServer {
  public:
    MockServer(Mesh gt_mesh, Texture gt_texture);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    // Binds 0.0.0.0:<port> (port 0 picks a free one), serves on a background
    // thread, returns the bound port. Throws if binding fails.
    int start(int port = 0);
    void stop();
    int port() const { return port_; }
    bool running() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace texbake
