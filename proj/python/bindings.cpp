// Python bindings: numpy-centric access to the mesh, rasterization, texture
// and baking layers. Images and textures cross the boundary as float64
// arrays of shape (H, W, 3), masks as (H, W) bool.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "texbake/camera.hpp"
#include "texbake/decimate.hpp"
#include "texbake/imagesource.hpp"
#include "texbake/mesh.hpp"
#include "texbake/metrics.hpp"
#include "texbake/raster.hpp"
#include "texbake/texopt.hpp"
#include "texbake/texture.hpp"

namespace py = pybind11;
using namespace texbake;

namespace {

py::array_t<double> array_hw3(const std::vector<double>& data, int w, int h) {
    py::array_t<double> out({h, w, 3});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::array_t<double> array_hw(const std::vector<double>& data, int w, int h) {
    py::array_t<double> out({h, w});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::array_t<bool> array_mask(const Mask& mask) {
    py::array_t<bool> out({mask.height, mask.width});
    bool* p = out.mutable_data();
    for (size_t i = 0; i < mask.data.size(); ++i) p[i] = mask.data[i] != 0;
    return out;
}

ImageRGB image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3) throw std::invalid_argument("expected an array of shape (H, W, 3)");
    ImageRGB img(int(arr.shape(1)), int(arr.shape(0)));
    std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
    return img;
}

Texture texture_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    return texture_from_image(image_from_array(arr));
}

Mask mask_from_array(const py::object& obj) {
    auto arr = py::array_t<bool, py::array::c_style | py::array::forcecast>::ensure(obj);
    if (!arr || arr.ndim() != 2) throw std::invalid_argument("expected a mask of shape (H, W)");
    Mask mask(int(arr.shape(1)), int(arr.shape(0)));
    const bool* p = arr.data();
    for (size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = p[i] ? 1 : 0;
    return mask;
}

Mesh mesh_from_arrays(const py::array_t<double, py::array::c_style | py::array::forcecast>& positions,
                      const py::array_t<long, py::array::c_style | py::array::forcecast>& triangles,
                      const py::object& corner_uvs) {
    if (positions.ndim() != 2 || positions.shape(1) != 3)
        throw std::invalid_argument("positions must have shape (N, 3)");
    if (triangles.ndim() != 2 || triangles.shape(1) != 3)
        throw std::invalid_argument("triangles must have shape (M, 3)");
    Mesh mesh;
    mesh.positions.resize(size_t(positions.shape(0)));
    for (py::ssize_t i = 0; i < positions.shape(0); ++i)
        mesh.positions[size_t(i)] = {positions.at(i, 0), positions.at(i, 1), positions.at(i, 2)};
    mesh.triangles.resize(size_t(triangles.shape(0)));
    for (py::ssize_t i = 0; i < triangles.shape(0); ++i)
        mesh.triangles[size_t(i)] = {int(triangles.at(i, 0)), int(triangles.at(i, 1)), int(triangles.at(i, 2))};
    if (!corner_uvs.is_none()) {
        auto uvs = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(corner_uvs);
        if (!uvs || uvs.ndim() != 3 || uvs.shape(0) != triangles.shape(0) || uvs.shape(1) != 3 || uvs.shape(2) != 2)
            throw std::invalid_argument("corner_uvs must have shape (M, 3, 2)");
        mesh.corner_uvs.resize(size_t(uvs.shape(0)));
        for (py::ssize_t i = 0; i < uvs.shape(0); ++i)
            for (int k = 0; k < 3; ++k) mesh.corner_uvs[size_t(i)][size_t(k)] = {uvs.at(i, k, 0), uvs.at(i, k, 1)};
    }
    validate_mesh(mesh);
    return compute_vertex_normals(std::move(mesh));
}

py::dict json_to_py(const nlohmann::json& j) {
    py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

BakeConfig config_from_kwargs(const py::kwargs& kwargs) {
    BakeConfig cfg;
    for (auto item : kwargs) {
        const std::string key = py::str(item.first);
        const py::handle v = item.second;
        if (key == "hi_resolution") cfg.hi_resolution = v.cast<int>();
        else if (key == "lo_resolution") cfg.lo_resolution = v.cast<int>();
        else if (key == "steps_per_view") cfg.steps_per_view = v.cast<int>();
        else if (key == "learning_rate") cfg.learning_rate = v.cast<double>();
        else if (key == "uv_loss_weight") cfg.uv_loss_weight = v.cast<double>();
        else if (key == "keep_update_threshold") cfg.keep_update_threshold = v.cast<double>();
        else if (key == "literal_angle") cfg.literal_angle = v.cast<bool>();
        else if (key == "checkerboard") cfg.checkerboard = v.cast<bool>();
        else if (key == "checkerboard_band") cfg.checkerboard_band = v.cast<int>();
        else if (key == "init_texture") cfg.init_texture = v.cast<std::string>();
        else if (key == "seed") cfg.seed = v.cast<uint64_t>();
        else if (key == "prompt") cfg.prompt = v.cast<std::string>();
        else if (key == "negative_prompt") cfg.negative_prompt = v.cast<std::string>();
        else if (key == "denoise_steps") cfg.denoise_steps = v.cast<int>();
        else if (key == "noise_strength") cfg.noise_strength = v.cast<double>();
        else if (key == "views") cfg.views = v.cast<int>();
        else if (key == "image_size") cfg.image_size = v.cast<int>();
        else if (key == "camera_radius") cfg.camera_radius = v.cast<double>();
        else if (key == "fov_y") cfg.fov_y = v.cast<double>();
        else if (key == "gap_epsilon") cfg.gap_epsilon = v.cast<double>();
        else if (key == "optimizer") {
            const std::string name = v.cast<std::string>();
            if (name == "adam") cfg.optimizer = BakeConfig::Optimizer::adam;
            else if (name == "sgd") cfg.optimizer = BakeConfig::Optimizer::sgd;
            else throw std::invalid_argument("optimizer must be 'adam' or 'sgd'");
        } else {
            throw std::invalid_argument("unknown bake option: " + key);
        }
    }
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_texbake, m) {
    m.doc() = "Texture baking toolkit: decimation, UV-space texture optimization, multi-view projection";

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("positions",
                               [](const Mesh& mesh) {
                                   py::array_t<double> out({py::ssize_t(mesh.positions.size()), py::ssize_t(3)});
                                   double* p = out.mutable_data();
                                   for (const Vec3& v : mesh.positions) {
                                       *p++ = v.x;
                                       *p++ = v.y;
                                       *p++ = v.z;
                                   }
                                   return out;
                               })
        .def_property_readonly("triangles",
                               [](const Mesh& mesh) {
                                   py::array_t<long> out({py::ssize_t(mesh.triangles.size()), py::ssize_t(3)});
                                   long* p = out.mutable_data();
                                   for (const auto& t : mesh.triangles) {
                                       *p++ = t[0];
                                       *p++ = t[1];
                                       *p++ = t[2];
                                   }
                                   return out;
                               })
        .def_property_readonly("corner_uvs",
                               [](const Mesh& mesh) {
                                   py::array_t<double> out(
                                       {py::ssize_t(mesh.corner_uvs.size()), py::ssize_t(3), py::ssize_t(2)});
                                   double* p = out.mutable_data();
                                   for (const auto& tri : mesh.corner_uvs)
                                       for (const Vec2& uv : tri) {
                                           *p++ = uv.x;
                                           *p++ = uv.y;
                                       }
                                   return out;
                               })
        .def_property_readonly("vertex_normals",
                               [](const Mesh& mesh) {
                                   py::array_t<double> out({py::ssize_t(mesh.vertex_normals.size()), py::ssize_t(3)});
                                   double* p = out.mutable_data();
                                   for (const Vec3& v : mesh.vertex_normals) {
                                       *p++ = v.x;
                                       *p++ = v.y;
                                       *p++ = v.z;
                                   }
                                   return out;
                               })
        .def_property_readonly("has_uvs", [](const Mesh& mesh) { return mesh.has_uvs(); })
        .def("__repr__", [](const Mesh& mesh) {
            return "<Mesh " + std::to_string(mesh.positions.size()) + " vertices, " +
                   std::to_string(mesh.triangles.size()) + " triangles>";
        });

    m.def("make_mesh", &mesh_from_arrays, py::arg("positions"), py::arg("triangles"),
          py::arg("corner_uvs") = py::none(),
          "Build a mesh from numpy arrays; normals are computed, inputs validated");
    m.def("load_obj", &load_mesh, py::arg("path"));
    m.def("save_obj", &save_mesh, py::arg("path"), py::arg("mesh"));
    m.def("normalize_unit", &normalize_unit, py::arg("mesh"),
          "Center the mesh and scale its largest extent to one");
    m.def("fallback_atlas", &generate_fallback_atlas, py::arg("mesh"), py::arg("resolution"),
          "Assign per-triangle UV charts on a uniform grid with gutters");
    m.def(
        "decimate",
        [](const Mesh& mesh, int target_faces, bool preserve_uv_seams) {
            DecimateResult res = decimate(mesh, target_faces, preserve_uv_seams);
            py::dict out;
            out["mesh"] = res.mesh;
            out["accepted_costs"] = py::array_t<double>(py::ssize_t(res.accepted_costs.size()), res.accepted_costs.data());
            out["heap_pops"] = res.heap_pops;
            out["reached_target"] = res.reached_target;
            return out;
        },
        py::arg("mesh"), py::arg("target_faces"), py::arg("preserve_uv_seams") = false,
        "Quadric edge collapse to the target face count");

    py::class_<Camera>(m, "Camera")
        .def_readonly("azimuth", &Camera::azimuth)
        .def_readonly("elevation", &Camera::elevation)
        .def_readonly("radius", &Camera::radius)
        .def_readonly("fov_y", &Camera::fov_y)
        .def_readonly("width", &Camera::width)
        .def_readonly("height", &Camera::height)
        .def_readonly("descriptor", &Camera::descriptor)
        .def("__repr__", [](const Camera& c) { return "<Camera \"" + c.descriptor + "\">"; });

    m.def(
        "view_plan",
        [](int image_size, double radius, double fov_y) { return make_view_plan(image_size, radius, fov_y).cameras; },
        py::arg("image_size") = 1024, py::arg("radius") = 2.0, py::arg("fov_y") = M_PI / 4.0,
        "Eight equatorial views every 45 degrees plus top and bottom");

    py::class_<GBuffer>(m, "GBuffer")
        .def_property_readonly("width", [](const GBuffer& g) { return g.width; })
        .def_property_readonly("height", [](const GBuffer& g) { return g.height; })
        .def_property_readonly("color", [](const GBuffer& g) { return array_hw3(g.color.data, g.width, g.height); })
        .def_property_readonly("depth", [](const GBuffer& g) { return array_hw(g.depth, g.width, g.height); })
        .def_property_readonly("facing_cos",
                               [](const GBuffer& g) { return array_hw(g.facing_cos, g.width, g.height); })
        .def_property_readonly("coverage", [](const GBuffer& g) { return array_mask(g.coverage); })
        .def_property_readonly("uv",
                               [](const GBuffer& g) {
                                   py::array_t<double> out({g.height, g.width, 2});
                                   double* p = out.mutable_data();
                                   for (const Vec2& uv : g.uv) {
                                       *p++ = uv.x;
                                       *p++ = uv.y;
                                   }
                                   return out;
                               })
        .def_property_readonly("tri_id", [](const GBuffer& g) {
            py::array_t<int> out({g.height, g.width});
            std::copy(g.tri_id.begin(), g.tri_id.end(), out.mutable_data());
            return out;
        });

    m.def(
        "rasterize",
        [](const Mesh& mesh, const Camera& camera, const py::object& texture) {
            if (texture.is_none()) return rasterize(mesh, camera);
            Texture tex = texture_from_array(
                py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(texture));
            return rasterize(mesh, camera, &tex);
        },
        py::arg("mesh"), py::arg("camera"), py::arg("texture") = py::none(),
        "Perspective rasterization into a geometry buffer; texture fills the color plane");
    m.def(
        "classify_keep_update",
        [](const GBuffer& gb, double threshold, bool literal) {
            return array_mask(classify_keep_update(gb, threshold, literal));
        },
        py::arg("gbuffer"), py::arg("threshold") = M_PI / 5.0, py::arg("literal") = false,
        "Per-pixel keep/update partition by normal-to-view angle");
    m.def(
        "normalize_depth",
        [](const GBuffer& gb) {
            ImageGray d = normalize_depth(gb);
            return array_hw(d.data, d.width, d.height);
        },
        py::arg("gbuffer"), "Covered depth scaled to [0,1], near = 1");
    m.def(
        "uv_coverage", [](const Mesh& mesh, int resolution) { return array_mask(rasterize_uv_coverage(mesh, resolution)); },
        py::arg("mesh"), py::arg("resolution"), "Texel mask of the mesh's UV triangles");
    m.def(
        "render_view",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& texture, const GBuffer& gb) {
            ImageRGB img = render_view(texture_from_array(texture), gb);
            return array_hw3(img.data, img.width, img.height);
        },
        py::arg("texture"), py::arg("gbuffer"), "Texture sampled through the geometry buffer UVs");

    m.def(
        "sample_bilinear",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& texture, double u, double v) {
            Vec3 s = sample_bilinear(texture_from_array(texture), Vec2{u, v});
            py::array_t<double> out(3);
            out.mutable_data()[0] = s.x;
            out.mutable_data()[1] = s.y;
            out.mutable_data()[2] = s.z;
            return out;
        },
        py::arg("texture"), py::arg("u"), py::arg("v"));
    m.def(
        "downsample_box",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& texture, int factor) {
            Texture lo = downsample_box(texture_from_array(texture), factor);
            return array_hw3(lo.data, lo.width, lo.height);
        },
        py::arg("texture"), py::arg("factor"));

    m.def(
        "mse",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b, const py::object& mask) {
            ImageRGB ia = image_from_array(a), ib = image_from_array(b);
            if (mask.is_none()) return image_mse(ia, ib, nullptr);
            Mask mk = mask_from_array(mask);
            return image_mse(ia, ib, &mk);
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());
    m.def(
        "psnr",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b, const py::object& mask) {
            ImageRGB ia = image_from_array(a), ib = image_from_array(b);
            if (mask.is_none()) return psnr(ia, ib, nullptr);
            Mask mk = mask_from_array(mask);
            return psnr(ia, ib, &mk);
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());

    m.def(
        "save_png",
        [](const std::string& path, const py::array_t<double, py::array::c_style | py::array::forcecast>& img) {
            save_png_rgb8(path, image_from_array(img));
        },
        py::arg("path"), py::arg("image"), "8-bit RGB export of a float image in [0,1]");
    m.def(
        "load_png",
        [](const std::string& path) {
            ImageRGB img = load_png_rgb8(path);
            return array_hw3(img.data, img.width, img.height);
        },
        py::arg("path"));

    m.def(
        "bake_with_oracle",
        [](const Mesh& mesh, const Mesh& gt_mesh,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& gt_texture, const py::kwargs& kwargs) {
            BakeConfig cfg = config_from_kwargs(kwargs);
            OracleSource source(gt_mesh, texture_from_array(gt_texture));
            ViewPlan plan = make_view_plan(cfg.image_size, cfg.camera_radius, cfg.fov_y);
            BakeResult res = bake(mesh, plan, source, cfg);
            py::dict out;
            out["hi"] = array_hw3(res.hi.data, res.hi.width, res.hi.height);
            out["lo"] = array_hw3(res.lo.data, res.lo.width, res.lo.height);
            out["update_magnitude"] = array_hw(res.hi.update_magnitude, res.hi.width, res.hi.height);
            out["region"] = array_mask(res.region);
            out["gap_mask"] = array_mask(res.gap_mask);
            out["report"] = json_to_py(res.report.to_json());
            out["ok"] = res.ok;
            return out;
        },
        py::arg("mesh"), py::arg("gt_mesh"), py::arg("gt_texture"),
        "Bake the mesh's texture against target views rendered from a ground-truth mesh/texture pair");
}
