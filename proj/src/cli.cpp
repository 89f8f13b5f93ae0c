#include "texbake/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "texbake/decimate.hpp"
#include "texbake/imagesource.hpp"
#include "texbake/metrics.hpp"
#include "texbake/mockserver.hpp"
#include "texbake/texopt.hpp"

namespace texbake {

namespace {

Mesh load_normalized(const std::string& path) { return normalize_unit(load_mesh(path)); }

// Meshes without an atlas get the per-triangle fallback layout at the given
// texture resolution.
Mesh ensure_atlas(Mesh mesh, int resolution) {
    if (mesh.has_uvs()) return mesh;
    diag_warn("mesh has no UV atlas; generating per-triangle charts at " + std::to_string(resolution));
    return generate_fallback_atlas(mesh, resolution);
}

double threshold_from_degrees(double deg) {
    if (deg == 36.0) return M_PI / 5.0;  // the default keeps its exact closed form
    return deg * M_PI / 180.0;
}

std::string sidecar_path(const std::string& report_path, const std::string& suffix) {
    std::string stem = report_path;
    size_t dot = stem.rfind('.');
    size_t slash = stem.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) stem = stem.substr(0, dot);
    return stem + suffix;
}

struct SourceSpec {
    std::string kind;  // oracle | files | remote
    std::string a, b;
};

SourceSpec parse_source(const std::string& text) {
    size_t first = text.find(':');
    if (first == std::string::npos) throw std::runtime_error("bad --source; expected oracle:MESH:TEXTURE, files:DIR or remote:URL");
    SourceSpec spec;
    spec.kind = text.substr(0, first);
    std::string rest = text.substr(first + 1);
    if (spec.kind == "oracle") {
        size_t second = rest.find(':');
        if (second == std::string::npos) throw std::runtime_error("bad --source oracle; expected oracle:MESH:TEXTURE");
        spec.a = rest.substr(0, second);
        spec.b = rest.substr(second + 1);
        if (spec.a.empty() || spec.b.empty()) throw std::runtime_error("bad --source oracle; expected oracle:MESH:TEXTURE");
    } else if (spec.kind == "files" || spec.kind == "remote") {
        spec.a = rest;
        if (spec.a.empty()) throw std::runtime_error("bad --source " + spec.kind + "; missing argument");
    } else {
        throw std::runtime_error("unknown --source kind '" + spec.kind + "'");
    }
    return spec;
}

nlohmann::json load_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open report: " + path);
    return nlohmann::json::parse(f);
}

int cmd_decimate(const std::string& in, const std::string& out, int faces, bool preserve_seams, int reatlas) {
    Mesh mesh = load_normalized(in);
    DecimateResult result = decimate(mesh, faces, preserve_seams);
    Mesh final_mesh = result.mesh;
    if (reatlas > 0) final_mesh = generate_fallback_atlas(final_mesh, reatlas);
    save_mesh(out, final_mesh);
    std::printf("decimated %zu -> %zu faces (%zu collapses, %ld heap pops)%s\n", mesh.triangles.size(),
                final_mesh.triangles.size(), result.accepted_costs.size(), result.heap_pops,
                result.reached_target ? "" : " [target not reached]");
    return result.reached_target ? 0 : 1;
}

int cmd_bake(const std::string& mesh_path, const std::string& out, const std::string& init, int views, int hi, int lo,
             int steps, double lambda_uv, double threshold_deg, const std::string& source_text,
             const std::string& prompt, uint64_t seed, bool literal_angle, bool checkerboard,
             const std::string& report_path) {
    BakeConfig config;
    config.hi_resolution = hi;
    config.lo_resolution = lo;
    config.steps_per_view = steps;
    config.uv_loss_weight = lambda_uv;
    config.keep_update_threshold = threshold_from_degrees(threshold_deg);
    config.literal_angle = literal_angle;
    config.checkerboard = checkerboard;
    config.init_texture = init;
    config.seed = seed;
    config.prompt = prompt;
    config.views = views;
    config.validate();

    Mesh mesh = ensure_atlas(load_normalized(mesh_path), config.hi_resolution);
    ViewPlan plan = make_view_plan(config.image_size, config.camera_radius, config.fov_y);

    SourceSpec spec = parse_source(source_text);
    std::unique_ptr<ImageSource> source;
    if (spec.kind == "oracle") {
        Texture gt_tex = load_texture_png(spec.b);
        Mesh gt_mesh = ensure_atlas(load_normalized(spec.a), gt_tex.width);
        source = std::make_unique<OracleSource>(std::move(gt_mesh), std::move(gt_tex));
    } else if (spec.kind == "files") {
        source = std::make_unique<FilesSource>(spec.a);
    } else {
        source = std::make_unique<RemoteSource>(spec.a);
    }

    BakeResult result = bake(mesh, plan, *source, config);

    save_texture_png(out, result.hi);
    std::string gap_path = sidecar_path(report_path, ".gap_mask.png");
    std::string region_path = sidecar_path(report_path, ".region.png");
    std::string lo_path = sidecar_path(report_path, ".lo_texture.png");
    save_png_mask(gap_path, result.gap_mask);
    save_png_mask(region_path, result.region);
    save_texture_png(lo_path, result.lo);

    nlohmann::json report = result.report.to_json();
    report["inputs"] = {{"mesh", mesh_path}, {"init", init}, {"source", source_text}};
    report["outputs"] = {{"texture", out}, {"gap_mask", gap_path}, {"region_mask", region_path}, {"lo_texture", lo_path}};
    std::ofstream rf(report_path);
    if (!rf) throw std::runtime_error("cannot open report for writing: " + report_path);
    rf << report.dump(2) << '\n';

    std::printf("baked %s: %d views, gap fraction %.6f (%ld/%ld), %.1fs%s\n", out.c_str(),
                int(result.report.views.size()), result.report.gaps.fraction, result.report.gaps.gap_texels,
                result.report.gaps.region_texels, result.report.total_seconds, result.ok ? "" : " [provider failed]");
    if (!result.ok) diag_error("bake incomplete: " + result.error);
    return result.ok ? 0 : 1;
}

int cmd_render(const std::string& mesh_path, const std::string& texture_path, const std::string& view,
               const std::string& out) {
    Texture tex = load_texture_png(texture_path);
    Mesh mesh = ensure_atlas(load_normalized(mesh_path), tex.width);
    ViewPlan plan = make_view_plan();
    std::string wanted = view;
    for (char& c : wanted)
        if (c == '_') c = ' ';
    const Camera* cam = nullptr;
    for (const Camera& c : plan.cameras)
        if (c.descriptor == wanted) cam = &c;
    if (!cam) {
        std::string names;
        for (const Camera& c : plan.cameras) names += (names.empty() ? "" : ", ") + c.descriptor;
        throw std::runtime_error("unknown view '" + view + "'; expected one of: " + names);
    }
    GBuffer gb = rasterize(mesh, *cam, &tex);
    save_png_rgb8(out, gb.color);
    std::printf("rendered %s from '%s'\n", out.c_str(), cam->descriptor.c_str());
    return 0;
}

int cmd_eval(const std::string& report_path, const std::string& against) {
    nlohmann::json report = load_report(report_path);
    const auto& jc = report.at("config");
    BakeConfig config;
    config.hi_resolution = jc.at("hi_resolution").get<int>();
    config.lo_resolution = jc.at("lo_resolution").get<int>();
    config.keep_update_threshold = jc.at("keep_update_threshold").get<double>();
    config.literal_angle = jc.at("literal_angle").get<bool>();
    config.checkerboard = jc.at("checkerboard").get<bool>();
    config.checkerboard_band = jc.at("checkerboard_band").get<int>();
    config.views = jc.at("views").get<int>();
    config.image_size = jc.at("image_size").get<int>();
    config.camera_radius = jc.at("camera_radius").get<double>();
    config.fov_y = jc.at("fov_y").get<double>();

    std::string mesh_path = report.at("inputs").at("mesh").get<std::string>();
    std::string texture_path = report.at("outputs").at("texture").get<std::string>();
    Texture tex = load_texture_png(texture_path);
    Mesh mesh = ensure_atlas(load_normalized(mesh_path), config.hi_resolution);
    ViewPlan plan = make_view_plan(config.image_size, config.camera_radius, config.fov_y);

    std::printf("%-12s %12s %12s %12s\n", "view", "update_px", "psnr_update", "psnr_covered");
    double min_update = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.views; ++i) {
        const Camera& cam = plan.cameras[size_t(i)];
        GBuffer gb = rasterize(mesh, cam, &tex);
        Mask update = classify_keep_update(gb, config.keep_update_threshold, config.literal_angle);
        if (config.checkerboard) update = checkerboard_boundary(update, gb.coverage, config.checkerboard_band);
        ImageRGB reference = load_png_rgb8(against + "/" + descriptor_to_filename(cam.descriptor));
        if (reference.width != gb.width || reference.height != gb.height)
            throw std::runtime_error("reference image size mismatch for view '" + cam.descriptor + "'");
        double pu = update.count() > 0 ? psnr(gb.color, reference, &update)
                                       : std::numeric_limits<double>::infinity();
        double pc = gb.coverage.count() > 0 ? psnr(gb.color, reference, &gb.coverage)
                                            : std::numeric_limits<double>::infinity();
        min_update = std::min(min_update, pu);
        std::printf("%-12s %12zu %12.3f %12.3f\n", cam.descriptor.c_str(), update.count(), pu, pc);
    }
    std::printf("min update-region psnr: %.3f\n", min_update);
    return 0;
}

int cmd_gapscan(const std::string& report_path, const std::string& out) {
    nlohmann::json report = load_report(report_path);
    const auto& gaps = report.at("gaps");
    std::string mask_path = report.at("outputs").at("gap_mask").get<std::string>();
    Mask gap_mask = load_png_mask(mask_path);
    save_png_mask(out, gap_mask);
    std::printf("gap_texels %ld region_texels %ld fraction %.6f\n", gaps.at("gap_texels").get<long>(),
                gaps.at("region_texels").get<long>(), gaps.at("fraction").get<double>());
    return 0;
}

int cmd_serve_mock(const std::string& mesh_path, const std::string& texture_path, int port) {
    Texture tex = load_texture_png(texture_path);
    Mesh mesh = ensure_atlas(load_normalized(mesh_path), tex.width);
    MockServer server(std::move(mesh), std::move(tex));
    int bound = server.start(port);
    std::printf("mock generation endpoint listening on port %d\n", bound);
    std::fflush(stdout);
    while (server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"texture baking toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; keys live under [decimate], [bake], ... sections");

    // decimate
    auto* dec = app.add_subcommand("decimate", "simplify a mesh with quadric edge collapses");
    std::string dec_in, dec_out;
    int dec_faces = 0, dec_reatlas = 0;
    bool dec_seams = false;
    dec->add_option("--in", dec_in, "input mesh (OBJ)")->required();
    dec->add_option("--out", dec_out, "output mesh (OBJ)")->required();
    dec->add_option("--faces", dec_faces, "target face count")->required();
    dec->add_flag("--preserve-seams", dec_seams, "never collapse edges on UV seams");
    dec->add_option("--reatlas", dec_reatlas, "rebuild per-triangle charts for this texture resolution");

    // bake
    auto* bak = app.add_subcommand("bake", "optimize a texture against generated view images");
    std::string bak_mesh, bak_out, bak_init, bak_source, bak_prompt, bak_report;
    int bak_views = 10, bak_hi = 1024, bak_lo = 256, bak_steps = 200;
    double bak_lambda = 1.0, bak_threshold_deg = 36.0;
    uint64_t bak_seed = 0;
    bool bak_literal = false, bak_checker = false;
    bak->add_option("--mesh", bak_mesh, "mesh to texture (OBJ)")->required();
    bak->add_option("--out", bak_out, "output texture PNG")->required();
    bak->add_option("--init", bak_init, "initial texture PNG (default: white)");
    bak->add_option("--views", bak_views, "number of cameras from the 10-view plan");
    bak->add_option("--hi", bak_hi, "texture resolution");
    bak->add_option("--lo", bak_lo, "companion low resolution");
    bak->add_option("--steps", bak_steps, "gradient steps per view");
    bak->add_option("--lambda-uv", bak_lambda, "weight of the dual-resolution consistency term");
    bak->add_option("--threshold-deg", bak_threshold_deg, "keep/update facing threshold in degrees");
    bak->add_option("--source", bak_source, "image provider: oracle:MESH:TEXTURE | files:DIR | remote:URL")->required();
    bak->add_option("--prompt", bak_prompt, "generation prompt");
    bak->add_option("--seed", bak_seed, "generation seed");
    bak->add_flag("--literal-angle", bak_literal, "update where the angle exceeds the threshold");
    bak->add_flag("--checkerboard", bak_checker, "dither the keep/update boundary band");
    bak->add_option("--report", bak_report, "output report JSON")->required();

    // render
    auto* ren = app.add_subcommand("render", "render a textured mesh from a named view");
    std::string ren_mesh, ren_tex, ren_view = "front", ren_out;
    ren->add_option("--mesh", ren_mesh, "mesh (OBJ)")->required();
    ren->add_option("--texture", ren_tex, "texture PNG")->required();
    ren->add_option("--view", ren_view, "view descriptor (e.g. front, left_back, top)");
    ren->add_option("--out", ren_out, "output PNG")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "re-render a baked result and report PSNR per view");
    std::string ev_report, ev_against;
    ev->add_option("--report", ev_report, "bake report JSON")->required();
    ev->add_option("--against", ev_against, "directory of reference view images")->required();

    // gapscan
    auto* gap = app.add_subcommand("gapscan", "export the unreached-texel mask of a bake");
    std::string gap_report, gap_out;
    gap->add_option("--report", gap_report, "bake report JSON")->required();
    gap->add_option("--out", gap_out, "output mask PNG")->required();

    // serve-mock
    auto* srv = app.add_subcommand("serve-mock", "serve a ground-truth renderer behind the generation protocol");
    std::string srv_mesh, srv_tex;
    int srv_port = 0;
    srv->add_option("--mesh", srv_mesh, "ground-truth mesh (OBJ)")->required();
    srv->add_option("--texture", srv_tex, "ground-truth texture PNG")->required();
    srv->add_option("--port", srv_port, "port to listen on (0 picks a free one)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (dec->parsed()) return cmd_decimate(dec_in, dec_out, dec_faces, dec_seams, dec_reatlas);
        if (bak->parsed())
            return cmd_bake(bak_mesh, bak_out, bak_init, bak_views, bak_hi, bak_lo, bak_steps, bak_lambda,
                            bak_threshold_deg, bak_source, bak_prompt, bak_seed, bak_literal, bak_checker, bak_report);
        if (ren->parsed()) return cmd_render(ren_mesh, ren_tex, ren_view, ren_out);
        if (ev->parsed()) return cmd_eval(ev_report, ev_against);
        if (gap->parsed()) return cmd_gapscan(gap_report, gap_out);
        if (srv->parsed()) return cmd_serve_mock(srv_mesh, srv_tex, srv_port);
    } catch (const std::exception& e) {
        diag_error(e.what());
        return 1;
    }
    return 0;
}

}  // namespace texbake
