#include <doctest.h>

#include <random>

#include "support/shapes.hpp"
#include "texbake/texture.hpp"

using namespace texbake;
namespace ts = texbake::testsupport;

TEST_CASE("bilinear tap at a texel center reads exactly that texel") {
    // Power-of-two dimensions keep the center coordinates (x + 0.5) / W exact
    // in floating point, so the footprint collapses to a single unit-weight tap.
    Texture tex = ts::random_texture(8, 4, 11);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) {
            Vec2 uv{(x + 0.5) / 8.0, 1.0 - (y + 0.5) / 4.0};
            BilinearFootprint fp = bilinear_footprint(8, 4, uv);
            REQUIRE(fp.count == 1);
            CHECK(fp.x[0] == x);
            CHECK(fp.y[0] == y);
            CHECK(fp.w[0] == 1.0);
            Vec3 v = sample_bilinear(tex, uv);
            CHECK(v.x == tex.at(x, y, 0));
            CHECK(v.y == tex.at(x, y, 1));
            CHECK(v.z == tex.at(x, y, 2));
        }
}

TEST_CASE("bilinear footprints: weights sum to one, duplicates merged at borders") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-0.2, 1.2);
    for (int n = 0; n < 500; ++n) {
        Vec2 uv{dist(rng), dist(rng)};
        BilinearFootprint fp = bilinear_footprint(16, 9, uv);
        REQUIRE(fp.count >= 1);
        REQUIRE(fp.count <= 4);
        double sum = 0.0;
        for (int k = 0; k < fp.count; ++k) {
            CHECK(fp.w[k] > 0.0);
            CHECK(fp.x[k] >= 0);
            CHECK(fp.x[k] < 16);
            CHECK(fp.y[k] >= 0);
            CHECK(fp.y[k] < 9);
            sum += fp.w[k];
            for (int j = 0; j < k; ++j) CHECK((fp.x[k] != fp.x[j] || fp.y[k] != fp.y[j]));
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Exact corners and beyond clamp to single texels.
    for (Vec2 uv : {Vec2{0.0, 0.0}, Vec2{-3.0, -1.0}}) {
        BilinearFootprint fp = bilinear_footprint(16, 9, uv);
        REQUIRE(fp.count == 1);
        CHECK(fp.x[0] == 0);
        CHECK(fp.y[0] == 8);  // v=0 is the bottom row
        CHECK(fp.w[0] == doctest::Approx(1.0));
    }
    BilinearFootprint tr = bilinear_footprint(16, 9, Vec2{1.0, 1.0});
    REQUIRE(tr.count == 1);
    CHECK(tr.x[0] == 15);
    CHECK(tr.y[0] == 0);
    // Midpoint between the centers of texels 0 and 1 (u = 1/16, exact in
    // binary) on the exact middle row (v = 0.5 lands on integer py for H = 9):
    // two texels at weight 1/2.
    BilinearFootprint mid = bilinear_footprint(16, 9, Vec2{1.0 / 16.0, 0.5});
    REQUIRE(mid.count == 2);
    CHECK(mid.x[0] == 0);
    CHECK(mid.x[1] == 1);
    CHECK(mid.y[0] == 4);
    CHECK(mid.w[0] == 0.5);
    CHECK(mid.w[1] == 0.5);
}

TEST_CASE("sample_bilinear interpolates linearly between neighbors") {
    Texture tex(4, 1, 0.0, 0.0, 0.0);
    for (int x = 0; x < 4; ++x) tex.at(x, 0, 0) = double(x);
    // u sweeping between centers of texels 1 and 2 gives an affine ramp.
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double u = (1.5 + f) / 4.0;
        Vec3 v = sample_bilinear(tex, Vec2{u, 0.5});
        CHECK(v.x == doctest::Approx(1.0 + f).epsilon(1e-12));
    }
}

TEST_CASE("box downsample equals the block average") {
    Texture hi = ts::random_texture(12, 8, 21);
    Texture lo = downsample_box(hi, 4);
    REQUIRE(lo.width == 3);
    REQUIRE(lo.height == 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x)
            for (int c = 0; c < 3; ++c) {
                double sum = 0.0;
                for (int dy = 0; dy < 4; ++dy)
                    for (int dx = 0; dx < 4; ++dx) sum += hi.at(x * 4 + dx, y * 4 + dy, c);
                CHECK(lo.at(x, y, c) == doctest::Approx(sum / 16.0).epsilon(1e-12));
            }
    Texture same = downsample_box(hi, 1);
    CHECK(same.data == hi.data);
}

TEST_CASE("box downsample adjoint satisfies the inner-product identity") {
    // <D(hi), g> == <hi, D^T(g)> for random hi and lo-side g.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Texture hi = ts::random_texture(16, 12, 77);
    int factor = 4, lw = 4, lh = 3;
    std::vector<double> g(size_t(lw) * lh * 3);
    for (double& v : g) v = dist(rng);
    Texture lo = downsample_box(hi, factor);
    double lhs = 0.0;
    for (size_t i = 0; i < g.size(); ++i) lhs += lo.data[i] * g[i];
    std::vector<double> up = downsample_box_adjoint(g, lw, lh, factor);
    REQUIRE(up.size() == hi.data.size());
    double rhs = 0.0;
    for (size_t i = 0; i < up.size(); ++i) rhs += hi.data[i] * up[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("resample at matching size is bitwise identity") {
    Texture tex = ts::random_texture(9, 6, 13);
    Texture same = resample_texture(tex, 9, 6);
    CHECK(same.data == tex.data);
    Texture up = resample_texture(tex, 18, 12);
    CHECK(up.width == 18);
    CHECK(up.height == 12);
    for (double v : up.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Constant textures stay constant under any resampling.
    Texture flat(5, 5, 0.3, 0.6, 0.9);
    Texture flat2 = resample_texture(flat, 13, 7);
    for (size_t i = 0; i < flat2.texel_count(); ++i) {
        CHECK(flat2.data[i * 3 + 0] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(flat2.data[i * 3 + 1] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(flat2.data[i * 3 + 2] == doctest::Approx(0.9).epsilon(1e-12));
    }
}

TEST_CASE("texture png round trip is exact at 8-bit resolution") {
    Texture tex = ts::random_texture(10, 10, 4);
    std::string dir = ts::make_temp_dir("tex");
    save_texture_png(dir + "/t.png", tex);
    Texture back = load_texture_png(dir + "/t.png");
    REQUIRE(back.width == 10);
    REQUIRE(back.height == 10);
    for (size_t i = 0; i < tex.data.size(); ++i) {
        CHECK(quantize8(back.data[i]) == quantize8(tex.data[i]));
        CHECK(std::abs(back.data[i] - tex.data[i]) <= 0.5 / 255.0 + 1e-12);
    }
    for (double m : back.update_magnitude) CHECK(m == 0.0);
}

TEST_CASE("image and texture views share layout") {
    Texture tex = ts::random_texture(6, 4, 9);
    ImageRGB img = texture_to_image(tex);
    CHECK(img.data == tex.data);
    Texture back = texture_from_image(img);
    CHECK(back.data == tex.data);
    CHECK(back.update_magnitude == std::vector<double>(tex.texel_count(), 0.0));
}
