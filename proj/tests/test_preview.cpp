#include <doctest.h>

#include <limits>

#include "manip/preview.hpp"
#include "test_util.hpp"

using namespace manip;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PreviewConfig flat_config(int radius = 0) {
    PreviewConfig cfg;
    cfg.splat_radius = radius;
    cfg.z_test_epsilon = 1e-6;
    cfg.erase_policy = ErasePolicy::FillFlatColor;
    cfg.fill_color = {128, 128, 128};
    return cfg;
}

}  // namespace

TEST_CASE("splat of empty cloud leaves canvas and zbuf unchanged") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    Image canvas(8, 8, {1, 2, 3});
    DepthBuffer zbuf(8, 8, kInf);
    splat(PointCloud{}, intr, CameraPose::identity(), canvas, zbuf, flat_config());
    for (const auto& p : canvas.pixels) CHECK(p == Rgb8{1, 2, 3});
    for (double d : zbuf.depths) CHECK(d == kInf);
}

TEST_CASE("splat writes exactly the footprint against an open zbuf") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    PointCloud cloud;
    cloud.points = {unproject_pixel(intr, CameraPose::identity(), 4, 4, 2.0)};
    cloud.colors = {{200, 0, 0}};

    Image canvas(8, 8);
    DepthBuffer zbuf(8, 8, kInf);
    splat(cloud, intr, CameraPose::identity(), canvas, zbuf, flat_config(1));

    for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
            const bool inside = std::abs(u - 4) <= 1 && std::abs(v - 4) <= 1;
            CHECK(canvas.at(u, v) == (inside ? Rgb8{200, 0, 0} : Rgb8{}));
            CHECK(zbuf.at(u, v) == (inside ? 2.0 : kInf));
        }
    }
}

TEST_CASE("splat skips points behind the existing depth") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    PointCloud cloud;
    cloud.points = {unproject_pixel(intr, CameraPose::identity(), 4, 4, 5.0)};
    cloud.colors = {{200, 0, 0}};

    Image canvas(8, 8);
    DepthBuffer zbuf(8, 8, 1.0);
    splat(cloud, intr, CameraPose::identity(), canvas, zbuf, flat_config(0));
    CHECK(canvas.at(4, 4) == Rgb8{});
    CHECK(zbuf.at(4, 4) == 1.0);
}

TEST_CASE("null edit reproduces masked source pixels") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> byte(0, 255);
    Image src(8, 8);
    for (auto& p : src.pixels)
        p = {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
             static_cast<std::uint8_t>(byte(rng))};
    DepthMap depth(8, 8, 2.0f);

    ManipulationRequest req;
    req.object_id = "obj";
    req.mask = BinaryMask(8, 8);
    for (int v = 2; v < 6; ++v)
        for (int u = 2; u < 6; ++u) req.mask.set(u, v, true);
    req.delta = {0, 0, 0};

    PreviewConfig cfg = flat_config(0);
    cfg.erase_policy = ErasePolicy::Leave;
    const Image out = render_preview(src, depth, intr, CameraPose::identity(), {req}, cfg);
    CHECK(out == src);
}

TEST_CASE("moved object hides behind a nearer wall; source region erased") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    Image src(8, 8, {50, 50, 50});
    src.at(6, 6) = {255, 0, 0};

    DepthMap depth(8, 8, 10.0f);
    depth.at(6, 6) = 1.0f;  // the object
    depth.at(5, 5) = 2.0f;  // the wall at the object's landing pixel

    ManipulationRequest req;
    req.object_id = "obj";
    req.mask = BinaryMask(8, 8);
    req.mask.set(6, 6, true);
    req.delta = {0, 0, 2.0};  // depth 1 -> 3, lands at pixel (5,5)

    const Image out =
        render_preview(src, depth, intr, CameraPose::identity(), {req}, flat_config(0));
    CHECK(out.at(6, 6) == Rgb8{128, 128, 128});  // erased source
    CHECK(out.at(5, 5) == Rgb8{50, 50, 50});     // wall wins the z-test
}

TEST_CASE("nearer object wins contested pixels regardless of request order") {
    const auto intr = CameraIntrinsics::default_for(8, 8);
    Image src(8, 8, {50, 50, 50});
    src.at(1, 1) = {255, 0, 0};  // object A, depth 1
    src.at(6, 6) = {0, 0, 255};  // object B, depth 2

    DepthMap depth(8, 8, 10.0f);
    depth.at(1, 1) = 1.0f;
    depth.at(6, 6) = 2.0f;

    // Both objects translate onto the optical axis, pixel (4,4).
    ManipulationRequest a;
    a.object_id = "a";
    a.mask = BinaryMask(8, 8);
    a.mask.set(1, 1, true);
    a.delta = {0.375, 0.375, 0};

    ManipulationRequest b;
    b.object_id = "b";
    b.mask = BinaryMask(8, 8);
    b.mask.set(6, 6, true);
    b.delta = {-0.5, -0.5, 0};

    const Image ab =
        render_preview(src, depth, intr, CameraPose::identity(), {a, b}, flat_config(0));
    const Image ba =
        render_preview(src, depth, intr, CameraPose::identity(), {b, a}, flat_config(0));
    CHECK(ab.at(4, 4) == Rgb8{255, 0, 0});
    CHECK(ab == ba);
}

TEST_CASE("render_preview input validation") {
    const auto intr = CameraIntrinsics::default_for(4, 4);
    const Image src(4, 4);
    const DepthMap depth(4, 4, 1.0f);

    CHECK_THROWS_AS(
        render_preview(src, depth, intr, CameraPose::identity(), {}, flat_config()), Error);

    ManipulationRequest empty;
    empty.object_id = "e";
    empty.mask = BinaryMask(4, 4);
    CHECK_THROWS_AS(
        render_preview(src, depth, intr, CameraPose::identity(), {empty}, flat_config()),
        Error);

    ManipulationRequest a, b;
    a.object_id = "a";
    b.object_id = "b";
    a.mask = BinaryMask(4, 4);
    b.mask = BinaryMask(4, 4);
    a.mask.set(1, 1, true);
    b.mask.set(1, 1, true);
    CHECK_THROWS_AS(
        render_preview(src, depth, intr, CameraPose::identity(), {a, b}, flat_config()),
        Error);

    ManipulationRequest behind;
    behind.object_id = "z";
    behind.mask = BinaryMask(4, 4);
    behind.mask.set(2, 2, true);
    behind.delta = {0, 0, -5.0};
    CHECK_THROWS_AS(
        render_preview(src, depth, intr, CameraPose::identity(), {behind}, flat_config()),
        Error);

    ManipulationRequest wrong;
    wrong.object_id = "w";
    wrong.mask = BinaryMask(5, 4);
    CHECK_THROWS_AS(
        render_preview(src, depth, intr, CameraPose::identity(), {wrong}, flat_config()),
        Error);
}

TEST_CASE("moving away never grows the projected footprint") {
    const auto intr = CameraIntrinsics::default_for(32, 32);
    Image src(32, 32, {40, 40, 40});
    DepthMap depth(32, 32, 20.0f);
    ManipulationRequest req;
    req.object_id = "obj";
    req.mask = BinaryMask(32, 32);
    for (int v = 12; v < 20; ++v)
        for (int u = 12; u < 20; ++u) {
            req.mask.set(u, v, true);
            depth.at(u, v) = 2.0f;
            src.at(u, v) = {255, 255, 255};
        }

    auto footprint = [&](double dz) {
        ManipulationRequest r = req;
        r.delta = {0, 0, dz};
        const Image out =
            render_preview(src, depth, intr, CameraPose::identity(), {r}, flat_config(0));
        size_t n = 0;
        for (const auto& p : out.pixels)
            if (p == Rgb8{255, 255, 255}) ++n;
        return n;
    };

    const size_t base = footprint(0.0);
    CHECK(footprint(1.0) <= base);
    CHECK(footprint(3.0) <= footprint(1.0));
    CHECK(footprint(-0.5) >= base);
}
