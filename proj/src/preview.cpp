#include "manip/preview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace manip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int clamp_radius(int r) { return std::clamp(r, 0, 8); }

/// Mean color of unmasked pixels within a 2-pixel ring around the mask;
/// falls back to the global unmasked mean, then mid-gray.
Rgb8 estimate_background(const Image& src, const BinaryMask& mask) {
    std::uint64_t sum[3] = {0, 0, 0};
    std::uint64_t n = 0;
    const int ring = 2;
    for (int v = 0; v < src.height; ++v) {
        for (int u = 0; u < src.width; ++u) {
            if (mask.at(u, v)) continue;
            bool near = false;
            for (int dv = -ring; dv <= ring && !near; ++dv) {
                for (int du = -ring; du <= ring && !near; ++du) {
                    const int uu = u + du, vv = v + dv;
                    if (uu >= 0 && uu < src.width && vv >= 0 && vv < src.height &&
                        mask.at(uu, vv))
                        near = true;
                }
            }
            if (!near) continue;
            const Rgb8 c = src.at(u, v);
            sum[0] += c.r;
            sum[1] += c.g;
            sum[2] += c.b;
            ++n;
        }
    }
    if (n == 0) {
        for (int v = 0; v < src.height; ++v) {
            for (int u = 0; u < src.width; ++u) {
                if (mask.at(u, v)) continue;
                const Rgb8 c = src.at(u, v);
                sum[0] += c.r;
                sum[1] += c.g;
                sum[2] += c.b;
                ++n;
            }
        }
    }
    if (n == 0) return {128, 128, 128};
    return {static_cast<std::uint8_t>(sum[0] / n),
            static_cast<std::uint8_t>(sum[1] / n),
            static_cast<std::uint8_t>(sum[2] / n)};
}

double auto_epsilon(const DepthMap& depth, const CameraIntrinsics& intr,
                    const CameraPose& pose) {
    PointCloud scene;
    for (int v = 0; v < depth.height; ++v)
        for (int u = 0; u < depth.width; ++u)
            if (depth.valid(u, v))
                scene.points.push_back(unproject_pixel(intr, pose, u, v, depth.at(u, v)));
    if (scene.empty()) return 0.0;
    return 1e-4 * scene_diagonal(scene);
}

}  // namespace

void splat(const PointCloud& cloud, const CameraIntrinsics& intr,
           const CameraPose& pose, Image& canvas, DepthBuffer& zbuf,
           const PreviewConfig& cfg) {
    const int r = clamp_radius(cfg.splat_radius);
    const double eps = std::max(cfg.z_test_epsilon, 0.0);
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3 cam = pose.to_camera(cloud.points[i]);
        if (cam.z <= 0.0) continue;
        const double u = intr.fx * cam.x / cam.z + intr.cx;
        const double v = intr.fy * cam.y / cam.z + intr.cy;
        const int pu = static_cast<int>(std::lround(u));
        const int pv = static_cast<int>(std::lround(v));
        if (pu < 0 || pu >= canvas.width || pv < 0 || pv >= canvas.height) continue;
        const Rgb8 color = cloud.has_colors() ? cloud.colors[i] : Rgb8{255, 255, 255};
        for (int dv = -r; dv <= r; ++dv) {
            for (int du = -r; du <= r; ++du) {
                const int uu = pu + du, vv = pv + dv;
                if (uu < 0 || uu >= canvas.width || vv < 0 || vv >= canvas.height)
                    continue;
                if (cam.z < zbuf.at(uu, vv) - eps) {
                    zbuf.at(uu, vv) = cam.z;
                    canvas.at(uu, vv) = color;
                }
            }
        }
    }
}

Image render_preview(const Image& src, const DepthMap& scene_depth,
                     const CameraIntrinsics& intr, const CameraPose& pose,
                     const std::vector<ManipulationRequest>& requests,
                     const PreviewConfig& cfg) {
    return render_preview(src, scene_depth, intr, pose, requests, cfg, nullptr);
}

Image render_preview(const Image& src, const DepthMap& scene_depth,
                     const CameraIntrinsics& intr, const CameraPose& pose,
                     const std::vector<ManipulationRequest>& requests,
                     const PreviewConfig& cfg,
                     std::vector<PointCloud>* transformed_out) {
    if (requests.empty())
        throw Error(ErrorCode::EmptyObject, "no manipulation requests");
    for (const auto& req : requests)
        if (req.mask.width != src.width || req.mask.height != src.height)
            throw Error(ErrorCode::ShapeMismatch, "mask dimensions differ from source");
    if (scene_depth.width != src.width || scene_depth.height != src.height)
        throw Error(ErrorCode::ShapeMismatch, "depth dimensions differ from source");

    // Disjointness + union mask for erasure.
    BinaryMask erased(src.width, src.height);
    for (const auto& req : requests) {
        for (size_t i = 0; i < erased.bits.size(); ++i) {
            if (req.mask.bits[i]) {
                if (erased.bits[i])
                    throw Error(ErrorCode::MaskOverlap, "request masks overlap");
                erased.bits[i] = 1;
            }
        }
    }

    // Object-id order makes the result independent of request ordering.
    std::vector<size_t> order(requests.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return requests[a].object_id < requests[b].object_id;
    });

    std::vector<PointCloud> moved(requests.size());
    for (size_t k : order) {
        const auto& req = requests[k];
        PointCloud cloud;
        try {
            cloud = unproject_masked(src, req.mask, scene_depth, intr, pose);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EmptyObject)
                throw Error(ErrorCode::EmptyObject, "object '" + req.object_id + "'");
            throw;
        }
        cloud = translate_cloud(cloud, req.delta);
        bool any_visible = false;
        for (const auto& p : cloud.points)
            if (pose.to_camera(p).z > 0.0) { any_visible = true; break; }
        if (!any_visible)
            throw Error(ErrorCode::BehindCamera, "object '" + req.object_id + "'");
        moved[k] = std::move(cloud);
    }

    Image canvas = src;
    if (cfg.erase_policy != ErasePolicy::Leave) {
        Rgb8 fill = cfg.fill_color;
        if (cfg.erase_policy == ErasePolicy::FillBackgroundEstimate)
            fill = estimate_background(src, erased);
        for (size_t i = 0; i < erased.bits.size(); ++i)
            if (erased.bits[i]) canvas.pixels[i] = fill;
    }

    // Scene z-buffer; erased regions open up so objects may reoccupy them.
    DepthBuffer zbuf(src.width, src.height, kInf);
    for (int v = 0; v < src.height; ++v)
        for (int u = 0; u < src.width; ++u)
            if (scene_depth.valid(u, v) && !erased.at(u, v))
                zbuf.at(u, v) = scene_depth.at(u, v);

    PreviewConfig resolved = cfg;
    if (resolved.z_test_epsilon < 0.0)
        resolved.z_test_epsilon = auto_epsilon(scene_depth, intr, pose);

    for (size_t k : order) splat(moved[k], intr, pose, canvas, zbuf, resolved);

    if (transformed_out) {
        transformed_out->clear();
        for (size_t k : order) transformed_out->push_back(std::move(moved[k]));
    }
    return canvas;
}

}  // namespace manip
