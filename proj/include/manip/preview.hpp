#pragma once

#include <string>
#include <vector>

#include "manip/geometry.hpp"

namespace manip {

struct ManipulationRequest {
    std::string object_id;
    BinaryMask mask;
    Vec3 delta;
};

enum class ErasePolicy {
    Leave,
    FillBackgroundEstimate,
    FillFlatColor,
};

struct PreviewConfig {
    int splat_radius = 1;  // 3x3 footprint by default; capped at 8
    double z_test_epsilon = -1.0;  // <0 means auto: 1e-4 of the scene diagonal
    ErasePolicy erase_policy = ErasePolicy::FillFlatColor;
    Rgb8 fill_color{128, 128, 128};
};

struct DepthBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> depths;  // nearest camera depth per pixel

    DepthBuffer() = default;
    DepthBuffer(int w, int h, double fill)
        : width(w), height(h), depths(static_cast<size_t>(w) * h, fill) {}

    double at(int u, int v) const { return depths[static_cast<size_t>(v) * width + u]; }
    double& at(int u, int v) { return depths[static_cast<size_t>(v) * width + u]; }
};

/// Forward-splats a colored cloud into the canvas with z-testing. A point
/// writes every footprint pixel where its camera depth beats the buffer by
/// more than z_test_epsilon. Points behind the camera or whose projection
/// center falls outside the canvas are skipped. Sequential point order gives
/// the nearer-depth-then-lower-index tie-break.
void splat(const PointCloud& cloud, const CameraIntrinsics& intr,
           const CameraPose& pose, Image& canvas, DepthBuffer& zbuf,
           const PreviewConfig& cfg);

/// Depth-aware preview of one or more object translations: unproject each
/// masked region, shift it, erase the source regions, and re-splat against
/// the scene depth so moved objects occlude and are occluded correctly.
Image render_preview(const Image& src, const DepthMap& scene_depth,
                     const CameraIntrinsics& intr, const CameraPose& pose,
                     const std::vector<ManipulationRequest>& requests,
                     const PreviewConfig& cfg);

/// Same as render_preview but also returns the transformed clouds (one per
/// request, in object_id-sorted order) for optional PLY export.
Image render_preview(const Image& src, const DepthMap& scene_depth,
                     const CameraIntrinsics& intr, const CameraPose& pose,
                     const std::vector<ManipulationRequest>& requests,
                     const PreviewConfig& cfg,
                     std::vector<PointCloud>* transformed_out);

}  // namespace manip
