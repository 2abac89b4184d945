#include "manip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace manip {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDepth: return "InvalidDepth";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyObject: return "EmptyObject";
        case ErrorCode::BehindCamera: return "BehindCamera";
        case ErrorCode::MaskOverlap: return "MaskOverlap";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::DegenerateBox: return "DegenerateBox";
        case ErrorCode::DegenerateScene: return "DegenerateScene";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::InsufficientFrames: return "InsufficientFrames";
        case ErrorCode::InvalidRotation: return "InvalidRotation";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

void CameraIntrinsics::validate() const {
    if (width <= 0 || height <= 0)
        throw Error(ErrorCode::FormatError, "non-positive image dimensions");
    if (!(fx > 0.0) || !(fy > 0.0))
        throw Error(ErrorCode::FormatError, "focal lengths must be positive");
    if (cx < 0.0 || cx > width || cy < 0.0 || cy > height)
        throw Error(ErrorCode::FormatError, "principal point outside image");
}

CameraIntrinsics CameraIntrinsics::default_for(int width, int height) {
    CameraIntrinsics intr;
    intr.width = width;
    intr.height = height;
    intr.fx = intr.fy = static_cast<double>(std::max(width, height));
    intr.cx = width / 2.0;
    intr.cy = height / 2.0;
    return intr;
}

Vec3 CameraPose::to_camera(const Vec3& world) const {
    const auto& r = rotation;
    return {r[0] * world.x + r[1] * world.y + r[2] * world.z + translation.x,
            r[3] * world.x + r[4] * world.y + r[5] * world.z + translation.y,
            r[6] * world.x + r[7] * world.y + r[8] * world.z + translation.z};
}

Vec3 CameraPose::to_world(const Vec3& cam) const {
    // R^T (p - t)
    const auto& r = rotation;
    const Vec3 d{cam.x - translation.x, cam.y - translation.y, cam.z - translation.z};
    return {r[0] * d.x + r[3] * d.y + r[6] * d.z,
            r[1] * d.x + r[4] * d.y + r[7] * d.z,
            r[2] * d.x + r[5] * d.y + r[8] * d.z};
}

void CameraPose::validate() const {
    const auto& r = rotation;
    constexpr double kTol = 1e-6;
    // R^T R - I, entrywise
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += r[k * 3 + i] * r[k * 3 + j];
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot - expect) > kTol)
                throw Error(ErrorCode::InvalidRotation, "R^T R deviates from identity");
        }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) -
                       r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::abs(det - 1.0) > kTol)
        throw Error(ErrorCode::InvalidRotation, "det(R) != 1");
}

bool DepthMap::valid(int u, int v) const {
    const float d = at(u, v);
    return std::isfinite(d) && d > 0.0f;
}

size_t BinaryMask::count() const {
    return static_cast<size_t>(std::count_if(bits.begin(), bits.end(),
                                             [](std::uint8_t b) { return b != 0; }));
}

Vec3 unproject_pixel(const CameraIntrinsics& intr, const CameraPose& pose,
                     double u, double v, double depth) {
    if (!std::isfinite(depth) || depth <= 0.0)
        throw Error(ErrorCode::InvalidDepth, "depth must be finite and positive");
    if (u < 0.0 || u >= intr.width || v < 0.0 || v >= intr.height)
        throw Error(ErrorCode::OutOfBounds, "pixel outside image bounds");
    const Vec3 cam{(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth};
    return pose.to_world(cam);
}

PointCloud unproject_masked(const Image& image, const BinaryMask& mask,
                            const DepthMap& depth, const CameraIntrinsics& intr,
                            const CameraPose& pose) {
    if (image.width != mask.width || image.height != mask.height ||
        image.width != depth.width || image.height != depth.height)
        throw Error(ErrorCode::ShapeMismatch, "image/mask/depth dimensions differ");
    PointCloud cloud;
    for (int v = 0; v < mask.height; ++v) {
        for (int u = 0; u < mask.width; ++u) {
            if (!mask.at(u, v) || !depth.valid(u, v)) continue;
            cloud.points.push_back(unproject_pixel(intr, pose, u, v, depth.at(u, v)));
            cloud.colors.push_back(image.at(u, v));
            cloud.source_pixels.push_back({u, v});
        }
    }
    if (cloud.empty())
        throw Error(ErrorCode::EmptyObject, "no valid masked pixels");
    return cloud;
}

Projection project_point(const CameraIntrinsics& intr, const CameraPose& pose,
                         const Vec3& p) {
    const Vec3 cam = pose.to_camera(p);
    if (cam.z <= 0.0)
        throw Error(ErrorCode::BehindCamera, "point has non-positive camera depth");
    return {intr.fx * cam.x / cam.z + intr.cx, intr.fy * cam.y / cam.z + intr.cy, cam.z};
}

PointCloud translate_cloud(const PointCloud& cloud, const Vec3& delta) {
    PointCloud out = cloud;
    for (auto& p : out.points) p = p + delta;
    return out;
}

namespace {

double median_of(std::vector<double>& v) {
    const size_t n = v.size();
    const size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double hi = v[mid];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

}  // namespace

Vec3 representative_coordinate(const PointCloud& cloud) {
    if (cloud.empty())
        throw Error(ErrorCode::EmptyObject, "cannot take median of empty cloud");
    std::vector<double> xs, ys, zs;
    xs.reserve(cloud.size());
    ys.reserve(cloud.size());
    zs.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
        zs.push_back(p.z);
    }
    return {median_of(xs), median_of(ys), median_of(zs)};
}

double displacement(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

double scene_diagonal(const PointCloud& cloud) {
    if (cloud.empty())
        throw Error(ErrorCode::EmptyObject, "empty cloud has no bounding box");
    Vec3 lo = cloud.points.front();
    Vec3 hi = lo;
    for (const auto& p : cloud.points) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
    return (hi - lo).norm();
}

}  // namespace manip
