#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "manip/errors.hpp"

namespace manip {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    bool operator==(const Vec3&) const = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
};

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb8&) const = default;
};

struct Pixel {
    int u = 0;
    int v = 0;
    bool operator==(const Pixel&) const = default;
};

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const;

    /// Default pinhole used when ingested data carries no intrinsics:
    /// fx = fy = max(width, height), principal point at the image center.
    static CameraIntrinsics default_for(int width, int height);
};

/// World-to-camera pose: p_cam = R * p_world + t. +Z looks into the scene.
struct CameraPose {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    Vec3 translation{};

    Vec3 to_camera(const Vec3& world) const;
    Vec3 to_world(const Vec3& cam) const;

    /// Rejects R unless R^T R = I and det(R) = 1 within 1e-6.
    void validate() const;

    static CameraPose identity() { return {}; }
};

struct CameraModel {
    CameraIntrinsics intrinsics;
    CameraPose pose;
};

struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // row-major, width*height

    DepthMap() = default;
    DepthMap(int w, int h, float fill = 0.0f)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    float at(int u, int v) const { return values[static_cast<size_t>(v) * width + u]; }
    float& at(int u, int v) { return values[static_cast<size_t>(v) * width + u]; }

    /// A pixel is valid iff its value is finite and strictly positive.
    bool valid(int u, int v) const;
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row-major, nonzero = member

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

    bool at(int u, int v) const { return bits[static_cast<size_t>(v) * width + u] != 0; }
    void set(int u, int v, bool on) { bits[static_cast<size_t>(v) * width + u] = on ? 1 : 0; }

    size_t count() const;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb8> pixels;  // row-major

    Image() = default;
    Image(int w, int h, Rgb8 fill = {})
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

    Rgb8 at(int u, int v) const { return pixels[static_cast<size_t>(v) * width + u]; }
    Rgb8& at(int u, int v) { return pixels[static_cast<size_t>(v) * width + u]; }

    bool operator==(const Image&) const = default;
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Rgb8> colors;        // empty or parallel to points
    std::vector<Pixel> source_pixels;  // empty or parallel to points

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return !colors.empty(); }
};

// --- operations ---

/// Lifts pixel (u, v) at the given camera depth into a world-space point.
Vec3 unproject_pixel(const CameraIntrinsics& intr, const CameraPose& pose,
                     double u, double v, double depth);

/// One colored point per mask-true pixel with valid depth, row-major pixel order.
PointCloud unproject_masked(const Image& image, const BinaryMask& mask,
                            const DepthMap& depth, const CameraIntrinsics& intr,
                            const CameraPose& pose);

struct Projection {
    double u = 0.0;
    double v = 0.0;
    double cam_depth = 0.0;
};

/// Pixel may land outside image bounds; the caller clips.
Projection project_point(const CameraIntrinsics& intr, const CameraPose& pose,
                         const Vec3& p);

PointCloud translate_cloud(const PointCloud& cloud, const Vec3& delta);

/// Coordinate-wise median; even cardinality takes the midpoint of the two
/// central order statistics.
Vec3 representative_coordinate(const PointCloud& cloud);

double displacement(const Vec3& a, const Vec3& b);

/// Length of the axis-aligned bounding-box diagonal.
double scene_diagonal(const PointCloud& cloud);

}  // namespace manip
