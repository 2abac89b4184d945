#pragma once

#include <vector>

#include "manip/geometry.hpp"

namespace manip {

struct CameraTokenSet {
    int count = 0;  // frames
    int dim = 0;
    std::vector<float> vectors;  // count x dim, row-major, temporal order

    const float* row(int k) const { return vectors.data() + static_cast<size_t>(k) * dim; }
};

struct DBSCANParams {
    double eps = 0.5;
    int min_samples = 4;
};

struct ClusterAssignment {
    std::vector<int> labels;  // -1 = noise; cluster ids contiguous from 0
    int cluster_count = 0;
};

struct FrameRecord {
    int frame_index = 0;
    DepthMap depth;
    BinaryMask mask;
    CameraModel camera;
};

struct FrameRange {
    int begin = 0;  // inclusive frame indices
    int end = 0;    // inclusive
    int cluster = 0;
    bool operator==(const FrameRange&) const = default;
};

struct PairSelection {
    int i = 0;
    int j = 0;
    double displacement = 0.0;
    Vec3 delta;  // c_j - c_i
    bool short_clip_rule_used = false;
};

/// Standard density-based clustering: a core point has >= min_samples
/// neighbors within eps (inclusive, counting itself); border points join the
/// first discovering cluster in index order.
ClusterAssignment dbscan(const CameraTokenSet& tokens, const DBSCANParams& params);

/// Maximal temporally contiguous runs per cluster, length >= min_run,
/// sorted by start index.
std::vector<FrameRange> static_clips(const ClusterAssignment& assignment, int min_run);

/// Representative-coordinate pair selection: first/last for short clips,
/// otherwise the exhaustive max-displacement pair (ties to smallest i, j).
PairSelection select_pair(const std::vector<FrameRecord>& frames,
                          int short_clip_threshold);

/// Keep iff total displacement >= min_total and |delta z| >= min_depth_axis.
bool depth_filter(const PairSelection& selection, double min_total,
                  double min_depth_axis);

}  // namespace manip
