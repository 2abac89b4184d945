#include "manip/pipeline.hpp"

#include <cmath>
#include <deque>

namespace manip {

namespace {

double token_dist_sq(const CameraTokenSet& tokens, int a, int b) {
    const float* pa = tokens.row(a);
    const float* pb = tokens.row(b);
    double sum = 0.0;
    for (int d = 0; d < tokens.dim; ++d) {
        const double diff = static_cast<double>(pa[d]) - static_cast<double>(pb[d]);
        sum += diff * diff;
    }
    return sum;
}

std::vector<int> neighbors_of(const CameraTokenSet& tokens, int idx, double eps_sq) {
    std::vector<int> out;
    for (int k = 0; k < tokens.count; ++k)
        if (token_dist_sq(tokens, idx, k) <= eps_sq) out.push_back(k);
    return out;
}

}  // namespace

ClusterAssignment dbscan(const CameraTokenSet& tokens, const DBSCANParams& params) {
    const int n = tokens.count;
    const double eps_sq = params.eps * params.eps;
    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int next_cluster = 0;

    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        std::vector<int> seed = neighbors_of(tokens, i, eps_sq);
        if (static_cast<int>(seed.size()) < params.min_samples) {
            labels[i] = -1;  // noise, may later become a border point
            continue;
        }
        const int cluster = next_cluster++;
        labels[i] = cluster;
        std::deque<int> queue(seed.begin(), seed.end());
        while (!queue.empty()) {
            const int q = queue.front();
            queue.pop_front();
            if (labels[q] == -1) labels[q] = cluster;  // border point
            if (labels[q] != kUnvisited) continue;
            labels[q] = cluster;
            std::vector<int> reach = neighbors_of(tokens, q, eps_sq);
            if (static_cast<int>(reach.size()) >= params.min_samples)
                queue.insert(queue.end(), reach.begin(), reach.end());
        }
    }
    return {std::move(labels), next_cluster};
}

std::vector<FrameRange> static_clips(const ClusterAssignment& assignment, int min_run) {
    std::vector<FrameRange> out;
    const auto& labels = assignment.labels;
    const int n = static_cast<int>(labels.size());
    int start = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || labels[k] != labels[start]) {
            if (labels[start] >= 0 && k - start >= min_run)
                out.push_back({start, k - 1, labels[start]});
            start = k;
        }
    }
    return out;  // already sorted by start index
}

PairSelection select_pair(const std::vector<FrameRecord>& frames,
                          int short_clip_threshold) {
    const int n = static_cast<int>(frames.size());
    if (n < 2)
        throw Error(ErrorCode::InsufficientFrames, "need at least 2 frames");

    std::vector<Vec3> centroids(n);
    for (int k = 0; k < n; ++k) {
        const auto& f = frames[k];
        const Image blank(f.depth.width, f.depth.height);
        PointCloud cloud;
        try {
            cloud = unproject_masked(blank, f.mask, f.depth, f.camera.intrinsics,
                                     f.camera.pose);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::EmptyObject)
                throw Error(ErrorCode::EmptyObject,
                            "frame " + std::to_string(f.frame_index));
            throw;
        }
        centroids[k] = representative_coordinate(cloud);
    }

    PairSelection sel;
    if (n <= short_clip_threshold) {
        sel.i = 0;
        sel.j = n - 1;
        sel.short_clip_rule_used = true;
    } else {
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double d = displacement(centroids[i], centroids[j]);
                if (d > best) {
                    best = d;
                    sel.i = i;
                    sel.j = j;
                }
            }
        }
    }
    sel.delta = centroids[sel.j] - centroids[sel.i];
    sel.displacement = displacement(centroids[sel.i], centroids[sel.j]);
    return sel;
}

bool depth_filter(const PairSelection& selection, double min_total,
                  double min_depth_axis) {
    return selection.displacement >= min_total &&
           std::abs(selection.delta.z) >= min_depth_axis;
}

}  // namespace manip
