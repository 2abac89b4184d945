#include "manip/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace manip {

namespace {

double sq_dist(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double axis_of(const Vec3& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
}

}  // namespace

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
    if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree3::build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Split on the widest axis at the median element.
    Vec3 lo = points_[begin], hi = points_[begin];
    for (int i = begin; i < end; ++i) {
        const Vec3& p = points_[i];
        lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
        lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
        lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
    }
    const Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > axis_of(extent, axis)) axis = 1;
    if (extent.z > axis_of(extent, axis)) axis = 2;

    const int mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid,
                     points_.begin() + end, [axis](const Vec3& a, const Vec3& b) {
                         return axis_of(a, axis) < axis_of(b, axis);
                     });
    node.axis = axis;
    node.split = axis_of(points_[mid], axis);

    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

double KdTree3::nearest_squared(const Vec3& query) const {
    double best = std::numeric_limits<double>::infinity();
    if (root_ >= 0) search(root_, query, best);
    return best;
}

void KdTree3::search(int idx, const Vec3& q, double& best) const {
    const Node& node = nodes_[idx];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i)
            best = std::min(best, sq_dist(points_[i], q));
        return;
    }
    const double delta = axis_of(q, node.axis) - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (delta * delta < best) search(far, q, best);
}

}  // namespace manip
