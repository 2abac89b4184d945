#pragma once

#include <vector>

#include "manip/geometry.hpp"

namespace manip {

/// Static 3D KD-tree over a point set; supports nearest-neighbor queries.
/// Built once, queried from any number of threads.
class KdTree3 {
  public:
    explicit KdTree3(const std::vector<Vec3>& points);

    /// Squared Euclidean distance from `query` to its nearest stored point.
    double nearest_squared(const Vec3& query) const;

    size_t size() const { return points_.size(); }

  private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0;  // leaf range into points_
        int end = 0;
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end);
    void search(int node, const Vec3& q, double& best) const;

    std::vector<Vec3> points_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 16;
};

}  // namespace manip
