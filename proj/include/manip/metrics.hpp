#pragma once

#include <optional>
#include <string>
#include <vector>

#include "manip/geometry.hpp"

namespace manip {

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    void validate() const;
};

struct RelocationPair {
    Vec3 v_pred;
    Vec3 v_gt;
    double alpha = 1.0;
    double beta = 0.8;
    double epsilon = 1e-8;
};

struct PenaltyPolicy {
    double q_hi = 0.99;
    double q_mid = 0.95;
    double multiplier = 1.2;
};

struct ObjectEvalInput {
    std::string item_id;
    std::string object_id;
    bool localized = true;
    BoundingBox pred_box, gt_box;
    BinaryMask pred_mask, gt_mask;
    DepthMap pred_depth, gt_depth;
    PointCloud pred_cloud, gt_cloud;
    PointCloud scene_cloud_gt;
    double dino_similarity = 0.0;
    RelocationPair relocation;
    std::optional<double> deqa;
    std::optional<double> phys_vlm;
};

/// Linear map from raw metric values to [0,100] scores with clamping.
/// `value_at_zero` maps to score 0 and `value_at_hundred` to score 100, so
/// lower-is-better metrics just swap the endpoints.
struct LinearMap {
    double value_at_zero = 0.0;
    double value_at_hundred = 1.0;

    double normalize(double raw) const;
};

struct NormalizationSpec {
    LinearMap diou{-1.0, 1.0};
    LinearMap mask_iou{0.0, 1.0};
    LinearMap absrel{2.0, 0.0};
    LinearMap delta_ratio{0.0, 1.0};
    LinearMap chamfer{0.5, 0.0};
    LinearMap centroid{0.5, 0.0};
    LinearMap ra_dino{0.0, 1.0};
};

struct MetricValue {
    double raw = 0.0;
    double normalized = 0.0;
    bool penalty_applied = false;
};

struct MetricReport {
    std::string item_id;
    std::string object_id;
    bool localized = true;
    MetricValue diou, mask_iou, absrel, delta_ratio, chamfer, centroid, ra_dino;
    std::optional<double> deqa;
    std::optional<double> phys_vlm;
};

// --- individual metrics ---

/// IoU minus squared center distance over squared enclosing-box diagonal.
double diou(const BoundingBox& pred, const BoundingBox& gt);

double mask_iou(const BinaryMask& pred, const BinaryMask& gt);

double absrel(const DepthMap& pred, const DepthMap& gt, const BinaryMask& region);

double delta_ratio(const DepthMap& pred, const DepthMap& gt,
                   const BinaryMask& region, double threshold = 1.25);

/// Symmetric mean nearest-neighbor distance on diagonal-normalized clouds.
/// KD-tree accelerated; tracks the brute-force sum within 1e-9 relative.
double chamfer(const PointCloud& pred, const PointCloud& gt, double norm_diagonal);

double centroid_distance(const PointCloud& pred, const PointCloud& gt,
                         double norm_diagonal);

double ra_dino(double s_dino, const RelocationPair& rel);

/// Variance of log-depth residuals over the valid region; exactly zero under
/// any global depth rescale.
double silog(const DepthMap& pred, const DepthMap& gt, const BinaryMask& region);

/// max(q_hi quantile, multiplier * q_mid quantile), linear-interpolated
/// empirical quantiles.
double missing_penalty(const std::vector<double>& observed, const PenaltyPolicy& policy);

// --- batch evaluation ---

/// All seven metrics for a localized object; norm_diagonal comes from
/// scene_diagonal(scene_cloud_gt).
MetricReport evaluate_object(const ObjectEvalInput& input, const NormalizationSpec& norm);

/// Report for a non-localized object: accuracy metrics floored, distance
/// metrics set to the supplied batch penalties.
MetricReport missing_object_report(const ObjectEvalInput& input,
                                   double absrel_penalty, double chamfer_penalty,
                                   double centroid_penalty,
                                   const NormalizationSpec& norm);

/// Two-phase batch evaluation: localized objects first, then distance-metric
/// penalties from their distributions, then the non-localized reports.
/// `fallback_penalty` is required when nothing in the batch localizes.
std::vector<MetricReport> evaluate_batch(const std::vector<ObjectEvalInput>& inputs,
                                         const PenaltyPolicy& policy,
                                         const NormalizationSpec& norm,
                                         std::optional<double> fallback_penalty,
                                         int workers = 1);

/// Per-metric arithmetic mean in a fixed summation order.
MetricReport aggregate(const std::vector<MetricReport>& reports);

}  // namespace manip
