#include "manip/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "manip/kdtree.hpp"

namespace manip {

void BoundingBox::validate() const {
    if (x_min > x_max || y_min > y_max)
        throw Error(ErrorCode::FormatError, "inverted bounding box");
}

double LinearMap::normalize(double raw) const {
    const double t = (raw - value_at_zero) / (value_at_hundred - value_at_zero);
    return std::clamp(t * 100.0, 0.0, 100.0);
}

double diou(const BoundingBox& pred, const BoundingBox& gt) {
    pred.validate();
    gt.validate();
    if (gt.area() <= 0.0)
        throw Error(ErrorCode::DegenerateBox, "ground-truth box has zero area");

    const double ix = std::max(0.0, std::min(pred.x_max, gt.x_max) -
                                        std::max(pred.x_min, gt.x_min));
    const double iy = std::max(0.0, std::min(pred.y_max, gt.y_max) -
                                        std::max(pred.y_min, gt.y_min));
    const double inter = ix * iy;
    const double uni = pred.area() + gt.area() - inter;
    const double iou = uni > 0.0 ? inter / uni : 0.0;

    const double pcx = 0.5 * (pred.x_min + pred.x_max);
    const double pcy = 0.5 * (pred.y_min + pred.y_max);
    const double gcx = 0.5 * (gt.x_min + gt.x_max);
    const double gcy = 0.5 * (gt.y_min + gt.y_max);
    const double rho2 = (pcx - gcx) * (pcx - gcx) + (pcy - gcy) * (pcy - gcy);

    const double ex = std::max(pred.x_max, gt.x_max) - std::min(pred.x_min, gt.x_min);
    const double ey = std::max(pred.y_max, gt.y_max) - std::min(pred.y_min, gt.y_min);
    const double c2 = ex * ex + ey * ey;
    return iou - (c2 > 0.0 ? rho2 / c2 : 0.0);
}

double mask_iou(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw Error(ErrorCode::ShapeMismatch, "mask dimensions differ");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.bits.size(); ++i) {
        const bool a = pred.bits[i] != 0, b = gt.bits[i] != 0;
        inter += (a && b);
        uni += (a || b);
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Valid region: mask member with finite positive depth in both maps.
template <typename Fn>
size_t for_valid_region(const DepthMap& pred, const DepthMap& gt,
                        const BinaryMask& region, Fn&& fn) {
    if (pred.width != gt.width || pred.height != gt.height ||
        pred.width != region.width || pred.height != region.height)
        throw Error(ErrorCode::ShapeMismatch, "depth/region dimensions differ");
    size_t n = 0;
    for (int v = 0; v < pred.height; ++v) {
        for (int u = 0; u < pred.width; ++u) {
            if (!region.at(u, v) || !pred.valid(u, v) || !gt.valid(u, v)) continue;
            fn(static_cast<double>(pred.at(u, v)), static_cast<double>(gt.at(u, v)));
            ++n;
        }
    }
    return n;
}

double quantile_interpolated(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double absrel(const DepthMap& pred, const DepthMap& gt, const BinaryMask& region) {
    double sum = 0.0;
    const size_t n = for_valid_region(pred, gt, region, [&](double p, double g) {
        sum += std::abs(p - g) / g;
    });
    if (n == 0) throw Error(ErrorCode::EmptyRegion, "no valid pixels in region");
    return sum / static_cast<double>(n);
}

double delta_ratio(const DepthMap& pred, const DepthMap& gt,
                   const BinaryMask& region, double threshold) {
    size_t hits = 0;
    const size_t n = for_valid_region(pred, gt, region, [&](double p, double g) {
        if (std::max(p / g, g / p) < threshold) ++hits;
    });
    if (n == 0) throw Error(ErrorCode::EmptyRegion, "no valid pixels in region");
    return static_cast<double>(hits) / static_cast<double>(n);
}

double chamfer(const PointCloud& pred, const PointCloud& gt, double norm_diagonal) {
    if (pred.empty() || gt.empty())
        throw Error(ErrorCode::EmptyObject, "empty cloud in chamfer distance");
    if (!(norm_diagonal > 0.0))
        throw Error(ErrorCode::DegenerateScene, "non-positive scene diagonal");

    auto normalized = [norm_diagonal](const std::vector<Vec3>& pts) {
        std::vector<Vec3> out;
        out.reserve(pts.size());
        for (const auto& p : pts) out.push_back(p / norm_diagonal);
        return out;
    };
    const std::vector<Vec3> a = normalized(pred.points);
    const std::vector<Vec3> b = normalized(gt.points);

    const KdTree3 tree_a(a);
    const KdTree3 tree_b(b);
    double sum_ab = 0.0;
    for (const auto& p : a) sum_ab += std::sqrt(tree_b.nearest_squared(p));
    double sum_ba = 0.0;
    for (const auto& q : b) sum_ba += std::sqrt(tree_a.nearest_squared(q));
    return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

double centroid_distance(const PointCloud& pred, const PointCloud& gt,
                         double norm_diagonal) {
    if (pred.empty() || gt.empty())
        throw Error(ErrorCode::EmptyObject, "empty cloud in centroid distance");
    if (!(norm_diagonal > 0.0))
        throw Error(ErrorCode::DegenerateScene, "non-positive scene diagonal");
    auto centroid = [](const PointCloud& c) {
        Vec3 sum;
        for (const auto& p : c.points) sum = sum + p;
        return sum / static_cast<double>(c.size());
    };
    return (centroid(pred) - centroid(gt)).norm() / norm_diagonal;
}

double ra_dino(double s_dino, const RelocationPair& rel) {
    const double gt_norm = rel.v_gt.norm();
    Vec3 v_par;
    if (gt_norm > 0.0) {
        const double scale = rel.v_pred.dot(rel.v_gt) / (gt_norm * gt_norm);
        v_par = rel.v_gt * scale;
    }
    const Vec3 v_perp = rel.v_pred - v_par;
    const double denom = gt_norm + rel.epsilon;
    const double e_par = (v_par - rel.v_gt).norm() / denom;
    const double e_perp = v_perp.norm() / denom;
    return s_dino * std::exp(-rel.alpha * e_par - rel.beta * e_perp);
}

double silog(const DepthMap& pred, const DepthMap& gt, const BinaryMask& region) {
    double sum = 0.0, sum_sq = 0.0;
    const size_t n = for_valid_region(pred, gt, region, [&](double p, double g) {
        const double d = std::log(p) - std::log(g);
        sum += d;
        sum_sq += d * d;
    });
    if (n == 0) throw Error(ErrorCode::EmptyRegion, "no valid pixels in region");
    const double mean = sum / static_cast<double>(n);
    return sum_sq / static_cast<double>(n) - mean * mean;
}

double missing_penalty(const std::vector<double>& observed, const PenaltyPolicy& policy) {
    if (observed.empty())
        throw Error(ErrorCode::EmptySample, "no localized observations for penalty");
    const double hi = quantile_interpolated(observed, policy.q_hi);
    const double mid = quantile_interpolated(observed, policy.q_mid);
    return std::max(hi, policy.multiplier * mid);
}

MetricReport evaluate_object(const ObjectEvalInput& input, const NormalizationSpec& norm) {
    const double diag = scene_diagonal(input.scene_cloud_gt);
    MetricReport r;
    r.item_id = input.item_id;
    r.object_id = input.object_id;
    r.localized = true;
    r.diou.raw = diou(input.pred_box, input.gt_box);
    r.mask_iou.raw = mask_iou(input.pred_mask, input.gt_mask);
    r.absrel.raw = absrel(input.pred_depth, input.gt_depth, input.gt_mask);
    r.delta_ratio.raw = delta_ratio(input.pred_depth, input.gt_depth, input.gt_mask);
    r.chamfer.raw = chamfer(input.pred_cloud, input.gt_cloud, diag);
    r.centroid.raw = centroid_distance(input.pred_cloud, input.gt_cloud, diag);
    r.ra_dino.raw = ra_dino(input.dino_similarity, input.relocation);
    r.diou.normalized = norm.diou.normalize(r.diou.raw);
    r.mask_iou.normalized = norm.mask_iou.normalize(r.mask_iou.raw);
    r.absrel.normalized = norm.absrel.normalize(r.absrel.raw);
    r.delta_ratio.normalized = norm.delta_ratio.normalize(r.delta_ratio.raw);
    r.chamfer.normalized = norm.chamfer.normalize(r.chamfer.raw);
    r.centroid.normalized = norm.centroid.normalize(r.centroid.raw);
    r.ra_dino.normalized = norm.ra_dino.normalize(r.ra_dino.raw);
    r.deqa = input.deqa;
    r.phys_vlm = input.phys_vlm;
    return r;
}

MetricReport missing_object_report(const ObjectEvalInput& input,
                                   double absrel_penalty, double chamfer_penalty,
                                   double centroid_penalty,
                                   const NormalizationSpec& norm) {
    MetricReport r;
    r.item_id = input.item_id;
    r.object_id = input.object_id;
    r.localized = false;
    r.diou.raw = -1.0;  // accuracy metrics floored
    r.mask_iou.raw = 0.0;
    r.delta_ratio.raw = 0.0;
    r.ra_dino.raw = 0.0;
    r.absrel = {absrel_penalty, 0.0, true};
    r.chamfer = {chamfer_penalty, 0.0, true};
    r.centroid = {centroid_penalty, 0.0, true};
    r.diou.normalized = norm.diou.normalize(r.diou.raw);
    r.mask_iou.normalized = norm.mask_iou.normalize(r.mask_iou.raw);
    r.absrel.normalized = norm.absrel.normalize(r.absrel.raw);
    r.delta_ratio.normalized = norm.delta_ratio.normalize(r.delta_ratio.raw);
    r.chamfer.normalized = norm.chamfer.normalize(r.chamfer.raw);
    r.centroid.normalized = norm.centroid.normalize(r.centroid.raw);
    r.ra_dino.normalized = norm.ra_dino.normalize(r.ra_dino.raw);
    r.deqa = input.deqa;
    r.phys_vlm = input.phys_vlm;
    return r;
}

std::vector<MetricReport> evaluate_batch(const std::vector<ObjectEvalInput>& inputs,
                                         const PenaltyPolicy& policy,
                                         const NormalizationSpec& norm,
                                         std::optional<double> fallback_penalty,
                                         int workers) {
    std::vector<MetricReport> reports(inputs.size());
    std::vector<std::uint8_t> done(inputs.size(), 0);

    // Phase 1: localized objects, parallel but slot-addressed so the result
    // is independent of scheduling.
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            if (!inputs[i].localized) continue;
            try {
                reports[i] = evaluate_object(inputs[i], norm);
                done[i] = 1;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, workers);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Phase 2: penalties from the localized distributions, in input order.
    bool any_missing = false;
    std::vector<double> absrel_obs, chamfer_obs, centroid_obs;
    for (size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].localized) {
            any_missing = true;
            continue;
        }
        absrel_obs.push_back(reports[i].absrel.raw);
        chamfer_obs.push_back(reports[i].chamfer.raw);
        centroid_obs.push_back(reports[i].centroid.raw);
    }
    if (any_missing) {
        double p_absrel, p_chamfer, p_centroid;
        if (!absrel_obs.empty()) {
            p_absrel = missing_penalty(absrel_obs, policy);
            p_chamfer = missing_penalty(chamfer_obs, policy);
            p_centroid = missing_penalty(centroid_obs, policy);
        } else if (fallback_penalty) {
            p_absrel = p_chamfer = p_centroid = *fallback_penalty;
        } else {
            throw Error(ErrorCode::ConfigError,
                        "no localized objects and no fallback penalty configured");
        }
        for (size_t i = 0; i < inputs.size(); ++i)
            if (!inputs[i].localized)
                reports[i] = missing_object_report(inputs[i], p_absrel, p_chamfer,
                                                  p_centroid, norm);
    }
    return reports;
}

namespace {

void accumulate(MetricValue& acc, const MetricValue& v) {
    acc.raw += v.raw;
    acc.normalized += v.normalized;
    acc.penalty_applied = acc.penalty_applied || v.penalty_applied;
}

void finish(MetricValue& acc, double n) {
    acc.raw /= n;
    acc.normalized /= n;
}

}  // namespace

MetricReport aggregate(const std::vector<MetricReport>& reports) {
    if (reports.empty())
        throw Error(ErrorCode::EmptySample, "nothing to aggregate");
    MetricReport mean;
    mean.item_id = "summary";
    double deqa_sum = 0.0, phys_sum = 0.0;
    size_t deqa_n = 0, phys_n = 0;
    for (const auto& r : reports) {
        accumulate(mean.diou, r.diou);
        accumulate(mean.mask_iou, r.mask_iou);
        accumulate(mean.absrel, r.absrel);
        accumulate(mean.delta_ratio, r.delta_ratio);
        accumulate(mean.chamfer, r.chamfer);
        accumulate(mean.centroid, r.centroid);
        accumulate(mean.ra_dino, r.ra_dino);
        if (r.deqa) { deqa_sum += *r.deqa; ++deqa_n; }
        if (r.phys_vlm) { phys_sum += *r.phys_vlm; ++phys_n; }
    }
    const double n = static_cast<double>(reports.size());
    finish(mean.diou, n);
    finish(mean.mask_iou, n);
    finish(mean.absrel, n);
    finish(mean.delta_ratio, n);
    finish(mean.chamfer, n);
    finish(mean.centroid, n);
    finish(mean.ra_dino, n);
    if (deqa_n > 0) mean.deqa = deqa_sum / static_cast<double>(deqa_n);
    if (phys_n > 0) mean.phys_vlm = phys_sum / static_cast<double>(phys_n);
    return mean;
}

}  // namespace manip
