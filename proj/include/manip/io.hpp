#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "manip/geometry.hpp"
#include "manip/metrics.hpp"
#include "manip/pipeline.hpp"

namespace manip::io {

// --- depth maps: PFM, grayscale "Pf", negative scale (little-endian),
// bottom-to-top row order ---
DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const DepthMap& depth, const std::filesystem::path& path);

// --- masks: binary PGM (P5), maxval 255, nonzero = object ---
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

// --- images: PNG, 8-bit RGB; alpha dropped on read ---
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

// --- cameras: JSON; missing intrinsics synthesize the default pinhole ---
CameraModel read_camera(const std::filesystem::path& path);
void write_camera(const CameraModel& camera, const std::filesystem::path& path);

// --- camera tokens: CTOK binary container ---
CameraTokenSet read_tokens(const std::filesystem::path& path);
void write_tokens(const CameraTokenSet& tokens, const std::filesystem::path& path);

// --- point clouds: ASCII PLY, x y z [red green blue] ---
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

// --- evaluation manifests: JSON lines, one record per line ---
struct ManifestRecord {
    std::string item_id;
    std::string object_id;
    bool localized = true;
    std::optional<BoundingBox> pred_box;
    BoundingBox gt_box;
    std::optional<std::string> pred_mask_path;
    std::string gt_mask_path;
    std::optional<std::string> pred_depth_path;
    std::string gt_depth_path;
    std::optional<std::string> pred_cloud_path;
    std::string gt_cloud_path;
    std::string scene_cloud_path;
    double dino_similarity = 0.0;
    Vec3 v_pred, v_gt;
    std::optional<double> deqa;
    std::optional<double> phys_vlm;
    std::optional<std::string> prompt;
};

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Reads every file referenced by a manifest record into an ObjectEvalInput.
/// alpha/beta/epsilon of the relocation term come from the caller's config.
ObjectEvalInput load_eval_input(const ManifestRecord& record,
                                const RelocationPair& relocation_defaults);

void write_report(const std::vector<MetricReport>& per_object,
                  const MetricReport& summary, const NormalizationSpec& norm,
                  const std::filesystem::path& path);

// --- pipeline manifests ---
struct FrameManifestRecord {
    int frame_index = 0;
    std::string depth_path;
    std::string mask_path;
    std::string camera_path;
};

std::vector<FrameManifestRecord> read_frame_manifest(const std::filesystem::path& path);

struct PairManifestRecord {
    std::string clip_id;
    PairSelection selection;
    Vec3 centroid_i, centroid_j;
    std::optional<bool> keep;  // filter verdict, once applied
};

std::vector<PairManifestRecord> read_pair_manifest(const std::filesystem::path& path);
void write_pair_manifest(const std::vector<PairManifestRecord>& records,
                         const std::filesystem::path& path);

void write_clip_ranges(const std::vector<FrameRange>& ranges,
                       const std::filesystem::path& path);

}  // namespace manip::io
