#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "manip/io.hpp"
#include "manip/metrics.hpp"
#include "manip/pipeline.hpp"
#include "manip/preview.hpp"

namespace manip::runner {

// Exit-code contract: 0 success, 1 input/validation failure, 2 configuration
// failure. Diagnostics go to stderr as single-line records.

struct PreviewOptions {
    std::filesystem::path src_image;
    std::filesystem::path depth;
    std::filesystem::path camera;
    std::filesystem::path requests;  // JSON lines: {object_id, mask, delta}
    std::filesystem::path out_image;
    std::optional<std::filesystem::path> out_ply;  // transformed clouds
    PreviewConfig preview;
    bool dry_run = false;
};

struct EvaluateOptions {
    std::filesystem::path manifest;
    std::filesystem::path out_report;
    PenaltyPolicy penalty;
    NormalizationSpec norm;
    RelocationPair relocation_defaults;  // alpha/beta/epsilon only
    std::optional<double> fallback_penalty;
    int workers = 1;
    bool dry_run = false;
};

struct ClusterOptions {
    std::filesystem::path tokens;
    std::filesystem::path out_clips;
    DBSCANParams dbscan;
    int min_run = 2;
    bool normalize_tokens = false;  // unit-normalize rows before clustering
    bool dry_run = false;
};

struct SelectOptions {
    std::filesystem::path frames_manifest;
    std::filesystem::path out_pairs;
    std::string clip_id = "clip_0";
    int short_clip_threshold = 16;
    bool dry_run = false;
};

struct FilterOptions {
    std::filesystem::path pairs_manifest;
    std::filesystem::path out_pairs;
    double min_total = 0.05;
    double min_depth_axis = 0.02;
    bool dry_run = false;
};

int run_preview(const PreviewOptions& opts);
int run_evaluate(const EvaluateOptions& opts);
int run_cluster(const ClusterOptions& opts);
int run_select(const SelectOptions& opts);
int run_filter(const FilterOptions& opts);

}  // namespace manip::runner
