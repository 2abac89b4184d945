#include "manip/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace manip::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void diagnostic(const std::string& stage, const std::string& message) {
    json j{{"stage", stage}, {"error", message}};
    std::cerr << j.dump() << "\n";
}

int exit_code_for(const Error& e) {
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
}

std::vector<ManipulationRequest> read_requests(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<ManipulationRequest> requests;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw Error(ErrorCode::FormatError,
                        path.string() + ":" + std::to_string(lineno) + ": malformed record");
        ManipulationRequest req;
        req.object_id = j.value("object_id", "object_" + std::to_string(lineno));
        if (!j.contains("mask") || !j["mask"].is_string())
            throw Error(ErrorCode::FormatError,
                        path.string() + ":" + std::to_string(lineno) + ": missing 'mask'");
        fs::path mask_path = j["mask"].get<std::string>();
        if (!mask_path.is_absolute()) mask_path = path.parent_path() / mask_path;
        req.mask = io::read_mask(mask_path);
        if (!j.contains("delta") || !j["delta"].is_array() || j["delta"].size() != 3)
            throw Error(ErrorCode::FormatError,
                        path.string() + ":" + std::to_string(lineno) + ": missing 'delta'");
        req.delta = {j["delta"][0].get<double>(), j["delta"][1].get<double>(),
                     j["delta"][2].get<double>()};
        requests.push_back(std::move(req));
    }
    return requests;
}

}  // namespace

int run_preview(const PreviewOptions& opts) {
    try {
        const Image src = io::read_image(opts.src_image);
        const DepthMap depth = io::read_depth(opts.depth);
        const CameraModel camera = io::read_camera(opts.camera);
        const auto requests = read_requests(opts.requests);

        std::vector<PointCloud> transformed;
        const Image preview = render_preview(src, depth, camera.intrinsics, camera.pose,
                                             requests, opts.preview,
                                             opts.out_ply ? &transformed : nullptr);
        if (opts.dry_run) return 0;
        io::write_image(preview, opts.out_image);
        if (opts.out_ply) {
            PointCloud merged;
            for (const auto& cloud : transformed) {
                merged.points.insert(merged.points.end(), cloud.points.begin(),
                                     cloud.points.end());
                merged.colors.insert(merged.colors.end(), cloud.colors.begin(),
                                     cloud.colors.end());
            }
            io::write_ply(merged, *opts.out_ply);
        }
        return 0;
    } catch (const Error& e) {
        diagnostic("preview", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diagnostic("preview", e.what());
        return 1;
    }
}

int run_evaluate(const EvaluateOptions& opts) {
    try {
        auto records = io::read_manifest(opts.manifest);
        if (records.empty())
            throw Error(ErrorCode::EmptySample, "manifest holds no records");

        // Sorted item-id order fixes the aggregation and report order.
        std::sort(records.begin(), records.end(),
                  [](const io::ManifestRecord& a, const io::ManifestRecord& b) {
                      return std::tie(a.item_id, a.object_id) <
                             std::tie(b.item_id, b.object_id);
                  });

        // Slot-addressed parallel load keeps the result order-independent of
        // scheduling.
        std::vector<ObjectEvalInput> inputs(records.size());
        std::atomic<size_t> next{0};
        std::exception_ptr load_error;
        std::mutex error_mutex;
        auto loader = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= records.size()) return;
                try {
                    inputs[i] = io::load_eval_input(records[i], opts.relocation_defaults);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!load_error) load_error = std::current_exception();
                }
            }
        };
        const int workers = std::max(1, opts.workers);
        if (workers == 1) {
            loader();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < workers; ++t) pool.emplace_back(loader);
            for (auto& t : pool) t.join();
        }
        if (load_error) std::rethrow_exception(load_error);

        const auto reports = evaluate_batch(inputs, opts.penalty, opts.norm,
                                            opts.fallback_penalty, workers);
        const MetricReport summary = aggregate(reports);
        if (!opts.dry_run)
            io::write_report(reports, summary, opts.norm, opts.out_report);
        return 0;
    } catch (const Error& e) {
        diagnostic("evaluate", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diagnostic("evaluate", e.what());
        return 1;
    }
}

int run_cluster(const ClusterOptions& opts) {
    try {
        CameraTokenSet tokens = io::read_tokens(opts.tokens);
        if (opts.normalize_tokens) {
            for (int k = 0; k < tokens.count; ++k) {
                float* row = tokens.vectors.data() + static_cast<size_t>(k) * tokens.dim;
                double norm = 0.0;
                for (int d = 0; d < tokens.dim; ++d) norm += double(row[d]) * row[d];
                norm = std::sqrt(norm);
                if (norm > 0.0)
                    for (int d = 0; d < tokens.dim; ++d)
                        row[d] = static_cast<float>(row[d] / norm);
            }
        }
        const ClusterAssignment assignment = dbscan(tokens, opts.dbscan);
        const auto ranges = static_clips(assignment, opts.min_run);
        if (!opts.dry_run) io::write_clip_ranges(ranges, opts.out_clips);
        return 0;
    } catch (const Error& e) {
        diagnostic("cluster", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diagnostic("cluster", e.what());
        return 1;
    }
}

int run_select(const SelectOptions& opts) {
    try {
        const auto frame_records = io::read_frame_manifest(opts.frames_manifest);
        std::vector<FrameRecord> frames;
        for (const auto& rec : frame_records) {
            FrameRecord f;
            f.frame_index = rec.frame_index;
            f.depth = io::read_depth(rec.depth_path);
            f.mask = io::read_mask(rec.mask_path);
            f.camera = io::read_camera(rec.camera_path);
            frames.push_back(std::move(f));
        }
        const PairSelection sel = select_pair(frames, opts.short_clip_threshold);

        io::PairManifestRecord out;
        out.clip_id = opts.clip_id;
        out.selection = sel;
        // Recompute endpoint centroids for the manifest.
        auto centroid_of = [](const FrameRecord& f) {
            const Image blank(f.depth.width, f.depth.height);
            return representative_coordinate(unproject_masked(
                blank, f.mask, f.depth, f.camera.intrinsics, f.camera.pose));
        };
        out.centroid_i = centroid_of(frames[sel.i]);
        out.centroid_j = centroid_of(frames[sel.j]);
        if (!opts.dry_run) io::write_pair_manifest({out}, opts.out_pairs);
        return 0;
    } catch (const Error& e) {
        diagnostic("select", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diagnostic("select", e.what());
        return 1;
    }
}

int run_filter(const FilterOptions& opts) {
    try {
        auto records = io::read_pair_manifest(opts.pairs_manifest);
        for (auto& rec : records)
            rec.keep = depth_filter(rec.selection, opts.min_total, opts.min_depth_axis);
        if (!opts.dry_run) io::write_pair_manifest(records, opts.out_pairs);
        return 0;
    } catch (const Error& e) {
        diagnostic("filter", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diagnostic("filter", e.what());
        return 1;
    }
}

}  // namespace manip::runner
