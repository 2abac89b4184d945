#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "manip/runner.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << json{{"stage", "config"}, {"error", "cannot open " + path}}.dump()
                  << "\n";
        std::exit(2);
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        std::cerr << json{{"stage", "config"}, {"error", "invalid JSON in " + path}}.dump()
                  << "\n";
        std::exit(2);
    }
    return j;
}

template <typename T>
void from_config(const json& cfg, const char* key, T& target) {
    if (cfg.contains(key)) target = cfg[key].get<T>();
}

void apply_linear_map(const json& cfg, const char* key, manip::LinearMap& map) {
    if (!cfg.contains(key)) return;
    const json& m = cfg[key];
    if (m.contains("value_at_zero")) map.value_at_zero = m["value_at_zero"].get<double>();
    if (m.contains("value_at_hundred"))
        map.value_at_hundred = m["value_at_hundred"].get<double>();
}

manip::ErasePolicy parse_erase_policy(const std::string& name) {
    if (name == "leave") return manip::ErasePolicy::Leave;
    if (name == "background") return manip::ErasePolicy::FillBackgroundEstimate;
    if (name == "flat") return manip::ErasePolicy::FillFlatColor;
    std::cerr << json{{"stage", "config"},
                      {"error", "unknown erase policy '" + name + "'"}}.dump()
              << "\n";
    std::exit(2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Depth-aware object manipulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 1;
    bool dry_run = false;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--threads", threads, "worker thread count");
    app.add_flag("--dry-run", dry_run, "validate inputs without writing outputs");

    // preview
    auto* preview = app.add_subcommand("preview", "render a depth-aware edit preview");
    manip::runner::PreviewOptions pv;
    std::string pv_erase, pv_ply;
    preview->add_option("--image", pv.src_image, "source PNG")->required();
    preview->add_option("--depth", pv.depth, "scene depth PFM")->required();
    preview->add_option("--camera", pv.camera, "camera JSON")->required();
    preview->add_option("--requests", pv.requests, "JSONL manipulation requests")->required();
    preview->add_option("--out", pv.out_image, "output preview PNG")->required();
    preview->add_option("--out-ply", pv_ply, "optional PLY of transformed clouds");
    auto* opt_radius = preview->add_option("--splat-radius", pv.preview.splat_radius);
    auto* opt_eps = preview->add_option("--z-epsilon", pv.preview.z_test_epsilon);
    auto* opt_erase = preview->add_option("--erase", pv_erase, "leave|background|flat");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run the metric suite on a manifest");
    manip::runner::EvaluateOptions ev;
    double ev_fallback = -1.0;
    evaluate->add_option("--manifest", ev.manifest, "JSONL evaluation manifest")->required();
    evaluate->add_option("--out", ev.out_report, "output JSONL report")->required();
    auto* opt_fallback = evaluate->add_option(
        "--fallback-penalty", ev_fallback, "penalty when nothing in the batch localizes");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "camera-token clustering into clips");
    manip::runner::ClusterOptions cl;
    cluster->add_option("--tokens", cl.tokens, "CTOK token file")->required();
    cluster->add_option("--out", cl.out_clips, "output clip-range JSONL")->required();
    auto* opt_cl_eps = cluster->add_option("--eps", cl.dbscan.eps, "neighborhood radius");
    auto* opt_cl_min = cluster->add_option("--min-samples", cl.dbscan.min_samples);
    auto* opt_cl_run = cluster->add_option("--min-run", cl.min_run, "minimum clip length");
    auto* opt_cl_norm = cluster->add_flag("--normalize-tokens", cl.normalize_tokens);

    // select
    auto* select = app.add_subcommand("select", "depth-aware frame-pair selection");
    manip::runner::SelectOptions se;
    select->add_option("--frames", se.frames_manifest, "JSONL frame manifest")->required();
    select->add_option("--out", se.out_pairs, "output pair JSONL")->required();
    select->add_option("--clip-id", se.clip_id);
    auto* opt_se_thr = select->add_option("--short-clip-threshold", se.short_clip_threshold);

    // filter
    auto* filter = app.add_subcommand("filter", "displacement-threshold filtering");
    manip::runner::FilterOptions fi;
    filter->add_option("--pairs", fi.pairs_manifest, "JSONL pair manifest")->required();
    filter->add_option("--out", fi.out_pairs, "output JSONL with verdicts")->required();
    auto* opt_fi_total = filter->add_option("--min-total", fi.min_total);
    auto* opt_fi_depth = filter->add_option("--min-depth-axis", fi.min_depth_axis);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad flags are a configuration error
    }

    // Precedence: defaults < config file < command-line flags.
    const json cfg = load_config(config_path);
    if (app.count("--threads") == 0) from_config(cfg, "threads", threads);

    if (*preview) {
        if (opt_radius->count() == 0) from_config(cfg, "splat_radius", pv.preview.splat_radius);
        if (opt_eps->count() == 0) from_config(cfg, "z_test_epsilon", pv.preview.z_test_epsilon);
        std::string cfg_erase;
        from_config(cfg, "erase_policy", cfg_erase);
        if (opt_erase->count() > 0)
            pv.preview.erase_policy = parse_erase_policy(pv_erase);
        else if (!cfg_erase.empty())
            pv.preview.erase_policy = parse_erase_policy(cfg_erase);
        if (cfg.contains("fill_color")) {
            const auto& c = cfg["fill_color"];
            pv.preview.fill_color = {c[0].get<std::uint8_t>(), c[1].get<std::uint8_t>(),
                                     c[2].get<std::uint8_t>()};
        }
        if (!pv_ply.empty()) pv.out_ply = pv_ply;
        pv.dry_run = dry_run;
        return manip::runner::run_preview(pv);
    }
    if (*evaluate) {
        if (cfg.contains("penalty")) {
            const auto& p = cfg["penalty"];
            from_config(p, "q_hi", ev.penalty.q_hi);
            from_config(p, "q_mid", ev.penalty.q_mid);
            from_config(p, "multiplier", ev.penalty.multiplier);
        }
        if (cfg.contains("normalization")) {
            const auto& n = cfg["normalization"];
            apply_linear_map(n, "diou", ev.norm.diou);
            apply_linear_map(n, "mask_iou", ev.norm.mask_iou);
            apply_linear_map(n, "absrel", ev.norm.absrel);
            apply_linear_map(n, "delta_1_25", ev.norm.delta_ratio);
            apply_linear_map(n, "chamfer", ev.norm.chamfer);
            apply_linear_map(n, "centroid", ev.norm.centroid);
            apply_linear_map(n, "ra_dino", ev.norm.ra_dino);
        }
        if (cfg.contains("relocation")) {
            const auto& r = cfg["relocation"];
            from_config(r, "alpha", ev.relocation_defaults.alpha);
            from_config(r, "beta", ev.relocation_defaults.beta);
            from_config(r, "epsilon", ev.relocation_defaults.epsilon);
        }
        if (opt_fallback->count() > 0)
            ev.fallback_penalty = ev_fallback;
        else if (cfg.contains("fallback_penalty"))
            ev.fallback_penalty = cfg["fallback_penalty"].get<double>();
        ev.workers = threads;
        ev.dry_run = dry_run;
        return manip::runner::run_evaluate(ev);
    }
    if (*cluster) {
        if (opt_cl_eps->count() == 0) from_config(cfg, "eps", cl.dbscan.eps);
        if (opt_cl_min->count() == 0) from_config(cfg, "min_samples", cl.dbscan.min_samples);
        if (opt_cl_run->count() == 0) from_config(cfg, "min_run", cl.min_run);
        if (opt_cl_norm->count() == 0) from_config(cfg, "normalize_tokens", cl.normalize_tokens);
        cl.dry_run = dry_run;
        return manip::runner::run_cluster(cl);
    }
    if (*select) {
        if (opt_se_thr->count() == 0)
            from_config(cfg, "short_clip_threshold", se.short_clip_threshold);
        se.dry_run = dry_run;
        return manip::runner::run_select(se);
    }
    if (*filter) {
        if (opt_fi_total->count() == 0) from_config(cfg, "min_total", fi.min_total);
        if (opt_fi_depth->count() == 0) from_config(cfg, "min_depth_axis", fi.min_depth_axis);
        fi.dry_run = dry_run;
        return manip::runner::run_filter(fi);
    }
    return 2;
}
