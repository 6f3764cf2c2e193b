#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hbtrack/io.hpp"
#include "hbtrack/parallel.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> parse_scales(const std::string& csv) {
    std::vector<double> scales;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) scales.push_back(std::stod(item));
    }
    if (scales.empty()) throw CLI::ValidationError("--scales", "expected a comma-separated list");
    return scales;
}

int run_synth(const std::string& spec_path, std::int64_t seed_override, const std::string& out_dir) {
    hbtrack::scenario::ScenarioSpec spec;
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw std::runtime_error("cannot open " + spec_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        spec = hbtrack::scenario::spec_from_json(buffer.str());
    }
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);

    const auto result = hbtrack::scenario::generate(spec);
    std::vector<hbtrack::Detection> flat;
    for (const auto& frame : result.detections) {
        for (const auto& d : hbtrack::scenario::flatten(frame)) flat.push_back(d);
    }

    const fs::path dir(out_dir);
    hbtrack::io::write_detections(dir / "detections.jsonl", flat, spec.embedding_dim);
    hbtrack::io::write_mot_gt(dir / "gt.txt", result.truth);
    hbtrack::io::write_gt_pairs(dir / "gt_pairs.jsonl", result.truth);
    hbtrack::io::write_file_atomic(dir / "spec_used.json", [&](std::ostream& out) {
        out << hbtrack::scenario::spec_to_json(spec) << "\n";
    });
    std::cout << "wrote " << flat.size() << " detections over " << spec.num_frames << " frames to "
              << out_dir << "\n";
    return 0;
}

int run_tile(double width, double height, const std::string& scales_csv, double overlap,
             const std::string& out) {
    const auto plan = hbtrack::tiling::plan(width, height, parse_scales(scales_csv), overlap);
    hbtrack::io::write_tile_plan(out, plan);
    for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "planned " << plan.windows.size() << " windows over " << plan.scales.size()
              << " scales\n";
    return 0;
}

int run_fuse(const std::string& detections_path, const std::string& plan_path,
             const std::string& out, double nms_threshold) {
    const auto stream = hbtrack::io::read_detections(detections_path);
    const auto plan = hbtrack::io::read_tile_plan(plan_path);

    std::vector<int> frames;
    for (const auto& [frame, _] : stream.frames) frames.push_back(frame);
    std::vector<std::vector<hbtrack::Detection>> fused(frames.size());
    hbtrack::parallel_for(frames.size(), [&](std::size_t i) {
        const auto& dets = stream.frames.at(frames[i]);
        std::vector<hbtrack::Detection> tile_local, global;
        for (const auto& d : dets) {
            (d.tile_id >= 0 ? tile_local : global).push_back(d);
        }
        auto lifted = hbtrack::tiling::lift(tile_local, plan);
        global.insert(global.end(), lifted.begin(), lifted.end());
        fused[i] = hbtrack::tiling::fuse(global, nms_threshold);
    });

    std::vector<hbtrack::Detection> flat;
    for (const auto& per_frame : fused) flat.insert(flat.end(), per_frame.begin(), per_frame.end());
    hbtrack::io::write_detections(out, flat, stream.embedding_dim);
    std::cout << "fused to " << flat.size() << " detections\n";
    return 0;
}

int run_pair(const std::string& detections_path, const std::string& out, const std::string& method,
             double max_distance, double min_iou) {
    const auto stream = hbtrack::io::read_detections(detections_path);

    std::vector<int> frames;
    for (const auto& [frame, _] : stream.frames) frames.push_back(frame);
    std::vector<std::vector<hbtrack::PairedDetection>> paired(frames.size());
    hbtrack::parallel_for(frames.size(), [&](std::size_t i) {
        std::vector<hbtrack::Detection> bodies, heads;
        for (const auto& d : stream.frames.at(frames[i])) {
            (d.part == hbtrack::Part::Body ? bodies : heads).push_back(d);
        }
        paired[i] = method == "embedding" ? hbtrack::pair_by_embedding(bodies, heads, max_distance)
                                          : hbtrack::pair_by_position(bodies, heads, min_iou);
    });

    std::vector<hbtrack::PairedDetection> flat;
    for (auto& per_frame : paired) {
        flat.insert(flat.end(), std::make_move_iterator(per_frame.begin()),
                    std::make_move_iterator(per_frame.end()));
    }
    hbtrack::io::write_paired(out, flat, stream.embedding_dim);
    std::cout << "paired into " << flat.size() << " records\n";
    return 0;
}

hbtrack::TrackerConfig load_tracker_config(const std::string& config_path) {
    hbtrack::TrackerConfig config;
    if (config_path.empty()) return config;
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(config_path + ": malformed JSON: " + e.what());
    }
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
            j.erase(key);
        }
    };
    take("high_conf", config.high_conf);
    take("low_conf", config.low_conf);
    take("iou_gate", config.iou_gate);
    take("fuse_lambda", config.fuse_lambda);
    take("max_age", config.max_age);
    take("appearance_momentum", config.appearance_momentum);
    take("use_low_conf_stage", config.use_low_conf_stage);
    take("head_iou_average", config.head_iou_average);
    if (!j.empty()) {
        throw std::runtime_error(config_path + ": unknown key '" + j.begin().key() + "'");
    }
    return config;
}

json tracker_config_to_json(const hbtrack::TrackerConfig& c, bool body_only) {
    json j;
    j["high_conf"] = c.high_conf;
    j["low_conf"] = c.low_conf;
    j["iou_gate"] = c.iou_gate;
    j["fuse_lambda"] = c.fuse_lambda;
    j["max_age"] = c.max_age;
    j["appearance_momentum"] = c.appearance_momentum;
    j["use_low_conf_stage"] = c.use_low_conf_stage;
    j["head_iou_average"] = c.head_iou_average;
    j["body_only"] = body_only;
    return j;
}

int run_track(const std::string& paired_path, const std::string& out,
              const hbtrack::TrackerConfig& config, bool body_only) {
    auto records = hbtrack::io::read_paired(paired_path);
    if (body_only) records = hbtrack::strip_heads(records);

    std::map<int, std::vector<hbtrack::PairedDetection>> by_frame;
    for (auto& rec : records) by_frame[rec.frame()].push_back(std::move(rec));

    hbtrack::Tracker tracker(config);
    std::vector<hbtrack::TrackOutput> rows;
    for (const auto& [frame, dets] : by_frame) {
        for (const auto& row : tracker.step(frame, dets)) rows.push_back(row);
    }

    hbtrack::io::write_results(out, rows);
    const fs::path out_dir = fs::path(out).parent_path();
    hbtrack::io::write_file_atomic(
        out_dir.empty() ? fs::path("track_config_used.json") : out_dir / "track_config_used.json",
        [&](std::ostream& o) { o << tracker_config_to_json(config, body_only).dump(2) << "\n"; });
    std::cout << "tracked " << rows.size() << " rows\n";
    return 0;
}

int run_eval(const std::string& gt_path, const std::string& results_path, const std::string& out,
             double iou_match, const std::string& gt_pairs_path, const std::string& paired_path) {
    const auto gt = hbtrack::io::read_mot_boxes(gt_path, hbtrack::io::MotKind::GroundTruth);
    const auto hyp = hbtrack::io::read_mot_boxes(results_path, hbtrack::io::MotKind::Results);
    auto report = hbtrack::metrics::evaluate(gt, hyp, iou_match);

    if (!gt_pairs_path.empty() != !paired_path.empty()) {
        throw std::runtime_error("--gt-pairs and --paired must be given together");
    }
    if (!gt_pairs_path.empty()) {
        const auto gt_pairs = hbtrack::io::read_gt_pairs(gt_pairs_path);
        const auto hyp_pairs = hbtrack::io::read_paired(paired_path);
        report.pair_mismatch_rate = hbtrack::metrics::pair_mismatch_rate(gt_pairs, hyp_pairs);
    }

    hbtrack::io::write_file_atomic(out, [&](std::ostream& o) {
        o << hbtrack::io::report_to_json(report) << "\n";
    });
    std::cout << hbtrack::io::report_to_json(report) << "\n";
    return 0;
}

int run_loss_check(const std::string& batches_path, const std::string& out,
                   const hbtrack::aml::LossWeights& weights, double fd_step, double tolerance) {
    const auto batches = hbtrack::io::read_loss_batches(batches_path);

    json lines = json::array();
    bool all_ok = true;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& batch = batches[b];
        const double pull = hbtrack::aml::pull_loss(batch, weights);
        const double push = hbtrack::aml::push_loss(batch, weights);
        const double total = hbtrack::aml::total_loss(batch, weights);
        const auto grad = hbtrack::aml::gradient(batch, weights);

        // central finite differences against the analytic gradient
        double max_rel_err = 0.0;
        auto check = [&](bool body_part, std::size_t i, std::size_t k, double analytic) {
            auto copy = batch;
            auto& slot = body_part ? copy.body_embeddings : copy.head_embeddings;
            slot[i][k] += fd_step;
            const double up = hbtrack::aml::total_loss(copy, weights);
            slot[i][k] -= 2.0 * fd_step;
            const double down = hbtrack::aml::total_loss(copy, weights);
            const double fd = (up - down) / (2.0 * fd_step);
            const double scale = std::max({1.0, std::abs(analytic), std::abs(fd)});
            max_rel_err = std::max(max_rel_err, std::abs(analytic - fd) / scale);
        };
        for (std::size_t i = 0; i < batch.body_embeddings.size(); ++i) {
            for (std::size_t k = 0; k < batch.body_embeddings[i].size(); ++k) {
                check(true, i, k, grad.body[i][k]);
            }
        }
        for (std::size_t i = 0; i < batch.head_embeddings.size(); ++i) {
            for (std::size_t k = 0; k < batch.head_embeddings[i].size(); ++k) {
                check(false, i, k, grad.head[i][k]);
            }
        }
        const bool ok = max_rel_err <= tolerance;
        all_ok = all_ok && ok;
        lines.push_back({{"batch", b},
                         {"pull", pull},
                         {"push", push},
                         {"total", total},
                         {"max_gradient_rel_err", max_rel_err},
                         {"gradient_ok", ok}});
    }

    json report;
    report["batches"] = lines;
    report["all_ok"] = all_ok;
    if (!out.empty()) {
        hbtrack::io::write_file_atomic(out, [&](std::ostream& o) { o << report.dump(2) << "\n"; });
    }
    std::cout << report.dump(2) << "\n";
    return all_ok ? 0 : 1;
}

void hsv_to_rgb(double h, double s, double v, unsigned char rgb[3]) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp) % 6) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    const double m = v - c;
    rgb[0] = static_cast<unsigned char>(255.0 * (r + m));
    rgb[1] = static_cast<unsigned char>(255.0 * (g + m));
    rgb[2] = static_cast<unsigned char>(255.0 * (b + m));
}

int run_render(const std::string& results_path, int width, int height, const std::string& out_dir,
               int every, int thickness) {
    if (width < 1 || height < 1) throw std::runtime_error("render: width/height must be >= 1");
    if (every < 1) throw std::runtime_error("render: --every must be >= 1");
    const auto rows = hbtrack::io::read_mot_boxes(results_path, hbtrack::io::MotKind::Results);

    int rendered = 0;
    for (const auto& [frame, boxes] : rows) {
        if ((frame - 1) % every != 0) continue;
        std::vector<unsigned char> img(static_cast<std::size_t>(width) * height * 3, 255);
        for (const auto& entry : boxes) {
            unsigned char rgb[3];
            hsv_to_rgb(std::fmod(entry.id * 0.618033988749895, 1.0), 0.75, 0.90, rgb);
            const int x0 = static_cast<int>(std::lround(entry.box.x));
            const int y0 = static_cast<int>(std::lround(entry.box.y));
            const int x1 = static_cast<int>(std::lround(entry.box.right()));
            const int y1 = static_cast<int>(std::lround(entry.box.bottom()));
            auto put = [&](int px, int py) {
                if (px < 0 || py < 0 || px >= width || py >= height) return;
                auto* p = &img[(static_cast<std::size_t>(py) * width + px) * 3];
                p[0] = rgb[0];
                p[1] = rgb[1];
                p[2] = rgb[2];
            };
            for (int t = 0; t < thickness; ++t) {
                for (int px = x0; px <= x1; ++px) {
                    put(px, y0 + t);
                    put(px, y1 - t);
                }
                for (int py = y0; py <= y1; ++py) {
                    put(x0 + t, py);
                    put(x1 - t, py);
                }
            }
        }
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%06d.ppm", frame);
        hbtrack::io::write_file_atomic(fs::path(out_dir) / name, [&](std::ostream& out) {
            out << "P6\n" << width << " " << height << "\n255\n";
            out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
        });
        ++rendered;
    }
    std::cout << "rendered " << rendered << " frames to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"head-body multi-object tracking toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic crowded scene");
    std::string synth_spec, synth_out;
    std::int64_t synth_seed = -1;
    synth->add_option("--spec", synth_spec, "scenario spec JSON (defaults used when omitted)");
    synth->add_option("--seed", synth_seed, "override the spec seed");
    synth->add_option("--out-dir", synth_out, "output directory")->required();

    // tile
    auto* tile = app.add_subcommand("tile", "plan sliding windows over a large frame");
    double tile_w = 0, tile_h = 0, tile_overlap = 0.3;
    std::string tile_scales = "1600,3200,6400", tile_out;
    tile->add_option("--width", tile_w, "image width in pixels")->required();
    tile->add_option("--height", tile_h, "image height in pixels")->required();
    tile->add_option("--scales", tile_scales, "comma-separated window sizes");
    tile->add_option("--overlap", tile_overlap, "window overlap ratio in [0,1)");
    tile->add_option("--out", tile_out, "tile plan JSON path")->required();

    // fuse
    auto* fuse = app.add_subcommand("fuse", "lift tiled detections and fuse duplicates");
    std::string fuse_dets, fuse_plan, fuse_out;
    double fuse_nms = 0.7;
    fuse->add_option("--detections", fuse_dets, "detections JSONL (tile-local with tile_id)")->required();
    fuse->add_option("--plan", fuse_plan, "tile plan JSON")->required();
    fuse->add_option("--out", fuse_out, "fused detections JSONL")->required();
    fuse->add_option("--nms-threshold", fuse_nms, "per-part fusion NMS IoU threshold");

    // pair
    auto* pair = app.add_subcommand("pair", "group body and head detections");
    std::string pair_dets, pair_out, pair_method = "embedding";
    double pair_max_distance = 2.0, pair_min_iou = 0.1;
    pair->add_option("--detections", pair_dets, "detections JSONL")->required();
    pair->add_option("--out", pair_out, "paired detections JSONL")->required();
    pair->add_option("--method", pair_method, "embedding or position")
        ->check(CLI::IsMember({"embedding", "position"}));
    pair->add_option("--max-distance", pair_max_distance, "embedding distance gate");
    pair->add_option("--min-iou", pair_min_iou, "position-method IoU gate");

    // track
    auto* track = app.add_subcommand("track", "run the association cascade");
    std::string track_in, track_out, track_cfg_path;
    bool track_body_only = false;
    hbtrack::TrackerConfig flag_cfg;
    track->add_option("--paired", track_in, "paired detections JSONL")->required();
    track->add_option("--out", track_out, "MOTChallenge results CSV")->required();
    track->add_option("--config", track_cfg_path, "tracker config JSON (flags win over file)");
    auto* f_high = track->add_option("--high-conf", flag_cfg.high_conf, "high-confidence split");
    auto* f_low = track->add_option("--low-conf", flag_cfg.low_conf, "low-confidence floor");
    auto* f_gate = track->add_option("--iou-gate", flag_cfg.iou_gate, "max admissible IoU distance");
    auto* f_lambda = track->add_option("--fuse-lambda", flag_cfg.fuse_lambda,
                                       "IoU weight in the fused cost");
    auto* f_age = track->add_option("--max-age", flag_cfg.max_age, "unmatched frames before deletion");
    auto* f_mom = track->add_option("--appearance-momentum", flag_cfg.appearance_momentum,
                                    "appearance EMA factor");
    auto* f_lowstage = track->add_flag("--low-conf-stage", flag_cfg.use_low_conf_stage,
                                       "second IoU-only pass over low-confidence detections");
    auto* f_headavg = track->add_flag("--head-iou-average", flag_cfg.head_iou_average,
                                      "average body and head IoU in the paired stage");
    track->add_flag("--body-only", track_body_only, "ignore heads (ablation baseline)");

    // eval
    auto* eval = app.add_subcommand("eval", "CLEAR-MOT + identity metrics");
    std::string eval_gt, eval_res, eval_out, eval_gt_pairs, eval_paired;
    double eval_iou = 0.5;
    eval->add_option("--gt", eval_gt, "ground-truth MOT CSV")->required();
    eval->add_option("--results", eval_res, "tracker results CSV")->required();
    eval->add_option("--out", eval_out, "report JSON path")->required();
    eval->add_option("--iou-match", eval_iou, "matching IoU threshold");
    eval->add_option("--gt-pairs", eval_gt_pairs, "ground-truth pair JSONL (enables pair metric)");
    eval->add_option("--paired", eval_paired, "paired detections JSONL (enables pair metric)");

    // loss-check
    auto* loss = app.add_subcommand("loss-check", "evaluate loss batches and verify gradients");
    std::string loss_in, loss_out;
    hbtrack::aml::LossWeights weights;
    double loss_fd_step = 1e-5, loss_tol = 1e-4;
    loss->add_option("--batches", loss_in, "loss batches JSONL")->required();
    loss->add_option("--out", loss_out, "report JSON path");
    loss->add_option("--mu", weights.mu, "same-part weight");
    loss->add_option("--beta", weights.beta, "cross-part weight");
    loss->add_option("--delta", weights.delta, "pushing margin");
    loss->add_option("--sigma", weights.sigma, "pull weight");
    loss->add_option("--tau", weights.tau, "push weight");
    loss->add_flag("--literal", weights.literal_sums, "printed-formula mode: no identity restriction");
    loss->add_option("--fd-step", loss_fd_step, "finite-difference step");
    loss->add_option("--tolerance", loss_tol, "gradient check tolerance");

    // render
    auto* render = app.add_subcommand("render", "draw track overlays as PPM images");
    std::string render_res, render_out;
    int render_w = 0, render_h = 0, render_every = 1, render_thickness = 3;
    render->add_option("--results", render_res, "tracker results CSV")->required();
    render->add_option("--width", render_w, "arena width in pixels")->required();
    render->add_option("--height", render_h, "arena height in pixels")->required();
    render->add_option("--out-dir", render_out, "output directory")->required();
    render->add_option("--every", render_every, "render every Nth frame");
    render->add_option("--thickness", render_thickness, "box border thickness");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return run_synth(synth_spec, synth_seed, synth_out);
        if (*tile) return run_tile(tile_w, tile_h, tile_scales, tile_overlap, tile_out);
        if (*fuse) return run_fuse(fuse_dets, fuse_plan, fuse_out, fuse_nms);
        if (*pair) return run_pair(pair_dets, pair_out, pair_method, pair_max_distance, pair_min_iou);
        if (*track) {
            hbtrack::TrackerConfig config = load_tracker_config(track_cfg_path);
            if (f_high->count()) config.high_conf = flag_cfg.high_conf;
            if (f_low->count()) config.low_conf = flag_cfg.low_conf;
            if (f_gate->count()) config.iou_gate = flag_cfg.iou_gate;
            if (f_lambda->count()) config.fuse_lambda = flag_cfg.fuse_lambda;
            if (f_age->count()) config.max_age = flag_cfg.max_age;
            if (f_mom->count()) config.appearance_momentum = flag_cfg.appearance_momentum;
            if (f_lowstage->count()) config.use_low_conf_stage = flag_cfg.use_low_conf_stage;
            if (f_headavg->count()) config.head_iou_average = flag_cfg.head_iou_average;
            hbtrack::validate(config);
            return run_track(track_in, track_out, config, track_body_only);
        }
        if (*eval) return run_eval(eval_gt, eval_res, eval_out, eval_iou, eval_gt_pairs, eval_paired);
        if (*loss) return run_loss_check(loss_in, loss_out, weights, loss_fd_step, loss_tol);
        if (*render) {
            return run_render(render_res, render_w, render_h, render_out, render_every,
                              render_thickness);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
