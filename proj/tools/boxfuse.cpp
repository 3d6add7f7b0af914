// boxfuse: post-processing for dense multi-oriented detection boxes.
//
// Subcommands: synth, cluster, nms, train, fuse, eval, sweep, bench.
// All randomness derives from the configured seed; primary artifacts are
// byte-identical across reruns with equal inputs and config.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boxfuse/clustering.hpp"
#include "boxfuse/detection_io.hpp"
#include "boxfuse/eval.hpp"
#include "boxfuse/fusion.hpp"
#include "boxfuse/nms.hpp"
#include "boxfuse/parallel.hpp"
#include "boxfuse/rng.hpp"
#include "boxfuse/run_config.hpp"
#include "boxfuse/synth.hpp"

namespace fs = std::filesystem;
using namespace boxfuse;

namespace {

constexpr int kNoClass = std::numeric_limits<int>::min();

// ---------------------------------------------------------------------------
// Config plumbing: CLI flags > config file > built-in defaults.

struct ConfigFlags {
    std::string config_file;
    RunConfig staged;
    std::string loss_mode_name = "continuous";

    CLI::Option* o_cluster = nullptr;
    CLI::Option* o_adj = nullptr;
    CLI::Option* o_nodes = nullptr;
    CLI::Option* o_beta = nullptr;
    CLI::Option* o_mode = nullptr;
    CLI::Option* o_lr = nullptr;
    CLI::Option* o_decay = nullptr;
    CLI::Option* o_decay_steps = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_widths = nullptr;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_file,
                       "JSON config file (flags override its values)");
        o_cluster = cmd.add_option("--cluster-threshold",
                                   staged.cluster_threshold,
                                   "clustering IoU threshold");
        o_adj = cmd.add_option("--adj-threshold", staged.adj_threshold,
                               "sub-graph adjacency IoU threshold");
        o_nodes = cmd.add_option("--node-count", staged.node_count,
                                 "sub-graph node count N");
        o_beta = cmd.add_option("--loss-beta", staged.loss_beta,
                                "smooth-L1 transition point");
        o_mode = cmd.add_option("--loss-mode", loss_mode_name,
                                "continuous | paper_literal");
        o_lr = cmd.add_option("--learning-rate", staged.learning_rate,
                              "initial Adam learning rate");
        o_decay = cmd.add_option("--lr-decay-factor", staged.lr_decay_factor,
                                 "learning-rate decay factor");
        o_decay_steps = cmd.add_option("--lr-decay-steps", staged.lr_decay_steps,
                                       "steps between decays");
        o_seed = cmd.add_option("--seed", staged.seed, "master RNG seed");
        o_widths = cmd.add_option("--widths", staged.widths,
                                  "graph layer widths, 10 ... 10");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_file.empty()) cfg.apply_json_file(config_file);
        if (o_cluster->count()) cfg.cluster_threshold = staged.cluster_threshold;
        if (o_adj->count()) cfg.adj_threshold = staged.adj_threshold;
        if (o_nodes->count()) cfg.node_count = staged.node_count;
        if (o_beta->count()) cfg.loss_beta = staged.loss_beta;
        if (o_mode->count()) cfg.loss_mode = parse_loss_mode(loss_mode_name);
        if (o_lr->count()) cfg.learning_rate = staged.learning_rate;
        if (o_decay->count()) cfg.lr_decay_factor = staged.lr_decay_factor;
        if (o_decay_steps->count()) cfg.lr_decay_steps = staged.lr_decay_steps;
        if (o_seed->count()) cfg.seed = staged.seed;
        if (o_widths->count()) cfg.widths = staged.widths;
        cfg.validate();
        return cfg;
    }
};

void echo_config(const RunConfig& cfg, const fs::path& artifact) {
    fs::path dir = artifact;
    if (!fs::is_directory(dir)) dir = artifact.parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    write_text_file(dir / "config.json", cfg.to_json_string());
}

std::map<int, std::vector<QuadBox>> partition_by_class(
    const std::vector<QuadBox>& boxes) {
    std::map<int, std::vector<QuadBox>> parts;
    for (const QuadBox& b : boxes) {
        parts[b.class_id.value_or(kNoClass)].push_back(b);
    }
    return parts;
}

std::string quad_json(const QuadBox& box) {
    std::string out = "{\"quad\":[";
    for (int i = 0; i < 4; ++i) {
        if (i) out += ',';
        out += format_float(box.vertices[static_cast<std::size_t>(i)].x);
        out += ',';
        out += format_float(box.vertices[static_cast<std::size_t>(i)].y);
    }
    out += "],\"score\":" + format_float(box.score);
    if (box.class_id) out += ",\"class_id\":" + std::to_string(*box.class_id);
    out += '}';
    return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
    std::string out_dir;
    int scenes = 100;
    int instances_min = 2;
    int instances_max = 4;
    int width = 1280;
    int height = 768;
    PerturbSpec perturb;
    bool crowded = false;
};

int run_synth(const SynthOpts& opts, const RunConfig& cfg) {
    fs::create_directories(opts.out_dir);
    PerturbSpec spec = opts.perturb;
    if (opts.crowded) spec.max_gt_pairwise_iou = 0.3;

    std::vector<DetectionRecord> dense(static_cast<std::size_t>(opts.scenes));
    std::vector<DetectionRecord> truth(static_cast<std::size_t>(opts.scenes));
    const Rng root(cfg.seed);
    parallel_for(static_cast<std::size_t>(opts.scenes), [&](std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%06zu", i);
        const ImageMeta meta{opts.width, opts.height, name};

        PerturbSpec scene_spec = spec;
        Rng scene_rng = root.fork(i);
        scene_spec.seed = scene_rng.next_u64();
        const int instances =
            opts.instances_min +
            (opts.instances_max > opts.instances_min
                 ? scene_rng.uniform_int(0, opts.instances_max - opts.instances_min)
                 : 0);
        const Scene s = generate_scene(scene_spec, instances, meta);

        dense[i] = DetectionRecord{meta.image_id, meta.width, meta.height, s.dense};
        truth[i] =
            DetectionRecord{meta.image_id, meta.width, meta.height, s.ground_truth};
    });

    save_detections(fs::path(opts.out_dir) / "detections.jsonl", dense);
    save_detections(fs::path(opts.out_dir) / "ground_truth.jsonl", truth);
    echo_config(cfg, opts.out_dir);
    std::cerr << "synth: wrote " << opts.scenes << " scenes to " << opts.out_dir
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cluster

int run_cluster(const std::string& in, const std::string& out,
                const RunConfig& cfg) {
    const auto records = load_detections(in);
    std::vector<std::string> chunks(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        const DetectionRecord& rec = records[i];
        std::ostringstream line;
        int index = 0;
        for (const auto& [cls, boxes] : partition_by_class(rec.boxes)) {
            for (const Cluster& c :
                 locality_aware_cluster(boxes, cfg.cluster_threshold)) {
                line << "{\"image_id\":" << nlohmann::json(rec.image_id).dump()
                     << ",\"cluster_index\":" << index++;
                if (cls != kNoClass) line << ",\"class_id\":" << cls;
                line << ",\"contributor_count\":" << c.contributor_count()
                     << ",\"representative\":" << quad_json(c.representative)
                     << ",\"members\":[";
                for (std::size_t m = 0; m < c.members.size(); ++m) {
                    if (m) line << ',';
                    line << quad_json(c.members[m]);
                }
                line << "]}\n";
            }
        }
        chunks[i] = line.str();
    });

    std::string text;
    for (const std::string& c : chunks) text += c;
    write_text_file(out, text);
    echo_config(cfg, out);
    return 0;
}

// ---------------------------------------------------------------------------
// nms

struct NmsOpts {
    std::string algo = "standard";
    std::string in;
    std::string out;
    double iou = 0.5;
    double sigma = 0.5;
    double score_floor = 0.001;
    double merge_threshold = 0.5;
    double nms_threshold = 0.2;
};

std::vector<QuadBox> apply_nms(const std::string& algo,
                               const std::vector<QuadBox>& boxes,
                               const NmsOpts& opts) {
    if (algo == "standard") return standard_nms(boxes, opts.iou);
    if (algo == "soft_linear") {
        return soft_nms(boxes, SoftNmsMethod::kLinear, opts.iou, opts.sigma,
                        opts.score_floor);
    }
    if (algo == "soft_gaussian") {
        return soft_nms(boxes, SoftNmsMethod::kGaussian, opts.iou, opts.sigma,
                        opts.score_floor);
    }
    // "rotated" is the R-NMS convention: suppression on skew IoU.
    if (algo == "skew" || algo == "rotated") return skew_nms(boxes, opts.iou);
    if (algo == "polygon") return polygon_nms(boxes, opts.iou);
    if (algo == "lanms") {
        return locality_aware_nms(boxes, opts.merge_threshold,
                                  opts.nms_threshold);
    }
    throw std::invalid_argument(
        "unknown algorithm '" + algo +
        "', valid names: standard soft_linear soft_gaussian skew rotated "
        "polygon lanms");
}

int run_nms(const NmsOpts& opts, const RunConfig& cfg) {
    auto records = load_detections(opts.in);
    parallel_for(records.size(), [&](std::size_t i) {
        std::vector<QuadBox> kept;
        for (const auto& [cls, boxes] : partition_by_class(records[i].boxes)) {
            auto part = apply_nms(opts.algo, boxes, opts);
            kept.insert(kept.end(), part.begin(), part.end());
        }
        records[i].boxes = std::move(kept);
    });
    save_detections(opts.out, records);
    echo_config(cfg, opts.out);
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    std::string detections;
    std::string ground_truth;
    std::string out_model;
    std::string log_csv;
    long steps = 10000;
    int batch = 8;
};

std::vector<TrainSample> build_train_units(
    const std::vector<DetectionRecord>& dets,
    const std::vector<DetectionRecord>& gts, const RunConfig& cfg) {
    std::map<std::string, const DetectionRecord*> gt_by_image;
    for (const DetectionRecord& g : gts) gt_by_image[g.image_id] = &g;

    std::vector<std::vector<TrainSample>> per_image(dets.size());
    parallel_for(dets.size(), [&](std::size_t i) {
        const DetectionRecord& rec = dets[i];
        const ImageMeta meta = rec.meta();
        const auto it = gt_by_image.find(rec.image_id);

        std::map<int, std::vector<QuadBox>> gt_parts;
        if (it != gt_by_image.end()) {
            gt_parts = partition_by_class(it->second->boxes);
        }
        for (const auto& [cls, boxes] : partition_by_class(rec.boxes)) {
            TrainSample sample;
            for (const Cluster& c :
                 locality_aware_cluster(boxes, cfg.cluster_threshold)) {
                sample.graphs.push_back(
                    build_subgraph(sample_nodes(c, cfg.node_count), meta,
                                   cfg.adj_threshold));
            }
            if (const auto gt_it = gt_parts.find(cls); gt_it != gt_parts.end()) {
                for (const QuadBox& g : gt_it->second) {
                    sample.targets.push_back(
                        normalize_features(canonicalize(g), meta));
                }
            }
            if (!sample.graphs.empty()) {
                per_image[i].push_back(std::move(sample));
            }
        }
    });

    std::vector<TrainSample> units;
    for (auto& v : per_image) {
        for (auto& s : v) units.push_back(std::move(s));
    }
    return units;
}

int run_train(const TrainOpts& opts, const RunConfig& cfg) {
    const auto dets = load_detections(opts.detections);
    const auto gts = load_detections(opts.ground_truth);
    std::vector<TrainSample> units = build_train_units(dets, gts, cfg);
    if (units.empty()) {
        throw std::runtime_error("train: no usable training units");
    }
    std::cerr << "train: " << units.size() << " units from " << dets.size()
              << " images\n";

    FusionConfig model_cfg;
    model_cfg.node_count = cfg.node_count;
    model_cfg.adj_threshold = cfg.adj_threshold;
    model_cfg.widths = cfg.widths;
    FusionModel model = init_fusion_model(model_cfg, cfg.seed);
    AdamState opt = make_adam_state(model, cfg.learning_rate,
                                    cfg.lr_decay_factor, cfg.lr_decay_steps);

    Rng shuffle_rng = Rng(cfg.seed).fork(0x7261696e);
    std::vector<std::size_t> order(units.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::ostringstream log;
    log << "step,loss,lr\n";
    std::size_t cursor = order.size();
    std::vector<TrainSample> batch;
    for (long step = 1; step <= opts.steps; ++step) {
        batch.clear();
        for (int b = 0; b < opts.batch; ++b) {
            if (cursor >= order.size()) {
                for (std::size_t i = order.size(); i-- > 1;) {
                    std::swap(order[i],
                              order[static_cast<std::size_t>(
                                  shuffle_rng.uniform_int(0, static_cast<int>(i)))]);
                }
                cursor = 0;
            }
            batch.push_back(units[order[cursor++]]);
        }
        const double lr = opt.current_lr();
        const double loss =
            train_step(model, opt, batch, cfg.loss_beta, cfg.loss_mode);
        char row[96];
        std::snprintf(row, sizeof(row), "%ld,%.9f,%.9f\n", step, loss, lr);
        log << row;
        if (step % 1000 == 0) {
            std::cerr << "train: step " << step << " loss " << loss << "\n";
        }
    }

    save_fusion_model(model, opts.out_model);
    if (!opts.log_csv.empty()) write_text_file(opts.log_csv, log.str());
    echo_config(cfg, opts.out_model);
    return 0;
}

// ---------------------------------------------------------------------------
// fuse

int run_fuse(const std::string& model_path, const std::string& in,
             const std::string& out, const RunConfig& cfg) {
    if (!fs::exists(model_path)) {
        throw std::runtime_error("model file not found: " + model_path);
    }
    const FusionModel model = load_fusion_model(model_path);
    auto records = load_detections(in);
    parallel_for(records.size(), [&](std::size_t i) {
        records[i].boxes =
            fuse(model, records[i].boxes, records[i].meta(), cfg.cluster_threshold);
    });
    save_detections(out, records);
    echo_config(cfg, out);
    return 0;
}

// ---------------------------------------------------------------------------
// eval / sweep

std::pair<std::vector<std::vector<QuadBox>>, std::vector<std::vector<QuadBox>>>
aligned_boxes(const std::vector<DetectionRecord>& preds,
              const std::vector<DetectionRecord>& gts) {
    std::map<std::string, const DetectionRecord*> gt_by_image;
    for (const DetectionRecord& g : gts) gt_by_image[g.image_id] = &g;

    std::vector<std::vector<QuadBox>> p, g;
    std::map<std::string, bool> seen;
    for (const DetectionRecord& rec : preds) {
        p.push_back(rec.boxes);
        const auto it = gt_by_image.find(rec.image_id);
        g.push_back(it != gt_by_image.end() ? it->second->boxes
                                            : std::vector<QuadBox>{});
        seen[rec.image_id] = true;
    }
    for (const DetectionRecord& rec : gts) {  // GT images with no predictions
        if (!seen.count(rec.image_id)) {
            p.emplace_back();
            g.push_back(rec.boxes);
        }
    }
    return {std::move(p), std::move(g)};
}

std::string report_csv(const std::vector<EvalReport>& reports) {
    std::string csv =
        "algorithm,iou_threshold,precision,recall,f_measure,"
        "true_positives,false_positives,false_negatives\n";
    for (const EvalReport& report : reports) {
        for (const ThresholdRecord& r : report.records) {
            csv += report.algorithm + ',' + format_float(r.iou_threshold) + ',' +
                   format_float(r.precision) + ',' + format_float(r.recall) +
                   ',' + format_float(r.f_measure) + ',' +
                   std::to_string(r.true_positives) + ',' +
                   std::to_string(r.false_positives) + ',' +
                   std::to_string(r.false_negatives) + '\n';
        }
    }
    return csv;
}

std::string report_json(const std::vector<EvalReport>& reports) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const EvalReport& report : reports) {
        nlohmann::ordered_json jr;
        jr["algorithm"] = report.algorithm;
        jr["records"] = nlohmann::ordered_json::array();
        for (const ThresholdRecord& r : report.records) {
            nlohmann::ordered_json rec;
            rec["iou_threshold"] = r.iou_threshold;
            rec["precision"] = r.precision;
            rec["recall"] = r.recall;
            rec["f_measure"] = r.f_measure;
            rec["true_positives"] = r.true_positives;
            rec["false_positives"] = r.false_positives;
            rec["false_negatives"] = r.false_negatives;
            jr["records"].push_back(std::move(rec));
        }
        doc.push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

// Minimal F-vs-threshold line chart, one polyline per report.
std::string report_svg(const std::vector<EvalReport>& reports) {
    const double width = 640, height = 420;
    const double mx = 60, my = 40;  // margins
    const double plot_w = width - 2 * mx;
    const double plot_h = height - 2 * my;
    double t_min = 1e9, t_max = -1e9;
    for (const auto& rep : reports) {
        for (const auto& r : rep.records) {
            t_min = std::min(t_min, r.iou_threshold);
            t_max = std::max(t_max, r.iou_threshold);
        }
    }
    if (!(t_max > t_min)) t_max = t_min + 1.0;
    auto x_of = [&](double t) { return mx + (t - t_min) / (t_max - t_min) * plot_w; };
    auto y_of = [&](double f) { return my + (1.0 - f) * plot_h; };

    const char* palette[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad",
                             "#d35400", "#16a085"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        const double f = i / 10.0;
        svg << "<line x1=\"" << mx << "\" y1=\"" << y_of(f) << "\" x2=\""
            << width - mx << "\" y2=\"" << y_of(f)
            << "\" stroke=\"#eeeeee\"/>\n";
        svg << "<text x=\"" << mx - 8 << "\" y=\"" << y_of(f) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << format_float(f).substr(0, 4)
            << "</text>\n";
    }
    for (const auto& rep : reports) {
        for (const auto& r : rep.records) {
            svg << "<text x=\"" << x_of(r.iou_threshold) << "\" y=\""
                << height - my + 18
                << "\" font-size=\"11\" text-anchor=\"middle\">"
                << format_float(r.iou_threshold).substr(0, 4) << "</text>\n";
        }
        break;
    }
    svg << "<line x1=\"" << mx << "\" y1=\"" << y_of(0) << "\" x2=\""
        << width - mx << "\" y2=\"" << y_of(0) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << mx << "\" y1=\"" << y_of(0) << "\" x2=\"" << mx
        << "\" y2=\"" << y_of(1) << "\" stroke=\"black\"/>\n";
    for (std::size_t rep_i = 0; rep_i < reports.size(); ++rep_i) {
        const auto& rep = reports[rep_i];
        const char* color = palette[rep_i % 6];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (const auto& r : rep.records) {
            svg << x_of(r.iou_threshold) << ',' << y_of(r.f_measure) << ' ';
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << width - mx - 150 << "\" y=\""
            << my + 16 * static_cast<double>(rep_i) << "\" font-size=\"12\" fill=\""
            << color << "\">" << rep.algorithm << "</text>\n";
    }
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 6
        << "\" font-size=\"12\" text-anchor=\"middle\">evaluation IoU threshold"
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

struct SweepOpts {
    std::vector<std::string> preds;
    std::vector<std::string> labels;
    std::string gt;
    double min = 0.5;
    double max = 0.8;
    double step = 0.05;
    std::string out_csv;
    std::string out_json;
    std::string out_svg;
};

int run_sweep(const SweepOpts& opts, const RunConfig& cfg) {
    const auto gts = load_detections(opts.gt);
    const auto thresholds = threshold_range(opts.min, opts.max, opts.step);

    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < opts.preds.size(); ++i) {
        const auto preds = load_detections(opts.preds[i]);
        auto [p, g] = aligned_boxes(preds, gts);
        const std::string label =
            i < opts.labels.size() ? opts.labels[i] : fs::path(opts.preds[i]).stem().string();
        reports.push_back(sweep(p, g, thresholds, label));
    }

    fs::path primary;
    if (!opts.out_csv.empty()) {
        write_text_file(opts.out_csv, report_csv(reports));
        primary = opts.out_csv;
    }
    if (!opts.out_json.empty()) {
        write_text_file(opts.out_json, report_json(reports));
        if (primary.empty()) primary = opts.out_json;
    }
    if (!opts.out_svg.empty()) {
        write_text_file(opts.out_svg, report_svg(reports));
        if (primary.empty()) primary = opts.out_svg;
    }
    if (!primary.empty()) echo_config(cfg, primary);

    for (const auto& rep : reports) {
        for (const auto& r : rep.records) {
            std::printf("%s iou=%.2f P=%.4f R=%.4f F=%.4f\n",
                        rep.algorithm.c_str(), r.iou_threshold, r.precision,
                        r.recall, r.f_measure);
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
    std::string algo = "all";
    std::string in;
    std::string model;
    int reps = 5;
    std::string out_csv;
    NmsOpts nms;
};

AlgorithmRegistry build_registry(const BenchOpts& opts, const RunConfig& cfg,
                                 const FusionModel* model) {
    AlgorithmRegistry reg;
    const NmsOpts nms_opts = opts.nms;
    auto add_nms = [&](const std::string& name) {
        reg.add(name, [name, nms_opts](const std::vector<QuadBox>& boxes,
                                       const ImageMeta&) {
            std::vector<QuadBox> kept;
            for (const auto& [cls, part] : partition_by_class(boxes)) {
                auto out = apply_nms(name, part, nms_opts);
                kept.insert(kept.end(), out.begin(), out.end());
            }
            return kept;
        });
    };
    for (const char* name :
         {"standard", "soft_linear", "soft_gaussian", "skew", "polygon", "lanms"}) {
        add_nms(name);
    }
    if (model) {
        const double cluster_threshold = cfg.cluster_threshold;
        reg.add("gfnet", [model, cluster_threshold](
                             const std::vector<QuadBox>& boxes,
                             const ImageMeta& meta) {
            return fuse(*model, boxes, meta, cluster_threshold);
        });
    }
    return reg;
}

int run_bench(const BenchOpts& opts, const RunConfig& cfg) {
    const auto records = load_detections(opts.in);
    std::vector<BenchInput> inputs;
    inputs.reserve(records.size());
    for (const DetectionRecord& rec : records) {
        inputs.push_back(BenchInput{rec.boxes, rec.meta()});
    }

    FusionModel model;
    const bool has_model = !opts.model.empty();
    if (has_model) model = load_fusion_model(opts.model);
    const AlgorithmRegistry registry =
        build_registry(opts, cfg, has_model ? &model : nullptr);

    std::vector<std::string> algos;
    if (opts.algo == "all") {
        algos = registry.names();
    } else {
        algos.push_back(opts.algo);
    }

    std::string csv = "algorithm,input,median_ms,q25_ms,q75_ms,samples_ms\n";
    for (const std::string& name : algos) {
        const BenchResult result = bench(name, registry, inputs, opts.reps);
        for (std::size_t i = 0; i < result.inputs.size(); ++i) {
            const BenchInputTiming& t = result.inputs[i];
            char head[160];
            std::snprintf(head, sizeof(head), "%s,%zu,%.3f,%.3f,%.3f,", name.c_str(),
                          i, t.median_ms, t.q25_ms, t.q75_ms);
            csv += head;
            for (std::size_t s = 0; s < t.samples_ms.size(); ++s) {
                if (s) csv += ';';
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", t.samples_ms[s]);
                csv += buf;
            }
            csv += '\n';
            std::printf("bench %-13s input %zu median %.3f ms (IQR %.3f..%.3f)\n",
                        name.c_str(), i, t.median_ms, t.q25_ms, t.q75_ms);
        }
    }
    if (!opts.out_csv.empty()) {
        write_text_file(opts.out_csv, csv);
        echo_config(cfg, opts.out_csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-processing for dense multi-oriented detection boxes"};
    app.require_subcommand(1);

    ConfigFlags flags[8];

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic scenes");
    SynthOpts synth_opts;
    synth_cmd->add_option("--out", synth_opts.out_dir, "output directory")
        ->required();
    synth_cmd->add_option("--scenes", synth_opts.scenes, "number of scenes");
    synth_cmd->add_option("--instances-min", synth_opts.instances_min, "");
    synth_cmd->add_option("--instances-max", synth_opts.instances_max, "");
    synth_cmd->add_option("--width", synth_opts.width, "image width");
    synth_cmd->add_option("--height", synth_opts.height, "image height");
    synth_cmd->add_option("--boxes-min", synth_opts.perturb.boxes_per_instance_min, "");
    synth_cmd->add_option("--boxes-max", synth_opts.perturb.boxes_per_instance_max, "");
    synth_cmd->add_option("--aspect-min", synth_opts.perturb.aspect_min, "");
    synth_cmd->add_option("--aspect-max", synth_opts.perturb.aspect_max, "");
    synth_cmd->add_option("--shrink-min", synth_opts.perturb.shrink_min, "");
    synth_cmd->add_option("--shrink-max", synth_opts.perturb.shrink_max, "");
    synth_cmd->add_option("--shrink-power", synth_opts.perturb.shrink_power, "");
    synth_cmd->add_option("--paragraph-min", synth_opts.perturb.paragraph_size_min, "");
    synth_cmd->add_option("--paragraph-max", synth_opts.perturb.paragraph_size_max, "");
    synth_cmd->add_option("--paragraph-gap-min", synth_opts.perturb.paragraph_gap_min, "");
    synth_cmd->add_option("--paragraph-gap-max", synth_opts.perturb.paragraph_gap_max, "");
    synth_cmd->add_option("--center-jitter", synth_opts.perturb.center_jitter_frac, "");
    synth_cmd->add_option("--vertex-jitter", synth_opts.perturb.vertex_jitter_frac, "");
    synth_cmd->add_option("--rotation-jitter", synth_opts.perturb.rotation_jitter_deg, "");
    synth_cmd->add_option("--score-noise", synth_opts.perturb.score_model.noise_stddev, "");
    synth_cmd->add_option("--classes", synth_opts.perturb.num_classes, "");
    synth_cmd->add_flag("--crowded", synth_opts.crowded,
                        "relax the instance separation constraint");
    flags[0].attach(*synth_cmd);

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "group dense boxes");
    std::string cluster_in, cluster_out;
    cluster_cmd->add_option("--in", cluster_in, "detections JSONL")->required();
    cluster_cmd->add_option("--out", cluster_out, "clusters JSONL")->required();
    flags[1].attach(*cluster_cmd);

    // nms
    auto* nms_cmd = app.add_subcommand("nms", "run an NMS baseline");
    NmsOpts nms_opts;
    nms_cmd->add_option("--algo", nms_opts.algo,
                        "standard|soft_linear|soft_gaussian|skew|rotated|polygon|lanms");
    nms_cmd->add_option("--in", nms_opts.in, "detections JSONL")->required();
    nms_cmd->add_option("--out", nms_opts.out, "output JSONL")->required();
    nms_cmd->add_option("--iou", nms_opts.iou, "suppression IoU threshold");
    nms_cmd->add_option("--sigma", nms_opts.sigma, "gaussian soft-NMS sigma");
    nms_cmd->add_option("--score-floor", nms_opts.score_floor, "soft-NMS drop floor");
    nms_cmd->add_option("--merge-threshold", nms_opts.merge_threshold,
                        "locality-aware merge threshold");
    nms_cmd->add_option("--nms-threshold", nms_opts.nms_threshold,
                        "locality-aware second-pass threshold");
    flags[2].attach(*nms_cmd);

    // train
    auto* train_cmd = app.add_subcommand("train", "train the fusion network");
    TrainOpts train_opts;
    train_cmd->add_option("--detections", train_opts.detections, "dense boxes JSONL")
        ->required();
    train_cmd->add_option("--ground-truth", train_opts.ground_truth, "GT JSONL")
        ->required();
    train_cmd->add_option("--out", train_opts.out_model, "model JSON path")
        ->required();
    train_cmd->add_option("--log", train_opts.log_csv, "training log CSV");
    train_cmd->add_option("--steps", train_opts.steps, "optimization steps");
    train_cmd->add_option("--batch", train_opts.batch, "images per step");
    flags[3].attach(*train_cmd);

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "fuse dense boxes with a model");
    std::string fuse_model, fuse_in, fuse_out;
    fuse_cmd->add_option("--model", fuse_model, "model JSON")->required();
    fuse_cmd->add_option("--in", fuse_in, "detections JSONL")->required();
    fuse_cmd->add_option("--out", fuse_out, "output JSONL")->required();
    flags[4].attach(*fuse_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "precision/recall/F at one threshold");
    std::string eval_pred, eval_gt, eval_csv, eval_json, eval_label = "predictions";
    double eval_iou = 0.5;
    eval_cmd->add_option("--pred", eval_pred, "predictions JSONL")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground truth JSONL")->required();
    eval_cmd->add_option("--iou", eval_iou, "matching IoU threshold");
    eval_cmd->add_option("--label", eval_label, "algorithm label");
    eval_cmd->add_option("--out-csv", eval_csv, "report CSV path");
    eval_cmd->add_option("--out-json", eval_json, "report JSON path");
    flags[5].attach(*eval_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "F-measure threshold sweep");
    SweepOpts sweep_opts;
    sweep_cmd->add_option("--pred", sweep_opts.preds, "predictions JSONL (repeatable)")
        ->required();
    sweep_cmd->add_option("--label", sweep_opts.labels, "curve labels");
    sweep_cmd->add_option("--gt", sweep_opts.gt, "ground truth JSONL")->required();
    sweep_cmd->add_option("--min", sweep_opts.min, "lowest threshold");
    sweep_cmd->add_option("--max", sweep_opts.max, "highest threshold");
    sweep_cmd->add_option("--step", sweep_opts.step, "threshold step");
    sweep_cmd->add_option("--out-csv", sweep_opts.out_csv, "sweep CSV path");
    sweep_cmd->add_option("--out-json", sweep_opts.out_json, "sweep JSON path");
    sweep_cmd->add_option("--svg", sweep_opts.out_svg, "F-vs-threshold SVG chart");
    flags[6].attach(*sweep_cmd);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "time the post-processing zoo");
    BenchOpts bench_opts;
    bench_cmd->add_option("--algo", bench_opts.algo, "algorithm name or 'all'");
    bench_cmd->add_option("--in", bench_opts.in, "detections JSONL")->required();
    bench_cmd->add_option("--model", bench_opts.model, "model JSON enabling gfnet");
    bench_cmd->add_option("--reps", bench_opts.reps, "repetitions (>= 3)");
    bench_cmd->add_option("--out", bench_opts.out_csv, "timing CSV path");
    bench_cmd->add_option("--iou", bench_opts.nms.iou, "NMS threshold");
    bench_cmd->add_option("--merge-threshold", bench_opts.nms.merge_threshold, "");
    bench_cmd->add_option("--nms-threshold", bench_opts.nms.nms_threshold, "");
    flags[7].attach(*bench_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return run_synth(synth_opts, flags[0].resolve());
        if (cluster_cmd->parsed()) {
            return run_cluster(cluster_in, cluster_out, flags[1].resolve());
        }
        if (nms_cmd->parsed()) return run_nms(nms_opts, flags[2].resolve());
        if (train_cmd->parsed()) return run_train(train_opts, flags[3].resolve());
        if (fuse_cmd->parsed()) {
            return run_fuse(fuse_model, fuse_in, fuse_out, flags[4].resolve());
        }
        if (eval_cmd->parsed()) {
            const RunConfig cfg = flags[5].resolve();
            const auto preds = load_detections(eval_pred);
            const auto gts = load_detections(eval_gt);
            auto [p, g] = aligned_boxes(preds, gts);
            const auto report = sweep(p, g, {eval_iou}, eval_label);
            std::vector<EvalReport> reports{report};
            fs::path primary;
            if (!eval_csv.empty()) {
                write_text_file(eval_csv, report_csv(reports));
                primary = eval_csv;
            }
            if (!eval_json.empty()) {
                write_text_file(eval_json, report_json(reports));
                if (primary.empty()) primary = eval_json;
            }
            if (!primary.empty()) echo_config(cfg, primary);
            const auto& r = report.records.front();
            std::printf("%s iou=%.2f P=%.4f R=%.4f F=%.4f\n", eval_label.c_str(),
                        r.iou_threshold, r.precision, r.recall, r.f_measure);
            return 0;
        }
        if (sweep_cmd->parsed()) return run_sweep(sweep_opts, flags[6].resolve());
        if (bench_cmd->parsed()) return run_bench(bench_opts, flags[7].resolve());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
