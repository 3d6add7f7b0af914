// Synthetic dense-box generator: a desk-scale stand-in for detector output.
// Each ground-truth instance spawns degraded copies (shrunk along the long
// axis, jittered, rotated) whose confidences correlate noisily with quality.
#pragma once

#include <cstdint>
#include <vector>

#include "boxfuse/geometry.hpp"

namespace boxfuse {

struct ScoreModel {
    double noise_stddev = 0.1;
    double floor = 0.05;
    double cap = 1.0;
};

struct PerturbSpec {
    int boxes_per_instance_min = 8;
    int boxes_per_instance_max = 24;
    double center_jitter_frac = 0.03;  // fraction of the instance diagonal
    double vertex_jitter_frac = 0.02;  // fraction of the adjacent side length
    double shrink_min = 0.4;           // long-axis multiplicative span
    double shrink_max = 1.0;
    // Shape of the shrink draw within the span: s = lo + (hi - lo) * u^power.
    // 1 is uniform; larger values bias toward partial coverage, the regime
    // detectors show on long objects.
    double shrink_power = 1.0;
    double rotation_jitter_deg = 3.0;
    ScoreModel score_model;
    std::uint64_t seed = 0;

    // Instance geometry: rotated rectangles, long-thin shapes included.
    double aspect_min = 3.0;
    double aspect_max = 15.0;
    double short_side_min = 20.0;  // px
    double short_side_max = 48.0;
    double max_gt_pairwise_iou = 0.05;  // instance separation (rejection)
    int num_classes = 1;

    // Paragraph layout: instances may stack as parallel lines separated by
    // gap * short side along the shared normal, the way text lines do.
    // paragraph_size_max = 1 keeps every instance independent.
    int paragraph_size_min = 1;
    int paragraph_size_max = 1;
    double paragraph_gap_min = 0.4;  // fraction of the short side
    double paragraph_gap_max = 1.0;
};

struct Scene {
    ImageMeta meta;
    std::vector<QuadBox> ground_truth;  // scores fixed at 1
    std::vector<QuadBox> dense;
    // Index of the spawning instance per dense box. Diagnostics only,
    // never fed to the pipeline.
    std::vector<int> dense_origin;
};

/// Deterministic given (spec, num_instances, meta). Zero instances yield
/// empty outputs; with all jitters zero and shrink span {1, 1} every dense
/// box is bit-identical to its ground truth.
Scene generate_scene(const PerturbSpec& spec, int num_instances,
                     const ImageMeta& meta);

}  // namespace boxfuse
