#include "boxfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boxfuse/rng.hpp"

namespace boxfuse {

namespace {

constexpr double kDegToRad = 0.017453292519943295;

Quad make_rect(Vec2 center, double angle_rad, double half_long,
               double half_short) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const Vec2 u{c * half_long, s * half_long};
    const Vec2 v{-s * half_short, c * half_short};
    return Quad{center - u - v, center + u - v, center + u + v, center - u + v};
}

void validate(const PerturbSpec& spec) {
    if (spec.boxes_per_instance_min < 1 ||
        spec.boxes_per_instance_max < spec.boxes_per_instance_min) {
        throw std::invalid_argument("synth: empty boxes_per_instance range");
    }
    if (spec.center_jitter_frac < 0 || spec.vertex_jitter_frac < 0 ||
        spec.rotation_jitter_deg < 0) {
        throw std::invalid_argument("synth: jitter fractions must be >= 0");
    }
    if (!(spec.shrink_min > 0.0) || spec.shrink_max < spec.shrink_min ||
        spec.shrink_max > 1.0) {
        throw std::invalid_argument("synth: shrink span must satisfy 0 < lo <= hi <= 1");
    }
    if (!(spec.shrink_power > 0.0)) {
        throw std::invalid_argument("synth: shrink_power must be positive");
    }
    if (spec.aspect_min < 1.0 || spec.aspect_max < spec.aspect_min) {
        throw std::invalid_argument("synth: bad aspect range");
    }
    if (spec.num_classes < 1) {
        throw std::invalid_argument("synth: num_classes must be >= 1");
    }
    if (spec.paragraph_size_min < 1 ||
        spec.paragraph_size_max < spec.paragraph_size_min) {
        throw std::invalid_argument("synth: empty paragraph size range");
    }
    if (spec.paragraph_gap_min < 0.0 ||
        spec.paragraph_gap_max < spec.paragraph_gap_min) {
        throw std::invalid_argument("synth: bad paragraph gap range");
    }
}

struct Instance {
    Vec2 center;
    double angle;
    double long_len;
    double short_len;
    QuadBox box;
};

}  // namespace

Scene generate_scene(const PerturbSpec& spec, int num_instances,
                     const ImageMeta& meta) {
    validate(spec);
    if (meta.width <= 0 || meta.height <= 0) {
        throw std::invalid_argument("synth: image dims must be positive");
    }
    Scene scene;
    scene.meta = meta;
    if (num_instances <= 0) return scene;

    Rng rng(spec.seed);
    const double w = static_cast<double>(meta.width);
    const double h = static_cast<double>(meta.height);

    std::vector<Instance> instances;
    auto finish_instance = [&](Instance& cand) {
        cand.box.vertices = canonicalize(make_rect(
            cand.center, cand.angle, 0.5 * cand.long_len, 0.5 * cand.short_len));
        cand.box.score = 1.0;
        if (spec.num_classes > 1) {
            cand.box.class_id = rng.uniform_int(0, spec.num_classes - 1);
        }
    };
    auto worst_overlap = [&](const Instance& cand) {
        double overlap = 0.0;
        for (const Instance& other : instances) {
            overlap = std::max(overlap, iou(cand.box, other.box));
        }
        return overlap;
    };
    auto inside_image = [&](const Instance& cand) {
        for (const Vec2& p : cand.box.vertices) {
            if (p.x < 0.0 || p.x > w || p.y < 0.0 || p.y > h) return false;
        }
        return true;
    };

    int paragraph_left = 0;  // lines remaining in the current paragraph
    Instance previous{};
    while (static_cast<int>(instances.size()) < num_instances) {
        Instance placed{};
        bool have_placed = false;

        if (paragraph_left > 0) {
            // Stack the next parallel line under the previous one.
            for (int attempt = 0; attempt < 32 && !have_placed; ++attempt) {
                Instance cand = previous;
                cand.long_len = previous.long_len * rng.uniform(0.85, 1.15);
                const double gap =
                    rng.uniform(spec.paragraph_gap_min, spec.paragraph_gap_max) *
                    previous.short_len;
                const Vec2 normal{-std::sin(previous.angle),
                                  std::cos(previous.angle)};
                cand.center =
                    previous.center +
                    (0.5 * previous.short_len + gap + 0.5 * cand.short_len) *
                        normal;
                finish_instance(cand);
                if (inside_image(cand) &&
                    worst_overlap(cand) < spec.max_gt_pairwise_iou) {
                    placed = cand;
                    have_placed = true;
                }
            }
            if (!have_placed) {
                paragraph_left = 0;  // paragraph ran out of room
            }
        }

        if (!have_placed) {
            Instance best{};
            double best_overlap = std::numeric_limits<double>::infinity();
            for (int attempt = 0; attempt < 200; ++attempt) {
                Instance cand;
                cand.short_len =
                    rng.uniform(spec.short_side_min, spec.short_side_max);
                cand.long_len = cand.short_len *
                                rng.uniform(spec.aspect_min, spec.aspect_max);
                cand.angle = rng.uniform(-M_PI / 2.0, M_PI / 2.0);

                const double ac = std::abs(std::cos(cand.angle));
                const double as = std::abs(std::sin(cand.angle));
                double hx = 0.5 * (ac * cand.long_len + as * cand.short_len);
                double hy = 0.5 * (as * cand.long_len + ac * cand.short_len);
                const double max_hx = 0.42 * w;
                const double max_hy = 0.42 * h;
                if (hx > max_hx || hy > max_hy) {
                    const double scale = std::min(max_hx / hx, max_hy / hy);
                    cand.long_len *= scale;
                    cand.short_len *= scale;
                    hx *= scale;
                    hy *= scale;
                }
                cand.center =
                    Vec2{rng.uniform(hx, w - hx), rng.uniform(hy, h - hy)};
                finish_instance(cand);

                const double overlap = worst_overlap(cand);
                if (overlap < best_overlap) {
                    best_overlap = overlap;
                    best = cand;
                }
                if (overlap < spec.max_gt_pairwise_iou) break;
            }
            placed = best;
            paragraph_left =
                rng.uniform_int(spec.paragraph_size_min, spec.paragraph_size_max);
        }

        --paragraph_left;
        previous = placed;
        instances.push_back(placed);
        scene.ground_truth.push_back(placed.box);
    }

    for (std::size_t k = 0; k < instances.size(); ++k) {
        const Instance& inst = instances[k];
        const double diag = std::hypot(inst.long_len, inst.short_len);
        const double clamp_margin = spec.center_jitter_frac * diag +
                                    spec.vertex_jitter_frac * inst.long_len;
        const int copies =
            rng.uniform_int(spec.boxes_per_instance_min, spec.boxes_per_instance_max);
        for (int c = 0; c < copies; ++c) {
            const double shrink =
                spec.shrink_min +
                (spec.shrink_max - spec.shrink_min) *
                    std::pow(rng.uniform(), spec.shrink_power);
            // Shrunk window slides along the long axis: partial coverage.
            const double slide =
                rng.uniform(-0.5 * (1.0 - shrink), 0.5 * (1.0 - shrink)) *
                inst.long_len;
            const double angle =
                inst.angle +
                rng.normal(0.0, spec.rotation_jitter_deg) * kDegToRad;
            const Vec2 axis{std::cos(inst.angle), std::sin(inst.angle)};
            Vec2 center = inst.center + slide * axis;
            center.x += rng.normal(0.0, spec.center_jitter_frac * diag);
            center.y += rng.normal(0.0, spec.center_jitter_frac * diag);

            Quad q = make_rect(center, angle, 0.5 * shrink * inst.long_len,
                               0.5 * inst.short_len);
            if (spec.vertex_jitter_frac > 0.0) {
                const Vec2 u{std::cos(angle), std::sin(angle)};
                const Vec2 v{-u.y, u.x};
                for (Vec2& p : q) {
                    const double du = rng.normal(
                        0.0, spec.vertex_jitter_frac * shrink * inst.long_len);
                    const double dv =
                        rng.normal(0.0, spec.vertex_jitter_frac * inst.short_len);
                    p = p + du * u + dv * v;
                }
            }
            for (Vec2& p : q) {
                p.x = std::clamp(p.x, -clamp_margin, w + clamp_margin);
                p.y = std::clamp(p.y, -clamp_margin, h + clamp_margin);
            }

            QuadBox box;
            box.vertices = canonicalize(q);
            box.class_id = inst.box.class_id;
            const double quality = iou(box, inst.box);
            box.score = std::clamp(
                quality + rng.normal(0.0, spec.score_model.noise_stddev),
                spec.score_model.floor, spec.score_model.cap);
            scene.dense.push_back(std::move(box));
            scene.dense_origin.push_back(static_cast<int>(k));
        }
    }
    return scene;
}

}  // namespace boxfuse
