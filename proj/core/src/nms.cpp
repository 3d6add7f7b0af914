#include "boxfuse/nms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boxfuse/clustering.hpp"

namespace boxfuse {

namespace {

void require_unit_interval(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        throw std::invalid_argument(std::string(what) +
                                    " must be in (0, 1), got " +
                                    std::to_string(v));
    }
}

bool score_order(const QuadBox& a, const QuadBox& b) {
    if (a.score != b.score) return a.score > b.score;
    return lex_less(a.vertices, b.vertices);
}

std::vector<QuadBox> canonical_sorted(std::vector<QuadBox> boxes) {
    for (QuadBox& b : boxes) b = canonicalize(b);
    std::sort(boxes.begin(), boxes.end(), score_order);
    return boxes;
}

template <typename IouFn>
std::vector<QuadBox> greedy_suppress(const std::vector<QuadBox>& sorted,
                                     double threshold, IouFn&& pair_iou) {
    const std::size_t n = sorted.size();
    std::vector<char> suppressed(n, 0);
    std::vector<QuadBox> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (suppressed[i]) continue;
        kept.push_back(sorted[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (suppressed[j]) continue;
            if (pair_iou(i, j) > threshold) suppressed[j] = 1;
        }
    }
    return kept;
}

}  // namespace

std::vector<QuadBox> standard_nms(std::vector<QuadBox> boxes,
                                  double iou_threshold) {
    require_unit_interval(iou_threshold, "standard_nms: iou_threshold");
    if (boxes.empty()) return {};
    const std::vector<QuadBox> sorted = canonical_sorted(std::move(boxes));

    std::vector<Aabb> aabbs(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        aabbs[i] = quad_aabb(sorted[i].vertices);
    }
    return greedy_suppress(sorted, iou_threshold, [&](std::size_t i, std::size_t j) {
        return aabb_iou(aabbs[i], aabbs[j]);
    });
}

std::vector<QuadBox> soft_nms(std::vector<QuadBox> boxes, SoftNmsMethod method,
                              double iou_threshold, double sigma,
                              double score_floor) {
    if (method == SoftNmsMethod::kLinear) {
        if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
            throw std::invalid_argument(
                "soft_nms: linear iou_threshold must be in (0, 1]");
        }
    } else if (!(sigma > 0.0)) {
        throw std::invalid_argument("soft_nms: sigma must be positive");
    }
    if (boxes.empty()) return {};

    std::vector<QuadBox> pool = canonical_sorted(std::move(boxes));
    std::vector<QuadBox> out;
    out.reserve(pool.size());
    while (!pool.empty()) {
        auto best = std::min_element(pool.begin(), pool.end(), score_order);
        const QuadBox selected = *best;
        pool.erase(best);
        out.push_back(selected);

        std::vector<QuadBox> survivors;
        survivors.reserve(pool.size());
        for (QuadBox& b : pool) {
            const double v =
                detail::iou_canonical(selected.vertices, b.vertices);
            if (method == SoftNmsMethod::kLinear) {
                if (v >= iou_threshold) b.score *= (1.0 - v);
            } else {
                b.score *= std::exp(-(v * v) / sigma);
            }
            if (b.score >= score_floor) survivors.push_back(b);
        }
        pool = std::move(survivors);
    }
    return out;
}

std::vector<QuadBox> skew_nms(std::vector<QuadBox> boxes,
                              double iou_threshold) {
    require_unit_interval(iou_threshold, "skew_nms: iou_threshold");
    if (boxes.empty()) return {};
    const std::vector<QuadBox> sorted = canonical_sorted(std::move(boxes));

    const std::size_t n = sorted.size();
    std::vector<Quad> rects(n);
    std::vector<Vec2> centers(n);
    std::vector<double> radius(n);  // half-diagonal, for the distance cull
    for (std::size_t i = 0; i < n; ++i) {
        rects[i] = min_area_rect(sorted[i].vertices);
        centers[i] = quad_center(rects[i]);
        const Vec2 d = rects[i][0] - centers[i];
        radius[i] = std::sqrt(dot(d, d));
    }
    return greedy_suppress(sorted, iou_threshold, [&](std::size_t i, std::size_t j) {
        const Vec2 d = centers[i] - centers[j];
        const double reach = radius[i] + radius[j];
        if (dot(d, d) > reach * reach) return 0.0;
        return detail::iou_canonical(rects[i], rects[j]);
    });
}

std::vector<QuadBox> polygon_nms(std::vector<QuadBox> boxes,
                                 double iou_threshold) {
    require_unit_interval(iou_threshold, "polygon_nms: iou_threshold");
    if (boxes.empty()) return {};
    const std::vector<QuadBox> sorted = canonical_sorted(std::move(boxes));
    return greedy_suppress(sorted, iou_threshold, [&](std::size_t i, std::size_t j) {
        return detail::iou_canonical(sorted[i].vertices, sorted[j].vertices);
    });
}

std::vector<QuadBox> locality_aware_nms(std::vector<QuadBox> boxes,
                                        double merge_threshold,
                                        double nms_threshold) {
    require_unit_interval(merge_threshold, "locality_aware_nms: merge_threshold");
    require_unit_interval(nms_threshold, "locality_aware_nms: nms_threshold");
    if (boxes.empty()) return {};

    for (QuadBox& b : boxes) b = canonicalize(b);
    std::sort(boxes.begin(), boxes.end(), row_major_less);

    std::vector<QuadBox> merged;
    QuadBox running = boxes.front();
    Quad running_canon = running.vertices;
    int contributors = 1;
    auto finalize = [&]() {
        QuadBox done = running;
        done.score /= static_cast<double>(contributors);
        merged.push_back(done);
    };
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        const QuadBox& g = boxes[i];
        const double v = detail::iou_canonical(g.vertices, running_canon);
        if (v >= merge_threshold) {
            running = merge_boxes(g, running);
            running_canon = canonicalize(running.vertices);
            ++contributors;
        } else {
            finalize();
            running = g;
            running_canon = g.vertices;
            contributors = 1;
        }
    }
    finalize();

    return polygon_nms(std::move(merged), nms_threshold);
}

}  // namespace boxfuse
