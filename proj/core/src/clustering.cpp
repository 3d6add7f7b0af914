#include "boxfuse/clustering.hpp"

#include <algorithm>
#include <stdexcept>

namespace boxfuse {

QuadBox merge_boxes(const QuadBox& g, const QuadBox& p) {
    const double total = g.score + p.score;
    if (total <= 0.0) {
        throw std::invalid_argument(
            "merge_boxes: undefined merge, both scores are zero");
    }
    QuadBox out = p;
    out.score = total;
    for (std::size_t i = 0; i < 4; ++i) {
        out.vertices[i] =
            (1.0 / total) * (g.score * g.vertices[i] + p.score * p.vertices[i]);
    }
    return out;
}

bool row_major_less(const QuadBox& a, const QuadBox& b) {
    const Vec2 ca = quad_center(a.vertices);
    const Vec2 cb = quad_center(b.vertices);
    if (ca.y != cb.y) return ca.y < cb.y;
    if (ca.x != cb.x) return ca.x < cb.x;
    return lex_less(a.vertices, b.vertices);
}

std::vector<Cluster> locality_aware_cluster(std::vector<QuadBox> boxes,
                                            double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument(
            "locality_aware_cluster: iou_threshold must be in (0, 1)");
    }
    std::vector<Cluster> clusters;
    if (boxes.empty()) return clusters;

    for (QuadBox& b : boxes) b = canonicalize(b);
    std::sort(boxes.begin(), boxes.end(), row_major_less);

    std::vector<QuadBox> remaining = std::move(boxes);
    std::vector<QuadBox> deferred;
    while (!remaining.empty()) {
        Cluster cluster;
        cluster.representative = remaining.front();
        cluster.members.push_back(remaining.front());

        // The stored representative is the raw Eq.-style fold; IoU tests run
        // against a canonical shadow so averaging artefacts cannot skew them.
        Quad rep_canon = cluster.representative.vertices;
        Aabb rep_aabb = quad_aabb(rep_canon);

        deferred.clear();
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const QuadBox& g = remaining[i];
            double overlap = 0.0;
            if (aabb_overlap(rep_aabb, quad_aabb(g.vertices))) {
                overlap = detail::iou_canonical(g.vertices, rep_canon);
            }
            if (overlap >= iou_threshold) {
                cluster.representative = merge_boxes(g, cluster.representative);
                cluster.members.push_back(g);
                rep_canon = canonicalize(cluster.representative.vertices);
                rep_aabb = quad_aabb(rep_canon);
            } else {
                deferred.push_back(g);
            }
        }
        std::swap(remaining, deferred);
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

}  // namespace boxfuse
