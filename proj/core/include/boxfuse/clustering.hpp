// Locality-aware clustering: groups dense boxes into per-instance clusters,
// each carrying a running score-weighted merged representative.
#pragma once

#include <vector>

#include "boxfuse/geometry.hpp"

namespace boxfuse {

/// A group of detections judged to belong to one object instance.
/// The representative is the running merge of all members; its score is
/// the exact sum of member scores.
struct Cluster {
    std::vector<QuadBox> members;
    QuadBox representative;

    int contributor_count() const { return static_cast<int>(members.size()); }
};

/// Score-weighted merge of two boxes: the merged score is the sum of the
/// input scores and each coordinate is the score-weighted average.
/// Vertices are paired index-wise, so inputs should share canonical order.
/// Throws std::invalid_argument when both scores are zero.
QuadBox merge_boxes(const QuadBox& g, const QuadBox& p);

/// Row-major scan order: ascending center y, then center x, then vertex
/// order as the final tie-break.
bool row_major_less(const QuadBox& a, const QuadBox& b);

/// Groups boxes into clusters: boxes are pre-sorted row-major, then each
/// pass seeds a cluster with the first unabsorbed box and absorbs every
/// remaining box whose IoU with the running merged representative reaches
/// `iou_threshold`, updating the representative immediately. Unabsorbed
/// boxes seed later clusters. Empty input yields an empty cluster list.
std::vector<Cluster> locality_aware_cluster(std::vector<QuadBox> boxes,
                                            double iou_threshold);

}  // namespace boxfuse
