// The duplicate-removal / duplicate-fusion baseline zoo.
//
// All variants share the same contract shape: inputs are canonicalized, ties
// on score break by vertex order, and outputs come back sorted by descending
// score. They differ in the overlap metric and in what happens to neighbors.
#pragma once

#include <vector>

#include "boxfuse/geometry.hpp"

namespace boxfuse {

enum class SoftNmsMethod { kLinear, kGaussian };

/// Greedy suppression on axis-aligned bounding boxes of the quads.
std::vector<QuadBox> standard_nms(std::vector<QuadBox> boxes,
                                  double iou_threshold);

/// Score-decay suppression: linear decays neighbors with IoU >= threshold by
/// (1 - IoU); gaussian decays every neighbor by exp(-IoU^2 / sigma). Boxes
/// whose score falls below `score_floor` are dropped. Coordinates are never
/// modified. Overlap is exact polygon IoU.
std::vector<QuadBox> soft_nms(std::vector<QuadBox> boxes, SoftNmsMethod method,
                              double iou_threshold, double sigma = 0.5,
                              double score_floor = 0.001);

/// Greedy suppression on the minimum-area enclosing rotated rectangles.
/// For true rotated rectangles the conversion is the identity.
std::vector<QuadBox> skew_nms(std::vector<QuadBox> boxes, double iou_threshold);

/// Greedy suppression with exact polygon IoU on the quads themselves.
/// Reference implementation of the published baseline: every candidate pair
/// gets a full polygon intersection, no spatial pruning.
std::vector<QuadBox> polygon_nms(std::vector<QuadBox> boxes,
                                 double iou_threshold);

/// Row-major fusion: consecutive boxes (sorted by center y then x) whose IoU
/// with the running merged box reaches `merge_threshold` are merged with the
/// score-weighted average rule; merged scores are re-normalized to [0, 1] by
/// the contributor count, then a polygon NMS pass at `nms_threshold` removes
/// residual duplicates.
std::vector<QuadBox> locality_aware_nms(std::vector<QuadBox> boxes,
                                        double merge_threshold = 0.5,
                                        double nms_threshold = 0.2);

}  // namespace boxfuse
