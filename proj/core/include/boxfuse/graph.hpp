// Instance sub-graph construction: fixed-size node sampling, feature
// normalization, IoU weight matrix, binarized adjacency, normalized
// Laplacian and the weighted aggregation matrix.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "boxfuse/clustering.hpp"
#include "boxfuse/geometry.hpp"

namespace boxfuse {

inline constexpr int kFeatureDim = 10;  // (x_c, y_c, four vertex offsets)

struct InstanceSubGraph {
    Eigen::MatrixXd node_features;  // N x 10
    Eigen::MatrixXd iou_weights;    // W: pairwise IoU, unit diagonal
    Eigen::MatrixXd adjacency;      // binarized W plus self-loops
    Eigen::MatrixXd laplacian;      // symmetric-normalized adjacency
    Eigen::MatrixXd aggregation;    // laplacian weighted entrywise by W
    std::string source_cluster_id;
    ImageMeta image_meta;

    int node_count() const { return static_cast<int>(node_features.rows()); }
};

/// Fixed-size node sample: members sorted by descending score; when the
/// cluster is large a systematic (evenly strided) sample starting at the
/// top-scoring box, otherwise the sorted list cycled until length n.
/// Throws std::invalid_argument on an empty cluster or n < 1.
std::vector<QuadBox> sample_nodes(const Cluster& cluster, int n);

/// 10-vector u = (x_c/w, y_c/h, (x_i - x_c)/w, (y_i - y_c)/h for i = 1..4);
/// the center is the mean of the four vertices.
Eigen::VectorXd normalize_features(const QuadBox& box, const ImageMeta& meta);

/// Inverse of normalize_features; the returned box has score 0.
QuadBox denormalize_features(const Eigen::VectorXd& u, const ImageMeta& meta);

/// Builds all matrices for one sampled cluster. Duplicated nodes (cyclic
/// padding) are real nodes whose mutual IoU is exactly 1.
InstanceSubGraph build_subgraph(const std::vector<QuadBox>& sampled,
                                const ImageMeta& meta, double adj_threshold,
                                std::string cluster_id = {});

/// Debug serialization (node features, W, adjacency) for golden-file tests.
std::string subgraph_debug_json(const InstanceSubGraph& g);

}  // namespace boxfuse
