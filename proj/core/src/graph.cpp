#include "boxfuse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace boxfuse {

std::vector<QuadBox> sample_nodes(const Cluster& cluster, int n) {
    if (cluster.members.empty()) {
        throw std::invalid_argument("sample_nodes: empty cluster");
    }
    if (n < 1) {
        throw std::invalid_argument("sample_nodes: n must be >= 1");
    }

    std::vector<QuadBox> sorted = cluster.members;
    std::sort(sorted.begin(), sorted.end(), [](const QuadBox& a, const QuadBox& b) {
        if (a.score != b.score) return a.score > b.score;
        return lex_less(a.vertices, b.vertices);
    });

    const std::size_t m = sorted.size();
    std::vector<QuadBox> out;
    out.reserve(static_cast<std::size_t>(n));
    if (m >= static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) {
            out.push_back(sorted[(static_cast<std::size_t>(i) * m) /
                                 static_cast<std::size_t>(n)]);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            out.push_back(sorted[static_cast<std::size_t>(i) % m]);
        }
    }
    return out;
}

Eigen::VectorXd normalize_features(const QuadBox& box, const ImageMeta& meta) {
    if (meta.width <= 0 || meta.height <= 0) {
        throw std::invalid_argument("normalize_features: image dims must be positive");
    }
    const double w = static_cast<double>(meta.width);
    const double h = static_cast<double>(meta.height);
    const Vec2 c = quad_center(box.vertices);

    Eigen::VectorXd u(kFeatureDim);
    u(0) = c.x / w;
    u(1) = c.y / h;
    for (int i = 0; i < 4; ++i) {
        u(2 + 2 * i) = (box.vertices[static_cast<std::size_t>(i)].x - c.x) / w;
        u(3 + 2 * i) = (box.vertices[static_cast<std::size_t>(i)].y - c.y) / h;
    }
    return u;
}

QuadBox denormalize_features(const Eigen::VectorXd& u, const ImageMeta& meta) {
    if (u.size() != kFeatureDim) {
        throw std::invalid_argument("denormalize_features: expected a 10-vector");
    }
    const double w = static_cast<double>(meta.width);
    const double h = static_cast<double>(meta.height);
    const double cx = u(0) * w;
    const double cy = u(1) * h;
    QuadBox box;
    for (int i = 0; i < 4; ++i) {
        box.vertices[static_cast<std::size_t>(i)] =
            Vec2{u(2 + 2 * i) * w + cx, u(3 + 2 * i) * h + cy};
    }
    return box;
}

InstanceSubGraph build_subgraph(const std::vector<QuadBox>& sampled,
                                const ImageMeta& meta, double adj_threshold,
                                std::string cluster_id) {
    if (sampled.empty()) {
        throw std::invalid_argument("build_subgraph: no sampled nodes");
    }
    if (!(adj_threshold > 0.0 && adj_threshold < 1.0)) {
        throw std::invalid_argument("build_subgraph: adj_threshold must be in (0, 1)");
    }
    const int n = static_cast<int>(sampled.size());

    std::vector<QuadBox> nodes(sampled.size());
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        nodes[i] = canonicalize(sampled[i]);
    }

    // Cyclic padding repeats boxes; computing IoU once per distinct pair
    // keeps large padded graphs cheap.
    std::vector<int> distinct_of(nodes.size());
    std::vector<int> rep_index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        int found = -1;
        for (std::size_t r = 0; r < rep_index.size(); ++r) {
            if (nodes[static_cast<std::size_t>(rep_index[r])].vertices ==
                nodes[i].vertices) {
                found = static_cast<int>(r);
                break;
            }
        }
        if (found < 0) {
            found = static_cast<int>(rep_index.size());
            rep_index.push_back(static_cast<int>(i));
        }
        distinct_of[i] = found;
    }
    const int d = static_cast<int>(rep_index.size());
    Eigen::MatrixXd distinct_iou = Eigen::MatrixXd::Ones(d, d);
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            const double v = detail::iou_canonical(
                nodes[static_cast<std::size_t>(rep_index[a])].vertices,
                nodes[static_cast<std::size_t>(rep_index[b])].vertices);
            distinct_iou(a, b) = v;
            distinct_iou(b, a) = v;
        }
    }

    InstanceSubGraph g;
    g.source_cluster_id = std::move(cluster_id);
    g.image_meta = meta;

    g.node_features.resize(n, kFeatureDim);
    for (int i = 0; i < n; ++i) {
        g.node_features.row(i) =
            normalize_features(nodes[static_cast<std::size_t>(i)], meta).transpose();
    }

    g.iou_weights.resize(n, n);
    g.adjacency = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        g.iou_weights(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = distinct_iou(distinct_of[static_cast<std::size_t>(i)],
                                          distinct_of[static_cast<std::size_t>(j)]);
            g.iou_weights(i, j) = v;
            g.iou_weights(j, i) = v;
            if (v >= adj_threshold) {
                g.adjacency(i, j) = 1.0;
                g.adjacency(j, i) = 1.0;
            }
        }
    }

    const Eigen::VectorXd degree = g.adjacency.rowwise().sum();
    g.laplacian.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            g.laplacian(i, j) =
                g.adjacency(i, j) / std::sqrt(degree(i) * degree(j));
        }
    }
    g.aggregation = g.laplacian.cwiseProduct(g.iou_weights);
    return g;
}

std::string subgraph_debug_json(const InstanceSubGraph& g) {
    auto matrix_rows = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                row.push_back(m(i, j));
            }
            rows.push_back(std::move(row));
        }
        return rows;
    };

    nlohmann::json doc;
    doc["image_id"] = g.image_meta.image_id;
    doc["width"] = g.image_meta.width;
    doc["height"] = g.image_meta.height;
    doc["cluster_id"] = g.source_cluster_id;
    doc["node_features"] = matrix_rows(g.node_features);
    doc["iou_weights"] = matrix_rows(g.iou_weights);
    doc["adjacency"] = matrix_rows(g.adjacency);
    return doc.dump();
}

}  // namespace boxfuse
