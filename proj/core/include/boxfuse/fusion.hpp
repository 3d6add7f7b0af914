// The graph fusion network: three graph layers over aggregated neighbor
// features, a node-collapsing fusion head, bipartite-matched smooth-L1
// training, and the end-to-end cluster->fuse inference path.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "boxfuse/graph.hpp"

namespace boxfuse {

/// `kContinuous` (default) is the standard beta-scaled smooth L1, continuous
/// in value and slope at |x| = beta. `kPaperLiteral` is the verbatim
/// published form 0.5 x^2 / |x| - 0.5, which for beta < 1 jumps at |x| = beta
/// and is negative on beta <= |x| < 0.5; it exists for fidelity experiments.
enum class LossMode { kContinuous, kPaperLiteral };

double smooth_l1(double x, double beta, LossMode mode);
double smooth_l1_grad(double x, double beta, LossMode mode);

/// Sum of smooth_l1 over the 10 coordinate residuals.
double box_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                double beta, LossMode mode);

struct FusionConfig {
    int node_count = 128;
    double adj_threshold = 0.7;
    std::vector<int> widths = {10, 64, 64, 10};  // per-layer feature sizes
};

/// Learnable parameters. Layer l consumes the concatenation of node features
/// with their aggregated neighborhood, so its weight is (2 * widths[l]) x
/// widths[l + 1]. The fusion head collapses the node dimension with one
/// weight per node plus a scalar bias.
struct FusionModel {
    FusionConfig config;
    std::vector<Eigen::MatrixXd> layer_weights;
    Eigen::VectorXd fusion_weights;
    double fusion_bias = 0.0;
};

/// Deterministic init: every weight uniform in [-a, a] with
/// a = sqrt(6 / (fan_in + fan_out)), bias zero.
FusionModel init_fusion_model(const FusionConfig& config, std::uint64_t seed);

struct ForwardCache {
    struct PerGraph {
        std::vector<Eigen::MatrixXd> inputs;   // X^(l), N x d_l
        std::vector<Eigen::MatrixXd> concats;  // [X | G X], N x 2 d_l
        std::vector<Eigen::MatrixXd> pre_act;  // (X | G X) W, N x d_{l+1}
    };
    std::vector<PerGraph> graphs;
    bool empty() const { return graphs.empty(); }
};

/// Runs the network over a batch of sub-graphs and returns one fused
/// 10-vector per graph (B x 10). ReLU on the hidden layers, identity on the
/// regression layer, then the fusion head collapses nodes. Sub-graphs must
/// all have the model's node count; pass a cache to enable backward().
Eigen::MatrixXd fusion_forward(const FusionModel& model,
                               std::span<const InstanceSubGraph> batch,
                               ForwardCache* cache = nullptr);

struct FusionGradients {
    std::vector<Eigen::MatrixXd> layer_weights;
    Eigen::VectorXd fusion_weights;
    double fusion_bias = 0.0;
};

/// Exact reverse-mode gradients of sum(upstream .* forward(batch)) for every
/// parameter. Requires the cache produced by the matching forward call;
/// throws std::logic_error when it is missing or stale.
FusionGradients fusion_backward(const FusionModel& model,
                                std::span<const InstanceSubGraph> batch,
                                const ForwardCache& cache,
                                const Eigen::MatrixXd& upstream);

/// Adam with bias correction and a stepped learning-rate schedule:
/// lr = initial_lr * decay_factor^floor(step / decay_interval).
struct AdamState {
    double initial_lr = 1e-4;
    double decay_factor = 0.94;
    long decay_interval = 10000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;  // completed updates

    std::vector<Eigen::MatrixXd> m_layers;
    std::vector<Eigen::MatrixXd> v_layers;
    Eigen::VectorXd m_fusion;
    Eigen::VectorXd v_fusion;
    double m_bias = 0.0;
    double v_bias = 0.0;

    /// Learning rate the next update will use.
    double current_lr() const;
};

AdamState make_adam_state(const FusionModel& model, double initial_lr = 1e-4,
                          double decay_factor = 0.94,
                          long decay_interval = 10000);

/// In-place Adam update of one parameter block; `t` is the 1-based update
/// index used for bias correction.
void adam_update(Eigen::Ref<Eigen::MatrixXd> param,
                 const Eigen::MatrixXd& grad, Eigen::Ref<Eigen::MatrixXd> m,
                 Eigen::Ref<Eigen::MatrixXd> v, long t, double lr,
                 double beta1, double beta2, double epsilon);

/// One matching unit: the sub-graphs and ground-truth targets of one
/// (image, class) partition.
struct TrainSample {
    std::vector<InstanceSubGraph> graphs;
    std::vector<Eigen::VectorXd> targets;  // normalized 10-vectors
};

/// One optimization step. Per sample: cost matrix of box_loss over
/// (prediction, target) pairs, optimal bipartite matching, matched losses
/// summed; unmatched predictions and targets contribute nothing. The sum is
/// averaged over the batch, gradients flow through the matched pairs, and
/// one Adam update runs at the scheduled rate. A batch without any ground
/// truth is skipped: loss 0, parameters and step untouched.
double train_step(FusionModel& model, AdamState& opt,
                  std::span<const TrainSample> batch, double loss_beta,
                  LossMode mode);

/// End-to-end inference: per class partition, cluster -> sample ->
/// sub-graph -> forward -> de-normalize. One box per cluster, scored with
/// the mean member score clamped to [0, 1].
std::vector<QuadBox> fuse(const FusionModel& model,
                          const std::vector<QuadBox>& boxes,
                          const ImageMeta& meta, double cluster_threshold);

/// Versioned JSON model file (shapes, row-major coefficients, hyperparams).
void save_fusion_model(const FusionModel& model,
                       const std::filesystem::path& path);
FusionModel load_fusion_model(const std::filesystem::path& path);

}  // namespace boxfuse
