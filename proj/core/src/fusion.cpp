#include "boxfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "boxfuse/hungarian.hpp"
#include "boxfuse/rng.hpp"

namespace boxfuse {

double smooth_l1(double x, double beta, LossMode mode) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("smooth_l1: beta must be positive");
    }
    const double ax = std::abs(x);
    if (mode == LossMode::kPaperLiteral) {
        return ax < beta ? 0.5 * x * x : ax - 0.5;
    }
    return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta, LossMode mode) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("smooth_l1_grad: beta must be positive");
    }
    const double ax = std::abs(x);
    const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    if (mode == LossMode::kPaperLiteral) {
        return ax < beta ? x : sign;
    }
    return ax < beta ? x / beta : sign;
}

double box_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                double beta, LossMode mode) {
    if (pred.size() != kFeatureDim || target.size() != kFeatureDim) {
        throw std::invalid_argument("box_loss: expected 10-vectors");
    }
    double total = 0.0;
    for (int i = 0; i < kFeatureDim; ++i) {
        total += smooth_l1(pred(i) - target(i), beta, mode);
    }
    return total;
}

namespace {

void validate_config(const FusionConfig& config) {
    if (config.node_count < 1) {
        throw std::invalid_argument("fusion: node_count must be >= 1");
    }
    if (config.widths.size() < 2 || config.widths.front() != kFeatureDim ||
        config.widths.back() != kFeatureDim) {
        throw std::invalid_argument(
            "fusion: widths must run from 10 to 10 with at least one layer");
    }
    for (int w : config.widths) {
        if (w < 1) throw std::invalid_argument("fusion: widths must be positive");
    }
}

}  // namespace

FusionModel init_fusion_model(const FusionConfig& config, std::uint64_t seed) {
    validate_config(config);
    FusionModel model;
    model.config = config;
    Rng rng(seed);

    const std::size_t layers = config.widths.size() - 1;
    model.layer_weights.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const int fan_in = 2 * config.widths[l];
        const int fan_out = config.widths[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i) {
            for (int j = 0; j < fan_out; ++j) {
                w(i, j) = rng.uniform(-a, a);
            }
        }
        model.layer_weights.push_back(std::move(w));
    }

    const double a = std::sqrt(6.0 / static_cast<double>(config.node_count + 1));
    model.fusion_weights.resize(config.node_count);
    for (int i = 0; i < config.node_count; ++i) {
        model.fusion_weights(i) = rng.uniform(-a, a);
    }
    model.fusion_bias = 0.0;
    return model;
}

Eigen::MatrixXd fusion_forward(const FusionModel& model,
                               std::span<const InstanceSubGraph> batch,
                               ForwardCache* cache) {
    validate_config(model.config);
    const std::size_t layers = model.layer_weights.size();
    const int n = model.config.node_count;

    if (cache) {
        cache->graphs.clear();
        cache->graphs.resize(batch.size());
    }

    Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()), kFeatureDim);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const InstanceSubGraph& g = batch[b];
        if (g.node_count() != n) {
            throw std::invalid_argument(
                "fusion_forward: sub-graph node count " +
                std::to_string(g.node_count()) + " does not match model " +
                std::to_string(n));
        }

        Eigen::MatrixXd x = g.node_features;
        ForwardCache::PerGraph* pg = cache ? &cache->graphs[b] : nullptr;
        for (std::size_t l = 0; l < layers; ++l) {
            Eigen::MatrixXd concat(x.rows(), 2 * x.cols());
            concat << x, g.aggregation * x;
            Eigen::MatrixXd z = concat * model.layer_weights[l];
            if (pg) {
                pg->inputs.push_back(x);
                pg->concats.push_back(concat);
                pg->pre_act.push_back(z);
            }
            if (l + 1 < layers) {
                x = z.cwiseMax(0.0);  // ReLU on hidden layers
            } else {
                x = std::move(z);  // identity on the regression layer
            }
        }
        if (pg) pg->inputs.push_back(x);  // Y_g, the fused feature matrix

        out.row(static_cast<Eigen::Index>(b)) =
            (x.transpose() * model.fusion_weights).transpose() +
            Eigen::RowVectorXd::Constant(kFeatureDim, model.fusion_bias);
    }
    return out;
}

FusionGradients fusion_backward(const FusionModel& model,
                                std::span<const InstanceSubGraph> batch,
                                const ForwardCache& cache,
                                const Eigen::MatrixXd& upstream) {
    const std::size_t layers = model.layer_weights.size();
    if (cache.graphs.size() != batch.size()) {
        throw std::logic_error(
            "fusion_backward: cache missing or built for a different batch");
    }
    if (upstream.rows() != static_cast<Eigen::Index>(batch.size()) ||
        upstream.cols() != kFeatureDim) {
        throw std::invalid_argument("fusion_backward: upstream must be B x 10");
    }

    FusionGradients grads;
    grads.layer_weights.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        grads.layer_weights.emplace_back(
            Eigen::MatrixXd::Zero(model.layer_weights[l].rows(),
                                  model.layer_weights[l].cols()));
    }
    grads.fusion_weights = Eigen::VectorXd::Zero(model.fusion_weights.size());
    grads.fusion_bias = 0.0;

    for (std::size_t b = 0; b < batch.size(); ++b) {
        const ForwardCache::PerGraph& pg = cache.graphs[b];
        if (pg.inputs.size() != layers + 1 || pg.pre_act.size() != layers) {
            throw std::logic_error("fusion_backward: stale forward cache");
        }
        const Eigen::VectorXd u =
            upstream.row(static_cast<Eigen::Index>(b)).transpose();
        const Eigen::MatrixXd& fused = pg.inputs.back();  // N x 10

        grads.fusion_weights += fused * u;
        grads.fusion_bias += u.sum();

        // d(loss)/d(Y_g) for the node-collapsing head.
        Eigen::MatrixXd dx = model.fusion_weights * u.transpose();  // N x 10
        for (std::size_t l = layers; l-- > 0;) {
            Eigen::MatrixXd dz = std::move(dx);
            if (l + 1 < layers) {
                // Hidden layers went through ReLU.
                dz = dz.cwiseProduct(
                    (pg.pre_act[l].array() > 0.0).cast<double>().matrix());
            }
            grads.layer_weights[l] += pg.concats[l].transpose() * dz;

            const Eigen::MatrixXd dconcat =
                dz * model.layer_weights[l].transpose();
            const Eigen::Index d = pg.inputs[l].cols();
            dx = dconcat.leftCols(d) +
                 batch[b].aggregation.transpose() * dconcat.rightCols(d);
        }
    }
    return grads;
}

double AdamState::current_lr() const {
    return initial_lr * std::pow(decay_factor,
                                 static_cast<double>(step / decay_interval));
}

AdamState make_adam_state(const FusionModel& model, double initial_lr,
                          double decay_factor, long decay_interval) {
    AdamState s;
    s.initial_lr = initial_lr;
    s.decay_factor = decay_factor;
    s.decay_interval = decay_interval;
    for (const Eigen::MatrixXd& w : model.layer_weights) {
        s.m_layers.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        s.v_layers.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    s.m_fusion = Eigen::VectorXd::Zero(model.fusion_weights.size());
    s.v_fusion = Eigen::VectorXd::Zero(model.fusion_weights.size());
    return s;
}

void adam_update(Eigen::Ref<Eigen::MatrixXd> param,
                 const Eigen::MatrixXd& grad, Eigen::Ref<Eigen::MatrixXd> m,
                 Eigen::Ref<Eigen::MatrixXd> v, long t, double lr,
                 double beta1, double beta2, double epsilon) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double mc = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double vc = 1.0 - std::pow(beta2, static_cast<double>(t));
    const Eigen::MatrixXd m_hat = m / mc;
    const Eigen::MatrixXd v_hat = v / vc;
    param -= lr * m_hat.cwiseQuotient(
                      v_hat.cwiseSqrt() +
                      Eigen::MatrixXd::Constant(v_hat.rows(), v_hat.cols(),
                                                epsilon));
}

double train_step(FusionModel& model, AdamState& opt,
                  std::span<const TrainSample> batch, double loss_beta,
                  LossMode mode) {
    std::size_t total_targets = 0;
    for (const TrainSample& s : batch) total_targets += s.targets.size();
    if (batch.empty() || total_targets == 0) return 0.0;

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;

    FusionGradients total;
    for (const Eigen::MatrixXd& w : model.layer_weights) {
        total.layer_weights.emplace_back(
            Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    total.fusion_weights = Eigen::VectorXd::Zero(model.fusion_weights.size());
    total.fusion_bias = 0.0;

    for (const TrainSample& sample : batch) {
        if (sample.graphs.empty()) continue;
        ForwardCache cache;
        const Eigen::MatrixXd preds =
            fusion_forward(model, sample.graphs, &cache);

        Eigen::MatrixXd upstream =
            Eigen::MatrixXd::Zero(preds.rows(), kFeatureDim);
        if (!sample.targets.empty()) {
            const int m = static_cast<int>(preds.rows());
            const int k = static_cast<int>(sample.targets.size());
            Eigen::MatrixXd cost(m, k);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < k; ++j) {
                    cost(i, j) =
                        box_loss(preds.row(i).transpose(),
                                 sample.targets[static_cast<std::size_t>(j)],
                                 loss_beta, mode);
                }
            }
            for (const auto& [pi, tj] : hungarian_match(cost)) {
                loss_sum += cost(pi, tj) * inv_batch;
                for (int c = 0; c < kFeatureDim; ++c) {
                    const double r =
                        preds(pi, c) -
                        sample.targets[static_cast<std::size_t>(tj)](c);
                    upstream(pi, c) =
                        smooth_l1_grad(r, loss_beta, mode) * inv_batch;
                }
            }
        }
        const FusionGradients g =
            fusion_backward(model, sample.graphs, cache, upstream);
        for (std::size_t l = 0; l < total.layer_weights.size(); ++l) {
            total.layer_weights[l] += g.layer_weights[l];
        }
        total.fusion_weights += g.fusion_weights;
        total.fusion_bias += g.fusion_bias;
    }

    const double lr = opt.current_lr();
    const long t = opt.step + 1;
    for (std::size_t l = 0; l < model.layer_weights.size(); ++l) {
        adam_update(model.layer_weights[l], total.layer_weights[l],
                    opt.m_layers[l], opt.v_layers[l], t, lr, opt.beta1,
                    opt.beta2, opt.epsilon);
    }
    adam_update(model.fusion_weights, total.fusion_weights, opt.m_fusion,
                opt.v_fusion, t, lr, opt.beta1, opt.beta2, opt.epsilon);
    {
        Eigen::MatrixXd p(1, 1), m(1, 1), v(1, 1), g(1, 1);
        p(0, 0) = model.fusion_bias;
        m(0, 0) = opt.m_bias;
        v(0, 0) = opt.v_bias;
        g(0, 0) = total.fusion_bias;
        adam_update(p, g, m, v, t, lr, opt.beta1, opt.beta2, opt.epsilon);
        model.fusion_bias = p(0, 0);
        opt.m_bias = m(0, 0);
        opt.v_bias = v(0, 0);
    }
    opt.step = t;
    return loss_sum;
}

std::vector<QuadBox> fuse(const FusionModel& model,
                          const std::vector<QuadBox>& boxes,
                          const ImageMeta& meta, double cluster_threshold) {
    std::vector<QuadBox> out;
    if (boxes.empty()) return out;

    // Clusters never span classes; unclassed boxes form their own partition.
    std::map<int, std::vector<QuadBox>> by_class;
    for (const QuadBox& b : boxes) {
        by_class[b.class_id.value_or(std::numeric_limits<int>::min())]
            .push_back(b);
    }

    for (auto& [cls, group] : by_class) {
        const std::vector<Cluster> clusters =
            locality_aware_cluster(std::move(group), cluster_threshold);
        std::vector<InstanceSubGraph> graphs;
        graphs.reserve(clusters.size());
        for (const Cluster& c : clusters) {
            graphs.push_back(build_subgraph(
                sample_nodes(c, model.config.node_count), meta,
                model.config.adj_threshold));
        }
        const Eigen::MatrixXd preds = fusion_forward(model, graphs);
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            QuadBox fused = denormalize_features(
                preds.row(static_cast<Eigen::Index>(i)).transpose(), meta);
            fused = canonicalize(fused);
            double mean_score = 0.0;
            for (const QuadBox& m : clusters[i].members) mean_score += m.score;
            mean_score /= static_cast<double>(clusters[i].members.size());
            fused.score = std::clamp(mean_score, 0.0, 1.0);
            if (cls != std::numeric_limits<int>::min()) fused.class_id = cls;
            out.push_back(std::move(fused));
        }
    }
    return out;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            data.push_back(m(i, c));
        }
    }
    j["data"] = std::move(data);
    return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw std::runtime_error("model file: matrix size mismatch");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = data[k++].get<double>();
        }
    }
    return m;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

void save_fusion_model(const FusionModel& model,
                       const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["node_count"] = model.config.node_count;
    doc["adj_threshold"] = model.config.adj_threshold;
    doc["widths"] = model.config.widths;
    nlohmann::json layers = nlohmann::json::array();
    for (const Eigen::MatrixXd& w : model.layer_weights) {
        layers.push_back(matrix_to_json(w));
    }
    doc["layer_weights"] = std::move(layers);
    doc["fusion_weights"] = std::vector<double>(
        model.fusion_weights.data(),
        model.fusion_weights.data() + model.fusion_weights.size());
    doc["fusion_bias"] = model.fusion_bias;

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw std::runtime_error("cannot write model file: " + path.string());
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

FusionModel load_fusion_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("model file not found: " + path.string());
    }
    nlohmann::json doc;
    in >> doc;
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
        throw std::runtime_error("model file: unsupported format version");
    }

    FusionModel model;
    model.config.node_count = doc.at("node_count").get<int>();
    model.config.adj_threshold = doc.at("adj_threshold").get<double>();
    model.config.widths = doc.at("widths").get<std::vector<int>>();
    validate_config(model.config);

    for (const auto& j : doc.at("layer_weights")) {
        model.layer_weights.push_back(matrix_from_json(j));
    }
    if (model.layer_weights.size() != model.config.widths.size() - 1) {
        throw std::runtime_error("model file: layer count mismatch");
    }
    for (std::size_t l = 0; l < model.layer_weights.size(); ++l) {
        if (model.layer_weights[l].rows() != 2 * model.config.widths[l] ||
            model.layer_weights[l].cols() != model.config.widths[l + 1]) {
            throw std::runtime_error("model file: layer shape mismatch");
        }
    }

    const auto fusion = doc.at("fusion_weights").get<std::vector<double>>();
    if (static_cast<int>(fusion.size()) != model.config.node_count) {
        throw std::runtime_error("model file: fusion weight length mismatch");
    }
    model.fusion_weights = Eigen::Map<const Eigen::VectorXd>(
        fusion.data(), static_cast<Eigen::Index>(fusion.size()));
    model.fusion_bias = doc.at("fusion_bias").get<double>();
    return model;
}

}  // namespace boxfuse
