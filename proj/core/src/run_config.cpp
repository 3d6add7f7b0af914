#include "boxfuse/run_config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace boxfuse {

void RunConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(cluster_threshold)) {
        throw std::invalid_argument("config: cluster_threshold must be in (0, 1)");
    }
    if (!in_unit(adj_threshold)) {
        throw std::invalid_argument("config: adj_threshold must be in (0, 1)");
    }
    if (node_count < 1) {
        throw std::invalid_argument("config: node_count must be >= 1");
    }
    if (!(loss_beta > 0.0)) {
        throw std::invalid_argument("config: loss_beta must be positive");
    }
    if (!(learning_rate > 0.0) || !(lr_decay_factor > 0.0) || lr_decay_steps < 1) {
        throw std::invalid_argument("config: bad learning-rate schedule");
    }
    if (widths.size() < 2 || widths.front() != 10 || widths.back() != 10) {
        throw std::invalid_argument("config: widths must run from 10 to 10");
    }
}

std::string loss_mode_name(LossMode mode) {
    return mode == LossMode::kContinuous ? "continuous" : "paper_literal";
}

LossMode parse_loss_mode(const std::string& name) {
    if (name == "continuous") return LossMode::kContinuous;
    if (name == "paper_literal") return LossMode::kPaperLiteral;
    throw std::invalid_argument(
        "config: loss_mode must be 'continuous' or 'paper_literal', got '" +
        name + "'");
}

std::string RunConfig::to_json_string() const {
    nlohmann::ordered_json doc;
    doc["cluster_threshold"] = cluster_threshold;
    doc["adj_threshold"] = adj_threshold;
    doc["node_count"] = node_count;
    doc["loss_beta"] = loss_beta;
    doc["loss_mode"] = loss_mode_name(loss_mode);
    doc["learning_rate"] = learning_rate;
    doc["lr_decay_factor"] = lr_decay_factor;
    doc["lr_decay_steps"] = lr_decay_steps;
    doc["seed"] = seed;
    doc["widths"] = widths;
    return doc.dump(2) + "\n";
}

void RunConfig::apply_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("config file must hold a JSON object");
    }

    if (doc.contains("cluster_threshold")) cluster_threshold = doc["cluster_threshold"];
    if (doc.contains("adj_threshold")) adj_threshold = doc["adj_threshold"];
    if (doc.contains("node_count")) node_count = doc["node_count"];
    if (doc.contains("loss_beta")) loss_beta = doc["loss_beta"];
    if (doc.contains("loss_mode")) {
        loss_mode = parse_loss_mode(doc["loss_mode"].get<std::string>());
    }
    if (doc.contains("learning_rate")) learning_rate = doc["learning_rate"];
    if (doc.contains("lr_decay_factor")) lr_decay_factor = doc["lr_decay_factor"];
    if (doc.contains("lr_decay_steps")) lr_decay_steps = doc["lr_decay_steps"];
    if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("widths")) widths = doc["widths"].get<std::vector<int>>();
}

}  // namespace boxfuse
