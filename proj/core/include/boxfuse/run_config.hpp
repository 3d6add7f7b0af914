// Run configuration shared by the CLI subcommands. Precedence is
// CLI flags > config file > built-in defaults; the effective config is
// echoed next to every artifact for provenance.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "boxfuse/fusion.hpp"

namespace boxfuse {

struct RunConfig {
    double cluster_threshold = 0.5;
    double adj_threshold = 0.7;
    int node_count = 128;
    double loss_beta = 0.33;
    LossMode loss_mode = LossMode::kContinuous;
    double learning_rate = 1e-4;
    double lr_decay_factor = 0.94;
    int lr_decay_steps = 10000;
    std::uint64_t seed = 0;
    std::vector<int> widths = {10, 64, 64, 10};

    void validate() const;

    /// Canonical JSON echo, stable across runs with equal settings.
    std::string to_json_string() const;

    /// Overwrites only the fields present in the file.
    void apply_json_file(const std::filesystem::path& path);
};

std::string loss_mode_name(LossMode mode);
LossMode parse_loss_mode(const std::string& name);

}  // namespace boxfuse
