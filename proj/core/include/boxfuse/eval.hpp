// Detection quality metrics (precision/recall/F over IoU-threshold sweeps)
// and the wall-clock benchmark harness for post-processing algorithms.
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "boxfuse/geometry.hpp"

namespace boxfuse {

struct MatchCounts {
    long true_positives = 0;
    long false_positives = 0;
    long false_negatives = 0;
};

/// Greedy one-to-one matching: predictions in descending score order each
/// claim the unclaimed ground truth of highest IoU when that IoU reaches
/// the threshold.
MatchCounts match_detections(const std::vector<QuadBox>& preds,
                             const std::vector<QuadBox>& gts,
                             double iou_threshold);

struct ThresholdRecord {
    double iou_threshold = 0.0;
    double precision = 0.0;  // 0 when there are no predictions
    double recall = 0.0;
    double f_measure = 0.0;
    long true_positives = 0;
    long false_positives = 0;
    long false_negatives = 0;
};

struct EvalReport {
    std::string algorithm;
    std::vector<ThresholdRecord> records;  // strictly increasing thresholds
};

/// Inclusive threshold grid; e.g. (0.5, 0.8, 0.05) gives 7 values.
std::vector<double> threshold_range(double min, double max, double step);

/// Aggregates matching counts across images at every threshold.
EvalReport sweep(const std::vector<std::vector<QuadBox>>& preds_by_image,
                 const std::vector<std::vector<QuadBox>>& gts_by_image,
                 const std::vector<double>& thresholds,
                 std::string algorithm = {});

using PostProcessFn = std::function<std::vector<QuadBox>(
    const std::vector<QuadBox>&, const ImageMeta&)>;

/// Named post-processing algorithms available to `bench`; lookups of
/// unknown names fail listing the valid ones.
class AlgorithmRegistry {
  public:
    void add(std::string name, PostProcessFn fn);
    const PostProcessFn& at(const std::string& name) const;
    std::vector<std::string> names() const;

  private:
    std::map<std::string, PostProcessFn> algorithms_;
};

struct BenchInput {
    std::vector<QuadBox> boxes;
    ImageMeta meta;
};

struct BenchInputTiming {
    std::vector<double> samples_ms;  // one per repetition
    double median_ms = 0.0;
    double q25_ms = 0.0;
    double q75_ms = 0.0;
};

struct BenchResult {
    std::string algorithm;
    std::vector<BenchInputTiming> inputs;
};

/// Times `repetitions` runs per input (an initial warm-up pass is excluded)
/// and reports median plus inter-quartile range. Only the post-processing
/// call is measured. Requires repetitions >= 3.
BenchResult bench(const std::string& algorithm, const AlgorithmRegistry& registry,
                  const std::vector<BenchInput>& inputs, int repetitions);

}  // namespace boxfuse
