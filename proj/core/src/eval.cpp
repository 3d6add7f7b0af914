#include "boxfuse/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace boxfuse {

MatchCounts match_detections(const std::vector<QuadBox>& preds,
                             const std::vector<QuadBox>& gts,
                             double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw std::invalid_argument("match_detections: threshold must be in (0, 1)");
    }
    std::vector<QuadBox> sorted;
    sorted.reserve(preds.size());
    for (const QuadBox& p : preds) sorted.push_back(canonicalize(p));
    std::sort(sorted.begin(), sorted.end(), [](const QuadBox& a, const QuadBox& b) {
        if (a.score != b.score) return a.score > b.score;
        return lex_less(a.vertices, b.vertices);
    });
    std::vector<QuadBox> targets;
    targets.reserve(gts.size());
    for (const QuadBox& g : gts) targets.push_back(canonicalize(g));

    std::vector<char> claimed(targets.size(), 0);
    MatchCounts counts;
    for (const QuadBox& p : sorted) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            if (claimed[j]) continue;
            const double v = detail::iou_canonical(p.vertices, targets[j].vertices);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0 && best_iou >= iou_threshold) {
            claimed[static_cast<std::size_t>(best)] = 1;
            ++counts.true_positives;
        } else {
            ++counts.false_positives;
        }
    }
    counts.false_negatives =
        static_cast<long>(targets.size()) - counts.true_positives;
    return counts;
}

std::vector<double> threshold_range(double min, double max, double step) {
    if (!(step > 0.0) || max < min) {
        throw std::invalid_argument("threshold_range: need step > 0 and max >= min");
    }
    const int count = static_cast<int>(std::floor((max - min) / step + 0.5)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(min + step * static_cast<double>(i));
    }
    return out;
}

EvalReport sweep(const std::vector<std::vector<QuadBox>>& preds_by_image,
                 const std::vector<std::vector<QuadBox>>& gts_by_image,
                 const std::vector<double>& thresholds, std::string algorithm) {
    if (preds_by_image.size() != gts_by_image.size()) {
        throw std::invalid_argument("sweep: prediction/ground-truth image count mismatch");
    }
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > thresholds[i - 1])) {
            throw std::invalid_argument("sweep: thresholds must be strictly increasing");
        }
    }

    EvalReport report;
    report.algorithm = std::move(algorithm);
    for (const double th : thresholds) {
        MatchCounts total;
        for (std::size_t img = 0; img < preds_by_image.size(); ++img) {
            const MatchCounts c =
                match_detections(preds_by_image[img], gts_by_image[img], th);
            total.true_positives += c.true_positives;
            total.false_positives += c.false_positives;
            total.false_negatives += c.false_negatives;
        }
        ThresholdRecord rec;
        rec.iou_threshold = th;
        rec.true_positives = total.true_positives;
        rec.false_positives = total.false_positives;
        rec.false_negatives = total.false_negatives;
        const long pred_count = total.true_positives + total.false_positives;
        const long gt_count = total.true_positives + total.false_negatives;
        rec.precision = pred_count > 0 ? static_cast<double>(total.true_positives) /
                                             static_cast<double>(pred_count)
                                       : 0.0;
        rec.recall = gt_count > 0 ? static_cast<double>(total.true_positives) /
                                        static_cast<double>(gt_count)
                                  : 0.0;
        rec.f_measure = (rec.precision + rec.recall) > 0.0
                            ? 2.0 * rec.precision * rec.recall /
                                  (rec.precision + rec.recall)
                            : 0.0;
        report.records.push_back(rec);
    }
    return report;
}

void AlgorithmRegistry::add(std::string name, PostProcessFn fn) {
    algorithms_[std::move(name)] = std::move(fn);
}

const PostProcessFn& AlgorithmRegistry::at(const std::string& name) const {
    const auto it = algorithms_.find(name);
    if (it == algorithms_.end()) {
        std::string msg = "unknown algorithm '" + name + "', valid names:";
        for (const auto& [known, fn] : algorithms_) msg += " " + known;
        throw std::invalid_argument(msg);
    }
    return it->second;
}

std::vector<std::string> AlgorithmRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(algorithms_.size());
    for (const auto& [name, fn] : algorithms_) out.push_back(name);
    return out;
}

namespace {

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - std::floor(pos);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

BenchResult bench(const std::string& algorithm,
                  const AlgorithmRegistry& registry,
                  const std::vector<BenchInput>& inputs, int repetitions) {
    if (repetitions < 3) {
        throw std::invalid_argument("bench: repetitions must be >= 3");
    }
    const PostProcessFn& fn = registry.at(algorithm);

    BenchResult result;
    result.algorithm = algorithm;
    result.inputs.resize(inputs.size());

    using clock = std::chrono::steady_clock;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        volatile std::size_t sink = fn(inputs[i].boxes, inputs[i].meta).size();
        (void)sink;  // warm-up run, excluded from the samples
        BenchInputTiming& timing = result.inputs[i];
        for (int r = 0; r < repetitions; ++r) {
            const auto start = clock::now();
            const auto out = fn(inputs[i].boxes, inputs[i].meta);
            const auto stop = clock::now();
            sink = out.size();
            timing.samples_ms.push_back(
                std::chrono::duration<double, std::milli>(stop - start).count());
        }
        timing.median_ms = percentile(timing.samples_ms, 0.5);
        timing.q25_ms = percentile(timing.samples_ms, 0.25);
        timing.q75_ms = percentile(timing.samples_ms, 0.75);
    }
    return result;
}

}  // namespace boxfuse
