#include <doctest.h>

#include <algorithm>

#include "boxfuse/eval.hpp"
#include "boxfuse/nms.hpp"
#include "boxfuse/synth.hpp"
#include "oracles.hpp"

using namespace boxfuse;

namespace {

QuadBox rect_box(double x0, double y0, double w, double h, double score) {
    return QuadBox{Quad{Vec2{x0, y0}, Vec2{x0 + w, y0}, Vec2{x0 + w, y0 + h},
                        Vec2{x0, y0 + h}},
                   score, std::nullopt};
}

}  // namespace

TEST_CASE("match_detections hand cases") {
    const std::vector<QuadBox> gts{rect_box(0, 0, 2, 1, 1.0),
                                   rect_box(10, 0, 2, 1, 1.0)};

    SUBCASE("perfect predictions") {
        const auto c = match_detections(gts, gts, 0.5);
        CHECK(c.true_positives == 2);
        CHECK(c.false_positives == 0);
        CHECK(c.false_negatives == 0);
    }
    SUBCASE("one prediction covering one of two ground truths") {
        // IoU with the first GT is 0.9 (slightly narrower box).
        const std::vector<QuadBox> preds{rect_box(0.0, 0, 1.8, 1, 0.9)};
        CHECK(iou(preds[0], gts[0]) == doctest::Approx(0.9));
        const auto c = match_detections(preds, gts, 0.5);
        CHECK(c.true_positives == 1);
        CHECK(c.false_positives == 0);
        CHECK(c.false_negatives == 1);  // recall 0.5
    }
    SUBCASE("two predictions on one ground truth: one TP, one FP") {
        const std::vector<QuadBox> one_gt{rect_box(0, 0, 2, 1, 1.0)};
        const std::vector<QuadBox> preds{rect_box(0.0, 0, 1.9, 1, 0.9),
                                         rect_box(0.1, 0, 1.9, 1, 0.8)};
        CHECK(iou(preds[0], one_gt[0]) > 0.5);
        CHECK(iou(preds[1], one_gt[0]) > 0.5);
        const auto c = match_detections(preds, one_gt, 0.5);
        CHECK(c.true_positives == 1);
        CHECK(c.false_positives == 1);
        CHECK(c.false_negatives == 0);
    }
    SUBCASE("count identities") {
        const std::vector<QuadBox> preds{rect_box(0, 0, 1.8, 1, 0.9),
                                         rect_box(50, 50, 1, 1, 0.4)};
        const auto c = match_detections(preds, gts, 0.5);
        CHECK(c.true_positives + c.false_positives ==
              static_cast<long>(preds.size()));
        CHECK(c.true_positives + c.false_negatives ==
              static_cast<long>(gts.size()));
    }
    CHECK_THROWS_AS(match_detections({}, {}, 1.5), std::invalid_argument);
}

TEST_CASE("threshold_range spans the sweep grid inclusively") {
    const auto t = threshold_range(0.5, 0.8, 0.05);
    REQUIRE(t.size() == 7);
    CHECK(t.front() == doctest::Approx(0.5));
    CHECK(t.back() == doctest::Approx(0.8));
    CHECK_THROWS_AS(threshold_range(0.8, 0.5, 0.05), std::invalid_argument);
}

TEST_CASE("sweep aggregates across images") {
    const std::vector<QuadBox> gt0{rect_box(0, 0, 2, 1, 1.0)};
    const std::vector<QuadBox> gt1{rect_box(5, 5, 3, 1, 1.0)};
    const auto thresholds = threshold_range(0.5, 0.8, 0.05);

    SUBCASE("perfect predictions score F = 1 everywhere") {
        const auto report = sweep({gt0, gt1}, {gt0, gt1}, thresholds, "oracle");
        REQUIRE(report.records.size() == 7);
        for (const auto& rec : report.records) {
            CHECK(rec.precision == doctest::Approx(1.0));
            CHECK(rec.recall == doctest::Approx(1.0));
            CHECK(rec.f_measure == doctest::Approx(1.0));
        }
    }
    SUBCASE("predictions at IoU 0.6 die above the 0.6 threshold") {
        // Box covering 60% of the GT exactly: IoU = 0.6.
        const std::vector<QuadBox> preds{rect_box(0, 0, 1.2, 1, 0.9)};
        CHECK(iou(preds[0], gt0[0]) == doctest::Approx(0.6));
        const auto report = sweep({preds}, {gt0}, thresholds);
        for (const auto& rec : report.records) {
            if (rec.iou_threshold <= 0.6) {
                CHECK(rec.f_measure > 0.0);
            } else {
                CHECK(rec.f_measure == 0.0);
            }
        }
    }
    SUBCASE("empty predictions give zero precision, recall and F") {
        const auto report = sweep({{}}, {gt0}, thresholds);
        for (const auto& rec : report.records) {
            CHECK(rec.precision == 0.0);
            CHECK(rec.recall == 0.0);
            CHECK(rec.f_measure == 0.0);
        }
    }
}

TEST_CASE("F-measure is non-increasing in the threshold on synthetic scenes") {
    // With separated instances a prediction can clear the threshold against
    // at most one ground truth, so greedy matching is maximum matching and
    // monotonicity holds exactly.
    PerturbSpec spec;
    spec.seed = 55;
    const auto thresholds = threshold_range(0.5, 0.8, 0.05);
    for (int it = 0; it < 10; ++it) {
        PerturbSpec s = spec;
        s.seed = 55 + static_cast<std::uint64_t>(it);
        const Scene scene =
            generate_scene(s, 4, ImageMeta{1280, 768, "mono"});
        const auto preds = locality_aware_nms(scene.dense, 0.5, 0.2);
        const auto report = sweep({preds}, {scene.ground_truth}, thresholds);
        for (std::size_t i = 1; i < report.records.size(); ++i) {
            CHECK(report.records[i].f_measure <=
                  report.records[i - 1].f_measure + 1e-12);
        }
    }
}

TEST_CASE("bench requires a registered algorithm and three repetitions") {
    AlgorithmRegistry registry;
    registry.add("skew", [](const std::vector<QuadBox>& boxes, const ImageMeta&) {
        return skew_nms(boxes, 0.5);
    });
    registry.add("noop", [](const std::vector<QuadBox>& boxes, const ImageMeta&) {
        return boxes;
    });

    testutil::Rng rng(66);
    BenchInput input;
    input.meta = ImageMeta{640, 480, "bench"};
    for (int i = 0; i < 40; ++i) {
        QuadBox b;
        b.vertices = testutil::random_quad(rng, rng.uniform(50, 600),
                                           rng.uniform(50, 400), 30.0);
        b.score = rng.uniform(0.05, 1.0);
        input.boxes.push_back(b);
    }

    const auto result = bench("skew", registry, {input}, 5);
    REQUIRE(result.inputs.size() == 1);
    CHECK(result.inputs[0].samples_ms.size() == 5);
    CHECK(result.inputs[0].median_ms >= 0.0);
    CHECK(result.inputs[0].q25_ms <= result.inputs[0].median_ms);
    CHECK(result.inputs[0].median_ms <= result.inputs[0].q75_ms);

    CHECK_THROWS_WITH_AS(bench("nope", registry, {input}, 3),
                         doctest::Contains("valid names"),
                         std::invalid_argument);
    CHECK_THROWS_AS(bench("skew", registry, {input}, 2), std::invalid_argument);

    // Determinism of the measured algorithm itself: identical reruns.
    const auto a = skew_nms(input.boxes, 0.5);
    const auto b = skew_nms(input.boxes, 0.5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].vertices == b[i].vertices);
    }
}
