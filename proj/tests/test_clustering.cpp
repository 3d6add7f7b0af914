#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "boxfuse/clustering.hpp"
#include "oracles.hpp"

using namespace boxfuse;

namespace {

QuadBox unit_box_at(double x0, double score) {
    return QuadBox{Quad{Vec2{x0, 0}, Vec2{x0 + 1, 0}, Vec2{x0 + 1, 1},
                        Vec2{x0, 1}},
                   score, std::nullopt};
}

std::vector<QuadBox> random_boxes(testutil::Rng& rng, int n) {
    std::vector<QuadBox> boxes;
    for (int i = 0; i < n; ++i) {
        QuadBox b;
        b.vertices = canonicalize(testutil::random_quad(
            rng, rng.uniform(0, 20), rng.uniform(0, 20), 2.0));
        b.score = rng.uniform(0.05, 1.0);
        boxes.push_back(b);
    }
    return boxes;
}

}  // namespace

TEST_CASE("merge_boxes follows the score-weighted average rule") {
    const QuadBox a = unit_box_at(0.0, 1.0);

    SUBCASE("identical boxes sum scores and keep coordinates") {
        const QuadBox m = merge_boxes(a, unit_box_at(0.0, 1.0));
        CHECK(m.score == 2.0);
        CHECK(m.vertices == a.vertices);
    }
    SUBCASE("equal weights average to the midpoint") {
        const QuadBox m = merge_boxes(a, unit_box_at(1.0, 1.0));
        CHECK(m.vertices[0].x == doctest::Approx(0.5));
    }
    SUBCASE("weights follow the scores") {
        const QuadBox g = unit_box_at(0.0, 1.0);
        const QuadBox p = unit_box_at(3.0, 2.0);
        const QuadBox m = merge_boxes(g, p);
        CHECK(m.score == 3.0);
        CHECK(m.vertices[0].x == doctest::Approx(2.0));
    }
    SUBCASE("merging two zero-score boxes is undefined") {
        CHECK_THROWS_AS(merge_boxes(unit_box_at(0.0, 0.0), unit_box_at(1.0, 0.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("clustering groups identical and separates disjoint boxes") {
    const auto same = locality_aware_cluster(
        {unit_box_at(0.0, 0.7), unit_box_at(0.0, 0.3)}, 0.5);
    REQUIRE(same.size() == 1);
    CHECK(same[0].contributor_count() == 2);
    CHECK(same[0].representative.vertices == unit_box_at(0.0, 1.0).vertices);
    CHECK(same[0].representative.score == doctest::Approx(1.0));

    const auto apart = locality_aware_cluster(
        {unit_box_at(0.0, 0.7), unit_box_at(5.0, 0.3)}, 0.5);
    CHECK(apart.size() == 2);
    CHECK(apart[0].contributor_count() == 1);
    CHECK(apart[1].contributor_count() == 1);

    CHECK(locality_aware_cluster({}, 0.5).empty());
    CHECK_THROWS_AS(locality_aware_cluster({unit_box_at(0, 1)}, 1.5),
                    std::invalid_argument);
}

TEST_CASE("chain absorption depends on the running merged box") {
    // Hand trace, neighbors at IoU 0.6 and far ends at IoU 1/3:
    // after merging A and B the running box is [0.125, 1.125], whose IoU
    // with C [0.5, 1.5] is 0.625/1.375 < 0.5, so C seeds its own cluster.
    const QuadBox a = unit_box_at(0.0, 1.0);
    const QuadBox b = unit_box_at(0.25, 1.0);
    const QuadBox c = unit_box_at(0.5, 1.0);
    const auto split = locality_aware_cluster({a, b, c}, 0.5);
    REQUIRE(split.size() == 2);
    CHECK(split[0].contributor_count() == 2);
    CHECK(split[0].representative.score == doctest::Approx(2.0));
    CHECK(split[0].representative.vertices[0].x == doctest::Approx(0.125));
    CHECK(split[1].contributor_count() == 1);

    // Tighter chain, neighbors at IoU 0.8: the merged box [1/18, 1+1/18]
    // overlaps C [2/9, 1+2/9] at 5/7, so the whole chain collapses.
    const QuadBox a2 = unit_box_at(0.0, 1.0);
    const QuadBox b2 = unit_box_at(1.0 / 9.0, 1.0);
    const QuadBox c2 = unit_box_at(2.0 / 9.0, 1.0);
    const auto joined = locality_aware_cluster({a2, b2, c2}, 0.5);
    REQUIRE(joined.size() == 1);
    CHECK(joined[0].contributor_count() == 3);
    CHECK(joined[0].representative.score == doctest::Approx(3.0));
}

TEST_CASE("clusters partition the input and track member score sums") {
    testutil::Rng rng(101);
    for (int it = 0; it < 50; ++it) {
        auto boxes = random_boxes(rng, rng.uniform_int(1, 60));
        const auto clusters = locality_aware_cluster(boxes, 0.5);

        std::vector<QuadBox> flattened;
        for (const auto& c : clusters) {
            REQUIRE(!c.members.empty());
            double sum = 0.0;
            for (const auto& m : c.members) sum += m.score;
            CHECK(c.representative.score == sum);  // exact left-fold sum
            CHECK(c.contributor_count() ==
                  static_cast<int>(c.members.size()));
            flattened.insert(flattened.end(), c.members.begin(),
                             c.members.end());
        }
        REQUIRE(flattened.size() == boxes.size());

        auto key_less = [](const QuadBox& x, const QuadBox& y) {
            if (x.score != y.score) return x.score < y.score;
            return lex_less(x.vertices, y.vertices);
        };
        for (QuadBox& b : boxes) b = canonicalize(b);
        std::sort(boxes.begin(), boxes.end(), key_less);
        std::sort(flattened.begin(), flattened.end(), key_less);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            CHECK(boxes[i].vertices == flattened[i].vertices);
            CHECK(boxes[i].score == flattened[i].score);
        }
    }
}

TEST_CASE("merge folds are permutation-robust") {
    testutil::Rng rng(202);
    for (int it = 0; it < 100; ++it) {
        const int n = rng.uniform_int(2, 10);
        std::vector<QuadBox> boxes;
        for (int i = 0; i < n; ++i) {
            QuadBox b = unit_box_at(rng.uniform(0, 3), rng.uniform(0.1, 1.0));
            for (auto& p : b.vertices) {
                p.x += rng.uniform(-0.1, 0.1);
                p.y += rng.uniform(-0.1, 0.1);
            }
            boxes.push_back(b);
        }

        auto fold = [](const std::vector<QuadBox>& order) {
            QuadBox acc = order.front();
            for (std::size_t i = 1; i < order.size(); ++i) {
                acc = merge_boxes(order[i], acc);
            }
            return acc;
        };
        const QuadBox base = fold(boxes);
        for (int shuffle = 0; shuffle < 4; ++shuffle) {
            for (int i = n - 1; i > 0; --i) {
                std::swap(boxes[i], boxes[rng.uniform_int(0, i)]);
            }
            const QuadBox alt = fold(boxes);
            CHECK(alt.score == doctest::Approx(base.score).epsilon(1e-12));
            for (int v = 0; v < 4; ++v) {
                CHECK(std::abs(alt.vertices[v].x - base.vertices[v].x) < 1e-9);
                CHECK(std::abs(alt.vertices[v].y - base.vertices[v].y) < 1e-9);
            }
        }
    }
}

TEST_CASE("clustering is deterministic under input shuffling") {
    testutil::Rng rng(303);
    auto boxes = random_boxes(rng, 40);
    const auto base = locality_aware_cluster(boxes, 0.5);
    for (int shuffle = 0; shuffle < 5; ++shuffle) {
        for (int i = static_cast<int>(boxes.size()) - 1; i > 0; --i) {
            std::swap(boxes[i], boxes[rng.uniform_int(0, i)]);
        }
        const auto again = locality_aware_cluster(boxes, 0.5);
        REQUIRE(again.size() == base.size());
        for (std::size_t c = 0; c < base.size(); ++c) {
            CHECK(again[c].members.size() == base[c].members.size());
            CHECK(again[c].representative.vertices ==
                  base[c].representative.vertices);
        }
    }
}
