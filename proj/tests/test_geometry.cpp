#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "boxfuse/geometry.hpp"
#include "oracles.hpp"

using namespace boxfuse;

namespace {

Quad unit_square() {
    return Quad{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
}

Quad shifted(const Quad& q, double dx, double dy) {
    Quad out = q;
    for (auto& p : out) {
        p.x += dx;
        p.y += dy;
    }
    return out;
}

}  // namespace

TEST_CASE("polygon_area basics") {
    const Quad square = unit_square();
    CHECK(polygon_area(square) == doctest::Approx(1.0));

    const Quad collinear{Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}, Vec2{3, 0}};
    CHECK(polygon_area(collinear) == doctest::Approx(0.0));

    const Quad rect{Vec2{0, 0}, Vec2{2, 0}, Vec2{2, 1}, Vec2{0, 1}};
    CHECK(polygon_area(rect) == doctest::Approx(2.0));

    const std::vector<Vec2> two_points{Vec2{0, 0}, Vec2{1, 1}};
    CHECK_THROWS_AS(polygon_area(two_points), std::invalid_argument);
}

TEST_CASE("convex_clip identity, disjoint and partial overlap") {
    const Quad square = unit_square();

    const auto self_clip = convex_clip(square, square);
    CHECK(polygon_area(self_clip) == doctest::Approx(1.0));

    const Quad far = shifted(square, 5.0, 0.0);
    CHECK(convex_clip(square, far).empty());

    // Unit square clipped by the same square shifted (0.5, 0): hand-executing
    // Sutherland-Hodgman leaves the rectangle [0.5,1]x[0,1] of area 0.5.
    const Quad half = shifted(square, 0.5, 0.0);
    const auto overlap = convex_clip(square, half);
    REQUIRE(overlap.size() >= 3);
    CHECK(polygon_area(overlap) == doctest::Approx(0.5));

    const double mc = testutil::monte_carlo_iou(square, half, 200000, 7);
    CHECK(std::abs(polygon_area(overlap) / 1.5 - mc) < 1e-2);
}

TEST_CASE("iou trivial and derived values") {
    const Quad square = unit_square();
    CHECK(iou(square, square) == doctest::Approx(1.0));
    CHECK(iou(square, shifted(square, 3.0, 3.0)) == doctest::Approx(0.0));

    // Offset (0.5, 0): intersection 0.5, union 1.5.
    const double v = iou(square, shifted(square, 0.5, 0.0));
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    const double mc =
        testutil::monte_carlo_iou(square, shifted(square, 0.5, 0.0), 1000000, 11);
    CHECK(std::abs(v - mc) < 1e-2);
}

TEST_CASE("touching quads have IoU zero") {
    const Quad square = unit_square();
    CHECK(iou(square, shifted(square, 1.0, 0.0)) == 0.0);
}

TEST_CASE("degenerate boxes have IoU zero, even against themselves") {
    const Quad line{Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}, Vec2{3, 0}};
    CHECK(iou(line, line) == 0.0);
    CHECK(iou(line, unit_square()) == 0.0);
}

TEST_CASE("canonicalize repairs bowties via convex hull") {
    // Crossed ordering of the unit square's corners.
    const Quad bowtie{Vec2{0, 0}, Vec2{1, 1}, Vec2{1, 0}, Vec2{0, 1}};
    const Quad fixed = canonicalize(bowtie);
    CHECK(quad_area(fixed) == doctest::Approx(1.0));
    CHECK(signed_area(fixed) > 0.0);

    // Canonicalization is idempotent and starts near the top-left.
    const Quad again = canonicalize(fixed);
    CHECK(fixed == again);
    CHECK(fixed[0] == Vec2{0, 0});
}

TEST_CASE("canonicalize keeps simple quads intact") {
    testutil::Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const Quad q = testutil::random_rotated_rect(
            rng, rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 3.0),
            rng.uniform(0.2, 1.0), rng.uniform(0, 2 * M_PI));
        const Quad c = canonicalize(q);
        CHECK(quad_area(c) == doctest::Approx(quad_area(q)).epsilon(1e-12));
        // Same vertex set, possibly reordered.
        for (const Vec2& p : q) {
            CHECK(std::count(c.begin(), c.end(), p) >= 1);
        }
    }
}

TEST_CASE("iou symmetry is exact and bounded") {
    testutil::Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const Quad a = testutil::random_quad(rng, 0.0, 0.0, 2.0);
        const Quad b = testutil::random_quad(rng, rng.uniform(-1.5, 1.5),
                                             rng.uniform(-1.5, 1.5), 2.0);
        const double ab = iou(a, b);
        const double ba = iou(b, a);
        CHECK(ab == ba);  // bit-exact
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("clip area never exceeds either input area") {
    testutil::Rng rng(33);
    for (int i = 0; i < 500; ++i) {
        const Quad a = canonicalize(testutil::random_rotated_rect(
            rng, 0, 0, rng.uniform(0.5, 2.0), rng.uniform(0.3, 1.5),
            rng.uniform(0, M_PI)));
        const Quad b = canonicalize(testutil::random_rotated_rect(
            rng, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 2.0),
            rng.uniform(0.3, 1.5), rng.uniform(0, M_PI)));
        const auto clipped = convex_clip(a, b);
        if (clipped.size() < 3) continue;
        const double inter = polygon_area(clipped);
        CHECK(inter <= std::min(quad_area(a), quad_area(b)) + 1e-9);

        // Dual route: triangle decomposition agrees with clipping on
        // convex pairs.
        CHECK(intersection_area(a, b) == doctest::Approx(inter).epsilon(1e-9));
    }
}

TEST_CASE("iou tracks the Monte-Carlo oracle on random pairs") {
    testutil::Rng rng(77);
    for (int i = 0; i < 300; ++i) {
        const Quad a = testutil::random_quad(rng, 0.0, 0.0, 2.0);
        const Quad b = testutil::random_quad(rng, rng.uniform(-2, 2),
                                             rng.uniform(-2, 2), 2.0);
        const Quad ca = canonicalize(a);
        const Quad cb = canonicalize(b);
        const double exact = iou(ca, cb);
        const double mc = testutil::monte_carlo_iou(ca, cb, 200000,
                                                    1000 + static_cast<std::uint64_t>(i));
        CHECK(std::abs(exact - mc) < 2e-2);
    }
}

TEST_CASE("min_area_rect is the identity for rotated rectangles") {
    testutil::Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const Quad rect = testutil::random_rotated_rect(
            rng, rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.5, 4.0),
            rng.uniform(0.2, 2.0), rng.uniform(0, M_PI));
        const Quad mar = min_area_rect(rect);
        CHECK(quad_area(mar) == doctest::Approx(quad_area(rect)).epsilon(1e-9));
        CHECK(iou(mar, rect) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("min_area_rect encloses the quad") {
    testutil::Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const Quad q = canonicalize(testutil::random_quad(rng, 0, 0, 2.0));
        const Quad mar = min_area_rect(q);
        CHECK(quad_area(mar) + 1e-9 >= quad_area(q));
        CHECK(intersection_area(mar, q) ==
              doctest::Approx(quad_area(q)).epsilon(1e-6));
    }
}

TEST_CASE("aabb_iou matches polygon iou for axis-aligned quads") {
    testutil::Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        const double w1 = rng.uniform(0.5, 3.0), h1 = rng.uniform(0.5, 3.0);
        const double w2 = rng.uniform(0.5, 3.0), h2 = rng.uniform(0.5, 3.0);
        const double dx = rng.uniform(-2, 2), dy = rng.uniform(-2, 2);
        const Quad a{Vec2{0, 0}, Vec2{w1, 0}, Vec2{w1, h1}, Vec2{0, h1}};
        const Quad b{Vec2{dx, dy}, Vec2{dx + w2, dy}, Vec2{dx + w2, dy + h2},
                     Vec2{dx, dy + h2}};
        CHECK(aabb_iou(quad_aabb(a), quad_aabb(b)) ==
              doctest::Approx(iou(a, b)).epsilon(1e-9));
    }
}
