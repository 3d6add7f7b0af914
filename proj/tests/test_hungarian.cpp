#include <doctest.h>

#include <limits>

#include "boxfuse/hungarian.hpp"
#include "oracles.hpp"

using namespace boxfuse;

namespace {

double total_cost(const Eigen::MatrixXd& cost,
                  const std::vector<std::pair<int, int>>& pairs) {
    double t = 0.0;
    for (const auto& [i, j] : pairs) t += cost(i, j);
    return t;
}

std::vector<std::vector<double>> to_nested(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out[static_cast<std::size_t>(i)].push_back(m(i, j));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("hungarian_match hand cases") {
    Eigen::MatrixXd one(1, 1);
    one << 3.5;
    const auto p1 = hungarian_match(one);
    REQUIRE(p1.size() == 1);
    CHECK(p1[0] == std::pair<int, int>{0, 0});

    Eigen::MatrixXd two(2, 2);
    two << 1, 2, 2, 1;
    const auto p2 = hungarian_match(two);
    REQUIRE(p2.size() == 2);
    CHECK(p2[0] == std::pair<int, int>{0, 0});
    CHECK(p2[1] == std::pair<int, int>{1, 1});
    CHECK(total_cost(two, p2) == doctest::Approx(2.0));

    CHECK(hungarian_match(Eigen::MatrixXd(0, 0)).empty());

    Eigen::MatrixXd bad(1, 1);
    bad << std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(hungarian_match(bad), std::invalid_argument);
}

TEST_CASE("hungarian_match equals brute force on random matrices") {
    testutil::Rng rng(111);
    for (int it = 0; it < 200; ++it) {
        const int m = rng.uniform_int(1, 7);
        const int k = rng.uniform_int(1, 7);
        Eigen::MatrixXd cost(m, k);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < k; ++j) {
                // Integer-ish costs provoke ties as well.
                cost(i, j) = (it % 3 == 0)
                                 ? static_cast<double>(rng.uniform_int(0, 9))
                                 : rng.uniform(-5.0, 5.0);
            }
        }
        const auto pairs = hungarian_match(cost);
        REQUIRE(static_cast<int>(pairs.size()) == std::min(m, k));

        std::vector<char> row_used(static_cast<std::size_t>(m), 0);
        std::vector<char> col_used(static_cast<std::size_t>(k), 0);
        for (const auto& [i, j] : pairs) {
            CHECK(!row_used[static_cast<std::size_t>(i)]);
            CHECK(!col_used[static_cast<std::size_t>(j)]);
            row_used[static_cast<std::size_t>(i)] = 1;
            col_used[static_cast<std::size_t>(j)] = 1;
        }

        const double expect = testutil::brute_force_assignment_cost(to_nested(cost));
        CHECK(total_cost(cost, pairs) == doctest::Approx(expect).epsilon(1e-9));

        // Deterministic: the same matrix maps to the same pairs.
        CHECK(hungarian_match(cost) == pairs);
    }
}

TEST_CASE("hungarian_match handles all-tie matrices deterministically") {
    Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 4);
    const auto a = hungarian_match(flat);
    const auto b = hungarian_match(flat);
    CHECK(a == b);
    CHECK(total_cost(flat, a) == doctest::Approx(4.0));
}
