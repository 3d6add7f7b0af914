#include "boxfuse/hungarian.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace boxfuse {

// Potentials formulation of the Kuhn-Munkres algorithm. Rectangular inputs
// are padded to square with a constant; since every dummy entry is equal,
// the arrangement of dummies cannot change which real pairs are optimal.
std::vector<std::pair<int, int>> hungarian_match(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0 || cols == 0) return {};
    if (!cost.allFinite()) {
        throw std::invalid_argument("hungarian_match: costs must be finite");
    }

    const int n = std::max(rows, cols);
    auto at = [&](int i, int j) -> double {
        return (i < rows && j < cols) ? cost(i, j) : 0.0;
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> col_to_row(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        col_to_row[0] = i;
        int j0 = 0;
        std::vector<double> min_slack(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = col_to_row[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = at(i0 - 1, j - 1) -
                                   u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < min_slack[static_cast<std::size_t>(j)]) {
                    min_slack[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (min_slack[static_cast<std::size_t>(j)] < delta) {
                    delta = min_slack[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(
                        col_to_row[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_slack[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (col_to_row[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            col_to_row[static_cast<std::size_t>(j0)] =
                col_to_row[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(std::min(rows, cols)));
    for (int j = 1; j <= n; ++j) {
        const int i = col_to_row[static_cast<std::size_t>(j)];
        if (i >= 1 && i <= rows && j <= cols) {
            pairs.emplace_back(i - 1, j - 1);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace boxfuse
