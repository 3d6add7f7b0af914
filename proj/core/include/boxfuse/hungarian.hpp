// Minimum-cost bipartite matching on a dense cost matrix.
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace boxfuse {

/// Optimal one-to-one assignment of min(M, K) (row, column) pairs with
/// globally minimal total cost, O(n^3) in the larger dimension. Pairs come
/// back sorted by row index; the scan order is fixed, so the result is a
/// deterministic function of the matrix. Throws std::invalid_argument on
/// non-finite costs; an empty matrix yields an empty assignment.
std::vector<std::pair<int, int>> hungarian_match(const Eigen::MatrixXd& cost);

}  // namespace boxfuse
