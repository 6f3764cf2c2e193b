#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace hbtrack {

/// Rectangular cost matrix for minimum-cost bipartite assignment. Entries must
/// be finite and non-negative; entries strictly above `gate` are forbidden.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> costs;  // row-major, rows * cols
    double gate = std::numeric_limits<double>::infinity();

    double at(int r, int c) const { return costs[static_cast<std::size_t>(r) * cols + c]; }
};

struct AssignmentResult {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_cost = 0.0;
};

/// Exact solver: among matchings restricted to admissible entries it maximizes
/// cardinality, then minimizes total cost, then picks the lexicographically
/// smallest match set ordered by (row, col). Throws std::invalid_argument on
/// non-finite or negative entries or dimension mismatch.
AssignmentResult solve_assignment(const CostMatrix& m);

}  // namespace hbtrack
