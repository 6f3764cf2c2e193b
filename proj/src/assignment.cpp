#include "hbtrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbtrack {
namespace {

// Jonker-Volgenant shortest augmenting path on a dense square matrix.
// Returns col assigned to each row; `u`/`v` receive the dual potentials.
void solve_square(const std::vector<std::vector<double>>& cost, std::vector<int>& row_to_col,
                  std::vector<double>& u, std::vector<double>& v) {
    const int n = static_cast<int>(cost.size());
    u.assign(n + 1, 0.0);
    v.assign(n + 1, 0.0);
    std::vector<int> col_to_row(n + 1, 0);
    std::vector<int> way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        col_to_row[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = col_to_row[j0];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[col_to_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (col_to_row[j0] != 0);
        do {
            const int j1 = way[j0];
            col_to_row[j0] = col_to_row[j1];
            j0 = j1;
        } while (j0);
    }

    row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (col_to_row[j] > 0) row_to_col[col_to_row[j] - 1] = j - 1;
    }
}

struct Padded {
    int n = 0;          // padded size
    double sentinel = 0.0;
    std::vector<std::vector<double>> cost;
};

// Pads to square and maps gated-out entries to a sentinel large enough that
// minimizing total cost also maximizes the number of admissible matches.
Padded build_padded(const CostMatrix& m) {
    Padded p;
    p.n = std::max(m.rows, m.cols);
    double max_admissible = 0.0;
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            const double value = m.at(r, c);
            if (value <= m.gate) max_admissible = std::max(max_admissible, value);
        }
    }
    p.sentinel = (max_admissible + 1.0) * (p.n + 1);
    p.cost.assign(p.n, std::vector<double>(p.n, p.sentinel));
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            const double value = m.at(r, c);
            if (value <= m.gate) p.cost[r][c] = value;
        }
    }
    return p;
}

int count_real_matches(const std::vector<int>& row_to_col, const Padded& p, int rows, int cols) {
    int k = 0;
    for (int r = 0; r < rows; ++r) {
        const int c = row_to_col[r];
        if (c >= 0 && c < cols && p.cost[r][c] < p.sentinel) ++k;
    }
    return k;
}

double real_cost(const std::vector<int>& row_to_col, const Padded& p, int rows, int cols) {
    double total = 0.0;
    for (int r = 0; r < rows; ++r) {
        const int c = row_to_col[r];
        if (c >= 0 && c < cols && p.cost[r][c] < p.sentinel) total += p.cost[r][c];
    }
    return total;
}

// Solves the padded problem with a set of (row, col) pairs forced into the
// matching; forced rows/cols are removed and their cost added afterwards.
bool solve_with_fixed(const Padded& p, const std::vector<std::pair<int, int>>& fixed,
                      std::vector<int>& full_row_to_col) {
    std::vector<char> row_fixed(p.n, 0), col_fixed(p.n, 0);
    for (const auto& [r, c] : fixed) {
        if (row_fixed[r] || col_fixed[c]) return false;
        row_fixed[r] = 1;
        col_fixed[c] = 1;
    }
    std::vector<int> free_rows, free_cols;
    for (int r = 0; r < p.n; ++r)
        if (!row_fixed[r]) free_rows.push_back(r);
    for (int c = 0; c < p.n; ++c)
        if (!col_fixed[c]) free_cols.push_back(c);

    full_row_to_col.assign(p.n, -1);
    for (const auto& [r, c] : fixed) full_row_to_col[r] = c;

    if (!free_rows.empty()) {
        const int k = static_cast<int>(free_rows.size());
        std::vector<std::vector<double>> sub(k, std::vector<double>(k));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub[i][j] = p.cost[free_rows[i]][free_cols[j]];
        std::vector<int> sub_sol;
        std::vector<double> u, v;
        solve_square(sub, sub_sol, u, v);
        for (int i = 0; i < k; ++i) full_row_to_col[free_rows[i]] = free_cols[sub_sol[i]];
    }
    return true;
}

// Refines an optimal solution into the lexicographically smallest optimal
// match set. Complementary slackness prunes the candidate columns: an entry
// can take part in some optimum only if its reduced cost is zero, so in the
// common unique-optimum case no extra solves happen at all.
void lexicographic_refine(const Padded& p, const CostMatrix& m, std::vector<int>& row_to_col,
                          const std::vector<double>& u, const std::vector<double>& v) {
    const int best_card = count_real_matches(row_to_col, p, m.rows, m.cols);
    const double best_cost = real_cost(row_to_col, p, m.rows, m.cols);
    // Loose bound for pruning (potentials carry sentinel-scale rounding),
    // tight bound for accepting a trial as cost-equal.
    const double eps_prune = 1e-7 * (1.0 + p.sentinel);
    const double eps_cost = 1e-12 * (1.0 + std::abs(best_cost));

    std::vector<std::pair<int, int>> fixed;
    std::vector<char> col_taken(p.n, 0);
    for (int r = 0; r < m.rows; ++r) {
        const int current = row_to_col[r];
        const bool current_real = current >= 0 && current < m.cols && p.cost[r][current] < p.sentinel;
        const int limit = current_real ? current : m.cols;
        for (int c = 0; c < limit; ++c) {
            if (col_taken[c] || p.cost[r][c] >= p.sentinel) continue;
            // dual potentials are 1-indexed in solve_square
            const double reduced = p.cost[r][c] - u[r + 1] - v[c + 1];
            if (reduced > eps_prune) continue;
            auto trial_fixed = fixed;
            trial_fixed.emplace_back(r, c);
            std::vector<int> trial;
            if (!solve_with_fixed(p, trial_fixed, trial)) continue;
            if (count_real_matches(trial, p, m.rows, m.cols) == best_card &&
                real_cost(trial, p, m.rows, m.cols) <= best_cost + eps_cost) {
                row_to_col = trial;
                break;
            }
        }
        const int chosen = row_to_col[r];
        if (chosen >= 0 && chosen < m.cols && p.cost[r][chosen] < p.sentinel) {
            fixed.emplace_back(r, chosen);
            col_taken[chosen] = 1;
        }
    }
}

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& m) {
    if (m.rows < 0 || m.cols < 0) throw std::invalid_argument("solve_assignment: negative dimensions");
    if (m.costs.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
        throw std::invalid_argument("solve_assignment: cost size does not match rows*cols");
    }
    for (double value : m.costs) {
        if (!std::isfinite(value) || value < 0.0) {
            throw std::invalid_argument("solve_assignment: costs must be finite and non-negative");
        }
    }

    AssignmentResult result;
    if (m.rows == 0 || m.cols == 0) {
        for (int r = 0; r < m.rows; ++r) result.unmatched_rows.push_back(r);
        for (int c = 0; c < m.cols; ++c) result.unmatched_cols.push_back(c);
        return result;
    }

    const Padded p = build_padded(m);
    std::vector<int> row_to_col;
    std::vector<double> u, v;
    solve_square(p.cost, row_to_col, u, v);
    lexicographic_refine(p, m, row_to_col, u, v);

    std::vector<char> col_matched(m.cols, 0);
    for (int r = 0; r < m.rows; ++r) {
        const int c = row_to_col[r];
        if (c >= 0 && c < m.cols && p.cost[r][c] < p.sentinel) {
            result.matches.emplace_back(r, c);
            result.total_cost += m.at(r, c);
            col_matched[c] = 1;
        } else {
            result.unmatched_rows.push_back(r);
        }
    }
    for (int c = 0; c < m.cols; ++c) {
        if (!col_matched[c]) result.unmatched_cols.push_back(c);
    }
    return result;
}

}  // namespace hbtrack
