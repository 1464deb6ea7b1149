#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace byteadapt {

/// Dense row-major cost matrix. Either dimension may be zero.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  ///< rows * cols entries, row-major

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Matching produced by the solvers. `matches` pairs (row, col) sorted by
/// row; unmatched index lists are sorted ascending. Every row and column
/// appears exactly once across the three containers.
struct AssignmentResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

namespace detail {

inline void check_costs(const CostMatrix& cost) {
  if (cost.values.size() != cost.rows * cost.cols) {
    throw std::invalid_argument("assignment: cost matrix shape mismatch");
  }
  for (double v : cost.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("assignment: non-finite cost entry");
    }
  }
}

/// Square-free shortest-augmenting-path assignment for nr <= nc, all
/// entries finite. Returns col4row. Standard Jonker-Volgenant with dual
/// potentials; column scans run in index order, which fixes tie-breaking.
inline std::vector<std::ptrdiff_t> solve_rectangular(
    std::size_t nr, std::size_t nc,
    const std::vector<double>& m /* nr x nc row-major */) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(nr, 0.0), v(nc, 0.0);
  std::vector<std::ptrdiff_t> col4row(nr, -1), row4col(nc, -1);
  std::vector<double> shortest(nc);
  std::vector<std::size_t> path(nc);
  std::vector<char> sr(nr), sc(nc);
  std::vector<std::size_t> remaining(nc);

  for (std::size_t cur = 0; cur < nr; ++cur) {
    std::fill(shortest.begin(), shortest.end(), inf);
    std::fill(sr.begin(), sr.end(), 0);
    std::fill(sc.begin(), sc.end(), 0);
    for (std::size_t j = 0; j < nc; ++j) {
      remaining[j] = j;
    }
    std::size_t num_remaining = nc;

    double min_val = 0.0;
    std::size_t i = cur;
    std::ptrdiff_t sink = -1;
    while (sink == -1) {
      sr[i] = 1;
      std::size_t index = 0;
      double lowest = inf;
      for (std::size_t it = 0; it < num_remaining; ++it) {
        const std::size_t j = remaining[it];
        const double r = min_val + m[i * nc + j] - u[i] - v[j];
        if (r < shortest[j]) {
          path[j] = i;
          shortest[j] = r;
        }
        // Prefer terminating at an unassigned column on equal distance.
        if (shortest[j] < lowest ||
            (shortest[j] == lowest && row4col[j] == -1)) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_val = lowest;
      const std::size_t j = remaining[index];
      if (row4col[j] == -1) {
        sink = static_cast<std::ptrdiff_t>(j);
      } else {
        i = static_cast<std::size_t>(row4col[j]);
      }
      sc[j] = 1;
      remaining[index] = remaining[--num_remaining];
    }

    u[cur] += min_val;
    for (std::size_t k = 0; k < nr; ++k) {
      if (sr[k] && k != cur) {
        u[k] += min_val - shortest[static_cast<std::size_t>(col4row[k])];
      }
    }
    for (std::size_t j = 0; j < nc; ++j) {
      if (sc[j]) {
        v[j] -= min_val - shortest[j];
      }
    }

    std::size_t j = static_cast<std::size_t>(sink);
    while (true) {
      const std::size_t k = path[j];
      row4col[j] = static_cast<std::ptrdiff_t>(k);
      const std::ptrdiff_t prev = col4row[k];
      col4row[k] = static_cast<std::ptrdiff_t>(j);
      if (k == cur) {
        break;
      }
      j = static_cast<std::size_t>(prev);
    }
  }
  return col4row;
}

}  // namespace detail

/// Gated minimum-cost assignment. An edge (r, c) is feasible iff
/// cost(r, c) <= gate. Among all matchings using only feasible edges the
/// solver returns one of maximum cardinality, and of those one of minimum
/// total cost. Runs Jonker-Volgenant on a padded matrix where infeasible
/// edges cost more than the sum of all feasible costs, which makes every
/// infeasible edge worse than any feasible completion. Deterministic for
/// identical input.
inline AssignmentResult solve(const CostMatrix& cost, double gate) {
  detail::check_costs(cost);
  AssignmentResult out;
  if (cost.rows == 0 || cost.cols == 0) {
    for (std::size_t r = 0; r < cost.rows; ++r) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cost.cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  // Large-cost padding: with big > 2 * sum of |feasible costs|, swapping a
  // padded edge for any set of feasible edges always lowers the total, so
  // the minimum-cost perfect matching on the padded matrix uses as few
  // padded edges as possible — i.e. it maximizes real-match cardinality
  // first and minimizes feasible cost second.
  double feasible_sum = 0.0;
  for (double v : cost.values) {
    if (v <= gate) {
      feasible_sum += std::abs(v);
    }
  }
  const double big = 2.0 * feasible_sum + 1.0;

  const bool transpose = cost.rows > cost.cols;
  const std::size_t nr = transpose ? cost.cols : cost.rows;
  const std::size_t nc = transpose ? cost.rows : cost.cols;
  std::vector<double> padded(nr * nc);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double v = transpose ? cost.at(c, r) : cost.at(r, c);
      padded[r * nc + c] = (v <= gate) ? v : big;
    }
  }

  const auto col4row = detail::solve_rectangular(nr, nc, padded);

  std::vector<char> row_done(cost.rows, 0), col_done(cost.cols, 0);
  for (std::size_t r = 0; r < nr; ++r) {
    if (col4row[r] < 0) {
      continue;
    }
    const std::size_t c = static_cast<std::size_t>(col4row[r]);
    const std::size_t orow = transpose ? c : r;
    const std::size_t ocol = transpose ? r : c;
    if (cost.at(orow, ocol) <= gate) {
      out.matches.emplace_back(orow, ocol);
      row_done[orow] = 1;
      col_done[ocol] = 1;
    }
  }
  std::sort(out.matches.begin(), out.matches.end());
  for (std::size_t r = 0; r < cost.rows; ++r) {
    if (!row_done[r]) out.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cost.cols; ++c) {
    if (!col_done[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

/// Exhaustive reference solver for matrices up to 8x8. Identical contract
/// to solve(); additionally guarantees the lexicographically smallest
/// optimal match list (by (row, col) pairs in row order) when several
/// matchings tie on cardinality and cost. Exists so the fast solver can be
/// validated against ground truth; throws on larger inputs.
inline AssignmentResult solve_bruteforce(const CostMatrix& cost, double gate) {
  detail::check_costs(cost);
  if (cost.rows > 8 || cost.cols > 8) {
    throw std::invalid_argument("solve_bruteforce: matrix larger than 8x8");
  }

  std::vector<std::pair<std::size_t, std::size_t>> best, current;
  double best_cost = 0.0;
  bool have_best = false;

  std::vector<char> col_used(cost.cols, 0);
  auto consider = [&](double total) {
    if (!have_best || current.size() > best.size() ||
        (current.size() == best.size() &&
         (total < best_cost ||
          (total == best_cost && current < best)))) {
      best = current;
      best_cost = total;
      have_best = true;
    }
  };

  // Depth-first over rows; each row either skips or takes a feasible column.
  auto rec = [&](auto&& self, std::size_t row, double total) -> void {
    if (row == cost.rows) {
      consider(total);
      return;
    }
    self(self, row + 1, total);  // leave this row unmatched
    for (std::size_t c = 0; c < cost.cols; ++c) {
      if (col_used[c] || cost.at(row, c) > gate) {
        continue;
      }
      col_used[c] = 1;
      current.emplace_back(row, c);
      self(self, row + 1, total + cost.at(row, c));
      current.pop_back();
      col_used[c] = 0;
    }
  };
  rec(rec, 0, 0.0);

  AssignmentResult out;
  out.matches = best;
  std::vector<char> row_done(cost.rows, 0), col_done(cost.cols, 0);
  for (const auto& [r, c] : best) {
    row_done[r] = 1;
    col_done[c] = 1;
  }
  for (std::size_t r = 0; r < cost.rows; ++r) {
    if (!row_done[r]) out.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cost.cols; ++c) {
    if (!col_done[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

/// Total cost of a result's matched edges.
inline double total_cost(const CostMatrix& cost, const AssignmentResult& r) {
  double t = 0.0;
  for (const auto& [row, col] : r.matches) {
    t += cost.at(row, col);
  }
  return t;
}

}  // namespace byteadapt
