#include "fgb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fgb/errors.hpp"

namespace fgb {
namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-11;
constexpr double kRatioTie = 1e-12;
// Consecutive degenerate pivots after which pricing switches to Bland's rule.
constexpr std::size_t kBlandAfter = 32;

// Dense tableau for: maximize c.x subject to A x <= b, x >= 0, with b >= 0,
// started from the slack basis.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), width_(cols + rows + 1), cells_((rows + 1) * width_, 0.0),
        basis_(rows) {
    for (std::size_t r = 0; r < rows_; ++r) {
      at(r, cols_ + r) = 1.0;
      basis_[r] = cols_ + r;
    }
  }

  double& at(std::size_t r, std::size_t c) { return cells_[r * width_ + c]; }
  double& rhs(std::size_t r) { return at(r, width_ - 1); }
  // Objective row holds reduced costs, initially -c; optimal when none is negative.
  double& cost(std::size_t c) { return at(rows_, c); }

  std::size_t variables() const { return cols_ + rows_; }
  std::size_t basic(std::size_t r) const { return basis_[r]; }
  std::size_t rows() const { return rows_; }

  // Dantzig pricing, switching to Bland's rule (lowest entering index, lowest
  // leaving basic index) during degenerate runs. Returns the pivot count.
  std::size_t optimize(std::size_t budget) {
    std::size_t pivots = 0;
    std::size_t degenerate_run = 0;
    while (true) {
      const bool bland = degenerate_run >= kBlandAfter;
      std::size_t entering = variables();
      for (std::size_t c = 0; c < variables(); ++c) {
        if (cost(c) >= -kCostEps) continue;
        if (entering == variables() || (!bland && cost(c) < cost(entering))) entering = c;
        if (bland) break;
      }
      if (entering == variables()) return pivots;

      std::size_t leaving = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, entering);
        if (a <= kPivotEps) continue;
        const double ratio = rhs(r) / a;
        if (leaving == rows_ || ratio < best_ratio - kRatioTie) {
          best_ratio = ratio;
          leaving = r;
        } else if (ratio <= best_ratio + kRatioTie) {
          // Ties: Bland takes the lowest basic index, otherwise the larger pivot.
          const double current = at(leaving, entering);
          const bool take = bland ? basis_[r] < basis_[leaving]
                                  : (a > current || (a == current && basis_[r] < basis_[leaving]));
          if (take) leaving = r;
        }
      }
      if (leaving == rows_) {
        throw SolverFailure("max-min coverage LP reported unbounded (column " +
                            std::to_string(entering) + ")");
      }
      degenerate_run = rhs(leaving) <= kPivotEps ? degenerate_run + 1 : 0;
      pivot(leaving, entering);
      if (++pivots > budget) {
        throw SolverFailure("max-min coverage LP exceeded pivot budget of " +
                            std::to_string(budget) + " (" + std::to_string(rows_) + " rows)");
      }
    }
  }

 private:
  void pivot(std::size_t row, std::size_t col) {
    const double inv = 1.0 / at(row, col);
    double* prow = &cells_[row * width_];
    for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
    prow[col] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == row) continue;
      double* cur = &cells_[r * width_];
      const double factor = cur[col];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) cur[c] -= factor * prow[c];
      cur[col] = 0.0;
    }
    basis_[row] = col;
  }

  std::size_t rows_, cols_, width_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
};

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

MaxMinSolution solve_maxmin_coverage(const FeedbackGraph& g, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) {
    throw InvalidParameter("LP tolerance must lie in (0, 1e-3]");
  }
  const std::size_t k = g.k();

  // With A_ij = 1 when j observes i, the max-min value is 1 / min{1.x : A x >= 1, x >= 0}
  // and s = x / 1.x. The tableau solves the dual packing problem
  // max{1.y : A^T y <= 1, y >= 0}; x is read off the slack columns' reduced costs.
  // Row j: sum of y_i over the observation set of j.
  Tableau tab(k, k);
  for (Action j = 0; j < k; ++j) {
    for (Action i : observation_set(g, j)) tab.at(j, i) = 1.0;
    tab.rhs(j) = 1.0;
  }
  for (Action i = 0; i < k; ++i) tab.cost(i) = -1.0;

  const std::size_t budget = 200 * (2 * k + 1) + 1000;
  const std::size_t pivots = tab.optimize(budget);

  std::vector<double> s(k);
  double total = 0.0;
  for (Action j = 0; j < k; ++j) {
    s[j] = std::max(tab.cost(k + j), 0.0);
    total += s[j];
  }
  if (!(total >= 1.0 - tol)) {
    throw SolverFailure("max-min coverage LP returned a degenerate cover of mass " +
                        std::to_string(total));
  }
  for (double& v : s) v /= total;

  auto certificate = observation_probs(s, g);
  double value = min_of(certificate);

  // Dual certificate: any y >= 0 with A^T y <= 1 bounds the value by 1 / 1.y.
  std::vector<double> y(k, 0.0);
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    if (tab.basic(r) < k) y[tab.basic(r)] = std::max(tab.rhs(r), 0.0);
  }
  double load = 1.0, packed = 0.0;
  for (Action j = 0; j < k; ++j) {
    double row = 0.0;
    for (Action i : observation_set(g, j)) row += y[i];
    load = std::max(load, row);
  }
  for (double v : y) packed += v / load;
  if (value < 1.0 / packed - tol) {
    throw SolverFailure("max-min coverage LP stopped at " + std::to_string(value) +
                        " below the dual bound " + std::to_string(1.0 / packed));
  }

  const std::vector<double> uniform(k, 1.0 / static_cast<double>(k));
  auto uniform_cover = observation_probs(uniform, g);
  if (min_of(uniform_cover) >= value - 1e-12) {
    s = uniform;
    certificate = std::move(uniform_cover);
    value = min_of(certificate);
  }
  return MaxMinSolution{Distribution(std::move(s)), value, std::move(certificate), pivots};
}

}  // namespace fgb
