#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "okp/alpha.hpp"
#include "okp/common.hpp"

namespace okp {

namespace detail {

/// Dense primal simplex for  max 1'z  s.t.  Mz <= 1, z >= 0  where M > 0.
/// The slack basis is feasible, so no phase one is needed. On return,
/// `duals[i]` holds the optimal multiplier of row i. Sized for the small
/// dominance checks this project needs (rows = |S|, cols = set size).
class GameSimplex {
 public:
  // M is row-major, rows x cols, strictly positive.
  double solve(const std::vector<double>& m, std::size_t rows,
               std::size_t cols, std::vector<double>& duals) {
    const std::size_t width = cols + rows + 1;  // z vars, slacks, rhs
    tab_.assign((rows + 1) * width, 0.0);
    basis_.resize(rows);
    auto t = [&](std::size_t r, std::size_t c) -> double& {
      return tab_[r * width + c];
    };

    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) t(r, c) = m[r * cols + c];
      t(r, cols + r) = 1.0;
      t(r, width - 1) = 1.0;
      basis_[r] = cols + r;
    }
    // Objective row stores reduced costs as (pi'A - c); optimal when >= 0.
    for (std::size_t c = 0; c < cols; ++c) t(rows, c) = -1.0;

    const double tol = 1e-11;
    const std::size_t max_iters = 50 * (rows + cols) + 200;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      // Entering column: most negative reduced cost; Bland after a while.
      const bool bland = iter > 20 * (rows + cols);
      std::size_t enter = width - 1;
      double best = -tol;
      for (std::size_t c = 0; c + 1 < width; ++c) {
        const double rc = t(rows, c);
        if (rc < best) {
          best = rc;
          enter = c;
          if (bland) break;
        }
      }
      if (enter == width - 1) break;  // optimal

      // Ratio test; the LP is bounded by construction (M > 0).
      std::size_t leave = rows;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        const double a = t(r, enter);
        if (a > tol) {
          const double ratio = t(r, width - 1) / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && leave < rows &&
               basis_[r] < basis_[leave])) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave == rows) break;  // numerically unbounded; bail out safely

      pivot(rows, width, enter, leave);
    }

    duals.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      duals[r] = std::max(0.0, t(rows, cols + r));
    return t(rows, width - 1);  // optimal objective value
  }

 private:
  void pivot(std::size_t rows, std::size_t width, std::size_t enter,
             std::size_t leave) {
    auto t = [&](std::size_t r, std::size_t c) -> double& {
      return tab_[r * width + c];
    };
    const double piv = t(leave, enter);
    for (std::size_t c = 0; c < width; ++c) t(leave, c) /= piv;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double f = t(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) t(r, c) -= f * t(leave, c);
    }
    basis_[leave] = enter;
  }

  std::vector<double> tab_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Searches for a belief where `candidate` beats every vector in `against`
/// by at least kDominanceEps. Solved as the matrix game
///   max_{x in simplex} min_j (candidate - against[j]) . x
/// via the classic positive-shift LP transformation; the witness belief is
/// read off the dual values of the game LP. `skip` excludes one index of
/// `against` (so a set member can be checked against the rest in place).
inline std::optional<Belief> lp_dominance(
    const AlphaVector& candidate, const std::vector<AlphaVector>& against,
    std::size_t skip = static_cast<std::size_t>(-1)) {
  const std::size_t n = candidate.coeffs.size();
  std::vector<const AlphaVector*> rivals;
  rivals.reserve(against.size());
  for (std::size_t j = 0; j < against.size(); ++j)
    if (j != skip) rivals.push_back(&against[j]);
  if (rivals.empty()) return Belief::uniform(n);
  const std::size_t m = rivals.size();

  // Game matrix D[s][j] = candidate(s) - rival_j(s), shifted positive.
  std::vector<double> d(n * m);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t s = 0; s < n; ++s) {
      const double v = candidate.coeffs[s] - rivals[j]->coeffs[s];
      d[s * m + j] = v;
      lo = std::min(lo, v);
    }
  const double shift = 1.0 - std::min(lo, 0.0);
  for (double& v : d) v += shift;

  detail::GameSimplex lp;
  std::vector<double> duals;
  const double objective = lp.solve(d, n, m, duals);
  if (objective <= 0.0) return std::nullopt;  // cannot happen for M > 0
  const double game_value = 1.0 / objective - shift;
  if (game_value < kDominanceEps) return std::nullopt;

  double total = 0.0;
  for (double v : duals) total += v;
  if (total <= 0.0) return std::nullopt;
  for (double& v : duals) v /= total;
  Belief witness{std::move(duals)};

  // The simplex answer is only trusted after direct verification.
  double advantage = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    double adv = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      adv += (candidate.coeffs[s] - rivals[j]->coeffs[s]) * witness[s];
    advantage = std::min(advantage, adv);
  }
  if (advantage < kDominanceEps * 0.5) return std::nullopt;
  return witness;
}

}  // namespace okp
