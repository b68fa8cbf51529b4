#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "okp/alpha.hpp"
#include "okp/lp.hpp"

namespace okp {

namespace detail {

// True when a never beats b anywhere (pointwise <=). Equal vectors dominate
// each other; the caller keeps the canonically first one.
inline bool pointwise_dominated(const AlphaVector& a, const AlphaVector& b) {
  for (std::size_t s = 0; s < a.coeffs.size(); ++s)
    if (a.coeffs[s] > b.coeffs[s]) return false;
  return true;
}

inline std::vector<AlphaVector> pointwise_filter(
    std::vector<AlphaVector> set) {
  std::sort(set.begin(), set.end(), canonical_less);
  std::vector<AlphaVector> kept;
  kept.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    bool dominated = false;
    // Earlier equal vectors shadow later ones because the set is sorted.
    for (std::size_t j = 0; j < kept.size() && !dominated; ++j)
      dominated = pointwise_dominated(set[i], kept[j]);
    for (std::size_t j = i + 1; j < set.size() && !dominated; ++j)
      dominated = pointwise_dominated(set[i], set[j]) &&
                  !pointwise_dominated(set[j], set[i]);
    if (!dominated) kept.push_back(std::move(set[i]));
  }
  return kept;
}

}  // namespace detail

/// Minimal subset whose pointwise max matches the input everywhere on the
/// simplex, up to kDominanceEps. Pairwise dominance runs first; survivors
/// are then admitted through witness search: a vector enters the kept set
/// only as the argmax at a belief where the kept set is beaten by at least
/// the tolerance. A closing pass re-certifies every member against the full
/// set so that each survivor has its own witness.
inline std::vector<AlphaVector> prune(std::vector<AlphaVector> set) {
  std::vector<AlphaVector> frontier = detail::pointwise_filter(std::move(set));
  std::vector<AlphaVector> kept;
  kept.reserve(frontier.size());

  // frontier is canonically sorted; consume from the front.
  std::size_t cursor = 0;
  std::vector<char> taken(frontier.size(), 0);
  while (true) {
    while (cursor < frontier.size() && taken[cursor]) ++cursor;
    if (cursor == frontier.size()) break;
    auto witness = lp_dominance(frontier[cursor], kept);
    if (!witness) {
      taken[cursor] = 1;
      continue;
    }
    // Admit the best remaining vector at the witness, not necessarily the
    // probe; ties fall to the canonically first candidate.
    std::size_t best = cursor;
    double best_value = frontier[cursor].dot(*witness);
    for (std::size_t i = cursor + 1; i < frontier.size(); ++i) {
      if (taken[i]) continue;
      const double v = frontier[i].dot(*witness);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    taken[best] = 1;
    kept.push_back(frontier[best]);
  }

  // Minimality pass: drop members that no longer own a witness against the
  // rest (possible when later admissions crowd an earlier one).
  std::sort(kept.begin(), kept.end(), canonical_less);
  for (std::size_t i = kept.size(); i-- > 0;) {
    if (kept.size() == 1) break;
    if (!lp_dominance(kept[i], kept, i)) kept.erase(kept.begin() + i);
  }
  return kept;
}

}  // namespace okp
