#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "okp/model.hpp"

namespace okp {

/// Two-door tiger world: listen (identity transition, cost 1, symmetric
/// 0.85-accurate hearing) or open a door (+6 safe, -10 tiger, reset to a
/// uniformly random tiger position). Undiscounted, uniform initial belief.
inline PomdpModel tiger() {
  const std::vector<std::string> states{"tiger-left", "tiger-right"};
  const std::vector<std::string> actions{"listen", "open-left", "open-right"};
  const std::vector<std::string> observations{"hear-left", "hear-right"};
  const std::size_t S = 2, A = 3, O = 2;

  std::vector<double> T(A * S * S, 0.0);
  auto t = [&](int a, int s, int s2) -> double& {
    return T[(static_cast<std::size_t>(a) * S + s) * S + s2];
  };
  t(0, 0, 0) = 1.0;  // listen leaves the world alone
  t(0, 1, 1) = 1.0;
  for (int a = 1; a <= 2; ++a)  // opening any door resets the problem
    for (int s = 0; s < 2; ++s) {
      t(a, s, 0) = 0.5;
      t(a, s, 1) = 0.5;
    }

  std::vector<double> R(S * A, 0.0);
  auto r = [&](int s, int a) -> double& { return R[s * A + a]; };
  r(0, 0) = r(1, 0) = -1.0;
  r(0, 1) = -10.0;  // tiger-left, open-left
  r(1, 1) = 6.0;
  r(0, 2) = 6.0;
  r(1, 2) = -10.0;

  std::vector<double> Ofn(A * S * O, 0.0);
  for (std::size_t a = 0; a < A; ++a) {
    Ofn[(a * S + 0) * O + 0] = 0.85;
    Ofn[(a * S + 0) * O + 1] = 0.15;
    Ofn[(a * S + 1) * O + 0] = 0.15;
    Ofn[(a * S + 1) * O + 1] = 0.85;
  }

  return PomdpModel(states, actions, observations, std::move(T), std::move(R),
                    std::move(Ofn), 1.0, Belief({0.5, 0.5}));
}

namespace detail {

struct GridSpec {
  int width;
  int height;
  std::vector<std::pair<int, int>> removed;
  std::pair<int, int> start;
  std::pair<int, int> goal;
};

inline bool grid_valid(const GridSpec& g, int x, int y) {
  if (x < 0 || x >= g.width || y < 0 || y >= g.height) return false;
  for (auto& [rx, ry] : g.removed)
    if (rx == x && ry == y) return false;
  return true;
}

/// Wall pattern of a cell: the letters of its blocked sides in NSEW order,
/// or "open" when none. y runs downward, so N is y-1.
inline std::string wall_pattern(const GridSpec& g, int x, int y) {
  std::string p;
  if (!grid_valid(g, x, y - 1)) p += 'n';
  if (!grid_valid(g, x, y + 1)) p += 's';
  if (!grid_valid(g, x + 1, y)) p += 'e';
  if (!grid_valid(g, x - 1, y)) p += 'w';
  return p.empty() ? "open" : p;
}

// N, S, E, W deltas, indexed like the action list.
inline constexpr int kDx[4] = {0, 0, 1, -1};
inline constexpr int kDy[4] = {-1, 1, 0, 0};

}  // namespace detail

/// Small maze world: a 4x3 grid with the cell (1,1) removed (11 states),
/// start at the bottom-left corner (0,2), absorbing goal at the top-right
/// corner (3,0). Each move travels 1 or 2 cells with equal probability,
/// stopping short when blocked; entering the goal pays +1. The agent can
/// observe only its cell's wall pattern.
inline PomdpModel hz_maze() {
  detail::GridSpec g{4, 3, {{1, 1}}, {0, 2}, {3, 0}};

  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (detail::grid_valid(g, x, y)) cells.emplace_back(x, y);

  const std::size_t S = cells.size();
  std::map<std::pair<int, int>, int> index;
  std::vector<std::string> states;
  for (std::size_t i = 0; i < S; ++i) {
    index[cells[i]] = static_cast<int>(i);
    states.push_back("c" + std::to_string(cells[i].first) +
                     std::to_string(cells[i].second));
  }

  const std::vector<std::string> actions{"N", "S", "E", "W"};
  const std::size_t A = actions.size();
  const int goal = index[g.goal];

  std::vector<double> T(A * S * S, 0.0);
  std::vector<double> R(S * A, 0.0);
  for (std::size_t i = 0; i < S; ++i) {
    const auto [x, y] = cells[i];
    for (std::size_t a = 0; a < A; ++a) {
      auto t = [&](int to, double p) { T[(a * S + i) * S + to] += p; };
      if (static_cast<int>(i) == goal) {
        t(goal, 1.0);
        continue;
      }
      const int x1 = x + detail::kDx[a], y1 = y + detail::kDy[a];
      const int x2 = x + 2 * detail::kDx[a], y2 = y + 2 * detail::kDy[a];
      if (!detail::grid_valid(g, x1, y1)) {
        t(static_cast<int>(i), 1.0);
      } else if (!detail::grid_valid(g, x2, y2)) {
        t(index[{x1, y1}], 1.0);  // the long move stops on the first cell
      } else {
        t(index[{x1, y1}], 0.5);
        t(index[{x2, y2}], 0.5);
      }
      R[i * A + a] = T[(a * S + i) * S + goal];  // +1 on entering the goal
    }
  }

  // One observation symbol per wall pattern occurring in the layout.
  std::vector<std::string> observations;
  std::vector<int> pattern_of(S);
  for (std::size_t i = 0; i < S; ++i) {
    const std::string p = detail::wall_pattern(g, cells[i].first,
                                               cells[i].second);
    auto it = std::find(observations.begin(), observations.end(), p);
    if (it == observations.end()) {
      pattern_of[i] = static_cast<int>(observations.size());
      observations.push_back(p);
    } else {
      pattern_of[i] = static_cast<int>(it - observations.begin());
    }
  }
  const std::size_t O = observations.size();
  std::vector<double> Ofn(A * S * O, 0.0);
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t i = 0; i < S; ++i)
      Ofn[(a * S + i) * O + pattern_of[i]] = 1.0;

  return PomdpModel(states, actions, observations, std::move(T), std::move(R),
                    std::move(Ofn), 1.0,
                    Belief::point_mass(S, index[g.start]));
}

/// Empty 10x10 room: absorbing goal in the (0,0) corner, start fixed at the
/// middle cell (5,5). N/S moves succeed with probability 0.9 and drift West
/// or East with 0.05 each; E/W moves succeed with probability 0.8 and drift
/// North or South with 0.1 each. A blocked component keeps the agent in
/// place. +1 on entering the goal; wall-pattern observations (9 symbols).
inline PomdpModel grid10x10() {
  detail::GridSpec g{10, 10, {}, {5, 5}, {0, 0}};

  const std::size_t S = 100;
  auto index = [](int x, int y) { return y * 10 + x; };
  std::vector<std::string> states;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x)
      states.push_back("c" + std::to_string(x) + std::to_string(y));

  const std::vector<std::string> actions{"N", "S", "E", "W"};
  const std::size_t A = actions.size();
  const int goal = index(0, 0);

  // Drift is perpendicular: W/E for vertical moves, N/S for horizontal.
  const double intended_p[4] = {0.9, 0.9, 0.8, 0.8};
  const int drift_a[4][2] = {{3, 2}, {3, 2}, {0, 1}, {0, 1}};
  const double drift_p[4] = {0.05, 0.05, 0.1, 0.1};

  std::vector<double> T(A * S * S, 0.0);
  std::vector<double> R(S * A, 0.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const int i = index(x, y);
      for (std::size_t a = 0; a < A; ++a) {
        auto t = [&](int to, double p) { T[(a * S + i) * S + to] += p; };
        if (i == goal) {
          t(goal, 1.0);
          continue;
        }
        auto land = [&](int dir, double p) {
          const int nx = x + detail::kDx[dir], ny = y + detail::kDy[dir];
          t(detail::grid_valid(g, nx, ny) ? index(nx, ny) : i, p);
        };
        land(static_cast<int>(a), intended_p[a]);
        land(drift_a[a][0], drift_p[a]);
        land(drift_a[a][1], drift_p[a]);
        R[i * A + a] = T[(a * S + i) * S + goal];
      }
    }

  std::vector<std::string> observations;
  std::vector<int> pattern_of(S);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const std::string p = detail::wall_pattern(g, x, y);
      auto it = std::find(observations.begin(), observations.end(), p);
      if (it == observations.end()) {
        pattern_of[index(x, y)] = static_cast<int>(observations.size());
        observations.push_back(p);
      } else {
        pattern_of[index(x, y)] =
            static_cast<int>(it - observations.begin());
      }
    }
  const std::size_t O = observations.size();
  std::vector<double> Ofn(A * S * O, 0.0);
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t i = 0; i < S; ++i)
      Ofn[(a * S + i) * O + pattern_of[i]] = 1.0;

  return PomdpModel(states, actions, observations, std::move(T), std::move(R),
                    std::move(Ofn), 1.0,
                    Belief::point_mass(S, index(g.start.first,
                                                g.start.second)));
}

/// Built-in problem lookup for the command line.
inline std::optional<PomdpModel> builtin_problem(const std::string& name) {
  if (name == "tiger") return tiger();
  if (name == "hz-maze" || name == "maze") return hz_maze();
  if (name == "grid10x10" || name == "grid") return grid10x10();
  return std::nullopt;
}

}  // namespace okp
