#pragma once

#include <chrono>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "okp/alpha.hpp"
#include "okp/backup.hpp"
#include "okp/model.hpp"
#include "okp/protocol.hpp"
#include "okp/prune.hpp"

namespace okp {

struct SolveOptions {
  // Retain each stage's pre-prune candidate union (for pruning audits).
  bool keep_stage_candidates = false;
};

/// The solved level-stacked construction: one value function per
/// (branch level, time) cell, for every level up to the requested budget and
/// every horizon up to H. Immutable; values for any initial belief, any
/// smaller budget and any shorter horizon can be read off directly.
class SolvedPolicy {
 public:
  SolvedPolicy(PomdpModel model, SolveConfig config,
               std::vector<std::vector<BranchProtocol>> protocols,
               std::vector<std::vector<Stage>> stages,
               std::vector<std::vector<std::vector<AlphaVector>>> candidates,
               double seconds)
      : model_(std::move(model)),
        config_(config),
        protocols_(std::move(protocols)),
        stages_(std::move(stages)),
        stage_candidates_(std::move(candidates)),
        seconds_(seconds) {}

  const PomdpModel& model() const { return model_; }
  const SolveConfig& config() const { return config_; }

  const Stage& stage(int level, int time) const {
    return stages_.at(level).at(time);
  }
  const std::vector<BranchProtocol>& protocols(int level) const {
    return protocols_.at(level);
  }
  int levels() const { return static_cast<int>(stages_.size()) - 1; }
  int horizon() const { return config_.horizon; }

  /// Pre-prune candidate unions, per [level][time]; empty unless requested.
  const std::vector<std::vector<std::vector<AlphaVector>>>& stage_candidates()
      const {
    return stage_candidates_;
  }

  std::size_t total_alpha_vectors() const {
    std::size_t n = 0;
    for (const auto& level : stages_)
      for (const Stage& st : level) n += st.vectors().size();
    return n;
  }
  double seconds() const { return seconds_; }

 private:
  PomdpModel model_;
  SolveConfig config_;
  std::vector<std::vector<BranchProtocol>> protocols_;
  std::vector<std::vector<Stage>> stages_;
  std::vector<std::vector<std::vector<AlphaVector>>> stage_candidates_;
  double seconds_;
};

/// Value of the stored stage at x.
inline double value_at(const SolvedPolicy& policy, const Belief& x, int level,
                       int time) {
  return evaluate(policy.stage(level, time), x);
}

namespace detail {

// Condition sets are cached by what they are built from, so protocols that
// share a condition (and complement-symmetric protocols, whose key below
// collapses) never recompute them. Key: (read time, action or -1, budget,
// members).
using ConditionKey = std::tuple<int, int, int, std::vector<int>>;
using ConditionCache = std::map<ConditionKey, std::vector<AlphaVector>>;

// Two protocols with the same multiset of (members, budget) pairs and the
// same action back up to identical vector sets; only the first is built.
using ProtocolKey =
    std::pair<int, std::vector<std::pair<std::vector<int>, int>>>;

inline ProtocolKey protocol_key(int action, const BranchProtocol& p) {
  ProtocolKey key;
  key.first = action;
  for (std::size_t c = 0; c < p.conditions.size(); ++c)
    key.second.emplace_back(p.conditions[c].members, p.budgets[c]);
  std::sort(key.second.begin(), key.second.end());
  return key;
}

}  // namespace detail

/// Solves the stacked construction bottom level first: level 0 is plain
/// conformant value iteration; each higher level adds its observe-and-branch
/// actions (or, in coupled mode, execute-then-branch copies of every action)
/// reading the already-solved lower levels. One backward pass per level.
inline SolvedPolicy solve(const PomdpModel& model, const SolveConfig& config,
                          const SolveOptions& options = {}) {
  validate_config(model, config);
  const auto t0 = std::chrono::steady_clock::now();

  const int H = config.horizon;
  const int K = config.budget;
  const std::size_t S = model.num_states();
  const int A = static_cast<int>(model.num_actions());

  std::vector<std::vector<BranchProtocol>> protocols(K + 1);
  for (int l = 1; l <= K; ++l)
    protocols[l] = enumerate_branch_protocols(
        config, l, static_cast<int>(model.num_observations()));

  std::vector<std::vector<Stage>> stages;
  std::vector<std::vector<std::vector<AlphaVector>>> kept_candidates;
  stages.reserve(K + 1);
  if (options.keep_stage_candidates)
    kept_candidates.assign(K + 1,
                           std::vector<std::vector<AlphaVector>>(H + 1));

  detail::ConditionCache condition_cache;
  auto condition_set =
      [&](int read_time, int action, int budget,
          const std::vector<int>& members) -> const std::vector<AlphaVector>& {
    detail::ConditionKey key{read_time, action, budget, members};
    auto it = condition_cache.find(key);
    if (it != condition_cache.end()) return it->second;
    const Stage& continuation = stages[budget][read_time];
    std::vector<AlphaVector> g =
        action < 0 ? detail::condition_vector_set(continuation, model, members)
                   : detail::coupled_condition_vector_set(
                         continuation, model, action, members, config.gamma);
    return condition_cache.emplace(std::move(key), prune(std::move(g)))
        .first->second;
  };

  for (int l = 0; l <= K; ++l) {
    std::vector<Stage> row;
    row.reserve(H + 1);
    for (int t = 0; t < H; ++t)
      row.push_back(Stage::terminal(l, t, S));  // placeholders
    row.push_back(Stage::terminal(l, H, S));
    stages.push_back(std::move(row));

    for (int t = H - 1; t >= 0; --t) {
      std::vector<AlphaVector> candidates;
      for (int a = 0; a < A; ++a) {
        auto backed = backup_ordinary(stages[l][t + 1], model, a, config.gamma);
        candidates.insert(candidates.end(),
                          std::make_move_iterator(backed.begin()),
                          std::make_move_iterator(backed.end()));
      }

      if (l >= 1) {
        std::set<detail::ProtocolKey> seen;
        const auto& protos = protocols[l];
        for (std::size_t p = 0; p < protos.size(); ++p) {
          if (!config.coupled) {
            if (!seen.insert(detail::protocol_key(-1, protos[p])).second)
              continue;
            AlphaVector seed;
            seed.coeffs.assign(S, 0.0);
            seed.prov = Provenance::branch(static_cast<int>(p));
            std::vector<const std::vector<AlphaVector>*> views;
            for (std::size_t c = 0; c < protos[p].conditions.size(); ++c)
              views.push_back(&condition_set(t, -1, protos[p].budgets[c],
                                             protos[p].conditions[c].members));
            auto backed = detail::fold_condition_sets({std::move(seed)}, views);
            candidates.insert(candidates.end(),
                              std::make_move_iterator(backed.begin()),
                              std::make_move_iterator(backed.end()));
          } else {
            for (int a = 0; a < A; ++a) {
              if (!seen.insert(detail::protocol_key(a, protos[p])).second)
                continue;
              AlphaVector seed;
              seed.coeffs.resize(S);
              for (std::size_t s = 0; s < S; ++s)
                seed.coeffs[s] = model.reward(static_cast<int>(s), a);
              seed.prov = Provenance::coupled(a, static_cast<int>(p));
              std::vector<const std::vector<AlphaVector>*> views;
              for (std::size_t c = 0; c < protos[p].conditions.size(); ++c)
                views.push_back(&condition_set(
                    t + 1, a, protos[p].budgets[c],
                    protos[p].conditions[c].members));
              auto backed =
                  detail::fold_condition_sets({std::move(seed)}, views);
              candidates.insert(candidates.end(),
                                std::make_move_iterator(backed.begin()),
                                std::make_move_iterator(backed.end()));
            }
          }
        }
      }

      if (options.keep_stage_candidates) kept_candidates[l][t] = candidates;
      stages[l][t] = Stage(l, t, prune(std::move(candidates)));
    }
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return SolvedPolicy(model, config, std::move(protocols), std::move(stages),
                      std::move(kept_candidates), seconds);
}

}  // namespace okp
