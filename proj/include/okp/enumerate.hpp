#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "okp/common.hpp"
#include "okp/model.hpp"
#include "okp/plan.hpp"
#include "okp/protocol.hpp"
#include "okp/solver.hpp"

namespace okp {

struct EnumerationOptions {
  // Hard cap on expanded recursion nodes; the search aborts beyond it.
  std::uint64_t node_cap = 10'000'000;
  // Optional upfront refusal threshold on the naive plan count. Unlimited by
  // default: full-mode branch points multiply subplan counts over every
  // observation, so the naive count overflows any useful fixed bound long
  // before the reachable-belief search does.
  double plan_cap = std::numeric_limits<double>::infinity();
  // Cache values per exact (belief, time, budget) key. The cached value is
  // the one the plain recursion would compute for that key, so results are
  // bit-identical with the cache on or off. No quantization is involved;
  // leave this off when raw search cost itself is being measured.
  bool exact_memo = false;
};

struct EnumerationStats {
  double plans_considered = 0.0;
  std::uint64_t distinct_nodes = 0;
  std::uint64_t expanded_nodes = 0;
  double seconds = 0.0;
};

struct EnumerationResult {
  ContingentPlan plan;
  double value = 0.0;
  EnumerationStats stats;
};

namespace detail {

struct NodeKey {
  int time;
  int level;
  std::vector<double> belief;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::size_t h =
        std::hash<int>()(k.time * 131 + k.level) ^ 0x9e3779b97f4a7c15ull;
    for (double v : k.belief) {
      h ^= std::hash<double>()(v) + 0x9e3779b97f4a7c15ull + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};

struct NodeResult {
  double value;
  double plans;
};

inline std::string format_count(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Depth-first search over reachable beliefs. The action space at budget
/// level l is exactly the solver's: every ordinary action plus, when l >= 1,
/// every branch protocol of the level (fused with each action in coupled
/// mode). Values tie-break the same way plan extraction does: ordinary
/// actions in index order win over branching at equal value.
class EnumeratorEngine {
 public:
  EnumeratorEngine(const PomdpModel& model, const SolveConfig& config,
                   const EnumerationOptions& options)
      : model_(model), config_(config), options_(options) {
    validate_config(model, config);
    const int n_obs = static_cast<int>(model.num_observations());
    protocols_.resize(config.budget + 1);
    condition_ids_.resize(config.budget + 1);
    unique_conditions_.resize(config.budget + 1);
    for (int l = 1; l <= config.budget; ++l) {
      protocols_[l] = enumerate_branch_protocols(config, l, n_obs);
      index_conditions(l);
    }
    precompute_weights();
    plan_estimate_ = estimate_plans();
    if (plan_estimate_ > options_.plan_cap)
      throw ResourceLimitError("enumeration refused: naive plan count is "
                               "about " +
                                   format_count(plan_estimate_) +
                                   ", which exceeds the cap of " +
                                   format_count(options_.plan_cap),
                               plan_estimate_, 0);
  }

  EnumerationResult run(const Belief& x0) {
    const auto t0 = std::chrono::steady_clock::now();
    NodeResult root = visit(x0, 0, config_.budget);
    EnumerationResult out;
    out.value = root.value;
    out.stats.plans_considered = root.plans;
    out.stats.expanded_nodes = expanded_;
    out.stats.distinct_nodes =
        options_.exact_memo ? memo_.size() : seen_hashes_.size();
    out.plan.root = build_plan(x0, 0, config_.budget);
    out.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  }

  double plan_estimate() const { return plan_estimate_; }

 private:
  // Deduplicated (members, budget) pairs per level; protocols hold indices
  // into the level's list so shared conditions are evaluated once per node.
  void index_conditions(int l) {
    std::map<std::pair<std::vector<int>, int>, int> ids;
    for (const BranchProtocol& p : protocols_[l]) {
      std::vector<int> refs;
      for (std::size_t c = 0; c < p.conditions.size(); ++c) {
        auto key = std::make_pair(p.conditions[c].members, p.budgets[c]);
        auto [it, inserted] =
            ids.emplace(key, static_cast<int>(unique_conditions_[l].size()));
        if (inserted) unique_conditions_[l].push_back(key);
        refs.push_back(it->second);
      }
      condition_ids_[l].push_back(std::move(refs));
    }
  }

  // Per-state condition weights:  w(s) = sum_{o in members} O(s, o), per
  // action in coupled mode.
  void precompute_weights() {
    const std::size_t S = model_.num_states();
    const int A = static_cast<int>(model_.num_actions());
    weights_.resize(unique_conditions_.size());
    for (std::size_t l = 1; l < unique_conditions_.size(); ++l) {
      const auto& uniq = unique_conditions_[l];
      const int actions = config_.coupled ? A : 1;
      weights_[l].assign(uniq.size() * actions, {});
      for (std::size_t u = 0; u < uniq.size(); ++u)
        for (int a = 0; a < actions; ++a) {
          std::vector<double> w(S, 0.0);
          for (std::size_t s = 0; s < S; ++s)
            for (int o : uniq[u].first)
              w[s] += config_.coupled
                          ? model_.observation(a, static_cast<int>(s), o)
                          : model_.observation(static_cast<int>(s), o);
          weights_[l][u * actions + a] = std::move(w);
        }
    }
  }

  double estimate_plans() const {
    const int H = config_.horizon, K = config_.budget;
    const double A = static_cast<double>(model_.num_actions());
    std::vector<std::vector<double>> est(
        H + 1, std::vector<double>(K + 1, 1.0));  // est[t][l]
    for (int t = H - 1; t >= 0; --t)
      for (int l = 0; l <= K; ++l) {
        double total = A * est[t + 1][l];
        for (int p = 0; l >= 1 && p < static_cast<int>(protocols_[l].size());
             ++p) {
          double product = 1.0;
          for (int b : protocols_[l][p].budgets)
            product *= est[config_.coupled ? t + 1 : t][b];
          total += (config_.coupled ? A : 1.0) * product;
        }
        est[t][l] = total;
      }
    return est[0][K];
  }

  NodeResult visit(const Belief& x, int t, int l) {
    if (t == config_.horizon) return {0.0, 1.0};

    NodeKey key{t, l, x.probs()};
    if (options_.exact_memo) {
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    } else {
      seen_hashes_.insert(NodeKeyHash()(key));
    }

    if (++expanded_ > options_.node_cap)
      throw ResourceLimitError(
          "enumeration aborted after expanding " + std::to_string(expanded_) +
              " nodes (naive plan count about " +
              format_count(plan_estimate_) + ")",
          plan_estimate_, expanded_);

    NodeResult out{-std::numeric_limits<double>::infinity(), 0.0};
    const int A = static_cast<int>(model_.num_actions());
    for (int a = 0; a < A; ++a) {
      const Belief next = transition_update(model_, x, a);
      const NodeResult child = visit(next, t + 1, l);
      const double v = stage_reward(x, a) + config_.gamma * child.value;
      out.plans += child.plans;
      if (v > out.value) out.value = v;
    }

    if (l >= 1 && !config_.coupled) {
      std::vector<std::optional<NodeResult>> cache(
          unique_conditions_[l].size());
      for (std::size_t p = 0; p < protocols_[l].size(); ++p) {
        double v = 0.0, plans = 1.0;
        for (int cid : condition_ids_[l][p]) {
          const NodeResult ce = eval_condition(x, t, l, cid, cache);
          v += ce.value;
          plans *= ce.plans;
        }
        out.plans += plans;
        if (v > out.value) out.value = v;
      }
    } else if (l >= 1) {
      std::vector<std::optional<NodeResult>> cache(
          unique_conditions_[l].size() * A);
      for (int a = 0; a < A; ++a) {
        const Belief predicted = transition_update(model_, x, a);
        const double reward = stage_reward(x, a);
        for (std::size_t p = 0; p < protocols_[l].size(); ++p) {
          double v = 0.0, plans = 1.0;
          for (int cid : condition_ids_[l][p]) {
            const NodeResult ce =
                eval_coupled_condition(predicted, t, l, a, cid, cache);
            v += ce.value;
            plans *= ce.plans;
          }
          out.plans += plans;
          const double total = reward + config_.gamma * v;
          if (total > out.value) out.value = total;
        }
      }
    }

    if (options_.exact_memo) memo_.emplace(std::move(key), out);
    return out;
  }

  // Likelihood-weighted value of one branch condition, cached per node.
  NodeResult eval_condition(const Belief& x, int t, int l, int cid,
                            std::vector<std::optional<NodeResult>>& cache) {
    if (cache[cid]) return *cache[cid];
    const auto& [members, budget] = unique_conditions_[l][cid];
    NodeResult ce{0.0, 1.0};
    if (auto post = detail::reweight(x, weights_[l][cid])) {
      const NodeResult child = visit(post->posterior, t, budget);
      ce = {post->likelihood * child.value, child.plans};
    }
    cache[cid] = ce;
    return ce;
  }

  NodeResult eval_coupled_condition(
      const Belief& predicted, int t, int l, int a, int cid,
      std::vector<std::optional<NodeResult>>& cache) {
    const int A = static_cast<int>(model_.num_actions());
    const int slot = cid * A + a;
    if (cache[slot]) return *cache[slot];
    const auto& [members, budget] = unique_conditions_[l][cid];
    NodeResult ce{0.0, 1.0};
    if (auto post = detail::reweight(predicted, weights_[l][slot])) {
      const NodeResult child = visit(post->posterior, t + 1, budget);
      ce = {post->likelihood * child.value, child.plans};
    }
    cache[slot] = ce;
    return ce;
  }

  double stage_reward(const Belief& x, int a) const {
    double r = 0.0;
    for (std::size_t s = 0; s < model_.num_states(); ++s)
      r += x[s] * model_.reward(static_cast<int>(s), a);
    return r;
  }

  // Rebuilds the optimal plan top-down by recomputing each node's choice
  // with the same iteration order and tie rule as visit().
  PlanNodePtr build_plan(const Belief& x, int t, int l) {
    if (t == config_.horizon) return PlanNode::leaf();

    const int A = static_cast<int>(model_.num_actions());
    double best = -std::numeric_limits<double>::infinity();
    int best_action = -1, best_protocol = -1;

    for (int a = 0; a < A; ++a) {
      const double v =
          stage_reward(x, a) +
          config_.gamma * visit(transition_update(model_, x, a), t + 1, l).value;
      if (v > best) {
        best = v;
        best_action = a;
        best_protocol = -1;
      }
    }
    if (l >= 1 && !config_.coupled) {
      std::vector<std::optional<NodeResult>> cache(
          unique_conditions_[l].size());
      for (std::size_t p = 0; p < protocols_[l].size(); ++p) {
        double v = 0.0;
        for (int cid : condition_ids_[l][p])
          v += eval_condition(x, t, l, cid, cache).value;
        if (v > best) {
          best = v;
          best_action = -1;
          best_protocol = static_cast<int>(p);
        }
      }
    } else if (l >= 1) {
      std::vector<std::optional<NodeResult>> cache(
          unique_conditions_[l].size() * A);
      for (int a = 0; a < A; ++a) {
        const Belief predicted = transition_update(model_, x, a);
        const double reward = stage_reward(x, a);
        for (std::size_t p = 0; p < protocols_[l].size(); ++p) {
          double v = 0.0;
          for (int cid : condition_ids_[l][p])
            v += eval_coupled_condition(predicted, t, l, a, cid, cache).value;
          const double total = reward + config_.gamma * v;
          if (total > best) {
            best = total;
            best_action = a;
            best_protocol = static_cast<int>(p);
          }
        }
      }
    }

    if (best_protocol < 0) {
      auto node = std::make_unique<PlanNode>();
      node->type = PlanNode::Type::action;
      node->action = model_.action_names()[best_action];
      node->child = build_plan(transition_update(model_, x, best_action),
                               t + 1, l);
      return node;
    }

    const BranchProtocol& protocol = protocols_[l][best_protocol];
    auto node = std::make_unique<PlanNode>();
    node->type = PlanNode::Type::branch;
    const bool coupled = config_.coupled;
    if (coupled) node->action = model_.action_names()[best_action];
    const Belief base =
        coupled ? transition_update(model_, x, best_action) : x;
    for (std::size_t c = 0; c < protocol.conditions.size(); ++c) {
      const int cid = condition_ids_[l][best_protocol][c];
      const auto& w = coupled ? weights_[l][cid * A + best_action]
                              : weights_[l][cid];
      auto post = detail::reweight(base, w);
      if (!post) continue;  // impossible under the current belief
      PlanBranch branch;
      branch.condition = detail::to_plan_condition(
          protocol.conditions[c], model_.observation_names());
      branch.subtree = build_plan(post->posterior, coupled ? t + 1 : t,
                                  protocol.budgets[c]);
      node->branches.push_back(std::move(branch));
    }
    return node;
  }

  const PomdpModel& model_;
  const SolveConfig& config_;
  EnumerationOptions options_;
  std::vector<std::vector<BranchProtocol>> protocols_;
  std::vector<std::vector<std::vector<int>>> condition_ids_;  // [l][p][c]
  std::vector<std::vector<std::pair<std::vector<int>, int>>>
      unique_conditions_;  // [l][cid] -> (members, budget)
  std::vector<std::vector<std::vector<double>>> weights_;  // [l][cid(*A+a)]
  double plan_estimate_ = 0.0;
  std::uint64_t expanded_ = 0;
  std::unordered_map<NodeKey, NodeResult, NodeKeyHash> memo_;
  std::unordered_set<std::size_t> seen_hashes_;
};

}  // namespace detail

/// Exhaustive search for the optimal k-contingency plan from x0, over
/// reachable beliefs only. This is the optimality oracle the solver is
/// cross-validated against; it shares the protocol enumeration but none of
/// the alpha-vector machinery.
inline EnumerationResult enumerate_optimal(
    const PomdpModel& model, const SolveConfig& config, const Belief& x0,
    const EnumerationOptions& options = {}) {
  detail::EnumeratorEngine engine(model, config, options);
  return engine.run(x0);
}

/// Side-by-side run of the solver and the enumerator.
struct CompareReport {
  double solver_value = 0.0;
  double enumerator_value = 0.0;
  bool agree = false;
  double solver_seconds = 0.0;
  double enumerator_seconds = 0.0;
  std::size_t solver_alpha_vectors = 0;
  EnumerationStats enumerator_stats;
  ContingentPlan solver_plan;
  ContingentPlan enumerator_plan;
};

/// Runs both algorithms on the same cell and checks value agreement at x0.
/// Disagreement beyond kValueTol is the project's top-level correctness
/// alarm; the report carries both plans for the post-mortem.
inline CompareReport compare(const PomdpModel& model, const SolveConfig& config,
                             const Belief& x0,
                             const EnumerationOptions& options = {}) {
  CompareReport report;

  SolvedPolicy policy = solve(model, config);
  report.solver_seconds = policy.seconds();
  report.solver_value = value_at(policy, x0, config.budget, 0);
  report.solver_alpha_vectors = policy.total_alpha_vectors();
  report.solver_plan = extract(policy, x0);

  EnumerationResult enumerated = enumerate_optimal(model, config, x0, options);
  report.enumerator_seconds = enumerated.stats.seconds;
  report.enumerator_value = enumerated.value;
  report.enumerator_stats = enumerated.stats;
  report.enumerator_plan = std::move(enumerated.plan);

  report.agree =
      std::abs(report.solver_value - report.enumerator_value) <= kValueTol;
  return report;
}

}  // namespace okp
