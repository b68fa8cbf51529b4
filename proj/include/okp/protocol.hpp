#pragma once

#include <string>
#include <vector>

#include "okp/common.hpp"
#include "okp/model.hpp"

namespace okp {

/// Which budget-allocation discipline the plan tree must obey.
enum class Variant { balanced, linear, general };

/// How branch points split the observation set.
enum class BranchMode { full, binary, threshold };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::balanced: return "balanced";
    case Variant::linear: return "linear";
    case Variant::general: return "general";
  }
  return "?";
}

inline const char* to_string(BranchMode m) {
  switch (m) {
    case BranchMode::full: return "full";
    case BranchMode::binary: return "binary";
    case BranchMode::threshold: return "threshold";
  }
  return "?";
}

/// One outgoing branch condition of an observe-and-branch action. `members`
/// always holds the observation indices the condition matches; the kind and
/// the threshold fields are kept for reporting and plan documents.
struct BranchCondition {
  enum class Kind { observation, subset, threshold };

  Kind kind = Kind::observation;
  std::vector<int> members;
  int threshold = -1;   // threshold kind: the split index o^T
  bool low_side = true;  // threshold kind: o <= o^T vs o > o^T

  static BranchCondition single(int o) {
    return {Kind::observation, {o}, -1, true};
  }
  static BranchCondition subset(std::vector<int> members) {
    return {Kind::subset, std::move(members), -1, true};
  }
  static BranchCondition threshold_split(int pivot, bool low,
                                         int num_observations) {
    BranchCondition c{Kind::threshold, {}, pivot, low};
    if (low)
      for (int o = 0; o <= pivot; ++o) c.members.push_back(o);
    else
      for (int o = pivot + 1; o < num_observations; ++o) c.members.push_back(o);
    return c;
  }
};

/// One observe-and-branch action: the branch conditions (a partition of the
/// observation set) and the branch budget left in each exiting branch. In
/// coupled mode the protocol is fused with an ordinary action.
struct BranchProtocol {
  std::vector<BranchCondition> conditions;
  std::vector<int> budgets;
  int coupled_action = -1;
};

/// Full description of one solve: plan variant, branch conditions, the
/// action-dependent-observation treatment, discount, horizon and budget.
struct SolveConfig {
  Variant variant = Variant::balanced;
  BranchMode branch_mode = BranchMode::full;
  bool coupled = false;
  double gamma = 1.0;
  int horizon = 0;
  int budget = 0;  // k, the number of branch points allowed
};

/// Rejects configurations the solve cannot honor on this model.
inline void validate_config(const PomdpModel& model, const SolveConfig& c) {
  if (c.horizon < 0) throw ConfigError("horizon must be nonnegative");
  if (c.budget < 0) throw ConfigError("branch budget must be nonnegative");
  if (c.gamma < 0.0 || c.gamma > 1.0)
    throw ConfigError("discount must lie in [0, 1]");
  if (!c.coupled && !model.action_independent_observations())
    throw ConfigError(
        "the observation model depends on the last action, so observation "
        "probabilities at a branch point are ill-defined; solve in coupled "
        "mode instead");
  if (c.branch_mode == BranchMode::binary && model.num_observations() > 24)
    throw ConfigError(
        "binary branch mode enumerates 2^|observations|-2 partitions, which "
        "is infeasible for " +
        std::to_string(model.num_observations()) + " observations");
}

namespace detail {

/// Ordered compositions of `total` into `parts` nonnegative parts,
/// lexicographically ascending.
inline void compositions(int total, int parts, std::vector<int>& prefix,
                         std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int head = 0; head <= total; ++head) {
    prefix.push_back(head);
    compositions(total - head, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

/// Budget allocations of `remaining` branch points over `parts` conditions,
/// by variant. Balanced gives every branch the full remainder; linear sinks
/// it into one branch; general distributes it every possible way.
inline std::vector<std::vector<int>> allocations(Variant variant,
                                                 int remaining, int parts) {
  std::vector<std::vector<int>> out;
  switch (variant) {
    case Variant::balanced:
      out.emplace_back(parts, remaining);
      break;
    case Variant::linear:
      for (int i = 0; i < parts; ++i) {
        std::vector<int> b(parts, 0);
        b[i] = remaining;
        out.push_back(std::move(b));
      }
      break;
    case Variant::general: {
      std::vector<int> prefix;
      compositions(remaining, parts, prefix, out);
      break;
    }
  }
  return out;
}

inline std::vector<std::vector<BranchCondition>> condition_structures(
    BranchMode mode, int num_observations) {
  std::vector<std::vector<BranchCondition>> out;
  switch (mode) {
    case BranchMode::full: {
      std::vector<BranchCondition> conds;
      for (int o = 0; o < num_observations; ++o)
        conds.push_back(BranchCondition::single(o));
      out.push_back(std::move(conds));
      break;
    }
    case BranchMode::binary: {
      const unsigned long long all = (1ull << num_observations) - 1;
      for (unsigned long long mask = 1; mask < all; ++mask) {
        std::vector<int> members, complement;
        for (int o = 0; o < num_observations; ++o)
          ((mask >> o) & 1u ? members : complement).push_back(o);
        out.push_back({BranchCondition::subset(std::move(members)),
                       BranchCondition::subset(std::move(complement))});
      }
      break;
    }
    case BranchMode::threshold:
      for (int pivot = 0; pivot + 1 < num_observations; ++pivot)
        out.push_back(
            {BranchCondition::threshold_split(pivot, true, num_observations),
             BranchCondition::threshold_split(pivot, false,
                                              num_observations)});
      break;
  }
  return out;
}

}  // namespace detail

/// The exact list of observe-and-branch actions available at one level of
/// the stacked construction: every branch-condition structure of the mode
/// paired with every way the variant allows distributing the level-1
/// remaining branch points. Canonically ordered and deterministic.
inline std::vector<BranchProtocol> enumerate_branch_protocols(
    const SolveConfig& config, int level, int num_observations) {
  assert(level >= 1);
  std::vector<BranchProtocol> out;
  for (auto& conds :
       detail::condition_structures(config.branch_mode, num_observations)) {
    for (auto& budgets :
         detail::allocations(config.variant, level - 1,
                             static_cast<int>(conds.size()))) {
      out.push_back(BranchProtocol{conds, budgets, -1});
    }
  }
  return out;
}

/// Human-readable condition label for DOT output and reports.
inline std::string condition_label(const BranchCondition& c,
                                   const std::vector<std::string>& names) {
  switch (c.kind) {
    case BranchCondition::Kind::observation:
      return names[c.members.front()];
    case BranchCondition::Kind::subset: {
      std::string s = "{";
      for (std::size_t i = 0; i < c.members.size(); ++i) {
        if (i) s += ",";
        s += names[c.members[i]];
      }
      return s + "}";
    }
    case BranchCondition::Kind::threshold:
      return (c.low_side ? "<= " : "> ") + names[c.threshold];
  }
  return "?";
}

}  // namespace okp
