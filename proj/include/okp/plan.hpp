#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "okp/common.hpp"
#include "okp/model.hpp"
#include "okp/protocol.hpp"
#include "okp/solver.hpp"

namespace okp {

/// Branch condition as stored in a plan document: observation names rather
/// than indices, so a plan is executable against the model alone.
struct PlanCondition {
  enum class Kind { observation, subset, threshold };

  Kind kind = Kind::observation;
  std::vector<std::string> observations;  // observation: one name; subset: all
  std::string threshold;                  // threshold: the pivot observation
  bool low_side = true;                   // threshold: o <= pivot vs o > pivot

  /// Member indices under a concrete model. Unknown names are validation
  /// errors; threshold conditions use the model's declaration order.
  std::vector<int> resolve(const PomdpModel& model) const {
    std::vector<int> members;
    if (kind == Kind::threshold) {
      auto pivot = model.observation_index(threshold);
      if (!pivot)
        throw ValidationError("unknown observation '" + threshold +
                              "' in plan condition");
      const int n = static_cast<int>(model.num_observations());
      if (low_side)
        for (int o = 0; o <= *pivot; ++o) members.push_back(o);
      else
        for (int o = *pivot + 1; o < n; ++o) members.push_back(o);
    } else {
      for (const std::string& name : observations) {
        auto o = model.observation_index(name);
        if (!o)
          throw ValidationError("unknown observation '" + name +
                                "' in plan condition");
        members.push_back(*o);
      }
    }
    return members;
  }
};

struct PlanNode;
using PlanNodePtr = std::unique_ptr<PlanNode>;

struct PlanBranch {
  PlanCondition condition;
  PlanNodePtr subtree;
};

/// Node of a contingent plan tree: an action, a branch point, or the
/// horizon. A branch node with an action is an execute-then-branch node and
/// consumes a time step; a plain branch node is instantaneous.
struct PlanNode {
  enum class Type { action, branch, leaf };

  Type type = Type::leaf;
  std::string action;                // action node; coupled branch node
  PlanNodePtr child;                 // action node
  std::vector<PlanBranch> branches;  // branch node

  bool coupled() const { return type == Type::branch && !action.empty(); }

  static PlanNodePtr leaf() { return std::make_unique<PlanNode>(); }
};

/// Finite tree of action and branch nodes; the artifact's output.
struct ContingentPlan {
  PlanNodePtr root;
};

/// Structural summary used to check variant constraints.
struct PlanStructureReport {
  int max_branch_points_per_path = 0;
  int total_branch_points = 0;
  bool linear = true;  // no branch node has two subtrees that branch again
};

namespace detail {

struct StructureAccumulator {
  int max_depth = 0;
  int total = 0;
  bool linear = true;
};

// Returns (max branch points on a path below node, whether subtree branches).
inline std::pair<int, bool> analyze_node(const PlanNode& node,
                                         StructureAccumulator& acc) {
  switch (node.type) {
    case PlanNode::Type::leaf:
      return {0, false};
    case PlanNode::Type::action: {
      if (!node.child) return {0, false};
      return analyze_node(*node.child, acc);
    }
    case PlanNode::Type::branch: {
      acc.total += 1;
      int deepest = 0;
      int branching_children = 0;
      for (const PlanBranch& b : node.branches) {
        if (!b.subtree) continue;
        auto [depth, branches] = analyze_node(*b.subtree, acc);
        deepest = std::max(deepest, depth);
        if (branches) ++branching_children;
      }
      if (branching_children >= 2) acc.linear = false;
      return {deepest + 1, true};
    }
  }
  return {0, false};
}

}  // namespace detail

inline PlanStructureReport analyze_structure(const ContingentPlan& plan) {
  PlanStructureReport report;
  if (!plan.root) return report;
  detail::StructureAccumulator acc;
  auto [depth, _] = detail::analyze_node(*plan.root, acc);
  report.max_branch_points_per_path = depth;
  report.total_branch_points = acc.total;
  report.linear = acc.linear;
  return report;
}

namespace detail {

inline PlanCondition to_plan_condition(const BranchCondition& c,
                                       const std::vector<std::string>& names) {
  PlanCondition out;
  switch (c.kind) {
    case BranchCondition::Kind::observation:
      out.kind = PlanCondition::Kind::observation;
      out.observations = {names[c.members.front()]};
      break;
    case BranchCondition::Kind::subset:
      out.kind = PlanCondition::Kind::subset;
      for (int o : c.members) out.observations.push_back(names[o]);
      break;
    case BranchCondition::Kind::threshold:
      out.kind = PlanCondition::Kind::threshold;
      out.threshold = names[c.threshold];
      out.low_side = c.low_side;
      break;
  }
  return out;
}

inline PlanNodePtr extract_node(const SolvedPolicy& policy, const Belief& x,
                                int level, int time) {
  const SolveConfig& config = policy.config();
  const PomdpModel& model = policy.model();
  if (time >= config.horizon) return PlanNode::leaf();

  const Stage& stage = policy.stage(level, time);
  const auto& vectors = stage.vectors();

  // Highest value wins; exact ties fall to ordinary actions (fewer branches
  // at equal value), then to the lowest action index, then to canonical
  // position in the stage.
  double best_value = vectors.front().dot(x);
  for (std::size_t i = 1; i < vectors.size(); ++i)
    best_value = std::max(best_value, vectors[i].dot(x));
  std::size_t pick = vectors.size();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dot(x) != best_value) continue;
    if (pick == vectors.size()) {
      pick = i;
      continue;
    }
    const Provenance& cur = vectors[pick].prov;
    const Provenance& alt = vectors[i].prov;
    const bool cur_ord = cur.kind == Provenance::Kind::ordinary;
    const bool alt_ord = alt.kind == Provenance::Kind::ordinary;
    if (alt_ord && (!cur_ord || alt.action < cur.action)) pick = i;
  }
  const Provenance& prov = vectors[pick].prov;

  switch (prov.kind) {
    case Provenance::Kind::terminal:
      return PlanNode::leaf();
    case Provenance::Kind::ordinary: {
      auto node = std::make_unique<PlanNode>();
      node->type = PlanNode::Type::action;
      node->action = model.action_names()[prov.action];
      node->child = extract_node(policy, transition_update(model, x, prov.action),
                                 level, time + 1);
      return node;
    }
    case Provenance::Kind::branch:
    case Provenance::Kind::coupled: {
      const bool coupled = prov.kind == Provenance::Kind::coupled;
      const BranchProtocol& protocol =
          policy.protocols(level)[prov.protocol];
      auto node = std::make_unique<PlanNode>();
      node->type = PlanNode::Type::branch;
      if (coupled) node->action = model.action_names()[prov.action];
      for (std::size_t c = 0; c < protocol.conditions.size(); ++c) {
        const BranchCondition& cond = protocol.conditions[c];
        std::optional<ObservationPosterior> post;
        if (coupled)
          post = action_observations_update(model, x, prov.action,
                                            cond.members);
        else
          post = subset_observation_update(
              model, x, ObservationSubset(cond.members,
                                          model.num_observations()));
        if (!post) continue;  // impossible observation: build no branch
        PlanBranch branch;
        branch.condition =
            to_plan_condition(cond, model.observation_names());
        branch.subtree =
            extract_node(policy, post->posterior, protocol.budgets[c],
                         coupled ? time + 1 : time);
        node->branches.push_back(std::move(branch));
      }
      return node;
    }
  }
  return PlanNode::leaf();
}

}  // namespace detail

/// Reads the optimal plan out of a solved policy by simulating beliefs from
/// x0 and following the best vector at each node. Posteriors are recomputed
/// rather than chased through stored pointers, so branches for observations
/// that are impossible under the current belief are simply not built.
inline ContingentPlan extract(const SolvedPolicy& policy, const Belief& x0) {
  ContingentPlan plan;
  plan.root = detail::extract_node(policy, x0, policy.levels(), 0);
  return plan;
}

namespace detail {

inline double evaluate_plan_node(const PomdpModel& model, const PlanNode& node,
                                 const Belief& x, double gamma) {
  switch (node.type) {
    case PlanNode::Type::leaf:
      return 0.0;
    case PlanNode::Type::action: {
      auto a = model.action_index(node.action);
      if (!a) throw ValidationError("unknown action '" + node.action + "'");
      double reward = 0.0;
      for (std::size_t s = 0; s < model.num_states(); ++s)
        reward += x[s] * model.reward(static_cast<int>(s), *a);
      if (!node.child) return reward;
      return reward + gamma * evaluate_plan_node(
                                  model, *node.child,
                                  transition_update(model, x, *a), gamma);
    }
    case PlanNode::Type::branch: {
      std::optional<int> action;
      double value = 0.0;
      if (node.coupled()) {
        auto a = model.action_index(node.action);
        if (!a) throw ValidationError("unknown action '" + node.action + "'");
        action = *a;
        for (std::size_t s = 0; s < model.num_states(); ++s)
          value += x[s] * model.reward(static_cast<int>(s), *a);
      }
      for (const PlanBranch& b : node.branches) {
        const std::vector<int> members = b.condition.resolve(model);
        std::optional<ObservationPosterior> post;
        if (action)
          post = action_observations_update(model, x, *action, members);
        else
          post = subset_observation_update(
              model, x,
              ObservationSubset(members, model.num_observations()));
        if (!post || !b.subtree) continue;  // zero-weight branch
        const double child =
            evaluate_plan_node(model, *b.subtree, post->posterior, gamma);
        value += (action ? gamma : 1.0) * post->likelihood * child;
      }
      return value;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Exact expected cumulative reward of executing the plan from x0. This is
/// the independent check on solver values: it never touches alpha-vectors,
/// only the model and forward Bayes updates.
inline double evaluate_plan(const PomdpModel& model, const ContingentPlan& plan,
                            const Belief& x0, double gamma) {
  if (!plan.root) return 0.0;
  return detail::evaluate_plan_node(model, *plan.root, x0, gamma);
}

// ---------------------------------------------------------------------------
// Plan documents
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json condition_to_json(const PlanCondition& c) {
  nlohmann::json j;
  switch (c.kind) {
    case PlanCondition::Kind::observation:
      j["kind"] = "observation";
      j["observation"] = c.observations.front();
      break;
    case PlanCondition::Kind::subset:
      j["kind"] = "subset";
      j["observations"] = c.observations;
      break;
    case PlanCondition::Kind::threshold:
      j["kind"] = "threshold";
      j["threshold"] = c.threshold;
      j["side"] = c.low_side ? "le" : "gt";
      break;
  }
  return j;
}

inline nlohmann::json node_to_json(const PlanNode& node) {
  nlohmann::json j;
  switch (node.type) {
    case PlanNode::Type::leaf:
      j["type"] = "leaf";
      break;
    case PlanNode::Type::action:
      j["type"] = "action";
      j["action"] = node.action;
      j["child"] = node.child ? node_to_json(*node.child)
                              : nlohmann::json{{"type", "leaf"}};
      break;
    case PlanNode::Type::branch:
      j["type"] = "branch";
      if (node.coupled()) j["action"] = node.action;
      j["branches"] = nlohmann::json::array();
      for (const PlanBranch& b : node.branches)
        j["branches"].push_back(
            {{"condition", condition_to_json(b.condition)},
             {"subtree", node_to_json(*b.subtree)}});
      break;
  }
  return j;
}

inline PlanCondition condition_from_json(const nlohmann::json& j) {
  PlanCondition c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "observation") {
    c.kind = PlanCondition::Kind::observation;
    c.observations = {j.at("observation").get<std::string>()};
  } else if (kind == "subset") {
    c.kind = PlanCondition::Kind::subset;
    c.observations = j.at("observations").get<std::vector<std::string>>();
  } else if (kind == "threshold") {
    c.kind = PlanCondition::Kind::threshold;
    c.threshold = j.at("threshold").get<std::string>();
    c.low_side = j.at("side").get<std::string>() != "gt";
  } else {
    throw ParseError("unknown condition kind '" + kind + "'");
  }
  return c;
}

inline PlanNodePtr node_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  auto node = std::make_unique<PlanNode>();
  if (type == "leaf") {
    node->type = PlanNode::Type::leaf;
  } else if (type == "action") {
    node->type = PlanNode::Type::action;
    node->action = j.at("action").get<std::string>();
    node->child = node_from_json(j.at("child"));
  } else if (type == "branch") {
    node->type = PlanNode::Type::branch;
    if (j.contains("action")) node->action = j.at("action").get<std::string>();
    for (const auto& b : j.at("branches")) {
      PlanBranch branch;
      branch.condition = condition_from_json(b.at("condition"));
      branch.subtree = node_from_json(b.at("subtree"));
      node->branches.push_back(std::move(branch));
    }
  } else {
    throw ParseError("unknown node type '" + type + "'");
  }
  return node;
}

}  // namespace detail

inline std::string serialize(const ContingentPlan& plan) {
  nlohmann::json j = plan.root ? detail::node_to_json(*plan.root)
                               : nlohmann::json{{"type", "leaf"}};
  return j.dump(2) + "\n";
}

inline ContingentPlan deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed plan document: ") + e.what());
  }
  try {
    return ContingentPlan{detail::node_from_json(j)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed plan document: ") + e.what());
  }
}

/// Structural equality (conditions, actions and shape; used by round-trip
/// tests and golden-file checks).
inline bool plans_equal(const PlanNode& a, const PlanNode& b) {
  if (a.type != b.type || a.action != b.action) return false;
  if (a.type == PlanNode::Type::action) {
    const bool ac = a.child != nullptr, bc = b.child != nullptr;
    if (ac != bc) return false;
    return !ac || plans_equal(*a.child, *b.child);
  }
  if (a.type == PlanNode::Type::branch) {
    if (a.branches.size() != b.branches.size()) return false;
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
      const PlanCondition& ca = a.branches[i].condition;
      const PlanCondition& cb = b.branches[i].condition;
      if (ca.kind != cb.kind || ca.observations != cb.observations ||
          ca.threshold != cb.threshold || ca.low_side != cb.low_side)
        return false;
      if (!plans_equal(*a.branches[i].subtree, *b.branches[i].subtree))
        return false;
    }
  }
  return true;
}

inline bool plans_equal(const ContingentPlan& a, const ContingentPlan& b) {
  if (!a.root || !b.root) return !a.root && !b.root;
  return plans_equal(*a.root, *b.root);
}

/// GraphViz rendering of the plan tree.
inline std::string to_dot(const ContingentPlan& plan) {
  std::string out = "digraph plan {\n  node [fontname=\"Helvetica\"];\n";
  int counter = 0;
  auto emit = [&](auto&& self, const PlanNode& node) -> int {
    const int id = counter++;
    switch (node.type) {
      case PlanNode::Type::leaf:
        out += "  n" + std::to_string(id) + " [shape=point];\n";
        break;
      case PlanNode::Type::action: {
        out += "  n" + std::to_string(id) + " [shape=box, label=\"" +
               node.action + "\"];\n";
        if (node.child) {
          const int c = self(self, *node.child);
          out += "  n" + std::to_string(id) + " -> n" + std::to_string(c) +
                 ";\n";
        }
        break;
      }
      case PlanNode::Type::branch: {
        const std::string label =
            node.coupled() ? node.action + " / observe" : "observe";
        out += "  n" + std::to_string(id) + " [shape=diamond, label=\"" +
               label + "\"];\n";
        for (const PlanBranch& b : node.branches) {
          const int c = self(self, *b.subtree);
          std::string cond;
          switch (b.condition.kind) {
            case PlanCondition::Kind::observation:
              cond = b.condition.observations.front();
              break;
            case PlanCondition::Kind::subset: {
              cond = "{";
              for (std::size_t i = 0; i < b.condition.observations.size();
                   ++i) {
                if (i) cond += ",";
                cond += b.condition.observations[i];
              }
              cond += "}";
              break;
            }
            case PlanCondition::Kind::threshold:
              cond = (b.condition.low_side ? "<= " : "> ") +
                     b.condition.threshold;
              break;
          }
          out += "  n" + std::to_string(id) + " -> n" + std::to_string(c) +
                 " [label=\"" + cond + "\"];\n";
        }
        break;
      }
    }
    return id;
  };
  if (plan.root) emit(emit, *plan.root);
  out += "}\n";
  return out;
}

}  // namespace okp
