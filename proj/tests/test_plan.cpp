#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "okp/enumerate.hpp"
#include "okp/plan.hpp"
#include "okp/problems.hpp"
#include "okp/solver.hpp"
#include "test_util.hpp"

using namespace okp;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

SolveConfig make_config(int k, int h, Variant v = Variant::balanced,
                        BranchMode m = BranchMode::full) {
  SolveConfig c;
  c.variant = v;
  c.branch_mode = m;
  c.gamma = 1.0;
  c.horizon = h;
  c.budget = k;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Tiger where hearing right is impossible when the tiger is left.
PomdpModel one_sided_tiger() {
  std::vector<double> T{1, 0, 0, 1, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  std::vector<double> R{-1, -10, 6, -1, 6, -10};
  std::vector<double> O;
  for (int a = 0; a < 3; ++a) {
    O.insert(O.end(), {1.0, 0.0});    // tiger-left: always hear-left
    O.insert(O.end(), {0.15, 0.85});  // tiger-right
  }
  return PomdpModel({"tiger-left", "tiger-right"},
                    {"listen", "open-left", "open-right"},
                    {"hear-left", "hear-right"}, T, R, O, 1.0,
                    Belief({0.5, 0.5}));
}

}  // namespace

TEST_CASE("conformant extraction is a listen chain") {
  const PomdpModel m = tiger();
  const SolvedPolicy policy = solve(m, make_config(0, 3));
  const ContingentPlan plan = extract(policy, m.start());

  const PlanNode* node = plan.root.get();
  for (int step = 0; step < 3; ++step) {
    REQUIRE(node);
    CHECK(node->type == PlanNode::Type::action);
    CHECK(node->action == "listen");
    node = node->child.get();
  }
  REQUIRE(node);
  CHECK(node->type == PlanNode::Type::leaf);

  const PlanStructureReport report = analyze_structure(plan);
  CHECK(report.total_branch_points == 0);
  CHECK(report.max_branch_points_per_path == 0);
  CHECK(report.linear);
}

TEST_CASE("the one-branch tiger plan opens the far door") {
  const PomdpModel m = tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const ContingentPlan plan = extract(policy, m.start());

  REQUIRE(plan.root);
  REQUIRE(plan.root->type == PlanNode::Type::branch);
  CHECK_FALSE(plan.root->coupled());
  REQUIRE(plan.root->branches.size() == 2);

  const auto& left = plan.root->branches[0];
  CHECK(left.condition.kind == PlanCondition::Kind::observation);
  CHECK(left.condition.observations ==
        std::vector<std::string>{"hear-left"});
  REQUIRE(left.subtree->type == PlanNode::Type::action);
  CHECK(left.subtree->action == "open-right");

  const auto& right = plan.root->branches[1];
  CHECK(right.condition.observations ==
        std::vector<std::string>{"hear-right"});
  CHECK(right.subtree->action == "open-left");

  const PlanStructureReport report = analyze_structure(plan);
  CHECK(report.total_branch_points == 1);
  CHECK(report.max_branch_points_per_path == 1);
  CHECK(report.linear);
}

TEST_CASE("equal-value ties extract the branch-free plan") {
  // In the symmetric tiger, branching on hear-left/hear-right and opening
  // the right door either way produces exactly the open-right vector; the
  // purge keeps the ordinary copy, so extraction from certainty does not
  // branch.
  const PomdpModel m = tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const ContingentPlan plan = extract(policy, Belief({1.0, 0.0}));
  REQUIRE(plan.root);
  CHECK(plan.root->type == PlanNode::Type::action);
  CHECK(plan.root->action == "open-right");
}

TEST_CASE("a branch whose observation is certain keeps a single child") {
  // With O(tiger-left, hear-right) = 0, branching from (1, 0) can only ever
  // see hear-left; the branch node is built with that one child.
  const PomdpModel m = one_sided_tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const ContingentPlan plan = extract(policy, Belief({1.0, 0.0}));
  REQUIRE(plan.root);
  if (plan.root->type == PlanNode::Type::branch) {
    REQUIRE(plan.root->branches.size() == 1);
    CHECK(plan.root->branches[0].condition.observations ==
          std::vector<std::string>{"hear-left"});
    CHECK(plan.root->branches[0].subtree->action == "open-right");
  } else {
    CHECK(plan.root->action == "open-right");
  }
  CHECK_THAT(evaluate_plan(m, plan, Belief({1.0, 0.0}), 1.0),
             WithinAbs(6.0, 1e-9));
}

TEST_CASE("impossible observations get no branch") {
  // From (1, 0), hearing right has zero probability in the one-sided tiger;
  // if the optimum branches at all, the branch node must skip that child.
  const PomdpModel m = one_sided_tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 2));
  const ContingentPlan plan = extract(policy, Belief({1.0, 0.0}));

  // walk the tree: no branch node may carry a hear-right child reached with
  // zero probability
  const std::function<void(const PlanNode&, const Belief&)> walk =
      [&](const PlanNode& node, const Belief& x) {
        if (node.type == PlanNode::Type::branch) {
          for (const auto& b : node.branches) {
            auto post = subset_observation_update(
                m, x,
                ObservationSubset(b.condition.resolve(m),
                                  m.num_observations()));
            REQUIRE(post);  // a branch was built, so it must be reachable
            walk(*b.subtree, post->posterior);
          }
        } else if (node.type == PlanNode::Type::action) {
          if (node.child)
            walk(*node.child,
                 transition_update(m, x, *m.action_index(node.action)));
        }
      };
  walk(*plan.root, Belief({1.0, 0.0}));
}

TEST_CASE("plan evaluation matches hand expectations") {
  const PomdpModel m = tiger();

  CHECK(evaluate_plan(m, ContingentPlan{PlanNode::leaf()}, m.start(), 1.0) ==
        0.0);

  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const ContingentPlan branchy = extract(policy, m.start());
  CHECK_THAT(evaluate_plan(m, branchy, m.start(), 1.0), WithinAbs(3.6, 1e-9));

  const SolvedPolicy conformant = solve(m, make_config(0, 4));
  const ContingentPlan chain = extract(conformant, m.start());
  CHECK_THAT(evaluate_plan(m, chain, m.start(), 1.0), WithinAbs(-4.0, 1e-9));
}

TEST_CASE("extraction reproduces the solver value across cells") {
  for (const PomdpModel& m : {tiger(), hz_maze()}) {
    for (int k : {0, 1, 2}) {
      for (int h : {1, 2, 3}) {
        const SolveConfig config = make_config(k, h);
        const SolvedPolicy policy = solve(m, config);
        const ContingentPlan plan = extract(policy, m.start());
        CHECK_THAT(evaluate_plan(m, plan, m.start(), config.gamma),
                   WithinAbs(value_at(policy, m.start(), k, 0), 1e-9));
      }
    }
  }
}

TEST_CASE("no plan can beat the solved value") {
  const PomdpModel m = tiger();
  const SolveConfig config = make_config(1, 2);
  const SolvedPolicy policy = solve(m, config);
  const double optimum = value_at(policy, m.start(), 1, 0);

  // every enumerated plan of the same budget evaluates at or below it
  const EnumerationResult oracle = enumerate_optimal(m, config, m.start());
  CHECK(evaluate_plan(m, oracle.plan, m.start(), 1.0) <= optimum + 1e-9);

  // including obviously suboptimal hand-written plans
  auto open_now = std::make_unique<PlanNode>();
  open_now->type = PlanNode::Type::action;
  open_now->action = "open-left";
  open_now->child = PlanNode::leaf();
  auto chain = std::make_unique<PlanNode>();
  chain->type = PlanNode::Type::action;
  chain->action = "listen";
  chain->child = std::move(open_now);
  CHECK(evaluate_plan(m, ContingentPlan{std::move(chain)}, m.start(), 1.0) <=
        optimum + 1e-9);
}

TEST_CASE("structure analysis flags nonlinear trees") {
  // depth-2 full binary tree of branch nodes
  auto leaf_branch = [] {
    auto node = std::make_unique<PlanNode>();
    node->type = PlanNode::Type::branch;
    for (const char* obs : {"hear-left", "hear-right"}) {
      PlanBranch b;
      b.condition.kind = PlanCondition::Kind::observation;
      b.condition.observations = {obs};
      b.subtree = PlanNode::leaf();
      node->branches.push_back(std::move(b));
    }
    return node;
  };
  auto root = std::make_unique<PlanNode>();
  root->type = PlanNode::Type::branch;
  for (const char* obs : {"hear-left", "hear-right"}) {
    PlanBranch b;
    b.condition.kind = PlanCondition::Kind::observation;
    b.condition.observations = {obs};
    b.subtree = leaf_branch();
    root->branches.push_back(std::move(b));
  }

  const PlanStructureReport report =
      analyze_structure(ContingentPlan{std::move(root)});
  CHECK(report.max_branch_points_per_path == 2);
  CHECK(report.total_branch_points == 3);
  CHECK_FALSE(report.linear);
}

TEST_CASE("extracted plans satisfy their variant's constraint") {
  const PomdpModel m = tiger();
  for (Variant variant :
       {Variant::balanced, Variant::linear, Variant::general}) {
    for (int k : {1, 2}) {
      const SolveConfig config = make_config(k, 3, variant);
      const SolvedPolicy policy = solve(m, config);
      const PlanStructureReport report =
          analyze_structure(extract(policy, m.start()));
      switch (variant) {
        case Variant::balanced:
          CHECK(report.max_branch_points_per_path <= k);
          break;
        case Variant::linear:
          CHECK(report.linear);
          CHECK(report.total_branch_points <= k);
          break;
        case Variant::general:
          CHECK(report.total_branch_points <= k);
          break;
      }
    }
  }
}

TEST_CASE("plan documents round-trip") {
  const PomdpModel m = tiger();
  for (int k : {0, 1, 2}) {
    const SolvedPolicy policy = solve(m, make_config(k, 2));
    const ContingentPlan plan = extract(policy, m.start());
    const ContingentPlan back = deserialize(serialize(plan));
    CHECK(plans_equal(plan, back));
  }

  // subset and threshold conditions keep their payloads
  const SolvedPolicy policy =
      solve(m, make_config(1, 2, Variant::balanced, BranchMode::threshold));
  const ContingentPlan plan = extract(policy, m.start());
  const ContingentPlan back = deserialize(serialize(plan));
  CHECK(plans_equal(plan, back));
  CHECK_THAT(evaluate_plan(m, back, m.start(), 1.0),
             WithinAbs(value_at(policy, m.start(), 1, 0), 1e-9));
}

TEST_CASE("the golden tiger plan file matches extraction") {
  const PomdpModel m = tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const ContingentPlan plan = extract(policy, m.start());
  const ContingentPlan golden = deserialize(
      read_file(std::string(OKP_TEST_DATA_DIR) + "/tiger_k1_h1.plan.json"));
  CHECK(plans_equal(plan, golden));
  CHECK_THAT(evaluate_plan(m, golden, m.start(), 1.0), WithinAbs(3.6, 1e-9));
}

TEST_CASE("malformed plan documents are rejected by name") {
  CHECK_THROWS_WITH(deserialize("{\"type\": \"loop\"}"),
                    ContainsSubstring("unknown node type 'loop'"));
  CHECK_THROWS_WITH(deserialize("not json at all"),
                    ContainsSubstring("malformed"));
  CHECK_THROWS_WITH(
      deserialize("{\"type\": \"branch\", \"branches\": [{\"condition\": "
                  "{\"kind\": \"color\"}, \"subtree\": {\"type\": "
                  "\"leaf\"}}]}"),
      ContainsSubstring("unknown condition kind 'color'"));
}

TEST_CASE("unknown names in plans fail evaluation") {
  const PomdpModel m = tiger();
  auto node = std::make_unique<PlanNode>();
  node->type = PlanNode::Type::action;
  node->action = "teleport";
  node->child = PlanNode::leaf();
  CHECK_THROWS_AS(
      evaluate_plan(m, ContingentPlan{std::move(node)}, m.start(), 1.0),
      ValidationError);
}

TEST_CASE("dot rendering names actions and conditions") {
  const PomdpModel m = tiger();
  const SolvedPolicy policy = solve(m, make_config(1, 1));
  const std::string dot = to_dot(extract(policy, m.start()));
  CHECK_THAT(dot, ContainsSubstring("digraph"));
  CHECK_THAT(dot, ContainsSubstring("open-right"));
  CHECK_THAT(dot, ContainsSubstring("hear-left"));
  CHECK_THAT(dot, ContainsSubstring("observe"));
}
