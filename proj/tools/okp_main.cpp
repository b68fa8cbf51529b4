// okp: exact limited-contingency planning toolkit.
//
// Subcommands: solve (stacked value iteration), enumerate (brute-force
// search), compare (both, with agreement check), eval (expected value of a
// plan file), bench (k x H sweeps to CSV).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "okp/bench.hpp"
#include "okp/common.hpp"
#include "okp/enumerate.hpp"
#include "okp/model.hpp"
#include "okp/plan.hpp"
#include "okp/pomdp_format.hpp"
#include "okp/problems.hpp"
#include "okp/protocol.hpp"
#include "okp/solver.hpp"

namespace {

struct Selection {
  std::string problem;
  std::string model_file;
  int horizon = 1;
  int k = 0;
  std::string variant = "balanced";
  std::string branch = "full";
  bool coupled = false;
  double discount = -1.0;  // <0: use the model's
  std::string start;       // whitespace/comma-separated probabilities
};

void add_selection_flags(CLI::App* cmd, Selection& sel, bool solver_flags) {
  cmd->add_option("--problem", sel.problem,
                  "built-in problem: tiger, maze, grid10x10");
  cmd->add_option("--model", sel.model_file, ".pomdp model file");
  if (solver_flags) {
    cmd->add_option("--horizon,-H", sel.horizon, "planning horizon")
        ->required();
    cmd->add_option("--k", sel.k, "branch budget k");
    cmd->add_option("--variant", sel.variant, "balanced | linear | general");
    cmd->add_option("--branch", sel.branch, "full | binary | threshold");
    cmd->add_flag("--coupled", sel.coupled,
                  "fuse branching with actions (action-dependent "
                  "observation models)");
  }
  cmd->add_option("--discount", sel.discount,
                  "discount override (default: the model's)");
  cmd->add_option("--start", sel.start,
                  "initial belief override, e.g. \"0.5 0.5\"");
}

okp::PomdpModel load_model(const Selection& sel) {
  if (!sel.problem.empty() && !sel.model_file.empty())
    throw okp::ConfigError("give either --problem or --model, not both");
  if (!sel.problem.empty()) {
    auto model = okp::builtin_problem(sel.problem);
    if (!model)
      throw okp::ConfigError("unknown built-in problem '" + sel.problem +
                             "'");
    return *model;
  }
  if (!sel.model_file.empty()) return okp::parse_model_file(sel.model_file);
  throw okp::ConfigError("a model is required: --problem or --model");
}

okp::Belief start_belief(const okp::PomdpModel& model, const Selection& sel) {
  if (sel.start.empty()) return model.start();
  std::string cleaned = sel.start;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> probs;
  double v;
  while (in >> v) probs.push_back(v);
  if (probs.size() != model.num_states())
    throw okp::ValidationError(
        "--start needs " + std::to_string(model.num_states()) +
        " probabilities, got " + std::to_string(probs.size()));
  return okp::Belief(probs);
}

okp::SolveConfig make_config(const okp::PomdpModel& model,
                             const Selection& sel) {
  okp::SolveConfig config;
  if (sel.variant == "balanced")
    config.variant = okp::Variant::balanced;
  else if (sel.variant == "linear")
    config.variant = okp::Variant::linear;
  else if (sel.variant == "general")
    config.variant = okp::Variant::general;
  else
    throw okp::ConfigError("unknown variant '" + sel.variant + "'");
  if (sel.branch == "full")
    config.branch_mode = okp::BranchMode::full;
  else if (sel.branch == "binary")
    config.branch_mode = okp::BranchMode::binary;
  else if (sel.branch == "threshold")
    config.branch_mode = okp::BranchMode::threshold;
  else
    throw okp::ConfigError("unknown branch mode '" + sel.branch + "'");
  config.coupled = sel.coupled;
  config.gamma = sel.discount >= 0.0 ? sel.discount : model.discount();
  config.horizon = sel.horizon;
  config.budget = sel.k;
  return config;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw okp::ValidationError("cannot write file '" + path + "'");
  out << contents;
}

void append_csv_row(const std::string& path, const okp::BenchmarkRow& row) {
  const bool fresh =
      !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw okp::ValidationError("cannot write file '" + path + "'");
  if (fresh) out << okp::csv_header() << "\n";
  out << okp::to_csv(row) << "\n";
}

okp::BenchmarkRow solve_row(const Selection& sel, const okp::SolveConfig& cfg,
                            const okp::SolvedPolicy& policy, double value) {
  okp::BenchmarkRow row;
  row.problem = sel.problem.empty() ? sel.model_file : sel.problem;
  row.variant = cfg.variant;
  row.branch_mode = cfg.branch_mode;
  row.k = cfg.budget;
  row.h = cfg.horizon;
  row.algorithm = "okp";
  row.value = value;
  row.seconds = policy.seconds();
  row.alpha_vectors = policy.total_alpha_vectors();
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact optimal limited-contingency planning over POMDPs"};
  app.require_subcommand(1);

  Selection sel;
  okp::EnumerationOptions enum_options;
  std::string plan_out, dot_out, csv_out, plan_in;
  int k_max = 0, h_max = 1;
  bool no_enumerate = false;

  auto* cmd_solve = app.add_subcommand(
      "solve", "solve the stacked construction and print the optimal value");
  add_selection_flags(cmd_solve, sel, true);
  cmd_solve->add_option("--extract-plan", plan_out,
                        "write the optimal plan to this file");
  cmd_solve->add_option("--dot", dot_out, "write the plan as GraphViz DOT");
  cmd_solve->add_option("--csv", csv_out, "append a benchmark row here");

  auto* cmd_enum = app.add_subcommand(
      "enumerate", "brute-force the optimal plan and print its value");
  add_selection_flags(cmd_enum, sel, true);
  cmd_enum->add_option("--extract-plan", plan_out,
                       "write the optimal plan to this file");
  cmd_enum->add_option("--dot", dot_out, "write the plan as GraphViz DOT");
  cmd_enum->add_option("--csv", csv_out, "append a benchmark row here");
  cmd_enum->add_option("--node-cap", enum_options.node_cap,
                       "abort after this many expanded nodes");
  cmd_enum->add_option("--plan-cap", enum_options.plan_cap,
                       "refuse when the naive plan count exceeds this");
  cmd_enum->add_flag("--memo", enum_options.exact_memo,
                     "cache values per exact belief (bit-identical results)");

  auto* cmd_compare = app.add_subcommand(
      "compare", "run solver and enumerator, check value agreement");
  add_selection_flags(cmd_compare, sel, true);
  cmd_compare->add_option("--node-cap", enum_options.node_cap,
                          "abort after this many expanded nodes");
  cmd_compare->add_option("--plan-cap", enum_options.plan_cap,
                          "refuse when the naive plan count exceeds this");
  cmd_compare->add_flag("--memo", enum_options.exact_memo,
                        "cache values per exact belief");

  auto* cmd_eval = app.add_subcommand(
      "eval", "print the expected value of a plan file from --start");
  add_selection_flags(cmd_eval, sel, false);
  cmd_eval->add_option("--plan", plan_in, "plan document to evaluate")
      ->required();

  auto* cmd_bench = app.add_subcommand(
      "bench", "sweep a k x H grid and append rows to a CSV");
  add_selection_flags(cmd_bench, sel, true);
  cmd_bench->add_option("--k-max", k_max, "sweep k = 0..k-max")->required();
  cmd_bench->add_option("--h-max", h_max, "sweep H = 1..h-max")->required();
  cmd_bench->add_option("--csv", csv_out, "output CSV path")->required();
  cmd_bench->add_flag("--no-enumerate", no_enumerate,
                      "benchmark the solver only");
  cmd_bench->add_option("--node-cap", enum_options.node_cap,
                        "abort enumerator cells beyond this many nodes");
  cmd_bench->add_option("--plan-cap", enum_options.plan_cap,
                        "skip enumerator cells beyond this naive plan count");
  cmd_bench->add_flag("--memo", enum_options.exact_memo,
                      "cache enumerator values per exact belief");
  // bench's --horizon is unused; k-max/h-max drive the sweep.
  cmd_bench->get_option("--horizon")->required(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_solve->parsed()) {
      const okp::PomdpModel model = load_model(sel);
      const okp::SolveConfig config = make_config(model, sel);
      const okp::Belief x0 = start_belief(model, sel);
      const okp::SolvedPolicy policy = okp::solve(model, config);
      const double value = okp::value_at(policy, x0, config.budget, 0);
      std::printf("%.9f\n", value + 0.0);
      if (!plan_out.empty() || !dot_out.empty()) {
        const okp::ContingentPlan plan = okp::extract(policy, x0);
        if (!plan_out.empty()) write_file(plan_out, okp::serialize(plan));
        if (!dot_out.empty()) write_file(dot_out, okp::to_dot(plan));
      }
      if (!csv_out.empty())
        append_csv_row(csv_out, solve_row(sel, config, policy, value));
      return 0;
    }

    if (cmd_enum->parsed()) {
      const okp::PomdpModel model = load_model(sel);
      const okp::SolveConfig config = make_config(model, sel);
      const okp::Belief x0 = start_belief(model, sel);
      const okp::EnumerationResult result =
          okp::enumerate_optimal(model, config, x0, enum_options);
      std::printf("%.9f\n", result.value + 0.0);
      if (!plan_out.empty()) write_file(plan_out, okp::serialize(result.plan));
      if (!dot_out.empty()) write_file(dot_out, okp::to_dot(result.plan));
      if (!csv_out.empty()) {
        okp::BenchmarkRow row;
        row.problem = sel.problem.empty() ? sel.model_file : sel.problem;
        row.variant = config.variant;
        row.branch_mode = config.branch_mode;
        row.k = config.budget;
        row.h = config.horizon;
        row.algorithm = "enumerate";
        row.value = result.value;
        row.seconds = result.stats.seconds;
        row.enum_nodes = result.stats.expanded_nodes;
        append_csv_row(csv_out, row);
      }
      return 0;
    }

    if (cmd_compare->parsed()) {
      const okp::PomdpModel model = load_model(sel);
      const okp::SolveConfig config = make_config(model, sel);
      const okp::Belief x0 = start_belief(model, sel);
      const okp::CompareReport report =
          okp::compare(model, config, x0, enum_options);
      std::printf("okp %.9f\n", report.solver_value + 0.0);
      std::printf("enumerate %.9f\n", report.enumerator_value + 0.0);
      std::printf("# okp: %zu alpha-vectors, %.6f s; enumerate: %llu nodes, "
                  "%.6f s\n",
                  report.solver_alpha_vectors, report.solver_seconds,
                  static_cast<unsigned long long>(
                      report.enumerator_stats.expanded_nodes),
                  report.enumerator_seconds);
      if (!report.agree) {
        std::fprintf(stderr,
                     "values disagree beyond %.1e\nsolver plan:\n%s\n"
                     "enumerator plan:\n%s\n",
                     okp::kValueTol, okp::serialize(report.solver_plan).c_str(),
                     okp::serialize(report.enumerator_plan).c_str());
        return 4;
      }
      return 0;
    }

    if (cmd_eval->parsed()) {
      const okp::PomdpModel model = load_model(sel);
      std::ifstream in(plan_in);
      if (!in)
        throw okp::ParseError("cannot open plan file '" + plan_in + "'");
      std::stringstream buffer;
      buffer << in.rdbuf();
      const okp::ContingentPlan plan = okp::deserialize(buffer.str());
      const double gamma =
          sel.discount >= 0.0 ? sel.discount : model.discount();
      const double value =
          okp::evaluate_plan(model, plan, start_belief(model, sel), gamma);
      std::printf("%.9f\n", value + 0.0);
      return 0;
    }

    if (cmd_bench->parsed()) {
      const okp::PomdpModel model = load_model(sel);
      sel.horizon = 1;
      const okp::SolveConfig base = make_config(model, sel);
      okp::run_benchmark_sweep(
          model, sel.problem.empty() ? sel.model_file : sel.problem, base,
          k_max, h_max, !no_enumerate, enum_options,
          [&](const okp::BenchmarkRow& row) { append_csv_row(csv_out, row); },
          [&](int k, int h, const std::string& why) {
            std::fprintf(stderr, "skipping enumerate k=%d H=%d: %s\n", k, h,
                         why.c_str());
          });
      return 0;
    }
  } catch (const okp::ResourceLimitError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const okp::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const okp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const okp::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
