#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "okp/enumerate.hpp"
#include "okp/model.hpp"
#include "okp/protocol.hpp"
#include "okp/solver.hpp"

namespace okp {

/// One benchmark measurement: a (problem, configuration, algorithm) cell.
struct BenchmarkRow {
  std::string problem;
  Variant variant = Variant::balanced;
  BranchMode branch_mode = BranchMode::full;
  int k = 0;
  int h = 0;
  std::string algorithm;  // "okp" or "enumerate"
  double value = 0.0;
  double seconds = 0.0;
  std::optional<std::size_t> alpha_vectors;  // okp rows
  std::optional<std::uint64_t> enum_nodes;   // enumerate rows
};

inline std::string csv_header() {
  return "problem,variant,branch_mode,k,H,algorithm,value,seconds,"
         "alpha_vectors,enum_nodes";
}

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v + 0.0);
  return buf;
}

inline std::string to_csv(const BenchmarkRow& row) {
  char buf[64];
  std::string out = row.problem;
  out += ',';
  out += to_string(row.variant);
  out += ',';
  out += to_string(row.branch_mode);
  out += ',' + std::to_string(row.k) + ',' + std::to_string(row.h) + ',';
  out += row.algorithm;
  out += ',' + format_value(row.value) + ',';
  std::snprintf(buf, sizeof buf, "%.6f", row.seconds);
  out += buf;
  out += ',';
  if (row.alpha_vectors) out += std::to_string(*row.alpha_vectors);
  out += ',';
  if (row.enum_nodes) out += std::to_string(*row.enum_nodes);
  return out;
}

/// Sweeps the k x H grid on one problem, reporting an okp row per cell and,
/// unless disabled, an enumerate row. Enumerator cells that hit a resource
/// cap are skipped (reported through on_skip), not failed: the sweep exists
/// to chart exactly that blow-up.
inline void run_benchmark_sweep(
    const PomdpModel& model, const std::string& problem_name,
    SolveConfig base_config, int k_max, int h_max, bool include_enumerator,
    const EnumerationOptions& enum_options,
    const std::function<void(const BenchmarkRow&)>& on_row,
    const std::function<void(int, int, const std::string&)>& on_skip = {}) {
  for (int k = 0; k <= k_max; ++k) {
    for (int h = 1; h <= h_max; ++h) {
      SolveConfig config = base_config;
      config.budget = k;
      config.horizon = h;

      SolvedPolicy policy = solve(model, config);
      BenchmarkRow row;
      row.problem = problem_name;
      row.variant = config.variant;
      row.branch_mode = config.branch_mode;
      row.k = k;
      row.h = h;
      row.algorithm = "okp";
      row.value = value_at(policy, model.start(), k, 0);
      row.seconds = policy.seconds();
      row.alpha_vectors = policy.total_alpha_vectors();
      on_row(row);

      if (!include_enumerator) continue;
      try {
        EnumerationResult result =
            enumerate_optimal(model, config, model.start(), enum_options);
        BenchmarkRow erow = row;
        erow.algorithm = "enumerate";
        erow.value = result.value;
        erow.seconds = result.stats.seconds;
        erow.alpha_vectors.reset();
        erow.enum_nodes = result.stats.expanded_nodes;
        on_row(erow);
      } catch (const ResourceLimitError& e) {
        if (on_skip) on_skip(k, h, e.what());
      }
    }
  }
}

}  // namespace okp
