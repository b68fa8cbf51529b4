#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "okp/alpha.hpp"
#include "okp/model.hpp"
#include "okp/protocol.hpp"
#include "okp/prune.hpp"

namespace okp {

/// Bellman backup of one ordinary action:
///   out(s) = R(s, a) + gamma * sum_s' T(a, s, s') next(s').
/// The only observation an ordinary action yields is uninformative, so each
/// input vector maps to exactly one output vector and no cross-sum appears.
inline std::vector<AlphaVector> backup_ordinary(const Stage& next,
                                                const PomdpModel& model, int a,
                                                double gamma) {
  const std::size_t S = model.num_states();
  std::vector<AlphaVector> out;
  out.reserve(next.vectors().size());
  for (std::size_t j = 0; j < next.vectors().size(); ++j) {
    const AlphaVector& alpha = next.vectors()[j];
    AlphaVector b;
    b.coeffs.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      double future = 0.0;
      if (gamma != 0.0)
        for (std::size_t s2 = 0; s2 < S; ++s2)
          future += model.transition(a, static_cast<int>(s),
                                     static_cast<int>(s2)) *
                    alpha.coeffs[s2];
      b.coeffs[s] = model.reward(static_cast<int>(s), a) + gamma * future;
    }
    b.prov = Provenance::ordinary(a, static_cast<int>(j));
    out.push_back(std::move(b));
  }
  return out;
}

namespace detail {

/// The alpha-vector set standing for one branch condition of an
/// observe-and-branch action:  g(s) = (sum_{o in c} O(s, o)) * alpha(s)
/// for each alpha in the stage the branch continues in. The identity
///   Pr(c|x) V(posterior_c(x)) = max_g g . x
/// over this set is what lets the branch backup stay in alpha-vector form.
inline std::vector<AlphaVector> condition_vector_set(
    const Stage& continuation, const PomdpModel& model,
    const std::vector<int>& members) {
  const std::size_t S = model.num_states();
  std::vector<double> w(S, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (int o : members) w[s] += model.observation(static_cast<int>(s), o);

  std::vector<AlphaVector> out;
  out.reserve(continuation.vectors().size());
  for (std::size_t j = 0; j < continuation.vectors().size(); ++j) {
    const AlphaVector& alpha = continuation.vectors()[j];
    AlphaVector g;
    g.coeffs.resize(S);
    for (std::size_t s = 0; s < S; ++s) g.coeffs[s] = w[s] * alpha.coeffs[s];
    g.prov.kind = Provenance::Kind::branch;
    g.prov.choices = {static_cast<int>(j)};
    out.push_back(std::move(g));
  }
  return out;
}

/// Same construction for an execute-then-branch action: prediction through
/// the action's transition, condition weights from the action-dependent
/// observation model, and the continuation read one step later:
///   g(s) = gamma * sum_s' T(a, s, s') (sum_{o in c} O(a, s', o)) alpha(s').
inline std::vector<AlphaVector> coupled_condition_vector_set(
    const Stage& continuation, const PomdpModel& model, int a,
    const std::vector<int>& members, double gamma) {
  const std::size_t S = model.num_states();
  std::vector<double> w(S, 0.0);
  for (std::size_t s2 = 0; s2 < S; ++s2)
    for (int o : members) w[s2] += model.observation(a, static_cast<int>(s2), o);

  std::vector<AlphaVector> out;
  out.reserve(continuation.vectors().size());
  for (std::size_t j = 0; j < continuation.vectors().size(); ++j) {
    const AlphaVector& alpha = continuation.vectors()[j];
    AlphaVector g;
    g.coeffs.assign(S, 0.0);
    if (gamma != 0.0)
      for (std::size_t s = 0; s < S; ++s) {
        double v = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2)
          v += model.transition(a, static_cast<int>(s),
                                static_cast<int>(s2)) *
               w[s2] * alpha.coeffs[s2];
        g.coeffs[s] = gamma * v;
      }
    g.prov.kind = Provenance::Kind::coupled;
    g.prov.action = a;
    g.prov.choices = {static_cast<int>(j)};
    out.push_back(std::move(g));
  }
  return out;
}

/// Cross-sums the per-condition sets one at a time, pruning between steps.
/// Pruning intermediates never changes the represented function, so the
/// result equals the pruned full cross-sum while dodging its blowup.
inline std::vector<AlphaVector> fold_condition_sets(
    std::vector<AlphaVector> seed,
    const std::vector<const std::vector<AlphaVector>*>& condition_sets) {
  std::vector<AlphaVector> acc = std::move(seed);
  for (const auto* g : condition_sets) {
    acc = prune(cross_sum(acc, *g));
  }
  return acc;
}

}  // namespace detail

/// Backup of one observe-and-branch action at time t. `stages_at_t` holds
/// the already-solved stages of every lower level at the same time index
/// (the action is instantaneous). Returns the pruned cross-sum over the
/// protocol's conditions.
inline std::vector<AlphaVector> backup_branch(
    const std::vector<const Stage*>& stages_at_t, const PomdpModel& model,
    const BranchProtocol& protocol, int protocol_index) {
  assert(protocol.conditions.size() == protocol.budgets.size());
  AlphaVector seed;
  seed.coeffs.assign(model.num_states(), 0.0);
  seed.prov = Provenance::branch(protocol_index);

  std::vector<std::vector<AlphaVector>> pruned_sets;
  pruned_sets.reserve(protocol.conditions.size());
  std::vector<const std::vector<AlphaVector>*> views;
  for (std::size_t c = 0; c < protocol.conditions.size(); ++c) {
    const int budget = protocol.budgets[c];
    assert(budget >= 0 && budget < static_cast<int>(stages_at_t.size()));
    pruned_sets.push_back(prune(detail::condition_vector_set(
        *stages_at_t[budget], model, protocol.conditions[c].members)));
    views.push_back(&pruned_sets.back());
  }
  return detail::fold_condition_sets({std::move(seed)}, views);
}

/// Backup of one execute-then-branch action (coupled mode): the action's
/// reward now, plus the branch continuations one step later.
inline std::vector<AlphaVector> backup_coupled(
    const std::vector<const Stage*>& stages_at_next_t, const PomdpModel& model,
    int a, const BranchProtocol& protocol, int protocol_index, double gamma) {
  assert(protocol.conditions.size() == protocol.budgets.size());
  const std::size_t S = model.num_states();
  AlphaVector seed;
  seed.coeffs.resize(S);
  for (std::size_t s = 0; s < S; ++s)
    seed.coeffs[s] = model.reward(static_cast<int>(s), a);
  seed.prov = Provenance::coupled(a, protocol_index);

  std::vector<std::vector<AlphaVector>> pruned_sets;
  pruned_sets.reserve(protocol.conditions.size());
  std::vector<const std::vector<AlphaVector>*> views;
  for (std::size_t c = 0; c < protocol.conditions.size(); ++c) {
    const int budget = protocol.budgets[c];
    assert(budget >= 0 && budget < static_cast<int>(stages_at_next_t.size()));
    pruned_sets.push_back(prune(detail::coupled_condition_vector_set(
        *stages_at_next_t[budget], model, a, protocol.conditions[c].members,
        gamma)));
    views.push_back(&pruned_sets.back());
  }
  return detail::fold_condition_sets({std::move(seed)}, views);
}

}  // namespace okp
