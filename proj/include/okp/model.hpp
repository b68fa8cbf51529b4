#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "okp/common.hpp"

namespace okp {

/// Probability distribution over model states. Entries are clamped of
/// floating-point dust and renormalized on construction, so a Belief always
/// sums to 1.
class Belief {
 public:
  explicit Belief(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw ValidationError("belief over zero states");
    double sum = 0.0;
    for (double& v : p_) {
      if (v < 0.0) {
        if (v < -kBeliefSumTol)
          throw ValidationError("negative belief entry " + std::to_string(v));
        v = 0.0;
      }
      sum += v;
    }
    if (sum <= kProbTol) throw ValidationError("belief has zero total mass");
    for (double& v : p_) v /= sum;
  }

  static Belief uniform(std::size_t n) {
    return Belief(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static Belief point_mass(std::size_t n, std::size_t s) {
    std::vector<double> p(n, 0.0);
    p.at(s) = 1.0;
    return Belief(std::move(p));
  }

  const std::vector<double>& probs() const { return p_; }
  double operator[](std::size_t s) const { return p_[s]; }
  std::size_t size() const { return p_.size(); }

  bool operator==(const Belief& other) const { return p_ == other.p_; }

 private:
  std::vector<double> p_;
};

/// Nonempty set of observation indices, kept sorted and duplicate-free.
class ObservationSubset {
 public:
  ObservationSubset(std::vector<int> members, std::size_t num_observations)
      : members_(std::move(members)) {
    if (members_.empty()) throw ValidationError("empty observation subset");
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
    if (members_.front() < 0 ||
        members_.back() >= static_cast<int>(num_observations))
      throw ValidationError("observation index out of range in subset");
  }

  const std::vector<int>& members() const { return members_; }
  bool is_full(std::size_t num_observations) const {
    return members_.size() == num_observations;
  }

 private:
  std::vector<int> members_;
};

/// Finite POMDP: states S, actions A, observations O, transition T[a][s][s'],
/// expected reward R[s][a], observation probabilities O[a][s'][o], discount
/// and a default initial belief. Immutable after construction; all solver
/// operations are pure functions over it.
class PomdpModel {
 public:
  PomdpModel(std::vector<std::string> states, std::vector<std::string> actions,
             std::vector<std::string> observations,
             std::vector<double> transition,  // [a][s][s'] row-major
             std::vector<double> reward,      // [s][a]
             std::vector<double> observation_fn,  // [a][s'][o]
             double discount, std::optional<Belief> start = std::nullopt)
      : states_(std::move(states)),
        actions_(std::move(actions)),
        observations_(std::move(observations)),
        transition_(std::move(transition)),
        reward_(std::move(reward)),
        observation_fn_(std::move(observation_fn)),
        discount_(discount),
        start_(start ? std::move(*start) : Belief::uniform(states_.size())) {
    validate();
    action_independent_observations_ = compute_action_independence();
  }

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_observations() const { return observations_.size(); }

  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<std::string>& action_names() const { return actions_; }
  const std::vector<std::string>& observation_names() const {
    return observations_;
  }

  double transition(int a, int s, int s2) const {
    return transition_[(static_cast<std::size_t>(a) * num_states() + s) *
                           num_states() +
                       s2];
  }
  double reward(int s, int a) const {
    return reward_[static_cast<std::size_t>(s) * num_actions() + a];
  }
  double observation(int a, int s2, int o) const {
    return observation_fn_[(static_cast<std::size_t>(a) * num_states() + s2) *
                               num_observations() +
                           o];
  }
  /// Action-independent form O(s', o); valid only when the flag holds.
  double observation(int s2, int o) const {
    assert(action_independent_observations_);
    return observation(0, s2, o);
  }

  bool action_independent_observations() const {
    return action_independent_observations_;
  }
  double discount() const { return discount_; }
  const Belief& start() const { return start_; }

  std::optional<int> state_index(const std::string& name) const {
    return lookup(state_index_, name);
  }
  std::optional<int> action_index(const std::string& name) const {
    return lookup(action_index_, name);
  }
  std::optional<int> observation_index(const std::string& name) const {
    return lookup(observation_index_, name);
  }

 private:
  static std::optional<int> lookup(
      const std::unordered_map<std::string, int>& map,
      const std::string& name) {
    auto it = map.find(name);
    if (it == map.end()) return std::nullopt;
    return it->second;
  }

  void index_names(const std::vector<std::string>& names,
                   std::unordered_map<std::string, int>& map,
                   const char* kind) {
    if (names.empty())
      throw ValidationError(std::string("model has no ") + kind + "s");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty())
        throw ValidationError(std::string("empty ") + kind + " name");
      if (!map.emplace(names[i], static_cast<int>(i)).second)
        throw ValidationError(std::string("duplicate ") + kind + " name '" +
                              names[i] + "'");
    }
  }

  void validate() {
    index_names(states_, state_index_, "state");
    index_names(actions_, action_index_, "action");
    index_names(observations_, observation_index_, "observation");

    const std::size_t S = num_states(), A = num_actions(),
                      O = num_observations();
    if (transition_.size() != A * S * S)
      throw ValidationError("transition table has wrong size");
    if (reward_.size() != S * A)
      throw ValidationError("reward table has wrong size");
    if (observation_fn_.size() != A * S * O)
      throw ValidationError("observation table has wrong size");
    if (discount_ < 0.0 || discount_ > 1.0)
      throw ValidationError("discount must lie in [0, 1]");
    if (start_.size() != S)
      throw ValidationError("start belief has wrong dimension");

    for (double p : transition_)
      if (p < -kProbTol || p > 1.0 + kProbTol)
        throw ValidationError("transition probability outside [0, 1]");
    for (double p : observation_fn_)
      if (p < -kProbTol || p > 1.0 + kProbTol)
        throw ValidationError("observation probability outside [0, 1]");

    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t s = 0; s < S; ++s) {
        double sum = 0.0;
        for (std::size_t s2 = 0; s2 < S; ++s2)
          sum += transition(static_cast<int>(a), static_cast<int>(s),
                            static_cast<int>(s2));
        if (std::abs(sum - 1.0) > kProbTol)
          throw ValidationError("transition rows for action '" + actions_[a] +
                                "', state '" + states_[s] + "' sum to " +
                                std::to_string(sum));
      }
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t s2 = 0; s2 < S; ++s2) {
        double sum = 0.0;
        for (std::size_t o = 0; o < O; ++o)
          sum += observation(static_cast<int>(a), static_cast<int>(s2),
                             static_cast<int>(o));
        if (std::abs(sum - 1.0) > kProbTol)
          throw ValidationError("observation row for action '" + actions_[a] +
                                "', state '" + states_[s2] + "' sums to " +
                                std::to_string(sum));
      }
  }

  bool compute_action_independence() const {
    const std::size_t S = num_states(), A = num_actions(),
                      O = num_observations();
    for (std::size_t a = 1; a < A; ++a)
      for (std::size_t i = 0; i < S * O; ++i)
        if (observation_fn_[a * S * O + i] != observation_fn_[i]) return false;
    return true;
  }

  std::vector<std::string> states_, actions_, observations_;
  std::vector<double> transition_, reward_, observation_fn_;
  double discount_;
  Belief start_;
  bool action_independent_observations_;
  std::unordered_map<std::string, int> state_index_, action_index_,
      observation_index_;
};

/// Posterior belief together with the likelihood of the evidence that
/// produced it.
struct ObservationPosterior {
  Belief posterior;
  double likelihood;
};

/// Belief prediction through the transition model alone (the only update the
/// conformant level ever needs). The evidence is certain, so there is no
/// likelihood to report.
inline Belief transition_update(const PomdpModel& model, const Belief& x,
                                int a) {
  const std::size_t S = model.num_states();
  std::vector<double> next(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const double xs = x[s];
    if (xs <= 0.0) continue;
    for (std::size_t s2 = 0; s2 < S; ++s2)
      next[s2] += xs * model.transition(a, static_cast<int>(s),
                                        static_cast<int>(s2));
  }
  return Belief(std::move(next));
}

namespace detail {

/// Reweights x by per-state weights, returning the normalized posterior and
/// the normalizer Z. Empty when Z is numerically zero.
inline std::optional<ObservationPosterior> reweight(
    const Belief& x, const std::vector<double>& weights) {
  const std::size_t S = x.size();
  std::vector<double> post(S);
  double z = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    post[s] = x[s] * weights[s];
    z += post[s];
  }
  if (z < kProbTol) return std::nullopt;
  return ObservationPosterior{Belief(std::move(post)), z};
}

}  // namespace detail

/// Bayes update on a single observation, with no transition. Requires an
/// action-independent observation model. Empty result means the observation
/// is impossible under x and the caller must not build this branch.
inline std::optional<ObservationPosterior> observation_update(
    const PomdpModel& model, const Belief& x, int o) {
  assert(model.action_independent_observations());
  const std::size_t S = model.num_states();
  std::vector<double> w(S);
  for (std::size_t s = 0; s < S; ++s)
    w[s] = model.observation(static_cast<int>(s), o);
  return detail::reweight(x, w);
}

/// Bayes update on the event "some observation in the subset was made".
inline std::optional<ObservationPosterior> subset_observation_update(
    const PomdpModel& model, const Belief& x, const ObservationSubset& subset) {
  assert(model.action_independent_observations());
  const std::size_t S = model.num_states();
  std::vector<double> w(S, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (int o : subset.members())
      w[s] += model.observation(static_cast<int>(s), o);
  return detail::reweight(x, w);
}

/// Prediction through action a followed by conditioning on a set of
/// observations drawn with the action-dependent model O[a][s'][o]. This is
/// the update behind execute-then-branch actions.
inline std::optional<ObservationPosterior> action_observations_update(
    const PomdpModel& model, const Belief& x, int a,
    const std::vector<int>& observations) {
  const Belief predicted = transition_update(model, x, a);
  const std::size_t S = model.num_states();
  std::vector<double> w(S, 0.0);
  for (std::size_t s2 = 0; s2 < S; ++s2)
    for (int o : observations)
      w[s2] += model.observation(a, static_cast<int>(s2), o);
  return detail::reweight(predicted, w);
}

/// Single-observation case of the above; valid for action-dependent models.
inline std::optional<ObservationPosterior> action_observation_update(
    const PomdpModel& model, const Belief& x, int a, int o) {
  return action_observations_update(model, x, a, {o});
}

}  // namespace okp
