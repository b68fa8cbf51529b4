#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstddef>
#include <utility>
#include <vector>

#include "okp/model.hpp"

namespace okp {

/// How an alpha-vector was produced. Extraction re-simulates beliefs rather
/// than following these tags across stages, but the tag decides which plan
/// node the vector stands for and keeps set ordering deterministic.
struct Provenance {
  enum class Kind {
    terminal,  // the all-zero vector of the horizon stage
    ordinary,  // Bellman backup of one ordinary action
    branch,    // observe-and-branch backup (instantaneous)
    coupled,   // execute-then-branch backup (consumes a time step)
  };

  Kind kind = Kind::terminal;
  int action = -1;    // ordinary / coupled
  int protocol = -1;  // branch / coupled: index into the level's protocol list
  int source = -1;    // ordinary: index of the source vector in the next stage
  std::vector<int> choices;  // branch / coupled: per-condition source indices

  static Provenance terminal() { return {}; }
  static Provenance ordinary(int action, int source) {
    Provenance p;
    p.kind = Kind::ordinary;
    p.action = action;
    p.source = source;
    return p;
  }
  static Provenance branch(int protocol) {
    Provenance p;
    p.kind = Kind::branch;
    p.protocol = protocol;
    return p;
  }
  static Provenance coupled(int action, int protocol) {
    Provenance p;
    p.kind = Kind::coupled;
    p.action = action;
    p.protocol = protocol;
    return p;
  }

  friend bool operator==(const Provenance&, const Provenance&) = default;

  // Ordinary-action provenance sorts first so equal-valued ties resolve to
  // the plan with fewer branches.
  std::strong_ordering order(const Provenance& other) const {
    auto rank = [](Kind k) {
      switch (k) {
        case Kind::ordinary: return 0;
        case Kind::branch: return 1;
        case Kind::coupled: return 2;
        case Kind::terminal: return 3;
      }
      return 4;
    };
    if (auto c = rank(kind) <=> rank(other.kind); c != 0) return c;
    if (auto c = action <=> other.action; c != 0) return c;
    if (auto c = protocol <=> other.protocol; c != 0) return c;
    if (auto c = source <=> other.source; c != 0) return c;
    return choices <=> other.choices;
  }
};

/// One linear piece of a piecewise-linear-convex value function over the
/// belief simplex.
struct AlphaVector {
  std::vector<double> coeffs;
  Provenance prov;

  double dot(const Belief& x) const {
    double v = 0.0;
    for (std::size_t s = 0; s < coeffs.size(); ++s) v += coeffs[s] * x[s];
    return v;
  }

  /// Canonical order: lexicographic over coefficients, then provenance.
  /// Coefficients are finite by invariant, so the double comparison is total.
  std::strong_ordering order(const AlphaVector& other) const {
    const std::size_t n = std::min(coeffs.size(), other.coeffs.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (coeffs[i] < other.coeffs[i]) return std::strong_ordering::less;
      if (coeffs[i] > other.coeffs[i]) return std::strong_ordering::greater;
    }
    if (auto c = coeffs.size() <=> other.coeffs.size(); c != 0) return c;
    return prov.order(other.prov);
  }
};

inline bool canonical_less(const AlphaVector& a, const AlphaVector& b) {
  return a.order(b) < 0;
}

/// Value function for one (branch level, time) cell: a canonically sorted,
/// nonempty set of alpha-vectors whose pointwise max is the value.
class Stage {
 public:
  Stage(int level, int time, std::vector<AlphaVector> vectors)
      : level_(level), time_(time), vectors_(std::move(vectors)) {
    assert(!vectors_.empty());
    std::sort(vectors_.begin(), vectors_.end(), canonical_less);
  }

  /// The horizon stage: value 0 everywhere (a single all-zero vector).
  static Stage terminal(int level, int time, std::size_t num_states) {
    return Stage(level, time,
                 {AlphaVector{std::vector<double>(num_states, 0.0),
                              Provenance::terminal()}});
  }

  int level() const { return level_; }
  int time() const { return time_; }
  const std::vector<AlphaVector>& vectors() const { return vectors_; }

 private:
  int level_;
  int time_;
  std::vector<AlphaVector> vectors_;
};

/// Pointwise max of the stage's linear pieces at x.
inline double evaluate(const Stage& stage, const Belief& x) {
  double best = stage.vectors().front().dot(x);
  for (std::size_t i = 1; i < stage.vectors().size(); ++i)
    best = std::max(best, stage.vectors()[i].dot(x));
  return best;
}

/// Argmax vector at x; ties go to the lowest index in the canonically sorted
/// set, so the result is deterministic.
inline std::pair<std::size_t, double> best_vector(const Stage& stage,
                                                  const Belief& x) {
  std::size_t best = 0;
  double best_value = stage.vectors().front().dot(x);
  for (std::size_t i = 1; i < stage.vectors().size(); ++i) {
    const double v = stage.vectors()[i].dot(x);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, best_value};
}

/// {a + b : a in A, b in B} with branch-choice provenance concatenated.
/// Protocol and action tags must agree where both sides carry them.
inline std::vector<AlphaVector> cross_sum(const std::vector<AlphaVector>& a,
                                          const std::vector<AlphaVector>& b) {
  std::vector<AlphaVector> out;
  out.reserve(a.size() * b.size());
  for (const AlphaVector& va : a) {
    for (const AlphaVector& vb : b) {
      assert(va.coeffs.size() == vb.coeffs.size());
      AlphaVector sum;
      sum.coeffs.resize(va.coeffs.size());
      for (std::size_t s = 0; s < va.coeffs.size(); ++s)
        sum.coeffs[s] = va.coeffs[s] + vb.coeffs[s];
      const bool a_tagged = va.prov.kind != Provenance::Kind::terminal;
      sum.prov = a_tagged ? va.prov : vb.prov;
      if (a_tagged && vb.prov.kind != Provenance::Kind::terminal) {
        assert(va.prov.kind == vb.prov.kind);
        if (sum.prov.protocol == -1) sum.prov.protocol = vb.prov.protocol;
        if (sum.prov.action == -1) sum.prov.action = vb.prov.action;
        sum.prov.choices.insert(sum.prov.choices.end(),
                                vb.prov.choices.begin(),
                                vb.prov.choices.end());
      }
      out.push_back(std::move(sum));
    }
  }
  return out;
}

}  // namespace okp
