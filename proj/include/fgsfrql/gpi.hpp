#pragma once

#include "fgsfrql/rng.hpp"
#include "fgsfrql/sfr.hpp"

namespace fgsfrql {

struct GpiChoice {
  int policy = 0;
  int action = 0;
  double value = 0.0;
};

// Argmax of reconstructed Q over policies [0, search_upto) x actions.
// Ties break to the lowest policy index, then the lowest action index: pairs
// are scanned in canonical order and replaced only on a strict improvement.
inline GpiChoice gpi_select(const PolicyLibrary& lib, const Observation& s,
                            const RewardModel& task_reward, int search_upto) {
  if (lib.active_count() == 0) throw UsageError("gpi_select: empty policy library");
  if (search_upto < 1 || search_upto > lib.active_count())
    throw UsageError("gpi_select: search_upto out of range");
  GpiChoice best;
  bool first = true;
  for (int k = 0; k < search_upto; ++k) {
    const Vec q = q_from_xi(xi_eval(lib.nets[static_cast<size_t>(k)], s), task_reward);
    for (int a = 0; a < lib.num_actions; ++a) {
      const double v = q[static_cast<size_t>(a)];
      if (first || v > best.value) {
        best = GpiChoice{k, a, v};
        first = false;
      }
    }
  }
  return best;
}

inline int gpi_next_action(const PolicyLibrary& lib, const Observation& s_next,
                           const RewardModel& task_reward, int search_upto) {
  return gpi_select(lib, s_next, task_reward, search_upto).action;
}

// Greedy action of a single policy under the given reward model.
inline int greedy_action(const XiNet& net, const Observation& s, const RewardModel& reward) {
  const Vec q = q_from_xi(xi_eval(net, s), reward);
  int best = 0;
  for (int a = 1; a < net.num_actions; ++a)
    if (q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
  return best;
}

inline int epsilon_greedy(int choice_action, double epsilon, int num_actions, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
  if (rng.uniform() < epsilon) return rng.uniform_int(num_actions);
  return choice_action;
}

}  // namespace fgsfrql
