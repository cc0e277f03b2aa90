#pragma once

#include <array>
#include <string>

#include "fgsfrql/common.hpp"

namespace fgsfrql {

using Observation = Vec;
using FeatureVec = Vec;

// A task is a reward function expressed on features. Maze tasks carry the
// goal coordinate their one-hot weight refers to.
struct TaskSpec {
  int task_id = 0;
  Vec reward_weights;
  std::array<double, 2> goal_position{0.0, 0.0};
  bool has_goal_position = false;
};

inline double task_reward(const TaskSpec& task, const FeatureVec& features) {
  return dot(task.reward_weights, features);
}

struct Transition {
  Observation s;
  int a = 0;
  double r = 0.0;
  Observation s_next;
  FeatureVec features;
  bool terminal = false;
  int task_id = 0;
  std::string pivot_key;  // deterministic function of (s, a)
};

}  // namespace fgsfrql
