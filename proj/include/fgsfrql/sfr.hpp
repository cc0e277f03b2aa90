#pragma once

#include "fgsfrql/net.hpp"
#include "fgsfrql/types.hpp"

namespace fgsfrql {

// Per-task successor-feature network. The net maps an observation to an
// |A| x d_phi table: row a, column k holds the discounted cumulative
// occupancy estimate of feature component k when taking action a.
struct XiNet {
  ParamVector params;
  int num_actions = 0;
  int feature_dim = 0;
};

inline XiNet make_xi_net(const NetLayout& layout, int num_actions, int feature_dim,
                         uint64_t seed) {
  if (layout.output_width() != num_actions * feature_dim)
    throw ShapeError("xi net output width must equal num_actions * feature_dim");
  return XiNet{net_init(layout, seed), num_actions, feature_dim};
}

inline Matrix xi_eval(const XiNet& net, const Observation& s) {
  Vec out = net_forward(net.params, s);
  Matrix m(net.num_actions, net.feature_dim);
  m.data = std::move(out);
  return m;
}

// Linear reward model on features. `learned` marks models trained online from
// observed rewards, as opposed to weights provided with the task.
struct RewardModel {
  Vec weights;
  bool learned = false;

  double operator()(const FeatureVec& phi) const { return dot(weights, phi); }
};

inline RewardModel provided_reward_model(const Vec& weights) { return RewardModel{weights, false}; }

inline RewardModel learned_reward_model(int feature_dim, uint64_t seed) {
  Rng rng(seed);
  RewardModel m;
  m.learned = true;
  m.weights.resize(static_cast<size_t>(feature_dim));
  for (double& w : m.weights) w = rng.uniform(-0.01, 0.01);
  return m;
}

// Q(a) = sum_k xi(a, k) * R(k): exact value reconstruction for any reward
// that is linear in the features.
inline Vec q_from_xi(const Matrix& xi, const RewardModel& reward) {
  if (xi.cols != static_cast<int>(reward.weights.size()))
    throw ShapeError("q_from_xi: feature width mismatch");
  Vec q(static_cast<size_t>(xi.rows), 0.0);
  for (int a = 0; a < xi.rows; ++a) {
    double acc = 0.0;
    for (int k = 0; k < xi.cols; ++k) acc += xi.at(a, k) * reward.weights[static_cast<size_t>(k)];
    q[static_cast<size_t>(a)] = acc;
  }
  return q;
}

// One SGD step on (r - w.phi)^2.
inline RewardModel reward_model_update(const RewardModel& model, const FeatureVec& phi_t,
                                       double r_t, double alpha_r) {
  if (!model.learned) throw UsageError("reward_model_update: model weights were provided");
  if (model.weights.size() != phi_t.size())
    throw ShapeError("reward_model_update: feature width mismatch");
  RewardModel out = model;
  const double residual = r_t - dot(model.weights, phi_t);
  for (size_t i = 0; i < out.weights.size(); ++i) out.weights[i] += 2.0 * alpha_r * residual * phi_t[i];
  return out;
}

// Library of per-task nets and reward models; indices align with task ids.
struct PolicyLibrary {
  NetLayout layout;
  int num_actions = 0;
  int feature_dim = 0;
  std::vector<XiNet> nets;
  std::vector<RewardModel> rewards;

  int active_count() const { return static_cast<int>(nets.size()); }
};

inline PolicyLibrary make_library(const NetLayout& layout, int num_actions, int feature_dim) {
  if (layout.output_width() != num_actions * feature_dim)
    throw ShapeError("library layout output width must equal num_actions * feature_dim");
  return PolicyLibrary{layout, num_actions, feature_dim, {}, {}};
}

// Appends the block for a new task. The first task always gets a fresh init;
// later tasks copy the previous task's current parameters when warm-starting.
inline PolicyLibrary spawn_task(PolicyLibrary lib, const TaskSpec& task, bool warm_start,
                                uint64_t init_seed, bool learn_reward = false) {
  if (task.task_id != lib.active_count())
    throw UsageError("spawn_task: task ids must be contiguous");
  XiNet net;
  if (warm_start && lib.active_count() > 0) {
    net = lib.nets.back();
  } else {
    net = make_xi_net(lib.layout, lib.num_actions, lib.feature_dim, init_seed);
  }
  RewardModel reward = learn_reward
                           ? learned_reward_model(lib.feature_dim, mix_seed(init_seed, 0x52))
                           : provided_reward_model(task.reward_weights);
  if (static_cast<int>(reward.weights.size()) != lib.feature_dim)
    throw ShapeError("spawn_task: reward width mismatch");
  lib.nets.push_back(std::move(net));
  lib.rewards.push_back(std::move(reward));
  return lib;
}

}  // namespace fgsfrql
