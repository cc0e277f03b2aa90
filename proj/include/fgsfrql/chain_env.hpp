#pragma once

#include "fgsfrql/env.hpp"
#include "fgsfrql/rng.hpp"

namespace fgsfrql {

// Five-state chain used as a desk-scale test bed: actions step left/right
// (clamped at the ends), and the two binary features fire on arrival at the
// left and right end states. With slip > 0 the commanded direction flips with
// that probability, which makes next states genuinely stochastic.
struct ChainConfig {
  int num_states = 5;
  int start_state = 2;
  double slip = 0.0;
  uint64_t seed = 0;
};

class ChainEnv : public Env {
 public:
  explicit ChainEnv(ChainConfig cfg = {}) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.num_states < 2) throw ConfigError("chain: need at least two states");
    if (cfg_.start_state < 0 || cfg_.start_state >= cfg_.num_states)
      throw ConfigError("chain: start state out of range");
    if (cfg_.slip < 0.0 || cfg_.slip > 1.0) throw ConfigError("chain: slip must be in [0,1]");
    reset();
  }

  Observation reset() override {
    state_ = cfg_.start_state;
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= num_actions()) throw UsageError("chain: action out of range");
    const Observation before = observe();
    int dir = action == 0 ? -1 : 1;
    if (cfg_.slip > 0.0 && rng_.uniform() < cfg_.slip) dir = -dir;
    state_ = std::min(cfg_.num_states - 1, std::max(0, state_ + dir));

    StepResult out;
    out.obs = observe();
    out.terminal = false;
    out.features = feature_of(before, action, out.obs);
    return out;
  }

  Observation current_observation() const override { return observe(); }

  int num_actions() const override { return 2; }
  int obs_dim() const override { return cfg_.num_states; }
  int feature_dim() const override { return 2; }

  FeatureVec feature_of(const Observation&, int, const Observation& s_next) const override {
    FeatureVec phi(2, 0.0);
    if (s_next[0] > 0.5) phi[0] = 1.0;
    if (s_next[static_cast<size_t>(cfg_.num_states - 1)] > 0.5) phi[1] = 1.0;
    return phi;
  }

  std::string pivot_key(const Observation& s, int a) const override {
    int idx = 0;
    for (int i = 0; i < cfg_.num_states; ++i)
      if (s[static_cast<size_t>(i)] > 0.5) idx = i;
    return std::to_string(idx) + "|" + std::to_string(a);
  }

  std::vector<TaskSpec> default_tasks() const override {
    TaskSpec left;
    left.task_id = 0;
    left.reward_weights = {1.0, 0.0};
    TaskSpec right;
    right.task_id = 1;
    right.reward_weights = {0.0, 1.0};
    return {left, right};
  }

  std::string name() const override { return "chain_test"; }

  ChainConfig config() const { return cfg_; }

 private:
  Observation observe() const {
    Observation o(static_cast<size_t>(cfg_.num_states), 0.0);
    o[static_cast<size_t>(state_)] = 1.0;
    return o;
  }

  ChainConfig cfg_;
  Rng rng_;
  int state_ = 0;
};

}  // namespace fgsfrql
