#pragma once

#include <algorithm>
#include <chrono>
#include <functional>

#include "fgsfrql/env_factory.hpp"
#include "fgsfrql/gpi.hpp"
#include "fgsfrql/replay.hpp"
#include "fgsfrql/schedule.hpp"
#include "fgsfrql/updates.hpp"

namespace fgsfrql {

enum class Algorithm { dqn, fgdqn, sfdqn, fg_sfdqn_alg1, fg_sfdqn_alg2, fg_sfdqn_alg3 };

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "dqn") return Algorithm::dqn;
  if (s == "fgdqn") return Algorithm::fgdqn;
  if (s == "sfdqn") return Algorithm::sfdqn;
  if (s == "fg_sfdqn_alg1") return Algorithm::fg_sfdqn_alg1;
  if (s == "fg_sfdqn_alg2") return Algorithm::fg_sfdqn_alg2;
  if (s == "fg_sfdqn_alg3") return Algorithm::fg_sfdqn_alg3;
  throw ConfigError("unknown algorithm: " + s);
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dqn: return "dqn";
    case Algorithm::fgdqn: return "fgdqn";
    case Algorithm::sfdqn: return "sfdqn";
    case Algorithm::fg_sfdqn_alg1: return "fg_sfdqn_alg1";
    case Algorithm::fg_sfdqn_alg2: return "fg_sfdqn_alg2";
    case Algorithm::fg_sfdqn_alg3: return "fg_sfdqn_alg3";
  }
  return "?";
}

struct TrainConfig {
  std::string env = "four_rooms";
  std::string map_path;
  Algorithm algorithm = Algorithm::fg_sfdqn_alg1;
  int steps_per_task = 10000;
  int num_tasks = 6;
  int batch_size = 64;
  double gamma = 0.95;
  double epsilon = 0.60;
  double alpha = 0.001;
  double alpha_r = 0.5;
  int horizon = 200;
  uint64_t seed = 1;
  int averaging_n = 5;
  LrSchedule lr_schedule = LrSchedule::constant;
  bool learn_rewards = false;
  bool minibatch = false;
  bool growing_n = false;
  size_t replay_capacity = 200000;
  std::vector<int> hidden = {64, 64};
  int eval_episodes = 10;
  int eval_step_cap = 100;

  static TrainConfig defaults_for(const std::string& env_name) {
    TrainConfig c;
    c.env = env_name;
    if (env_name == "four_rooms") {
      c.steps_per_task = 10000;
      c.num_tasks = 6;
      c.batch_size = 64;
      c.hidden = {64, 64};
    } else if (env_name.rfind("point_maze", 0) == 0) {
      c.steps_per_task = 30000;
      c.num_tasks = 8;
      c.batch_size = 512;
      c.hidden = {128, 128};
    } else if (env_name == "chain_test") {
      c.steps_per_task = 2000;
      c.num_tasks = 2;
      c.batch_size = 32;
      c.hidden = {32, 32};
    } else {
      throw ConfigError("unknown environment: " + env_name);
    }
    return c;
  }

  void validate() const {
    if (steps_per_task < 1) throw ConfigError("steps_per_task must be positive");
    if (num_tasks < 1) throw ConfigError("num_tasks must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must be in [0, 1)");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
    if (alpha <= 0.0) throw ConfigError("alpha must be positive");
    if (alpha_r <= 0.0) throw ConfigError("alpha_r must be positive");
    if (horizon < 1) throw ConfigError("horizon must be positive");
    if (averaging_n < 1) throw ConfigError("averaging_n must be at least 1");
    if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
    for (int h : hidden)
      if (h < 1) throw ConfigError("hidden widths must be positive");
  }
};

struct StepRow {
  long step = 0;
  int task_id = 0;
  double reward = 0.0;
  double cumulative_task_reward = 0.0;
  double residual_norm = 0.0;
  double batch_msbe = 0.0;
  int chosen_policy = 0;
  long long wall_clock_ns = 0;
  bool updated = false;  // in-memory only; false on baseline warmup / skipped pivots
};

struct EvalStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct RunRecord {
  TrainConfig config;
  std::vector<StepRow> steps;
  std::vector<EvalStat> final_eval;
  long long skipped_updates = 0;
  long long update_count = 0;
  double total_reward = 0.0;
  // A run whose update produced non-finite values stops learning there and
  // keeps acting with the last finite parameters; the step is recorded.
  long diverged_at_step = -1;
  // final models, for checkpointing and held-out evaluation
  PolicyLibrary library;
  QNet qnet;
  bool has_library = false;
  bool has_qnet = false;
};

// Invoked after every training step with the logged row and the library (null
// for the scalar-Q baselines). Used by tests to audit block isolation.
using StepObserver = std::function<void(const StepRow&, const PolicyLibrary*)>;

namespace detail {

struct Session {
  std::unique_ptr<Env> env;
  std::vector<TaskSpec> tasks;
};

inline Session make_session(const TrainConfig& cfg) {
  cfg.validate();
  EnvSpec spec;
  spec.name = cfg.env;
  spec.map_path = cfg.map_path;
  spec.num_tasks = cfg.num_tasks;
  spec.env_seed = mix_seed(cfg.seed, 0xE1);
  Session s;
  s.env = make_env(spec);
  std::vector<TaskSpec> tasks = s.env->default_tasks();
  if (cfg.num_tasks > static_cast<int>(tasks.size()))
    throw ConfigError("num_tasks exceeds the tasks available in " + cfg.env);
  tasks.resize(static_cast<size_t>(cfg.num_tasks));
  s.tasks = std::move(tasks);
  return s;
}

inline NetLayout xi_layout(const TrainConfig& cfg, const Env& env) {
  std::vector<int> widths;
  widths.push_back(env.obs_dim());
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(env.num_actions() * env.feature_dim());
  return NetLayout(widths);
}

inline NetLayout q_layout(const TrainConfig& cfg, const Env& env) {
  std::vector<int> widths;
  widths.push_back(env.obs_dim());
  for (int h : cfg.hidden) widths.push_back(h);
  widths.push_back(env.num_actions());
  return NetLayout(widths);
}

inline long long elapsed_ns(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              t0)
      .count();
}

inline bool finite_grads(const std::unordered_map<int, NetGradient>& grads) {
  for (const auto& [block, g] : grads)
    if (!all_finite(g.values)) return false;
  return true;
}

inline EvalStat eval_stat(const Vec& returns) {
  EvalStat st;
  for (double r : returns) st.mean += r;
  st.mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - st.mean) * (r - st.mean);
  st.stddev = std::sqrt(var / static_cast<double>(returns.size()));
  return st;
}

}  // namespace detail

// Greedy GPI rollouts per task over the full library; no learning.
inline std::vector<EvalStat> evaluate(const PolicyLibrary& lib, Env& env,
                                      const std::vector<TaskSpec>& tasks, int n_episodes,
                                      int step_cap, Rng& rng) {
  (void)rng;  // greedy rollouts draw nothing; kept for interface symmetry
  if (n_episodes < 1) throw ConfigError("evaluate: n_episodes must be positive");
  std::vector<EvalStat> stats;
  for (const TaskSpec& task : tasks) {
    env.set_active_task(task);
    Vec returns;
    for (int ep = 0; ep < n_episodes; ++ep) {
      Observation s = env.reset();
      double total = 0.0;
      for (int t = 0; t < step_cap; ++t) {
        const int a =
            gpi_select(lib, s, lib.rewards[static_cast<size_t>(task.task_id)], lib.active_count())
                .action;
        StepResult sr = env.step(a);
        total += task_reward(task, sr.features);
        s = std::move(sr.obs);
        if (sr.terminal) break;
      }
      returns.push_back(total);
    }
    stats.push_back(detail::eval_stat(returns));
  }
  return stats;
}

inline std::vector<EvalStat> evaluate(const QNet& qnet, Env& env,
                                      const std::vector<TaskSpec>& tasks, int n_episodes,
                                      int step_cap, Rng& rng) {
  (void)rng;
  if (n_episodes < 1) throw ConfigError("evaluate: n_episodes must be positive");
  std::vector<EvalStat> stats;
  for (const TaskSpec& task : tasks) {
    env.set_active_task(task);
    Vec returns;
    for (int ep = 0; ep < n_episodes; ++ep) {
      Observation s = env.reset();
      double total = 0.0;
      for (int t = 0; t < step_cap; ++t) {
        StepResult sr = env.step(greedy_q_action(qnet, s));
        total += task_reward(task, sr.features);
        s = std::move(sr.obs);
        if (sr.terminal) break;
      }
      returns.push_back(total);
    }
    stats.push_back(detail::eval_stat(returns));
  }
  return stats;
}

// Sequential multi-task training: tasks in order, warm-started blocks, GPI
// behavior over tasks seen so far, full- or semi-gradient block updates for
// the active task and (when distinct) the GPI-chosen prior.
inline RunRecord train_sequential(const TrainConfig& cfg, const StepObserver& observer = {}) {
  if (cfg.algorithm != Algorithm::sfdqn && cfg.algorithm != Algorithm::fg_sfdqn_alg1)
    throw ConfigError("train_sequential expects sfdqn or fg_sfdqn_alg1");
  const bool full = cfg.algorithm == Algorithm::fg_sfdqn_alg1;

  detail::Session ses = detail::make_session(cfg);
  Env& env = *ses.env;
  Rng root(cfg.seed);
  Rng explore = root.fork(1);
  Rng replay_rng = root.fork(2);
  Rng eval_rng = root.fork(3);

  PolicyLibrary lib = make_library(detail::xi_layout(cfg, env), env.num_actions(), env.feature_dim());
  ReplayBuffer buffer(cfg.replay_capacity);

  RunRecord rec;
  rec.config = cfg;
  rec.steps.reserve(static_cast<size_t>(cfg.steps_per_task) * cfg.num_tasks);

  long global_step = 0;
  bool frozen = false;
  for (int i = 0; i < cfg.num_tasks; ++i) {
    const TaskSpec& task = ses.tasks[static_cast<size_t>(i)];
    lib = spawn_task(std::move(lib), task, /*warm_start=*/true, mix_seed(cfg.seed, 100 + i),
                     cfg.learn_rewards);
    env.set_active_task(task);
    bool new_episode = true;
    int ep_steps = 0;
    double cum = 0.0;
    Observation s;
    for (int t = 0; t < cfg.steps_per_task; ++t, ++global_step) {
      if (new_episode) {
        s = env.reset();
        ep_steps = 0;
        new_episode = false;
      }
      const GpiChoice choice = gpi_select(lib, s, lib.rewards[static_cast<size_t>(i)], i + 1);
      const int a = epsilon_greedy(choice.action, cfg.epsilon, env.num_actions(), explore);
      StepResult sr = env.step(a);
      const double r = task_reward(task, sr.features);
      if (cfg.learn_rewards)
        lib.rewards[static_cast<size_t>(i)] =
            reward_model_update(lib.rewards[static_cast<size_t>(i)], sr.features, r, cfg.alpha_r);
      const double gamma_t = sr.terminal ? 0.0 : cfg.gamma;
      ++ep_steps;
      if (sr.terminal || ep_steps >= cfg.horizon) new_episode = true;

      Transition tr{s, a, r, sr.obs, sr.features, sr.terminal, i, env.pivot_key(s, a)};
      if (cfg.minibatch) buffer.push(tr);

      const auto t0 = std::chrono::steady_clock::now();
      StepRow row{global_step, i, r, 0.0, 0.0, 0.0, choice.policy, 0};
      if (!frozen) {
        const double alpha = lr_at(cfg.lr_schedule, cfg.alpha, global_step);
        std::unordered_map<int, NetGradient> grads;
        double log_rnorm = 0.0, log_msbe = 0.0;
        const int c = choice.policy;
        if (cfg.minibatch && buffer.size() >= static_cast<size_t>(cfg.batch_size)) {
          // parity mode: the single-transition update rule is iterated over a
          // replayed batch, one SGD step per transition at the current
          // parameters; block c follows with its own greedy next actions
          const auto batch = buffer.sample(static_cast<size_t>(cfg.batch_size), replay_rng);
          try {
            for (const Transition& b : batch) {
              const double g_b = b.terminal ? 0.0 : cfg.gamma;
              const int ah =
                  gpi_next_action(lib, b.s_next, lib.rewards[static_cast<size_t>(i)], i + 1);
              UpdateReport rep = full ? full_gradient(lib.nets[static_cast<size_t>(i)], b, ah, g_b)
                                      : semi_gradient(lib.nets[static_cast<size_t>(i)], b, ah, g_b);
              log_msbe += rep.batch_msbe / static_cast<double>(batch.size());
              log_rnorm += rep.residual_norm / static_cast<double>(batch.size());
              if (!std::isfinite(rep.batch_msbe) || !all_finite(rep.grad.values))
                throw NumericError("nan");
              lib.nets[static_cast<size_t>(i)].params =
                  sgd_step(lib.nets[static_cast<size_t>(i)].params, rep.grad, alpha);
              if (c != i) {
                const int ah_c = greedy_action(lib.nets[static_cast<size_t>(c)], b.s_next,
                                               lib.rewards[static_cast<size_t>(c)]);
                UpdateReport rep_c = full
                                         ? full_gradient(lib.nets[static_cast<size_t>(c)], b, ah_c, g_b)
                                         : semi_gradient(lib.nets[static_cast<size_t>(c)], b, ah_c, g_b);
                if (!all_finite(rep_c.grad.values)) throw NumericError("nan");
                lib.nets[static_cast<size_t>(c)].params =
                    sgd_step(lib.nets[static_cast<size_t>(c)].params, rep_c.grad, alpha);
              }
            }
            ++rec.update_count;
            row.residual_norm = log_rnorm;
            row.batch_msbe = log_msbe;
            row.updated = true;
          } catch (const NumericError&) {
            frozen = true;
            rec.diverged_at_step = global_step;
          }
          row.wall_clock_ns = detail::elapsed_ns(t0);
          cum += r;
          rec.total_reward += r;
          row.cumulative_task_reward = cum;
          rec.steps.push_back(row);
          if (observer) observer(row, &lib);
          s = std::move(sr.obs);
          continue;
        } else {
          const int a_hat = gpi_next_action(lib, sr.obs, lib.rewards[static_cast<size_t>(i)], i + 1);
          UpdateReport rep_i = full ? full_gradient(lib.nets[static_cast<size_t>(i)], tr, a_hat, gamma_t)
                                    : semi_gradient(lib.nets[static_cast<size_t>(i)], tr, a_hat, gamma_t);
          log_rnorm = rep_i.residual_norm;
          log_msbe = rep_i.batch_msbe;
          grads.emplace(i, std::move(rep_i.grad));
          if (c != i) {
            // the prior learns toward its own task: greedy next action under
            // its own reward model
            const int a_hat_c = greedy_action(lib.nets[static_cast<size_t>(c)], sr.obs,
                                              lib.rewards[static_cast<size_t>(c)]);
            UpdateReport rep_c =
                full ? full_gradient(lib.nets[static_cast<size_t>(c)], tr, a_hat_c, gamma_t)
                     : semi_gradient(lib.nets[static_cast<size_t>(c)], tr, a_hat_c, gamma_t);
            grads.emplace(c, std::move(rep_c.grad));
          }
        }
        try {
          if (!std::isfinite(log_msbe) || !detail::finite_grads(grads)) throw NumericError("nan");
          lib = joint_update(std::move(lib), i, choice.policy, grads, alpha);
          ++rec.update_count;
          row.residual_norm = log_rnorm;
          row.batch_msbe = log_msbe;
          row.updated = true;
        } catch (const NumericError&) {
          if (lib.active_count() == 0) throw;
          frozen = true;
          rec.diverged_at_step = global_step;
        }
      }
      row.wall_clock_ns = detail::elapsed_ns(t0);

      cum += r;
      rec.total_reward += r;
      row.cumulative_task_reward = cum;
      rec.steps.push_back(row);
      if (observer) observer(row, &lib);
      s = std::move(sr.obs);
    }
  }

  rec.final_eval = evaluate(lib, env, ses.tasks, cfg.eval_episodes, cfg.eval_step_cap, eval_rng);
  rec.library = std::move(lib);
  rec.has_library = true;
  return rec;
}

// Randomized task sampling: every iteration draws the active task uniformly,
// steps the environment under epsilon-greedy GPI over the whole library, and
// applies full-gradient updates to the active and GPI-chosen blocks. The
// transition also lands in the replay buffer.
inline RunRecord train_randomized(const TrainConfig& cfg, const StepObserver& observer = {}) {
  if (cfg.algorithm != Algorithm::fg_sfdqn_alg2)
    throw ConfigError("train_randomized expects fg_sfdqn_alg2");

  detail::Session ses = detail::make_session(cfg);
  Env& env = *ses.env;
  const int m = cfg.num_tasks;
  Rng root(cfg.seed);
  Rng explore = root.fork(1);
  Rng eval_rng = root.fork(3);
  Rng task_rng = root.fork(4);

  PolicyLibrary lib = make_library(detail::xi_layout(cfg, env), env.num_actions(), env.feature_dim());
  for (int j = 0; j < m; ++j)
    lib = spawn_task(std::move(lib), ses.tasks[static_cast<size_t>(j)], /*warm_start=*/false,
                     mix_seed(cfg.seed, 100 + j), cfg.learn_rewards);
  ReplayBuffer buffer(cfg.replay_capacity);

  RunRecord rec;
  rec.config = cfg;
  const long total = static_cast<long>(cfg.steps_per_task) * m;
  rec.steps.reserve(static_cast<size_t>(total));

  bool new_episode = true;
  bool frozen = false;
  int ep_steps = 0;
  int prev_task = -1;
  double cum = 0.0;
  Observation s;
  for (long t = 0; t < total; ++t) {
    const int i = task_rng.uniform_int(m);
    const TaskSpec& task = ses.tasks[static_cast<size_t>(i)];
    env.set_active_task(task);
    if (new_episode) {
      s = env.reset();
      ep_steps = 0;
      new_episode = false;
    } else {
      s = env.current_observation();  // task switch may change the observation
    }
    if (i != prev_task) cum = 0.0;
    prev_task = i;

    const GpiChoice choice = gpi_select(lib, s, lib.rewards[static_cast<size_t>(i)], m);
    const int a = epsilon_greedy(choice.action, cfg.epsilon, env.num_actions(), explore);
    StepResult sr = env.step(a);
    const double r = task_reward(task, sr.features);
    if (cfg.learn_rewards)
      lib.rewards[static_cast<size_t>(i)] =
          reward_model_update(lib.rewards[static_cast<size_t>(i)], sr.features, r, cfg.alpha_r);
    const double gamma_t = sr.terminal ? 0.0 : cfg.gamma;
    ++ep_steps;
    if (sr.terminal || ep_steps >= cfg.horizon) new_episode = true;

    Transition tr{s, a, r, sr.obs, sr.features, sr.terminal, i, env.pivot_key(s, a)};
    buffer.push(tr);

    const auto t0 = std::chrono::steady_clock::now();
    StepRow row{t, i, r, 0.0, 0.0, 0.0, choice.policy, 0};
    if (!frozen) {
      const double alpha = lr_at(cfg.lr_schedule, cfg.alpha, t);
      std::unordered_map<int, NetGradient> grads;
      const int a_hat = gpi_next_action(lib, sr.obs, lib.rewards[static_cast<size_t>(i)], m);
      UpdateReport rep_i = full_gradient(lib.nets[static_cast<size_t>(i)], tr, a_hat, gamma_t);
      const double log_rnorm = rep_i.residual_norm;
      const double log_msbe = rep_i.batch_msbe;
      grads.emplace(i, std::move(rep_i.grad));
      if (choice.policy != i) {
        const int a_hat_c = greedy_action(lib.nets[static_cast<size_t>(choice.policy)], sr.obs,
                                          lib.rewards[static_cast<size_t>(choice.policy)]);
        UpdateReport rep_c =
            full_gradient(lib.nets[static_cast<size_t>(choice.policy)], tr, a_hat_c, gamma_t);
        grads.emplace(choice.policy, std::move(rep_c.grad));
      }
      try {
        if (!std::isfinite(log_msbe) || !detail::finite_grads(grads)) throw NumericError("nan");
        lib = joint_update(std::move(lib), i, choice.policy, grads, alpha);
        ++rec.update_count;
        row.residual_norm = log_rnorm;
        row.batch_msbe = log_msbe;
        row.updated = true;
      } catch (const NumericError&) {
        if (lib.active_count() == 0) throw;
        frozen = true;
        rec.diverged_at_step = t;
      }
    }
    row.wall_clock_ns = detail::elapsed_ns(t0);

    cum += r;
    rec.total_reward += r;
    row.cumulative_task_reward = cum;
    rec.steps.push_back(row);
    if (observer) observer(row, &lib);
    s = std::move(sr.obs);
  }

  rec.final_eval = evaluate(lib, env, ses.tasks, cfg.eval_episodes, cfg.eval_step_cap, eval_rng);
  rec.library = std::move(lib);
  rec.has_library = true;
  return rec;
}

// Randomized task sampling with averaging: each iteration additionally draws
// a pivot (s, a) from the buffer, retrieves N same-pivot transitions (skipping
// the update when fewer are stored), selects the GPI prior and next action at
// the mean next-state, and applies averaged full-gradient block updates.
inline RunRecord train_randomized_averaged(const TrainConfig& cfg,
                                           const StepObserver& observer = {}) {
  if (cfg.algorithm != Algorithm::fg_sfdqn_alg3)
    throw ConfigError("train_randomized_averaged expects fg_sfdqn_alg3");

  detail::Session ses = detail::make_session(cfg);
  Env& env = *ses.env;
  const int m = cfg.num_tasks;
  Rng root(cfg.seed);
  Rng explore = root.fork(1);
  Rng pivot_rng = root.fork(2);
  Rng eval_rng = root.fork(3);
  Rng task_rng = root.fork(4);

  PolicyLibrary lib = make_library(detail::xi_layout(cfg, env), env.num_actions(), env.feature_dim());
  for (int j = 0; j < m; ++j)
    lib = spawn_task(std::move(lib), ses.tasks[static_cast<size_t>(j)], /*warm_start=*/false,
                     mix_seed(cfg.seed, 100 + j), cfg.learn_rewards);
  ReplayBuffer buffer(cfg.replay_capacity);

  RunRecord rec;
  rec.config = cfg;
  const long total = static_cast<long>(cfg.steps_per_task) * m;
  rec.steps.reserve(static_cast<size_t>(total));

  bool new_episode = true;
  bool frozen = false;
  int ep_steps = 0;
  int prev_task = -1;
  double cum = 0.0;
  Observation s;
  for (long t = 0; t < total; ++t) {
    const int i = task_rng.uniform_int(m);
    const TaskSpec& task = ses.tasks[static_cast<size_t>(i)];
    env.set_active_task(task);
    if (new_episode) {
      s = env.reset();
      ep_steps = 0;
      new_episode = false;
    } else {
      s = env.current_observation();
    }
    if (i != prev_task) cum = 0.0;
    prev_task = i;

    const GpiChoice choice = gpi_select(lib, s, lib.rewards[static_cast<size_t>(i)], m);
    const int a = epsilon_greedy(choice.action, cfg.epsilon, env.num_actions(), explore);
    StepResult sr = env.step(a);
    const double r = task_reward(task, sr.features);
    if (cfg.learn_rewards)
      lib.rewards[static_cast<size_t>(i)] =
          reward_model_update(lib.rewards[static_cast<size_t>(i)], sr.features, r, cfg.alpha_r);
    ++ep_steps;
    if (sr.terminal || ep_steps >= cfg.horizon) new_episode = true;
    buffer.push(Transition{s, a, r, sr.obs, sr.features, sr.terminal, i, env.pivot_key(s, a)});

    const auto t0 = std::chrono::steady_clock::now();
    const double alpha = lr_at(cfg.lr_schedule, cfg.alpha, t);
    const int n = cfg.growing_n ? cfg.averaging_n + static_cast<int>(t / 10000) : cfg.averaging_n;
    const Transition pivot = buffer.sample_one(pivot_rng);
    const auto batch = buffer.sample_pivot_batch(pivot.pivot_key, static_cast<size_t>(n), pivot_rng);

    StepRow row{t, i, r, 0.0, 0.0, 0.0, choice.policy, 0};
    if (frozen) {
      row.wall_clock_ns = detail::elapsed_ns(t0);
    } else if (batch.empty()) {
      ++rec.skipped_updates;
      row.wall_clock_ns = detail::elapsed_ns(t0);
    } else {
      Observation s_bar(batch.front().s_next.size(), 0.0);
      bool all_terminal = true;
      for (const Transition& b : batch) {
        for (size_t k = 0; k < s_bar.size(); ++k) s_bar[k] += b.s_next[k] / static_cast<double>(batch.size());
        all_terminal = all_terminal && b.terminal;
      }
      const double gamma_b = all_terminal ? 0.0 : cfg.gamma;
      const GpiChoice target = gpi_select(lib, s_bar, lib.rewards[static_cast<size_t>(i)], m);
      const int c = target.policy;
      std::unordered_map<int, NetGradient> grads;
      UpdateReport rep_i = averaged_full_gradient(lib.nets[static_cast<size_t>(i)], pivot.s,
                                                  pivot.a, batch, target.action, gamma_b);
      const double log_rnorm = rep_i.residual_norm;
      const double log_msbe = rep_i.batch_msbe;
      grads.emplace(i, std::move(rep_i.grad));
      if (c != i) {
        UpdateReport rep_c = averaged_full_gradient(lib.nets[static_cast<size_t>(c)], pivot.s,
                                                    pivot.a, batch, target.action, gamma_b);
        grads.emplace(c, std::move(rep_c.grad));
      }
      try {
        if (!std::isfinite(log_msbe) || !detail::finite_grads(grads)) throw NumericError("nan");
        lib = joint_update(std::move(lib), i, c, grads, alpha);
        ++rec.update_count;
        row.residual_norm = log_rnorm;
        row.batch_msbe = log_msbe;
        row.chosen_policy = c;
        row.updated = true;
      } catch (const NumericError&) {
        if (lib.active_count() == 0) throw;
        frozen = true;
        rec.diverged_at_step = t;
      }
      row.wall_clock_ns = detail::elapsed_ns(t0);
    }

    cum += r;
    rec.total_reward += r;
    row.cumulative_task_reward = cum;
    rec.steps.push_back(row);
    if (observer) observer(row, &lib);
    s = std::move(sr.obs);
  }

  rec.final_eval = evaluate(lib, env, ses.tasks, cfg.eval_episodes, cfg.eval_step_cap, eval_rng);
  rec.library = std::move(lib);
  rec.has_library = true;
  return rec;
}

// Scalar-Q baselines: one network carried across the sequential tasks,
// epsilon-greedy behavior, minibatch updates from uniform replay.
inline RunRecord train_baseline(const TrainConfig& cfg, const StepObserver& observer = {}) {
  if (cfg.algorithm != Algorithm::dqn && cfg.algorithm != Algorithm::fgdqn)
    throw ConfigError("train_baseline expects dqn or fgdqn");
  const bool full = cfg.algorithm == Algorithm::fgdqn;

  detail::Session ses = detail::make_session(cfg);
  Env& env = *ses.env;
  Rng root(cfg.seed);
  Rng explore = root.fork(1);
  Rng replay_rng = root.fork(2);
  Rng eval_rng = root.fork(3);

  QNet qnet = make_q_net(detail::q_layout(cfg, env), env.num_actions(), mix_seed(cfg.seed, 50));
  ReplayBuffer buffer(cfg.replay_capacity);
  bool frozen = false;

  RunRecord rec;
  rec.config = cfg;
  rec.steps.reserve(static_cast<size_t>(cfg.steps_per_task) * cfg.num_tasks);

  long global_step = 0;
  for (int i = 0; i < cfg.num_tasks; ++i) {
    const TaskSpec& task = ses.tasks[static_cast<size_t>(i)];
    env.set_active_task(task);
    bool new_episode = true;
    int ep_steps = 0;
    double cum = 0.0;
    Observation s;
    for (int t = 0; t < cfg.steps_per_task; ++t, ++global_step) {
      if (new_episode) {
        s = env.reset();
        ep_steps = 0;
        new_episode = false;
      }
      const int a = epsilon_greedy(greedy_q_action(qnet, s), cfg.epsilon, env.num_actions(), explore);
      StepResult sr = env.step(a);
      const double r = task_reward(task, sr.features);
      ++ep_steps;
      if (sr.terminal || ep_steps >= cfg.horizon) new_episode = true;
      buffer.push(Transition{s, a, r, sr.obs, sr.features, sr.terminal, i, env.pivot_key(s, a)});

      const auto t0 = std::chrono::steady_clock::now();
      StepRow row{global_step, i, r, 0.0, 0.0, 0.0, i, 0};
      if (!frozen && buffer.size() >= static_cast<size_t>(cfg.batch_size)) {
        const double alpha = lr_at(cfg.lr_schedule, cfg.alpha, global_step);
        const auto batch = buffer.sample(static_cast<size_t>(cfg.batch_size), replay_rng);
        // summed batch gradient, mirroring the sequential minibatch mode
        NetGradient acc{qnet.params.layout, Vec(qnet.params.values.size(), 0.0)};
        double msbe = 0.0;
        for (const Transition& b : batch) {
          const double g_b = b.terminal ? 0.0 : cfg.gamma;
          UpdateReport rep = full ? fgdqn_gradient(qnet, b, g_b) : dqn_gradient(qnet, b, g_b);
          add_scaled(acc, rep.grad, 1.0);
          msbe += rep.batch_msbe / static_cast<double>(batch.size());
        }
        try {
          if (!std::isfinite(msbe) || !all_finite(acc.values)) throw NumericError("nan");
          qnet.params = sgd_step(qnet.params, acc, alpha);
          ++rec.update_count;
          row.residual_norm = std::sqrt(msbe);
          row.batch_msbe = msbe;
          row.updated = true;
        } catch (const NumericError&) {
          frozen = true;
          rec.diverged_at_step = global_step;
        }
      }
      row.wall_clock_ns = detail::elapsed_ns(t0);

      cum += r;
      rec.total_reward += r;
      row.cumulative_task_reward = cum;
      rec.steps.push_back(row);
      if (observer) observer(row, nullptr);
      s = std::move(sr.obs);
    }
  }

  rec.final_eval = evaluate(qnet, env, ses.tasks, cfg.eval_episodes, cfg.eval_step_cap, eval_rng);
  rec.qnet = std::move(qnet);
  rec.has_qnet = true;
  return rec;
}

inline RunRecord train_run(const TrainConfig& cfg, const StepObserver& observer = {}) {
  switch (cfg.algorithm) {
    case Algorithm::dqn:
    case Algorithm::fgdqn:
      return train_baseline(cfg, observer);
    case Algorithm::sfdqn:
    case Algorithm::fg_sfdqn_alg1:
      return train_sequential(cfg, observer);
    case Algorithm::fg_sfdqn_alg2:
      return train_randomized(cfg, observer);
    case Algorithm::fg_sfdqn_alg3:
      return train_randomized_averaged(cfg, observer);
  }
  throw ConfigError("unknown algorithm");
}

struct OverheadStat {
  double mean_ms = 0.0;
  double variance_ms = 0.0;
  long samples = 0;
};

// Mean and variance of the per-step update computation time, over the last
// n_steps steps that actually performed an update (earlier steps warm the
// buffer; skipped averaged updates are not counted as update work).
inline OverheadStat measure_overhead(const TrainConfig& cfg, int n_steps) {
  RunRecord rec = train_run(cfg);
  std::vector<double> ms;
  for (auto it = rec.steps.rbegin(); it != rec.steps.rend() && static_cast<int>(ms.size()) < n_steps;
       ++it)
    if (it->updated) ms.push_back(static_cast<double>(it->wall_clock_ns) * 1e-6);
  OverheadStat st;
  st.samples = static_cast<long>(ms.size());
  if (ms.empty()) return st;
  for (double v : ms) st.mean_ms += v;
  st.mean_ms /= static_cast<double>(ms.size());
  for (double v : ms) st.variance_ms += (v - st.mean_ms) * (v - st.mean_ms);
  st.variance_ms /= static_cast<double>(ms.size());
  return st;
}

}  // namespace fgsfrql
