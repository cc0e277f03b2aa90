#pragma once

#include <json.hpp>

#include "fgsfrql/trainer.hpp"

namespace fgsfrql {

inline nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["env"] = c.env;
  j["map"] = c.map_path;
  j["algo"] = to_string(c.algorithm);
  j["steps_per_task"] = c.steps_per_task;
  j["num_tasks"] = c.num_tasks;
  j["batch_size"] = c.batch_size;
  j["gamma"] = c.gamma;
  j["epsilon"] = c.epsilon;
  j["alpha"] = c.alpha;
  j["alpha_r"] = c.alpha_r;
  j["horizon"] = c.horizon;
  j["seed"] = c.seed;
  j["averaging_n"] = c.averaging_n;
  j["lr_schedule"] = to_string(c.lr_schedule);
  j["learn_rewards"] = c.learn_rewards;
  j["minibatch"] = c.minibatch;
  j["growing_n"] = c.growing_n;
  j["replay_capacity"] = c.replay_capacity;
  j["hidden"] = c.hidden;
  j["eval_episodes"] = c.eval_episodes;
  j["eval_step_cap"] = c.eval_step_cap;
  return j;
}

// Applies the keys present in `j` on top of `base`. Unknown keys are
// rejected so config typos fail loudly.
inline TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base) {
  static const std::vector<std::string> known = {
      "env",          "map",        "algo",          "steps_per_task", "num_tasks",
      "batch_size",   "gamma",      "epsilon",       "alpha",          "alpha_r",
      "horizon",      "seed",       "averaging_n",   "lr_schedule",    "learn_rewards",
      "minibatch",    "growing_n",  "replay_capacity", "hidden",       "eval_episodes",
      "eval_step_cap", "id"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown config key: " + it.key());
  }
  TrainConfig c = std::move(base);
  if (j.contains("env")) c.env = j.at("env").get<std::string>();
  if (j.contains("map")) c.map_path = j.at("map").get<std::string>();
  if (j.contains("algo")) c.algorithm = algorithm_from_string(j.at("algo").get<std::string>());
  if (j.contains("steps_per_task")) c.steps_per_task = j.at("steps_per_task").get<int>();
  if (j.contains("num_tasks")) c.num_tasks = j.at("num_tasks").get<int>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("alpha_r")) c.alpha_r = j.at("alpha_r").get<double>();
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("averaging_n")) c.averaging_n = j.at("averaging_n").get<int>();
  if (j.contains("lr_schedule"))
    c.lr_schedule = lr_schedule_from_string(j.at("lr_schedule").get<std::string>());
  if (j.contains("learn_rewards")) c.learn_rewards = j.at("learn_rewards").get<bool>();
  if (j.contains("minibatch")) c.minibatch = j.at("minibatch").get<bool>();
  if (j.contains("growing_n")) c.growing_n = j.at("growing_n").get<bool>();
  if (j.contains("replay_capacity")) c.replay_capacity = j.at("replay_capacity").get<size_t>();
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.contains("eval_episodes")) c.eval_episodes = j.at("eval_episodes").get<int>();
  if (j.contains("eval_step_cap")) c.eval_step_cap = j.at("eval_step_cap").get<int>();
  return c;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed json in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace fgsfrql
