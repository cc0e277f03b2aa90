#pragma once

#include <memory>

#include "fgsfrql/chain_env.hpp"
#include "fgsfrql/four_rooms.hpp"
#include "fgsfrql/point_maze.hpp"

namespace fgsfrql {

struct EnvSpec {
  std::string name = "four_rooms";
  std::string map_path;   // optional grid file overriding the built-in map
  int num_tasks = 0;      // 0: environment default
  uint64_t env_seed = 0;  // chain slip draws only; layouts are fixed
  double chain_slip = 0.0;
};

inline std::unique_ptr<Env> make_env(const EnvSpec& spec) {
  if (spec.name == "four_rooms") {
    FourRoomsConfig cfg;
    if (!spec.map_path.empty()) cfg.map = GridMap::load(spec.map_path);
    if (spec.num_tasks > 0) cfg.num_tasks = std::max(cfg.num_tasks, spec.num_tasks);
    return std::make_unique<FourRoomsEnv>(cfg);
  }
  if (spec.name == "point_maze_u" || spec.name == "point_maze_medium" ||
      spec.name == "point_maze_large") {
    PointMazeConfig cfg;
    if (spec.name == "point_maze_medium") cfg.map = GridMap::parse(kPointMazeMediumMap);
    if (spec.name == "point_maze_large") cfg.map = GridMap::parse(kPointMazeLargeMap);
    if (!spec.map_path.empty()) cfg.map = GridMap::load(spec.map_path);
    if (spec.num_tasks > 0) cfg.num_goals = spec.num_tasks;
    return std::make_unique<PointMazeEnv>(cfg);
  }
  if (spec.name == "chain_test") {
    ChainConfig cfg;
    cfg.slip = spec.chain_slip;
    cfg.seed = spec.env_seed;
    return std::make_unique<ChainEnv>(cfg);
  }
  throw ConfigError("unknown environment: " + spec.name);
}

}  // namespace fgsfrql
