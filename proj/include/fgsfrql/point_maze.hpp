#pragma once

#include <cmath>

#include "fgsfrql/env.hpp"

namespace fgsfrql {

// Kinematic point-mass maze. Nine actions map {-1,0,1}^2 to a fixed-step
// displacement per axis; wall collisions are resolved per axis (a move into a
// wall cell is dropped on that axis). Episodes never terminate before the
// horizon. Observations are [x, y, goal_x, goal_y] with the active task's
// goal; features are exp(-distance) proximities to every configured goal, so
// each task's dense reward is the inner product with a one-hot weight vector.

inline const char* kPointMazeUMap =
    "#####\n"
    "#...#\n"
    "#.#.#\n"
    "#S..#\n"
    "#####\n";

inline const char* kPointMazeMediumMap =
    "########\n"
    "#......#\n"
    "######.#\n"
    "#......#\n"
    "#.######\n"
    "#......#\n"
    "#S####.#\n"
    "########\n";

inline const char* kPointMazeLargeMap =
    "############\n"
    "#..........#\n"
    "##########.#\n"
    "#..........#\n"
    "#.##########\n"
    "#..........#\n"
    "##########.#\n"
    "#..........#\n"
    "#.##########\n"
    "#..........#\n"
    "#S########.#\n"
    "############\n";

struct PointMazeConfig {
  GridMap map = GridMap::parse(kPointMazeUMap);
  std::vector<std::array<double, 2>> goals;  // empty: derived from map digits or spread
  double step_size = 0.2;
  int num_goals = 8;
};

class PointMazeEnv : public Env {
 public:
  explicit PointMazeEnv(PointMazeConfig cfg = {}) : cfg_(std::move(cfg)) {
    if (cfg_.step_size <= 0.0) throw ConfigError("point_maze: step size must be positive");
    if (cfg_.goals.empty()) {
      if (!cfg_.map.goal_cells.empty()) {
        for (const auto& [idx, cell] : cfg_.map.goal_cells)
          cfg_.goals.push_back({cell.first + 0.5, cell.second + 0.5});
      } else {
        // spread the requested number of goals evenly over the free cells
        const auto cells = cfg_.map.free_cells();
        if (static_cast<int>(cells.size()) < cfg_.num_goals)
          throw ConfigError("point_maze: not enough free cells for the requested goals");
        for (int k = 0; k < cfg_.num_goals; ++k) {
          const size_t idx =
              cfg_.num_goals == 1
                  ? 0
                  : static_cast<size_t>(std::llround(static_cast<double>(k) *
                                                     (cells.size() - 1) /
                                                     (cfg_.num_goals - 1)));
          cfg_.goals.push_back({cells[idx].first + 0.5, cells[idx].second + 0.5});
        }
      }
    }
    active_goal_ = cfg_.goals.front();
    reset();
  }

  Observation reset() override {
    x_ = cfg_.map.start_x + 0.5;
    y_ = cfg_.map.start_y + 0.5;
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= num_actions()) throw UsageError("point_maze: action out of range");
    const Observation before = observe();
    const int dx = action % 3 - 1;
    const int dy = action / 3 - 1;
    const double nx = x_ + cfg_.step_size * dx;
    if (!wall_at(nx, y_)) x_ = nx;
    const double ny = y_ + cfg_.step_size * dy;
    if (!wall_at(x_, ny)) y_ = ny;

    StepResult out;
    out.obs = observe();
    out.terminal = false;
    out.features = feature_of(before, action, out.obs);
    return out;
  }

  Observation current_observation() const override { return observe(); }

  int num_actions() const override { return 9; }
  int obs_dim() const override { return 4; }
  int feature_dim() const override { return static_cast<int>(cfg_.goals.size()); }

  FeatureVec feature_of(const Observation&, int, const Observation& s_next) const override {
    FeatureVec phi(cfg_.goals.size());
    for (size_t k = 0; k < cfg_.goals.size(); ++k) {
      const double ddx = s_next[0] - cfg_.goals[k][0];
      const double ddy = s_next[1] - cfg_.goals[k][1];
      phi[k] = std::exp(-std::sqrt(ddx * ddx + ddy * ddy));
    }
    return phi;
  }

  std::string pivot_key(const Observation& s, int a) const override {
    // observation quantized to a 0.05-unit lattice, concatenated with the action
    std::string key;
    for (size_t i = 0; i < s.size(); ++i) {
      const long q = std::lround(s[i] / 0.05);
      key += std::to_string(q);
      key += ',';
    }
    key += static_cast<char>('A' + a);
    return key;
  }

  std::vector<TaskSpec> default_tasks() const override {
    std::vector<TaskSpec> tasks;
    for (size_t k = 0; k < cfg_.goals.size(); ++k) {
      TaskSpec t;
      t.task_id = static_cast<int>(k);
      t.reward_weights.assign(cfg_.goals.size(), 0.0);
      t.reward_weights[k] = 1.0;
      t.goal_position = cfg_.goals[k];
      t.has_goal_position = true;
      tasks.push_back(std::move(t));
    }
    return tasks;
  }

  void set_active_task(const TaskSpec& task) override {
    if (task.has_goal_position) {
      active_goal_ = task.goal_position;
    } else if (task.task_id >= 0 && task.task_id < static_cast<int>(cfg_.goals.size())) {
      active_goal_ = cfg_.goals[static_cast<size_t>(task.task_id)];
    }
  }

  std::string name() const override { return "point_maze"; }

  const std::vector<std::array<double, 2>>& goals() const { return cfg_.goals; }
  const GridMap& map() const { return cfg_.map; }

 private:
  bool wall_at(double wx, double wy) const {
    return cfg_.map.wall(static_cast<int>(std::floor(wx)), static_cast<int>(std::floor(wy)));
  }

  Observation observe() const { return {x_, y_, active_goal_[0], active_goal_[1]}; }

  PointMazeConfig cfg_;
  std::array<double, 2> active_goal_;
  double x_ = 0.0;
  double y_ = 0.0;
};

}  // namespace fgsfrql
