#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <utility>

#include "fgsfrql/types.hpp"

namespace fgsfrql {

struct StepResult {
  Observation obs;
  FeatureVec features;
  bool terminal = false;
};

// Episodic multi-task environment. Dynamics are shared across tasks; only the
// reward weights (and, for the maze, the goal embedded in the observation)
// change from task to task.
class Env {
 public:
  virtual ~Env() = default;

  virtual Observation reset() = 0;
  virtual StepResult step(int action) = 0;

  // Observation of the current state; changes after set_active_task when the
  // observation embeds task information.
  virtual Observation current_observation() const = 0;

  virtual int num_actions() const = 0;
  virtual int obs_dim() const = 0;
  virtual int feature_dim() const = 0;

  // Feature vector of a transition, as a pure function of its endpoints.
  virtual FeatureVec feature_of(const Observation& s, int a, const Observation& s_next) const = 0;

  // Hashable key identifying (s, a) for pivot-conditional replay retrieval.
  virtual std::string pivot_key(const Observation& s, int a) const = 0;

  // Tasks the environment ships with, in canonical order.
  virtual std::vector<TaskSpec> default_tasks() const = 0;

  // Maze observations embed the active task's goal; others ignore this.
  virtual void set_active_task(const TaskSpec&) {}

  virtual std::string name() const = 0;
};

// Plain-text grid map: '#' wall, '.' free, 'S' start, digits = goal indices.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<std::string> rows;
  int start_x = -1;
  int start_y = -1;
  std::map<int, std::pair<int, int>> goal_cells;  // digit -> (x, y)

  bool wall(int x, int y) const {
    if (x < 0 || y < 0 || x >= width || y >= height) return true;
    return rows[static_cast<size_t>(y)][static_cast<size_t>(x)] == '#';
  }

  static GridMap parse(const std::string& text) {
    GridMap m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      m.rows.push_back(line);
    }
    if (m.rows.empty()) throw ConfigError("grid map: empty");
    m.height = static_cast<int>(m.rows.size());
    m.width = static_cast<int>(m.rows[0].size());
    for (int y = 0; y < m.height; ++y) {
      if (static_cast<int>(m.rows[static_cast<size_t>(y)].size()) != m.width)
        throw ConfigError("grid map: rows must have equal length");
      for (int x = 0; x < m.width; ++x) {
        const char c = m.rows[static_cast<size_t>(y)][static_cast<size_t>(x)];
        if (c == '#' || c == '.') continue;
        if (c == 'S') {
          if (m.start_x >= 0) throw ConfigError("grid map: more than one start cell");
          m.start_x = x;
          m.start_y = y;
        } else if (c >= '0' && c <= '9') {
          const int idx = c - '0';
          if (m.goal_cells.count(idx)) throw ConfigError("grid map: duplicate goal index");
          m.goal_cells[idx] = {x, y};
        } else {
          throw ConfigError(std::string("grid map: unexpected character '") + c + "'");
        }
      }
    }
    if (m.start_x < 0) throw ConfigError("grid map: missing start cell 'S'");
    return m;
  }

  static GridMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("grid map: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  // Free cells (including start and goal cells) in row-major order.
  std::vector<std::pair<int, int>> free_cells() const {
    std::vector<std::pair<int, int>> cells;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (!wall(x, y)) cells.emplace_back(x, y);
    return cells;
  }
};

}  // namespace fgsfrql
