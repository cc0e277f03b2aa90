#pragma once

#include <algorithm>
#include <numeric>

#include "fgsfrql/env.hpp"
#include "fgsfrql/rng.hpp"

namespace fgsfrql {

// Four-rooms object-collection gridworld. The agent navigates to a fixed goal
// while collecting typed objects; each object instance can be collected once
// per episode. Observations are one-hot x + one-hot y + a binary inventory
// over object instances; features are one bit per object type plus a goal bit.
//
// Actions: 0 north (y-1), 1 south (y+1), 2 east (x+1), 3 west (x-1). Walls
// block movement (position unchanged).

inline const char* kFourRoomsDefaultMap =
    "#############\n"
    "#S....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "###.#####.###\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#....0#\n"
    "#############\n";

struct FourRoomsConfig {
  GridMap map = GridMap::parse(kFourRoomsDefaultMap);
  int object_types = 3;
  int instances_per_type = 4;
  uint64_t layout_seed = 1234;  // fixed world layout, independent of run seeds
  int num_tasks = 6;
};

class FourRoomsEnv : public Env {
 public:
  explicit FourRoomsEnv(FourRoomsConfig cfg = {}) : cfg_(std::move(cfg)) {
    if (cfg_.object_types < 1 || cfg_.instances_per_type < 1)
      throw ConfigError("four_rooms: object counts must be positive");
    if (cfg_.map.goal_cells.count(0) == 0)
      throw ConfigError("four_rooms: map must mark the goal cell with '0'");
    goal_ = cfg_.map.goal_cells.at(0);

    auto cells = cfg_.map.free_cells();
    std::erase_if(cells, [&](const auto& c) {
      return (c.first == cfg_.map.start_x && c.second == cfg_.map.start_y) ||
             (c.first == goal_.first && c.second == goal_.second);
    });
    const int wanted = cfg_.object_types * cfg_.instances_per_type;
    if (static_cast<int>(cells.size()) < wanted)
      throw ConfigError("four_rooms: not enough free cells for the configured objects");
    Rng rng(cfg_.layout_seed);
    for (size_t i = cells.size(); i > 1; --i)
      std::swap(cells[i - 1], cells[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
    object_cells_.assign(cells.begin(), cells.begin() + wanted);
    reset();
  }

  Observation reset() override {
    x_ = cfg_.map.start_x;
    y_ = cfg_.map.start_y;
    inventory_.assign(object_cells_.size(), 0);
    return observe();
  }

  StepResult step(int action) override {
    if (action < 0 || action >= num_actions()) throw UsageError("four_rooms: action out of range");
    const Observation before = observe();
    static constexpr int dx[4] = {0, 0, 1, -1};
    static constexpr int dy[4] = {-1, 1, 0, 0};
    const int nx = x_ + dx[action];
    const int ny = y_ + dy[action];
    if (!cfg_.map.wall(nx, ny)) {
      x_ = nx;
      y_ = ny;
    }
    const int obj = object_at(x_, y_);
    if (obj >= 0 && inventory_[static_cast<size_t>(obj)] == 0)
      inventory_[static_cast<size_t>(obj)] = 1;

    StepResult out;
    out.obs = observe();
    out.terminal = (x_ == goal_.first && y_ == goal_.second);
    out.features = feature_of(before, action, out.obs);
    return out;
  }

  Observation current_observation() const override { return observe(); }

  int num_actions() const override { return 4; }
  int obs_dim() const override {
    return cfg_.map.width + cfg_.map.height + static_cast<int>(object_cells_.size());
  }
  int feature_dim() const override { return cfg_.object_types + 1; }

  FeatureVec feature_of(const Observation& s, int /*a*/, const Observation& s_next) const override {
    FeatureVec phi(static_cast<size_t>(feature_dim()), 0.0);
    const int inv_off = cfg_.map.width + cfg_.map.height;
    for (size_t i = 0; i < object_cells_.size(); ++i) {
      if (s_next[static_cast<size_t>(inv_off) + i] > 0.5 &&
          s[static_cast<size_t>(inv_off) + i] < 0.5)
        phi[static_cast<size_t>(i % static_cast<size_t>(cfg_.object_types))] = 1.0;
    }
    const auto [nx, ny] = decode_pos(s_next);
    if (nx == goal_.first && ny == goal_.second) phi[static_cast<size_t>(cfg_.object_types)] = 1.0;
    return phi;
  }

  std::string pivot_key(const Observation& s, int a) const override {
    // exact byte encoding of (position, inventory, action)
    const auto [px, py] = decode_pos(s);
    std::string key;
    key.reserve(object_cells_.size() + 8);
    key += static_cast<char>(px);
    key += static_cast<char>(py);
    const int inv_off = cfg_.map.width + cfg_.map.height;
    for (size_t i = 0; i < object_cells_.size(); ++i)
      key += s[static_cast<size_t>(inv_off) + i] > 0.5 ? '1' : '0';
    key += static_cast<char>('A' + a);
    return key;
  }

  // Reward weights over object types in {+1, 0, -1} with the goal weight fixed
  // at +1. The canonical order alternates sign patterns so consecutive tasks
  // value objects oppositely; beyond the table it falls back to lexicographic
  // enumeration of {+1, 0, -1}^k.
  std::vector<TaskSpec> default_tasks() const override {
    static const std::vector<std::vector<double>> kCanonical = {
        {1, 1, 1}, {-1, -1, -1}, {1, -1, 1}, {-1, 1, -1}, {1, 1, -1}, {-1, -1, 1}};
    static constexpr double kLevels[3] = {1.0, 0.0, -1.0};
    std::vector<TaskSpec> tasks;
    auto add_task = [&](const std::vector<double>& object_weights) {
      TaskSpec t;
      t.task_id = static_cast<int>(tasks.size());
      t.reward_weights.assign(static_cast<size_t>(feature_dim()), 0.0);
      for (int k = 0; k < cfg_.object_types && k < static_cast<int>(object_weights.size()); ++k)
        t.reward_weights[static_cast<size_t>(k)] = object_weights[static_cast<size_t>(k)];
      t.reward_weights[static_cast<size_t>(cfg_.object_types)] = 1.0;
      tasks.push_back(std::move(t));
    };
    for (const auto& w : kCanonical) {
      if (static_cast<int>(tasks.size()) >= cfg_.num_tasks) break;
      add_task(w);
    }
    int total = 1;
    for (int k = 0; k < cfg_.object_types; ++k) total *= 3;
    for (int code = 0; code < total && static_cast<int>(tasks.size()) < cfg_.num_tasks; ++code) {
      std::vector<double> w(static_cast<size_t>(cfg_.object_types));
      int rem = code;
      for (int k = cfg_.object_types - 1; k >= 0; --k) {
        w[static_cast<size_t>(k)] = kLevels[rem % 3];
        rem /= 3;
      }
      bool dup = false;
      for (const auto& c : kCanonical)
        if (cfg_.object_types == 3 && std::equal(w.begin(), w.end(), c.begin())) dup = true;
      if (!dup) add_task(w);
    }
    return tasks;
  }

  std::string name() const override { return "four_rooms"; }

  const std::vector<std::pair<int, int>>& object_cells() const { return object_cells_; }
  std::pair<int, int> goal_cell() const { return goal_; }
  const GridMap& map() const { return cfg_.map; }

 private:
  Observation observe() const {
    Observation o(static_cast<size_t>(obs_dim()), 0.0);
    o[static_cast<size_t>(x_)] = 1.0;
    o[static_cast<size_t>(cfg_.map.width + y_)] = 1.0;
    const int inv_off = cfg_.map.width + cfg_.map.height;
    for (size_t i = 0; i < inventory_.size(); ++i)
      o[static_cast<size_t>(inv_off) + i] = inventory_[i] ? 1.0 : 0.0;
    return o;
  }

  std::pair<int, int> decode_pos(const Observation& s) const {
    int px = -1, py = -1;
    for (int x = 0; x < cfg_.map.width; ++x)
      if (s[static_cast<size_t>(x)] > 0.5) px = x;
    for (int y = 0; y < cfg_.map.height; ++y)
      if (s[static_cast<size_t>(cfg_.map.width + y)] > 0.5) py = y;
    if (px < 0 || py < 0) throw ShapeError("four_rooms: observation has no position set");
    return {px, py};
  }

  int object_at(int x, int y) const {
    for (size_t i = 0; i < object_cells_.size(); ++i)
      if (object_cells_[i].first == x && object_cells_[i].second == y) return static_cast<int>(i);
    return -1;
  }

  FourRoomsConfig cfg_;
  std::pair<int, int> goal_;
  std::vector<std::pair<int, int>> object_cells_;
  int x_ = 0;
  int y_ = 0;
  std::vector<uint8_t> inventory_;
};

}  // namespace fgsfrql
