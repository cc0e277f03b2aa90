#pragma once

#include "fgsfrql/config.hpp"

namespace fgsfrql {

// Per-run structured summary, written next to the step log. Plot and
// comparison stages consume these files; they never recompute from
// checkpoints.
struct RunSummary {
  TrainConfig config;
  std::vector<EvalStat> final_eval;
  double total_reward = 0.0;
  long long skipped_updates = 0;
  long long update_count = 0;
  long diverged_at_step = -1;
  std::string steps_csv;  // path relative to the summary file
};

inline nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["config"] = config_to_json(s.config);
  j["seed"] = s.config.seed;
  nlohmann::json evals = nlohmann::json::array();
  for (size_t k = 0; k < s.final_eval.size(); ++k)
    evals.push_back({{"task", k}, {"mean", s.final_eval[k].mean}, {"std", s.final_eval[k].stddev}});
  j["final_eval"] = evals;
  j["total_reward"] = s.total_reward;
  j["skipped_updates"] = s.skipped_updates;
  j["update_count"] = s.update_count;
  const long long total = s.update_count + s.skipped_updates;
  j["skip_rate"] = total > 0 ? static_cast<double>(s.skipped_updates) / static_cast<double>(total) : 0.0;
  j["diverged_at_step"] = s.diverged_at_step;
  j["steps_csv"] = s.steps_csv;
  return j;
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.config = config_from_json(j.at("config"), TrainConfig{});
  for (const auto& e : j.at("final_eval"))
    s.final_eval.push_back(EvalStat{e.at("mean").get<double>(), e.at("std").get<double>()});
  s.total_reward = j.at("total_reward").get<double>();
  s.skipped_updates = j.at("skipped_updates").get<long long>();
  s.update_count = j.at("update_count").get<long long>();
  s.diverged_at_step = j.value("diverged_at_step", -1L);
  s.steps_csv = j.at("steps_csv").get<std::string>();
  return s;
}

inline RunSummary make_summary(const RunRecord& rec, const std::string& steps_csv) {
  RunSummary s;
  s.config = rec.config;
  s.final_eval = rec.final_eval;
  s.total_reward = rec.total_reward;
  s.skipped_updates = rec.skipped_updates;
  s.update_count = rec.update_count;
  s.diverged_at_step = rec.diverged_at_step;
  s.steps_csv = steps_csv;
  return s;
}

inline void write_summary_file(const std::string& path, const RunSummary& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open for writing: " + path);
  out << summary_to_json(s).dump(2) << "\n";
}

inline RunSummary read_summary_file(const std::string& path) {
  return summary_from_json(load_json_file(path));
}

// directory part of a path, "" when there is none
inline std::string dir_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string() : path.substr(0, pos + 1);
}

}  // namespace fgsfrql
