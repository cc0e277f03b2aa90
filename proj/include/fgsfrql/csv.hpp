#pragma once

#include <cstdio>
#include <fstream>

#include "fgsfrql/trainer.hpp"

namespace fgsfrql {

// 17 significant digits: doubles survive the write/read round trip exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* kStepCsvHeader =
    "step,task_id,reward,cumulative_task_reward,residual_norm,batch_msbe,chosen_policy";

inline void write_step_csv(const std::string& path, const RunRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open for writing: " + path);
  out << kStepCsvHeader << "\n";
  for (const StepRow& r : rec.steps) {
    out << r.step << ',' << r.task_id << ',' << fmt_double(r.reward) << ','
        << fmt_double(r.cumulative_task_reward) << ',' << fmt_double(r.residual_norm) << ','
        << fmt_double(r.batch_msbe) << ',' << r.chosen_policy << "\n";
  }
}

// Wall-clock per-step update times live in a separate file: they are genuinely
// non-reproducible, and the step log is contractually byte-identical across
// reruns of the same seed.
inline void write_timing_csv(const std::string& path, const RunRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open for writing: " + path);
  out << "step,wall_clock_ns\n";
  for (const StepRow& r : rec.steps) out << r.step << ',' << r.wall_clock_ns << "\n";
}

inline std::vector<StepRow> read_step_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError("empty csv: " + path);
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != kStepCsvHeader) throw UsageError("unexpected csv schema in " + path);
  std::vector<StepRow> rows;
  while (std::getline(in, line)) {
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    StepRow r;
    const char* p = line.c_str();
    char* end = nullptr;
    r.step = std::strtol(p, &end, 10);
    p = end + 1;
    r.task_id = static_cast<int>(std::strtol(p, &end, 10));
    p = end + 1;
    r.reward = std::strtod(p, &end);
    p = end + 1;
    r.cumulative_task_reward = std::strtod(p, &end);
    p = end + 1;
    r.residual_norm = std::strtod(p, &end);
    p = end + 1;
    r.batch_msbe = std::strtod(p, &end);
    p = end + 1;
    r.chosen_policy = static_cast<int>(std::strtol(p, &end, 10));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fgsfrql
