#pragma once

#include <map>
#include <set>

#include "fgsfrql/csv.hpp"
#include "fgsfrql/summary.hpp"
#include "fgsfrql/svg_plot.hpp"

namespace fgsfrql {

// fixed algorithm -> color legend
inline std::string algorithm_color(Algorithm a) {
  switch (a) {
    case Algorithm::dqn: return "#1f77b4";            // blue
    case Algorithm::sfdqn: return "#ff7f0e";          // orange
    case Algorithm::fg_sfdqn_alg1: return "#2ca02c";  // green
    case Algorithm::fg_sfdqn_alg2: return "#d62728";  // red
    case Algorithm::fg_sfdqn_alg3: return "#9467bd";  // purple
    case Algorithm::fgdqn: return "#8c564b";          // brown
  }
  return "#000000";
}

enum class PlotKind { cumulative, ablation, final_eval_bars };

inline PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "cumulative") return PlotKind::cumulative;
  if (s == "ablation") return PlotKind::ablation;
  if (s == "final_eval_bars") return PlotKind::final_eval_bars;
  throw ConfigError("unknown plot kind: " + s);
}

namespace detail {

struct LoadedRun {
  RunSummary summary;
  std::vector<StepRow> steps;
};

inline LoadedRun load_run(const std::string& summary_path, bool with_steps) {
  LoadedRun run;
  run.summary = read_summary_file(summary_path);
  if (with_steps) run.steps = read_step_csv(dir_of(summary_path) + run.summary.steps_csv);
  return run;
}

// label used to group seeds of the same configuration into one curve
inline std::string group_label(const RunSummary& s, PlotKind kind) {
  std::string label = to_string(s.config.algorithm);
  if (kind == PlotKind::ablation && s.config.algorithm == Algorithm::fg_sfdqn_alg3)
    label += " N=" + std::to_string(s.config.averaging_n);
  return label;
}

inline svg::LineSeries mean_band_series(const std::string& label, const std::string& color,
                                        const std::vector<const std::vector<StepRow>*>& runs) {
  size_t len = runs.front()->size();
  for (const auto* r : runs) len = std::min(len, r->size());
  const size_t stride = std::max<size_t>(1, len / 1200);
  svg::LineSeries s;
  s.label = label;
  s.color = color;
  for (size_t i = 0; i < len; i += stride) {
    double mean = 0.0;
    for (const auto* r : runs) mean += (*r)[i].cumulative_task_reward;
    mean /= static_cast<double>(runs.size());
    double var = 0.0;
    for (const auto* r : runs) {
      const double d = (*r)[i].cumulative_task_reward - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(runs.size()));
    s.x.push_back(static_cast<double>((*runs.front())[i].step));
    s.y.push_back(mean);
    s.band_lo.push_back(mean - sd);
    s.band_hi.push_back(mean + sd);
  }
  return s;
}

}  // namespace detail

// Renders one chart from run summaries. Cumulative and ablation charts show
// per-step cumulative task reward with a mean +/- std band over seeds;
// final-eval bars show per-task held-out means with std-over-seeds whiskers.
inline void emit_plots(const std::vector<std::string>& summary_paths, PlotKind kind,
                       const std::string& out_path) {
  if (summary_paths.empty()) throw UsageError("emit_plots: no input records");

  if (kind == PlotKind::final_eval_bars) {
    std::map<std::string, std::vector<detail::LoadedRun>> groups;
    for (const auto& p : summary_paths) {
      detail::LoadedRun run = detail::load_run(p, /*with_steps=*/false);
      groups[detail::group_label(run.summary, kind)].push_back(std::move(run));
    }
    size_t num_tasks = 0;
    for (const auto& [label, runs] : groups)
      for (const auto& r : runs) num_tasks = std::max(num_tasks, r.summary.final_eval.size());
    std::vector<std::string> categories;
    for (size_t t = 0; t < num_tasks; ++t) categories.push_back("task " + std::to_string(t));
    std::vector<svg::BarSeries> series;
    for (const auto& [label, runs] : groups) {
      svg::BarSeries bars;
      bars.label = label;
      bars.color = algorithm_color(runs.front().summary.config.algorithm);
      for (size_t t = 0; t < num_tasks; ++t) {
        double mean = 0.0;
        for (const auto& r : runs) mean += r.summary.final_eval[t].mean;
        mean /= static_cast<double>(runs.size());
        double var = 0.0;
        for (const auto& r : runs) {
          const double d = r.summary.final_eval[t].mean - mean;
          var += d * d;
        }
        bars.values.push_back(mean);
        bars.errors.push_back(std::sqrt(var / static_cast<double>(runs.size())));
      }
      series.push_back(std::move(bars));
    }
    write_bar_chart(out_path, "Final evaluation performance", "task", "mean return", categories,
                    series);
    return;
  }

  std::map<std::string, std::vector<detail::LoadedRun>> groups;
  for (const auto& p : summary_paths) {
    detail::LoadedRun run = detail::load_run(p, /*with_steps=*/true);
    groups[detail::group_label(run.summary, kind)].push_back(std::move(run));
  }
  std::vector<svg::LineSeries> series;
  for (const auto& [label, runs] : groups) {
    std::vector<const std::vector<StepRow>*> steps;
    for (const auto& r : runs) steps.push_back(&r.steps);
    svg::LineSeries s = detail::mean_band_series(
        label, algorithm_color(runs.front().summary.config.algorithm), steps);
    if (kind == PlotKind::ablation && runs.front().summary.config.algorithm == Algorithm::fg_sfdqn_alg3) {
      // distinguish the averaging variants within the fixed purple hue
      const int n = runs.front().summary.config.averaging_n;
      if (n >= 10) s.color = n >= 20 ? "#5e3c99" : "#7b52ae";
    }
    series.push_back(std::move(s));
  }
  const char* title = kind == PlotKind::cumulative ? "Cumulative training reward across tasks"
                                                   : "Averaging ablation";
  write_line_chart(out_path, title, "training step", "cumulative task reward", series);
}

// --- cross-run comparison table ---

struct ComparisonRow {
  std::string algorithm;
  int task = 0;
  double final_train_cumulative = 0.0;  // mean over seeds
  double eval_mean = 0.0;               // mean over seeds of per-task eval means
  double eval_std = 0.0;                // std over seeds of per-task eval means
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  // overall eval mean per algorithm and pairwise differences
  std::map<std::string, double> overall;
  std::vector<std::tuple<std::string, std::string, double>> pairwise;
};

inline Comparison compare_summary(const std::vector<std::string>& summary_paths) {
  std::map<std::string, std::vector<detail::LoadedRun>> groups;
  for (const auto& p : summary_paths) {
    detail::LoadedRun run = detail::load_run(p, /*with_steps=*/true);
    groups[to_string(run.summary.config.algorithm)].push_back(std::move(run));
  }
  if (groups.size() < 2) throw UsageError("compare_summary: need at least two algorithms");

  Comparison cmp;
  for (const auto& [algo, runs] : groups) {
    const size_t num_tasks = runs.front().summary.final_eval.size();
    for (size_t t = 0; t < num_tasks; ++t) {
      ComparisonRow row;
      row.algorithm = algo;
      row.task = static_cast<int>(t);
      Vec eval_means;
      for (const auto& r : runs) {
        eval_means.push_back(r.summary.final_eval[t].mean);
        // last logged cumulative reward within this task's segment
        double last = 0.0;
        for (const StepRow& sr : r.steps)
          if (sr.task_id == static_cast<int>(t)) last = sr.cumulative_task_reward;
        row.final_train_cumulative += last / static_cast<double>(runs.size());
      }
      double mean = 0.0;
      for (double v : eval_means) mean += v;
      mean /= static_cast<double>(eval_means.size());
      double var = 0.0;
      for (double v : eval_means) var += (v - mean) * (v - mean);
      row.eval_mean = mean;
      row.eval_std = std::sqrt(var / static_cast<double>(eval_means.size()));
      cmp.rows.push_back(row);
    }
    double overall = 0.0;
    for (size_t t = 0; t < num_tasks; ++t) {
      double m = 0.0;
      for (const auto& r : runs) m += r.summary.final_eval[t].mean;
      overall += m / static_cast<double>(runs.size());
    }
    cmp.overall[algo] = overall / static_cast<double>(num_tasks);
  }
  for (auto a = cmp.overall.begin(); a != cmp.overall.end(); ++a)
    for (auto b = std::next(a); b != cmp.overall.end(); ++b)
      cmp.pairwise.emplace_back(a->first, b->first, a->second - b->second);
  return cmp;
}

inline std::string comparison_to_text(const Comparison& cmp) {
  std::ostringstream os;
  os << "algorithm          task  final_train_cum   eval_mean   eval_std\n";
  for (const auto& r : cmp.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-18s %4d  %15.4f  %10.4f  %9.4f\n", r.algorithm.c_str(),
                  r.task, r.final_train_cumulative, r.eval_mean, r.eval_std);
    os << buf;
  }
  os << "\npairwise overall eval-mean differences:\n";
  for (const auto& [a, b, d] : cmp.pairwise) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %s - %s = %+.4f\n", a.c_str(), b.c_str(), d);
    os << buf;
  }
  return os.str();
}

inline std::string comparison_to_csv(const Comparison& cmp) {
  std::ostringstream os;
  os << "algorithm,task,final_train_cumulative,eval_mean,eval_std\n";
  for (const auto& r : cmp.rows)
    os << r.algorithm << ',' << r.task << ',' << fmt_double(r.final_train_cumulative) << ','
       << fmt_double(r.eval_mean) << ',' << fmt_double(r.eval_std) << "\n";
  return os.str();
}

}  // namespace fgsfrql
