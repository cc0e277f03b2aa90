// fgsfrql: multi-task successor-feature RL experiments.
//
// Subcommands: train (one run), suite (multi-seed/multi-algo), eval
// (checkpoint -> evaluation report), gradcheck (finite-difference suite),
// overhead (per-step update cost table), plot (CSV -> SVG charts).

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "fgsfrql/checkpoint.hpp"
#include "fgsfrql/csv.hpp"
#include "fgsfrql/gradcheck.hpp"
#include "fgsfrql/metrics.hpp"

namespace fs = std::filesystem;
using namespace fgsfrql;

namespace {

struct TrainFlags {
  std::string config_path;
  std::string env;
  std::string algo;
  std::string map;
  std::string lr_schedule;
  uint64_t seed = 0;
  int steps_per_task = 0;
  int num_tasks = 0;
  int batch_size = 0;
  int averaging_n = 0;
  int horizon = 0;
  double alpha = 0.0;
  double alpha_r = 0.0;
  double gamma = -1.0;
  double epsilon = -1.0;
  bool learn_rewards = false;
  bool minibatch = false;
  bool growing_n = false;
  bool timings = false;
  std::string out = "run";
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override file values");
  cmd->add_option("--env", f.env,
                  "four_rooms, point_maze_u, point_maze_medium, point_maze_large, chain_test");
  cmd->add_option("--algo", f.algo,
                  "dqn, fgdqn, sfdqn, fg_sfdqn_alg1, fg_sfdqn_alg2, fg_sfdqn_alg3");
  cmd->add_option("--map", f.map, "grid map file overriding the built-in layout");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--steps-per-task", f.steps_per_task, "training steps per task");
  cmd->add_option("--num-tasks", f.num_tasks, "number of tasks");
  cmd->add_option("--batch-size", f.batch_size, "replay batch size (baselines / --minibatch)");
  cmd->add_option("--alpha", f.alpha, "learning rate");
  cmd->add_option("--alpha-r", f.alpha_r, "reward-model learning rate");
  cmd->add_option("--gamma", f.gamma, "discount factor");
  cmd->add_option("--epsilon", f.epsilon, "exploration rate");
  cmd->add_option("--averaging-n", f.averaging_n, "batch size N of the averaged update");
  cmd->add_option("--lr-schedule", f.lr_schedule, "constant or robbins_monro");
  cmd->add_option("--horizon", f.horizon, "max episode length");
  cmd->add_flag("--learn-rewards", f.learn_rewards, "learn reward models from observed rewards");
  cmd->add_flag("--minibatch", f.minibatch, "sequential updates from a replay minibatch");
  cmd->add_flag("--growing-n", f.growing_n, "experimental: grow N during training");
  cmd->add_flag("--timings", f.timings, "also write a per-step wall-clock sidecar CSV");
  cmd->add_option("--out", f.out, "output path prefix");
}

TrainConfig resolve_config(const CLI::App* cmd, const TrainFlags& f) {
  // resolution order: env defaults, then config file, then explicit flags
  std::string env = "four_rooms";
  nlohmann::json file;
  if (!f.config_path.empty()) file = load_json_file(f.config_path);
  if (file.contains("env")) env = file.at("env").get<std::string>();
  if (cmd->count("--env")) env = f.env;
  TrainConfig cfg = TrainConfig::defaults_for(env);
  cfg = config_from_json(file, cfg);
  cfg.env = env;

  if (cmd->count("--algo")) cfg.algorithm = algorithm_from_string(f.algo);
  if (cmd->count("--map")) cfg.map_path = f.map;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--steps-per-task")) cfg.steps_per_task = f.steps_per_task;
  if (cmd->count("--num-tasks")) cfg.num_tasks = f.num_tasks;
  if (cmd->count("--batch-size")) cfg.batch_size = f.batch_size;
  if (cmd->count("--alpha")) cfg.alpha = f.alpha;
  if (cmd->count("--alpha-r")) cfg.alpha_r = f.alpha_r;
  if (cmd->count("--gamma")) cfg.gamma = f.gamma;
  if (cmd->count("--epsilon")) cfg.epsilon = f.epsilon;
  if (cmd->count("--averaging-n")) cfg.averaging_n = f.averaging_n;
  if (cmd->count("--lr-schedule")) cfg.lr_schedule = lr_schedule_from_string(f.lr_schedule);
  if (cmd->count("--horizon")) cfg.horizon = f.horizon;
  if (f.learn_rewards) cfg.learn_rewards = true;
  if (f.minibatch) cfg.minibatch = true;
  if (f.growing_n) cfg.growing_n = true;
  cfg.validate();
  return cfg;
}

void write_run_outputs(const std::string& prefix, const RunRecord& rec, bool timings) {
  const fs::path p(prefix);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string steps_name = p.filename().string() + ".steps.csv";
  write_step_csv(prefix + ".steps.csv", rec);
  if (timings) write_timing_csv(prefix + ".timing.csv", rec);
  write_summary_file(prefix + ".summary.json", make_summary(rec, steps_name));
  save_checkpoint_file(prefix + ".ckpt", rec);
}

int cmd_train(const CLI::App* cmd, const TrainFlags& f) {
  const TrainConfig cfg = resolve_config(cmd, f);
  const RunRecord rec = train_run(cfg);
  write_run_outputs(f.out, rec, f.timings);
  std::cout << "run complete: " << to_string(cfg.algorithm) << " on " << cfg.env << ", "
            << rec.steps.size() << " steps, total reward " << rec.total_reward << "\n";
  for (size_t t = 0; t < rec.final_eval.size(); ++t)
    std::cout << "  task " << t << " eval mean " << rec.final_eval[t].mean << " std "
              << rec.final_eval[t].stddev << "\n";
  std::cout << "wrote " << f.out << ".steps.csv, .summary.json, .ckpt\n";
  return 0;
}

int suite_parallelism() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("FG_SFRQL_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<int>(n);
}

int cmd_suite(const std::string& config_path) {
  const nlohmann::json sj = load_json_file(config_path);
  const std::string out_dir = sj.value("output_dir", std::string("suite_out"));
  fs::create_directories(out_dir);
  std::vector<uint64_t> seeds = sj.value("seeds", std::vector<uint64_t>{1});

  struct Job {
    std::string id;
    TrainConfig cfg;
    std::string prefix;
  };
  std::vector<Job> jobs;
  std::map<std::string, std::vector<std::string>> summaries_by_id;
  if (!sj.contains("runs") || sj.at("runs").empty()) throw ConfigError("suite: no runs given");
  for (const auto& rj : sj.at("runs")) {
    const std::string env = rj.value("env", std::string("four_rooms"));
    TrainConfig base = config_from_json(rj, TrainConfig::defaults_for(env));
    const std::string id = rj.value("id", to_string(base.algorithm));
    for (uint64_t seed : seeds) {
      Job job;
      job.id = id;
      job.cfg = base;
      job.cfg.seed = seed;
      job.cfg.validate();
      job.prefix = out_dir + "/" + id + "_s" + std::to_string(seed);
      summaries_by_id[id].push_back(job.prefix + ".summary.json");
      jobs.push_back(std::move(job));
    }
  }

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      const RunRecord rec = train_run(job.cfg);
      write_run_outputs(job.prefix, rec, false);
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "[suite] " << job.id << " seed " << job.cfg.seed << " done, total reward "
                << rec.total_reward << "\n";
    }
  };
  const int threads = std::min<int>(suite_parallelism(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::string> all_summaries;
  for (const auto& [id, files] : summaries_by_id)
    all_summaries.insert(all_summaries.end(), files.begin(), files.end());

  if (sj.contains("plots")) {
    for (const auto& pj : sj.at("plots")) {
      const PlotKind kind = plot_kind_from_string(pj.at("kind").get<std::string>());
      std::vector<std::string> inputs;
      if (!pj.contains("inputs") || pj.at("inputs") == "*") {
        inputs = all_summaries;
      } else {
        for (const auto& ref : pj.at("inputs")) {
          const auto it = summaries_by_id.find(ref.get<std::string>());
          if (it == summaries_by_id.end())
            throw ConfigError("suite plot references unknown run id: " + ref.get<std::string>());
          inputs.insert(inputs.end(), it->second.begin(), it->second.end());
        }
      }
      const std::string out = out_dir + "/" + pj.at("out").get<std::string>();
      emit_plots(inputs, kind, out);
      std::cout << "[suite] wrote " << out << "\n";
    }
  }

  if (summaries_by_id.size() >= 2) {
    const Comparison cmp = compare_summary(all_summaries);
    std::ofstream txt(out_dir + "/comparison.txt");
    txt << comparison_to_text(cmp);
    std::ofstream csv(out_dir + "/comparison.csv");
    csv << comparison_to_csv(cmp);
    std::cout << comparison_to_text(cmp);
  }
  return 0;
}

int cmd_eval(const CLI::App* cmd, const TrainFlags& f, const std::string& ckpt_path, int episodes,
             int step_cap) {
  const TrainConfig cfg = resolve_config(cmd, f);
  const Checkpoint ck = load_checkpoint_file(ckpt_path);
  EnvSpec spec;
  spec.name = cfg.env;
  spec.map_path = cfg.map_path;
  spec.num_tasks = cfg.num_tasks;
  auto env = make_env(spec);
  std::vector<TaskSpec> tasks = env->default_tasks();
  if (cfg.num_tasks < static_cast<int>(tasks.size())) tasks.resize(static_cast<size_t>(cfg.num_tasks));
  Rng rng(cfg.seed);
  std::vector<EvalStat> stats;
  if (ck.kind == kKindLibrary)
    stats = evaluate(ck.library, *env, tasks, episodes, step_cap, rng);
  else
    stats = evaluate(ck.qnet, *env, tasks, episodes, step_cap, rng);
  std::cout << "evaluation of " << ckpt_path << " on " << cfg.env << " (" << episodes
            << " episodes, cap " << step_cap << "):\n";
  double overall = 0.0;
  for (size_t t = 0; t < stats.size(); ++t) {
    std::cout << "  task " << t << ": mean " << stats[t].mean << " std " << stats[t].stddev << "\n";
    overall += stats[t].mean;
  }
  std::cout << "  overall mean: " << overall / static_cast<double>(stats.size()) << "\n";
  if (cmd->count("--out")) {
    nlohmann::json j;
    j["checkpoint"] = ckpt_path;
    j["env"] = cfg.env;
    nlohmann::json evals = nlohmann::json::array();
    for (size_t t = 0; t < stats.size(); ++t)
      evals.push_back({{"task", t}, {"mean", stats[t].mean}, {"std", stats[t].stddev}});
    j["final_eval"] = evals;
    std::ofstream out(f.out);
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_gradcheck(int trials, uint64_t seed) {
  const GradcheckReport rep = run_gradcheck(trials, seed);
  std::cout << "gradient check, " << rep.trials << " random instances per family:\n";
  std::cout << "  full_gradient              max rel err " << rep.full << "\n";
  std::cout << "  averaged_full_gradient N=1 max rel err " << rep.averaged1 << "\n";
  std::cout << "  averaged_full_gradient N=5 max rel err " << rep.averaged5 << "\n";
  std::cout << "  semi_gradient (gamma_t=0)  max rel err " << rep.semi0 << "\n";
  std::cout << "  fgdqn_gradient             max rel err " << rep.fgdqn << "\n";
  std::cout << "  overall max: " << rep.max_error() << " (tolerance 1e-6)\n";
  if (!rep.pass()) {
    std::cerr << "gradient check FAILED\n";
    return 1;
  }
  std::cout << "gradient check passed\n";
  return 0;
}

int cmd_overhead(const std::string& env_name, const std::vector<std::string>& algos, int steps,
                 int warm, const std::string& out) {
  std::vector<std::string> names = algos;
  if (names.empty())
    names = {"dqn", "sfdqn", "fg_sfdqn_alg1", "fg_sfdqn_alg2", "fg_sfdqn_alg3", "fgdqn"};
  std::ostringstream table;
  table << "algorithm,mean_ms,variance_ms,samples\n";
  std::cout << "per-step update cost on " << env_name << " (batch size 1, " << warm
            << " warm steps, stats over last " << steps << " updates)\n";
  for (const std::string& name : names) {
    TrainConfig cfg = TrainConfig::defaults_for(env_name);
    cfg.algorithm = algorithm_from_string(name);
    cfg.seed = 7;
    cfg.batch_size = 1;  // isolate per-sample update cost across algorithms
    const int total = warm + steps;
    cfg.steps_per_task = (total + cfg.num_tasks - 1) / cfg.num_tasks;
    const OverheadStat st = measure_overhead(cfg, steps);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-15s mean %9.4f ms   variance %9.6f ms^2   (n=%ld)\n",
                  name.c_str(), st.mean_ms, st.variance_ms, st.samples);
    std::cout << buf;
    table << name << ',' << fmt_double(st.mean_ms) << ',' << fmt_double(st.variance_ms) << ','
          << st.samples << "\n";
  }
  if (!out.empty()) {
    std::ofstream f(out);
    f << table.str();
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task successor-feature RL experiments"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "train one run and write CSV/summary/checkpoint");
  add_train_flags(train, train_flags);

  std::string suite_config;
  CLI::App* suite = app.add_subcommand("suite", "run a multi-seed, multi-algorithm experiment suite");
  suite->add_option("--config", suite_config, "suite JSON file")->required();

  TrainFlags eval_flags;
  std::string eval_ckpt;
  int eval_episodes = 10;
  int eval_cap = 100;
  CLI::App* evalc = app.add_subcommand("eval", "evaluate a checkpoint on every task");
  add_train_flags(evalc, eval_flags);
  evalc->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  evalc->add_option("--episodes", eval_episodes, "episodes per task");
  evalc->add_option("--step-cap", eval_cap, "step cap per episode");

  int gc_trials = 100;
  uint64_t gc_seed = 8811;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  gradcheck->add_option("--trials", gc_trials, "instances per gradient family");
  gradcheck->add_option("--seed", gc_seed, "rng seed");

  std::string oh_env = "four_rooms";
  std::vector<std::string> oh_algos;
  int oh_steps = 200;
  int oh_warm = 3000;
  std::string oh_out;
  CLI::App* overhead = app.add_subcommand("overhead", "measure per-step update cost per algorithm");
  overhead->add_option("--env", oh_env, "environment");
  overhead->add_option("--algos", oh_algos, "algorithms to measure (default: all)");
  overhead->add_option("--steps", oh_steps, "update samples per algorithm");
  overhead->add_option("--warm", oh_warm, "warm-up steps before timing");
  overhead->add_option("--out", oh_out, "CSV output path");

  std::string plot_kind = "cumulative";
  std::string plot_out = "plot.svg";
  std::vector<std::string> plot_inputs;
  CLI::App* plot = app.add_subcommand("plot", "render charts from run summaries");
  plot->add_option("--kind", plot_kind, "cumulative, ablation, final_eval_bars");
  plot->add_option("--out", plot_out, "SVG output path");
  plot->add_option("inputs", plot_inputs, "summary.json files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train, train_flags);
    if (suite->parsed()) return cmd_suite(suite_config);
    if (evalc->parsed()) return cmd_eval(evalc, eval_flags, eval_ckpt, eval_episodes, eval_cap);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_trials, gc_seed);
    if (overhead->parsed()) return cmd_overhead(oh_env, oh_algos, oh_steps, oh_warm, oh_out);
    if (plot->parsed()) {
      emit_plots(plot_inputs, plot_kind_from_string(plot_kind), plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
