#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ranloop/checkpoint_io.hpp"
#include "ranloop/loop.hpp"
#include "ranloop/log.hpp"
#include "ranloop/records.hpp"
#include "ranloop/scenario.hpp"

namespace fs = std::filesystem;
using namespace ranloop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitReplayMismatch = 2;
constexpr int kExitIo = 3;

struct RunArgs {
  std::string scenario_path;
  uint64_t seed{0};
  std::string export_path;
  std::string agent;
  int64_t ttis{0};
  std::string checkpoint_path;
};

EpisodeOptions make_options(const RunArgs& args) {
  EpisodeOptions options;
  if (!args.agent.empty()) options.agent_override = agent_kind_from_string(args.agent);
  if (args.ttis > 0) options.total_ttis_override = args.ttis;
  return options;
}

int cmd_run(const RunArgs& args) {
  const Scenario scenario = load_scenario_file(args.scenario_path);
  EpisodeOptions options = make_options(args);
  std::optional<ExportWriter> writer;
  if (!args.export_path.empty()) {
    writer.emplace(args.export_path);
    options.sink = &*writer;
  }
  const EpisodeResult result = run_episode(scenario, args.seed, options);
  if (writer) writer->flush();
  if (!args.checkpoint_path.empty()) {
    save_checkpoint_file(args.checkpoint_path, {result.agent_state, result.supervisor_state});
  }
  std::cout << "scenario " << scenario.name << " seed " << args.seed << ": "
            << result.records.size() << " intervals, final-quarter mean reward "
            << format_double_9sig(final_quarter_mean_reward(result.records)) << ", "
            << result.applied_count << " actuations, " << result.rollback_count
            << " rollbacks\n";
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
  const Scenario scenario = load_scenario_file(scenario_path);
  std::cout << "ok: " << scenario.name << " (" << scenario.cells.size() << " cells, "
            << scenario.ues.count << " UEs, " << scenario.loop.total_ttis << " TTIs)\n";
  return kExitOk;
}

int cmd_replay(const RunArgs& args) {
  const Scenario scenario = load_scenario_file(args.scenario_path);
  const ReplayResult result =
      replay_compare(scenario, args.seed, args.export_path, make_options(args));
  if (result.identical) {
    std::cout << "replay identical\n";
    return kExitOk;
  }
  std::cerr << "replay mismatch at line " << result.first_divergent_line << ": "
            << result.detail << "\n";
  return kExitReplayMismatch;
}

struct SweepJob {
  AgentKind agent;
  uint64_t seed;
  double final_quarter_reward{0.0};
};

int cmd_sweep(const std::string& scenario_path, int seeds, int workers,
              const std::string& export_dir, const std::string& agents_csv, int64_t ttis) {
  const Scenario scenario = load_scenario_file(scenario_path);
  fs::create_directories(export_dir);

  std::vector<AgentKind> agents;
  if (agents_csv.empty()) {
    agents.push_back(scenario.loop.agent);
  } else {
    std::string token;
    std::istringstream in(agents_csv);
    while (std::getline(in, token, ',')) agents.push_back(agent_kind_from_string(token));
  }

  std::vector<SweepJob> jobs;
  for (const AgentKind agent : agents) {
    for (int s = 1; s <= seeds; ++s) jobs.push_back({agent, static_cast<uint64_t>(s), 0.0});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      SweepJob& job = jobs[i];
      try {
        const fs::path out =
            fs::path(export_dir) / (to_string(job.agent) + "_seed" +
                                    std::to_string(job.seed) + ".jsonl");
        ExportWriter writer(out);
        EpisodeOptions options;
        options.sink = &writer;
        options.agent_override = job.agent;
        if (ttis > 0) options.total_ttis_override = ttis;
        const EpisodeResult result = run_episode(scenario, job.seed, options);
        writer.flush();
        job.final_quarter_reward = final_quarter_mean_reward(result.records);
      } catch (const std::exception& e) {
        std::scoped_lock lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error("sweep job failed: " + first_error);

  JsonObject summary;
  summary["scenario"] = scenario.name;
  summary["seeds"] = static_cast<int64_t>(seeds);
  JsonObject per_agent;
  for (const AgentKind agent : agents) {
    std::vector<double> rewards;
    JsonArray per_seed;
    for (const SweepJob& job : jobs) {
      if (job.agent != agent) continue;
      rewards.push_back(job.final_quarter_reward);
      JsonObject entry;
      entry["seed"] = job.seed;
      entry["final_quarter_reward"] = job.final_quarter_reward;
      per_seed.push_back(std::move(entry));
    }
    std::vector<double> sorted = rewards;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 == 1
                              ? sorted[sorted.size() / 2]
                              : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    JsonObject stats;
    stats["runs"] = std::move(per_seed);
    stats["mean_final_quarter_reward"] = mean;
    stats["median_final_quarter_reward"] = median;
    per_agent[to_string(agent)] = std::move(stats);
    std::cout << to_string(agent) << ": mean " << format_double_9sig(mean) << ", median "
              << format_double_9sig(median) << " over " << rewards.size() << " seeds\n";
  }
  summary["agents"] = std::move(per_agent);

  const fs::path summary_path = fs::path(export_dir) / "summary.json";
  std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open " + summary_path.string());
  out << to_json_line(summary);
  if (!out) throw std::ios_base::failure("write failed: " + summary_path.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranloop: deterministic RAN digital-twin with a supervised RL control loop"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run one episode and export records");
  run->add_option("--scenario", run_args.scenario_path, "scenario file")->required();
  run->add_option("--seed", run_args.seed, "64-bit run seed")->required();
  run->add_option("--export", run_args.export_path, "export sink (JSON lines)");
  run->add_option("--agent", run_args.agent, "agent kind override");
  run->add_option("--ttis", run_args.ttis, "total TTIs override");
  run->add_option("--checkpoint", run_args.checkpoint_path, "save agent state here");

  std::string validate_scenario;
  CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario");
  validate->add_option("--scenario", validate_scenario, "scenario file")->required();

  RunArgs replay_args;
  CLI::App* replay = app.add_subcommand("replay", "re-run and byte-compare an export");
  replay->add_option("--export", replay_args.export_path, "previous export file")->required();
  replay->add_option("--scenario", replay_args.scenario_path, "scenario file")->required();
  replay->add_option("--seed", replay_args.seed, "seed of the original run")->required();
  replay->add_option("--agent", replay_args.agent, "agent kind override");
  replay->add_option("--ttis", replay_args.ttis, "total TTIs override");

  std::string sweep_scenario, sweep_dir, sweep_agents;
  int sweep_seeds = 5, sweep_workers = 1;
  int64_t sweep_ttis = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "run a seed sweep and summarize rewards");
  sweep->add_option("--scenario", sweep_scenario, "scenario file")->required();
  sweep->add_option("--seeds", sweep_seeds, "number of seeds (1..k)")->required();
  sweep->add_option("--workers", sweep_workers, "parallel workers");
  sweep->add_option("--export-dir", sweep_dir, "directory for per-seed exports")->required();
  sweep->add_option("--agents", sweep_agents, "comma-separated agent kinds");
  sweep->add_option("--ttis", sweep_ttis, "total TTIs override");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_args);
    if (validate->parsed()) return cmd_validate(validate_scenario);
    if (replay->parsed()) return cmd_replay(replay_args);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_scenario, sweep_seeds, sweep_workers, sweep_dir, sweep_agents,
                       sweep_ttis);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CheckpointIoError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
