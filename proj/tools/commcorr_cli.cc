// Copyright 2026 The CommCorr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line harness: train, eval, correlation, plot, covert-nokey.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commcorr/experiment/analysis.h"
#include "commcorr/experiment/config.h"
#include "commcorr/experiment/plot.h"
#include "commcorr/experiment/runner.h"

namespace fs = std::filesystem;
using namespace commcorr;

namespace {

struct TrainArgs {
  std::string config;
  std::vector<uint64_t> seeds;
  std::string out;
  int episodes = -1;
  int jobs = -1;
};

void AddTrainOptions(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--config", a.config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seeds", a.seeds, "seed list, overrides the config")->delimiter(',');
  cmd->add_option("--out", a.out, "output directory, overrides the config");
  cmd->add_option("--episodes", a.episodes, "episodes per seed, overrides the config");
  cmd->add_option("--jobs", a.jobs, "seeds trained concurrently");
}

experiment::RunConfig Resolve(const TrainArgs& a) {
  experiment::RunConfig c = experiment::LoadRunConfig(a.config);
  if (!a.seeds.empty()) c.seeds = a.seeds;
  if (!a.out.empty()) c.out = a.out;
  if (a.episodes > 0) c.train.episodes = a.episodes;
  if (a.jobs > 0) c.jobs = a.jobs;
  return c;
}

int Train(experiment::RunConfig c) {
  const experiment::RunResult r = experiment::RunTraining(c, &std::cerr);
  for (const auto& s : r.seeds) {
    std::string line = fmt::format("seed {}:", s.seed);
    for (size_t t = 0; t < r.team_names.size(); ++t) {
      line += fmt::format(" {}={:.4f}", r.team_names[t], s.final_team_mean[t]);
    }
    std::cout << line << "\n";
  }
  std::cout << "run directory: " << r.dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-correction MADDPG experiments"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train every seed of a config");
  AddTrainOptions(train, train_args);

  TrainArgs nokey_args;
  CLI::App* nokey =
      app.add_subcommand("covert-nokey", "covert_comm training with the key hidden from the allies");
  AddTrainOptions(nokey, nokey_args);

  std::string eval_ckpt, eval_out, eval_config;
  int eval_episodes = 5000;
  std::vector<double> drop_ps = {0.0};
  CLI::App* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "episodes per drop probability");
  eval->add_option("--drop-p", drop_ps, "dropout probabilities")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--config", eval_config, "reject the checkpoint unless its scenario matches");
  eval->add_option("--out", eval_out, "CSV path (default: stdout)");

  std::string corr_ckpt, corr_out;
  int corr_samples = 10000;
  bool corr_explore = false;
  CLI::App* corr = app.add_subcommand("correlation", "message correlation matrices");
  corr->add_option("--checkpoint", corr_ckpt)->required()->check(CLI::ExistingFile);
  corr->add_option("--out", corr_out, "output directory")->required();
  corr->add_option("--samples", corr_samples, "early-training samples used");
  corr->add_flag("--explore", corr_explore, "sample messages instead of taking the argmax");

  std::vector<std::string> plot_dirs;
  std::string plot_out, plot_column;
  int plot_window = 500;
  CLI::App* plot = app.add_subcommand("plot", "reward curves with standard-error bands");
  plot->add_option("runs", plot_dirs, "run directories")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "output directory (default: first run)");
  plot->add_option("--window", plot_window, "trailing smoothing window in episodes")
      ->check(CLI::PositiveNumber);
  plot->add_option("--column", plot_column, "metrics.csv column (default: first team column)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return Train(Resolve(train_args));
    if (*nokey) {
      experiment::RunConfig c = Resolve(nokey_args);
      if (c.scenario.name != "covert_comm") {
        throw std::invalid_argument("covert-nokey needs scenario covert_comm, got " +
                                    c.scenario.name);
      }
      c.scenario.with_key = false;
      return Train(c);
    }
    if (*eval) {
      const experiment::LoadedRun run = experiment::LoadRun(eval_ckpt);
      if (!eval_config.empty()) {
        const experiment::RunConfig want = experiment::LoadRunConfig(eval_config);
        if (env::ScenarioOptionsToJson(want.scenario) !=
            env::ScenarioOptionsToJson(run.config.scenario)) {
          throw std::invalid_argument(
              fmt::format("checkpoint scenario {} does not match config scenario {}",
                          env::ScenarioOptionsToJson(run.config.scenario).dump(),
                          env::ScenarioOptionsToJson(want.scenario).dump()));
        }
      }
      const auto rows = experiment::Evaluate(run, eval_episodes, drop_ps);
      if (eval_out.empty()) {
        experiment::WriteEvalCsv(std::cout, run.scenario.team_names, rows);
      } else {
        std::ofstream out(eval_out);
        if (!out) throw std::runtime_error("cannot write " + eval_out);
        experiment::WriteEvalCsv(out, run.scenario.team_names, rows);
      }
      return 0;
    }
    if (*corr) {
      const experiment::LoadedRun run = experiment::LoadRun(corr_ckpt);
      const auto rep = experiment::AnalyzeCorrelation(run, corr_samples, !corr_explore);
      experiment::WriteCorrelationReport(corr_out, rep, run);
      for (const auto& [view, d] : rep.distance_to_fresh) {
        std::cout << fmt::format("{} distance to fresh: {}\n", view, d);
      }
      int masked = 0;
      for (bool v : rep.c_fresh.valid) masked += !v;
      if (masked > 0) {
        std::cout << fmt::format("{} zero-variance components masked in fresh rollouts\n", masked);
      }
      return 0;
    }
    if (*plot) {
      experiment::PlotRuns(plot_dirs, plot_out.empty() ? plot_dirs.front() : plot_out,
                           plot_window, plot_column);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
