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

#include "commcorr/experiment/runner.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#ifndef COMMCORR_CODE_VERSION
#define COMMCORR_CODE_VERSION "unknown"
#endif

namespace commcorr::experiment {

namespace fs = std::filesystem;

std::string CodeVersion() { return COMMCORR_CODE_VERSION; }

namespace {

std::string Cell(double v) { return std::isnan(v) ? std::string() : fmt::format("{}", v); }

void WriteFile(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

struct SeedOutput {
  std::string metrics;
  std::string timings;
  std::string eval;
  SeedSummary summary;
};

std::string CheckpointName(uint64_t seed, int episode) {
  return episode < 0 ? fmt::format("seed{}.ckpt", seed)
                     : fmt::format("seed{}_ep{}.ckpt", seed, episode);
}

void SaveCheckpoint(const fs::path& path, const RunConfig& config, uint64_t seed,
                    const maddpg::Trainer& trainer, bool include_buffer,
                    const std::string& early) {
  RunConfig one = config;
  one.seeds = {seed};
  nn::CheckpointContainer ck;
  ck.Put("run_config", RunConfigToJson(one).dump());
  trainer.Write(ck, include_buffer);
  if (!early.empty()) ck.Put("early", early);
  ck.Save(path.string());
}

SeedOutput TrainSeed(const RunConfig& config, uint64_t seed, const fs::path& dir,
                     std::ostream* log, std::mutex& log_mu) {
  const env::Scenario scenario = env::MakeScenario(config.scenario);
  const maddpg::TrainConfig tc = ResolveTrainConfig(config, scenario, seed);
  maddpg::Trainer trainer(scenario, tc);
  SeedOutput out;
  out.summary.seed = seed;
  out.summary.episodes = tc.episodes;

  const auto t0 = std::chrono::steady_clock::now();
  std::string early;
  std::vector<std::vector<double>> team_history;
  const nn::RngStream eval_root = nn::RngStream(seed).Fork("eval");
  for (int e = 0; e < tc.episodes; ++e) {
    const maddpg::EpisodeStats stats = trainer.RunEpisode();
    out.metrics += MetricsRow(seed, stats);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.timings += fmt::format("{},{},{:.3f}\n", seed, stats.episode, secs);
    team_history.push_back(stats.team_returns);

    const int done = e + 1;
    if (config.early_episodes > 0 && done == config.early_episodes) {
      nn::ByteWriter w;
      trainer.buffer().Write(w);
      early = w.Take();
    }
    if (config.eval_every > 0 && done % config.eval_every == 0) {
      std::vector<double> sum(scenario.num_teams(), 0.0);
      for (int k = 0; k < config.eval_episodes; ++k) {
        nn::RngStream reset = eval_root.Fork("reset", k);
        nn::RngStream channel = eval_root.Fork("channel", k);
        nn::RngStream act = eval_root.Fork("act", k);
        const maddpg::RolloutResult r =
            maddpg::Rollout(scenario, trainer.maddpg(), false, reset, channel, act);
        for (int t = 0; t < scenario.num_teams(); ++t) sum[t] += r.team_returns[t];
      }
      out.eval += fmt::format("{},{}", seed, done);
      for (double s : sum) out.eval += "," + Cell(s / config.eval_episodes);
      out.eval += "\n";
    }
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0 &&
        done != tc.episodes) {
      SaveCheckpoint(dir / "checkpoints" / CheckpointName(seed, done), config, seed, trainer,
                     false, early);
    }
    if (log && done % 1000 == 0) {
      std::lock_guard<std::mutex> lock(log_mu);
      *log << fmt::format("[seed {}] episode {}/{} team return {:.3f} ({:.0f}s)\n", seed, done,
                          tc.episodes, stats.team_returns[0], secs)
           << std::flush;
    }
  }
  if (early.empty() && config.early_episodes > 0) {
    nn::ByteWriter w;
    trainer.buffer().Write(w);
    early = w.Take();
  }
  const fs::path final_path = dir / "checkpoints" / CheckpointName(seed, -1);
  SaveCheckpoint(final_path, config, seed, trainer, config.save_buffer, early);
  out.summary.checkpoint = final_path.string();
  out.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const int tail = std::min<int>(1000, static_cast<int>(team_history.size()));
  out.summary.final_team_mean.assign(scenario.num_teams(), 0.0);
  for (int k = static_cast<int>(team_history.size()) - tail;
       k < static_cast<int>(team_history.size()); ++k) {
    for (int t = 0; t < scenario.num_teams(); ++t) {
      out.summary.final_team_mean[t] += team_history[k][t] / tail;
    }
  }
  return out;
}

nlohmann::json SummaryJson(const RunResult& r, const RunConfig& config) {
  nlohmann::json j;
  j["label"] = config.Label();
  j["team_names"] = r.team_names;
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedSummary& s : r.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"episodes", s.episodes},
                     {"final_team_mean", s.final_team_mean},
                     {"checkpoint", fs::relative(s.checkpoint, r.dir).generic_string()}});
  }
  j["seeds"] = seeds;
  if (config.scenario.name == "covert_comm") {
    // Allies reward for a perfect listener against an adversary that outputs zeros.
    j["random_opponent_reference"] = 0.5;
  }
  return j;
}

}  // namespace

std::string MetricsHeader(const env::Scenario& scenario) {
  std::string h = "seed,episode";
  for (const auto& a : scenario.agents) h += ",return_" + a.name;
  for (const auto& t : scenario.team_names) h += ",team_" + t;
  for (const auto& a : scenario.agents) h += ",critic_loss_" + a.name;
  for (const auto& a : scenario.agents) h += ",policy_loss_" + a.name;
  return h + "\n";
}

std::string MetricsRow(uint64_t seed, const maddpg::EpisodeStats& s) {
  std::string row = fmt::format("{},{}", seed, s.episode);
  for (double v : s.agent_returns) row += "," + Cell(v);
  for (double v : s.team_returns) row += "," + Cell(v);
  for (double v : s.critic_loss) row += "," + Cell(v);
  for (double v : s.policy_objective) row += "," + Cell(std::isnan(v) ? v : -v);
  return row + "\n";
}

RunResult RunTraining(const RunConfig& config, std::ostream* log) {
  const env::Scenario scenario = env::MakeScenario(config.scenario);
  const fs::path dir = config.out;
  fs::create_directories(dir / "checkpoints");

  nlohmann::json manifest;
  manifest["config"] = RunConfigToJson(config);
  manifest["code_version"] = CodeVersion();
  manifest["status"] = "running";
  manifest["seeds"] = nlohmann::json::array();
  for (uint64_t s : config.seeds) manifest["seeds"].push_back({{"seed", s}, {"status", "pending"}});
  manifest["files"] = nlohmann::json::array();
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");

  std::vector<SeedOutput> outputs(config.seeds.size());
  std::vector<std::string> errors(config.seeds.size());
  std::atomic<size_t> next{0};
  std::mutex log_mu;
  auto worker = [&]() {
    for (size_t k = next++; k < config.seeds.size(); k = next++) {
      try {
        outputs[k] = TrainSeed(config, config.seeds[k], dir, log, log_mu);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int jobs = std::min<int>(config.jobs, static_cast<int>(config.seeds.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunResult result;
  result.dir = dir.string();
  result.team_names = scenario.team_names;
  std::string metrics = MetricsHeader(scenario);
  std::string timings = "seed,episode,seconds\n";
  std::string eval = "seed,episode";
  for (const auto& t : scenario.team_names) eval += ",team_" + t;
  eval += "\n";
  bool failed = false;
  for (size_t k = 0; k < config.seeds.size(); ++k) {
    auto& m = manifest["seeds"][k];
    if (!errors[k].empty()) {
      m["status"] = "failed";
      m["error"] = errors[k];
      failed = true;
      continue;
    }
    metrics += outputs[k].metrics;
    timings += outputs[k].timings;
    eval += outputs[k].eval;
    m["status"] = "done";
    m["episodes"] = outputs[k].summary.episodes;
    m["wall_seconds"] = outputs[k].summary.wall_seconds;
    m["checkpoint"] = outputs[k].summary.checkpoint;
    result.seeds.push_back(outputs[k].summary);
  }
  WriteFile(dir / "metrics.csv", metrics);
  WriteFile(dir / "timings.csv", timings);
  std::vector<std::string> files = {"manifest.json", "metrics.csv", "timings.csv", "summary.json"};
  if (config.eval_every > 0) {
    WriteFile(dir / "eval.csv", eval);
    files.push_back("eval.csv");
  }
  WriteFile(dir / "summary.json", SummaryJson(result, config).dump(2) + "\n");
  for (const SeedSummary& s : result.seeds) {
    files.push_back(fs::relative(s.checkpoint, dir).string());
  }
  manifest["files"] = files;
  manifest["status"] = failed ? "failed" : "done";
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");
  if (failed) {
    for (size_t k = 0; k < errors.size(); ++k) {
      if (!errors[k].empty()) {
        throw std::runtime_error(
            fmt::format("seed {} failed: {}", config.seeds[k], errors[k]));
      }
    }
  }
  return result;
}

LoadedRun LoadRun(const std::string& checkpoint_path) {
  LoadedRun run;
  run.checkpoint = nn::CheckpointContainer::Load(checkpoint_path);
  if (!run.checkpoint.Has("run_config")) {
    throw std::runtime_error(checkpoint_path + ": not a training checkpoint (no run_config)");
  }
  run.config = ParseRunConfig(nlohmann::json::parse(run.checkpoint.Get("run_config")));
  run.seed = run.config.seeds.at(0);
  run.scenario = env::MakeScenario(run.config.scenario);
  run.trainer = std::make_unique<maddpg::Trainer>(
      run.scenario, ResolveTrainConfig(run.config, run.scenario, run.seed));
  run.trainer->Read(run.checkpoint);
  return run;
}

RunResult ReadSummary(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "summary.json");
  if (!in) throw std::runtime_error("no summary.json in " + dir);
  const nlohmann::json j = nlohmann::json::parse(in);
  RunResult r;
  r.dir = dir;
  r.team_names = j.at("team_names").get<std::vector<std::string>>();
  for (const auto& s : j.at("seeds")) {
    SeedSummary ss;
    ss.seed = s.at("seed").get<uint64_t>();
    ss.episodes = s.at("episodes").get<int>();
    ss.final_team_mean = s.at("final_team_mean").get<std::vector<double>>();
    // Stored relative to the run directory.
    const fs::path ck = s.at("checkpoint").get<std::string>();
    ss.checkpoint = (ck.is_absolute() ? ck : fs::path(dir) / ck).string();
    r.seeds.push_back(ss);
  }
  return r;
}

}  // namespace commcorr::experiment
