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

#include "commcorr/experiment/analysis.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "commcorr/experiment/plot.h"
#include "commcorr/replay/relabel.h"

namespace commcorr::experiment {

namespace fs = std::filesystem;

std::vector<EvalRow> Evaluate(const LoadedRun& run, int episodes,
                              const std::vector<double>& drop_ps) {
  if (episodes <= 0) throw std::invalid_argument("eval: episodes must be positive");
  std::vector<EvalRow> rows;
  const nn::RngStream root = nn::RngStream(run.seed).Fork("evaluate");
  for (double p : drop_ps) {
    env::Scenario scenario = run.scenario;
    scenario.channel = p > 0.0 ? env::ChannelModel::Dropout(p) : env::ChannelModel::Identity();
    const int teams = scenario.num_teams();
    std::vector<double> sum(teams, 0.0), sq(teams, 0.0);
    for (int k = 0; k < episodes; ++k) {
      nn::RngStream reset = root.Fork("reset", k);
      nn::RngStream channel = root.Fork("channel", k);
      nn::RngStream act = root.Fork("act", k);
      const maddpg::RolloutResult r =
          maddpg::Rollout(scenario, run.trainer->maddpg(), false, reset, channel, act);
      for (int t = 0; t < teams; ++t) {
        sum[t] += r.team_returns[t];
        sq[t] += r.team_returns[t] * r.team_returns[t];
      }
    }
    EvalRow row;
    row.drop_p = p;
    row.episodes = episodes;
    for (int t = 0; t < teams; ++t) {
      const double mean = sum[t] / episodes;
      const double var =
          episodes > 1 ? std::max(0.0, (sq[t] - episodes * mean * mean) / (episodes - 1)) : 0.0;
      row.mean.push_back(mean);
      row.sem.push_back(std::sqrt(var / episodes));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteEvalCsv(std::ostream& out, const std::vector<std::string>& team_names,
                  const std::vector<EvalRow>& rows) {
  out << "drop_p,episodes";
  for (const auto& t : team_names) out << ",mean_" << t << ",sem_" << t;
  out << "\n";
  for (const EvalRow& r : rows) {
    out << fmt::format("{},{}", r.drop_p, r.episodes);
    for (size_t t = 0; t < r.mean.size(); ++t) out << fmt::format(",{},{}", r.mean[t], r.sem[t]);
    out << "\n";
  }
}

CorrelationMatrix Pearson(const Matrix& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  CorrelationMatrix m;
  m.corr = Matrix::Zero(d, d);
  m.valid.assign(d, false);
  if (n < 2) return m;
  const Matrix centered = samples.rowwise() - samples.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  for (Eigen::Index c = 0; c < d; ++c) m.valid[c] = cov(c, c) > 1e-12 * n;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (!m.Defined(r, c)) continue;
      m.corr(r, c) = r == c ? 1.0 : cov(r, c) / std::sqrt(cov(r, r) * cov(c, c));
      m.corr(r, c) = std::clamp(m.corr(r, c), -1.0, 1.0);
    }
  }
  return m;
}

double FrobeniusDistance(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (a.corr.rows() != b.corr.rows()) {
    throw std::invalid_argument("correlation matrices differ in size");
  }
  double s = 0.0;
  for (Eigen::Index r = 0; r < a.corr.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.corr.cols(); ++c) {
      if (!a.Defined(r, c) || !b.Defined(r, c)) continue;
      const double diff = a.corr(r, c) - b.corr(r, c);
      s += diff * diff;
    }
  }
  return std::sqrt(s);
}

void WriteCorrelationCsv(std::ostream& out, const CorrelationMatrix& m,
                         const std::vector<std::string>& labels) {
  out << "component";
  for (const auto& l : labels) out << "," << l;
  out << "\n";
  for (Eigen::Index r = 0; r < m.corr.rows(); ++r) {
    out << labels.at(r);
    for (Eigen::Index c = 0; c < m.corr.cols(); ++c) {
      out << ",";
      if (m.Defined(r, c)) out << fmt::format("{}", m.corr(r, c));
    }
    out << "\n";
  }
}

namespace {

Matrix SelectColumns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), cols.size());
  for (size_t k = 0; k < cols.size(); ++k) out.col(k) = m.col(cols[k]);
  return out;
}

}  // namespace

CorrelationReport AnalyzeCorrelation(const LoadedRun& run, int max_samples, bool greedy) {
  if (!run.checkpoint.Has("early")) {
    throw std::runtime_error("checkpoint has no early-training snapshot");
  }
  const comm::CommLayout& layout = run.scenario.layout;
  nn::ByteReader reader(run.checkpoint.Get("early"));
  const replay::ReplayBuffer early = replay::ReplayBuffer::Read(layout, reader);
  const int n = static_cast<int>(std::min<int64_t>(early.size(), max_samples));
  if (n < 2) throw std::runtime_error("early snapshot has fewer than 2 samples");

  CorrelationReport rep;
  rep.samples = n;
  const std::vector<int> cols = replay::MessageColumns(layout);
  for (int i = 0; i < layout.num_agents(); ++i) {
    const auto& al = layout.action(i);
    for (size_t b = 0; b < al.messages.size(); ++b) {
      for (int c = 0; c < al.messages[b].dim; ++c) {
        rep.labels.push_back(fmt::format("{}_m{}_{}", run.scenario.agents[i].name, b, c));
      }
    }
  }

  std::vector<int64_t> idx(n);
  for (int k = 0; k < n; ++k) idx[k] = k;
  const int K = std::max(1, layout.graph().correction_depth());
  const replay::MinibatchWindow window = early.WindowAt(idx, K);
  replay::RelabelOptions options;
  options.explore = !greedy;
  nn::RngStream rng = nn::RngStream(run.seed).Fork("correlation");
  const maddpg::Maddpg& policies = run.trainer->maddpg();
  const replay::Batch original = replay::OriginalBatch(window);
  const replay::Batch fcc =
      replay::FccRelabel(layout, policies, run.scenario.channel, window, options, rng);
  const replay::Batch occ =
      replay::OccRelabel(layout, policies, run.scenario.channel, window, options, rng);

  // Fresh rollouts replay the same episode resets with current policies.
  Matrix fresh(n, layout.joint_action_dim());
  std::map<int64_t, maddpg::RolloutResult> episodes;
  for (int k = 0; k < n; ++k) {
    const replay::ExperienceRecord rec = early.Get(k);
    auto it = episodes.find(rec.episode);
    if (it == episodes.end()) {
      nn::RngStream reset = run.trainer->ResetStream(rec.episode);
      nn::RngStream channel = rng.Fork("fresh_channel", rec.episode);
      nn::RngStream act = rng.Fork("fresh_act", rec.episode);
      it = episodes
               .emplace(rec.episode, maddpg::Rollout(run.scenario, policies, !greedy, reset,
                                                     channel, act))
               .first;
    }
    fresh.row(k) = it->second.joint_actions.row(rec.step);
  }

  rep.fresh = SelectColumns(fresh, cols);
  rep.uncorrected = SelectColumns(original.action, cols);
  rep.fcc = SelectColumns(fcc.action, cols);
  rep.occ = SelectColumns(occ.action, cols);
  rep.c_fresh = Pearson(rep.fresh);
  rep.c_uncorrected = Pearson(rep.uncorrected);
  rep.c_fcc = Pearson(rep.fcc);
  rep.c_occ = Pearson(rep.occ);
  rep.distance_to_fresh["uncorrected"] = FrobeniusDistance(rep.c_uncorrected, rep.c_fresh);
  rep.distance_to_fresh["fcc"] = FrobeniusDistance(rep.c_fcc, rep.c_fresh);
  rep.distance_to_fresh["occ"] = FrobeniusDistance(rep.c_occ, rep.c_fresh);

  std::ostringstream pairs;
  replay::WriteMessagePairsCsv(pairs, layout, original, occ);
  rep.message_pairs_csv = pairs.str();
  return rep;
}

void WriteCorrelationReport(const std::string& dir, const CorrelationReport& report,
                            const LoadedRun& run) {
  (void)run;
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, const CorrelationMatrix*>> views = {
      {"fresh", &report.c_fresh},
      {"uncorrected", &report.c_uncorrected},
      {"fcc", &report.c_fcc},
      {"occ", &report.c_occ}};
  std::vector<std::string> titles;
  std::vector<Eigen::MatrixXd> mats;
  std::vector<std::vector<bool>> valid;
  for (const auto& [name, m] : views) {
    std::ofstream out(fs::path(dir) / ("corr_" + name + ".csv"));
    WriteCorrelationCsv(out, *m, report.labels);
    titles.push_back(name);
    mats.push_back(m->corr);
    valid.push_back(m->valid);
  }
  {
    std::ofstream out(fs::path(dir) / "distances.csv");
    out << "view,frobenius_to_fresh,samples\n";
    for (const auto& [name, d] : report.distance_to_fresh) {
      out << fmt::format("{},{},{}\n", name, d, report.samples);
    }
  }
  {
    std::ofstream out(fs::path(dir) / "message_pairs_occ.csv");
    out << report.message_pairs_csv;
  }
  std::ofstream svg(fs::path(dir) / "correlation.svg");
  svg << RenderHeatmapsSvg(titles, mats, valid);
}

}  // namespace commcorr::experiment
