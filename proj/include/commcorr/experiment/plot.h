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

#ifndef COMMCORR_EXPERIMENT_PLOT_H_
#define COMMCORR_EXPERIMENT_PLOT_H_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace commcorr::experiment {

// One numeric column of metrics.csv, split by seed (episode order).
struct SeedSeries {
  std::map<uint64_t, std::vector<double>> by_seed;
};

// Throws naming the column if it is missing.
SeedSeries ReadMetricsColumn(const std::string& metrics_csv_path, const std::string& column);
std::vector<std::string> ReadMetricsHeader(const std::string& metrics_csv_path);

// Trailing windowed mean: out[k] = mean(v[max(0, k-window+1) .. k]).
std::vector<double> Smooth(const std::vector<double>& v, int window);

struct Curve {
  std::string label;
  std::vector<double> mean;
  std::vector<double> sem;  // sample std / sqrt(n seeds); 0 for one seed
  int seeds = 0;
};

// Smooths each seed then aggregates across seeds, truncated to the shortest.
Curve AggregateCurve(const SeedSeries& series, int window, const std::string& label);

// Standalone SVG documents.
std::string RenderCurvesSvg(const std::vector<Curve>& curves, const std::string& title,
                            const std::string& y_label);
std::string RenderTracesSvg(const SeedSeries& series, int window, const std::string& title,
                            const std::string& y_label);
std::string RenderHeatmapsSvg(const std::vector<std::string>& titles,
                              const std::vector<Eigen::MatrixXd>& matrices,
                              const std::vector<std::vector<bool>>& valid);

// cmd_plot: reward_curves.svg (mean +- sem per run directory), one
// traces_<k>.svg per run, and curves.csv with the plotted numbers.
void PlotRuns(const std::vector<std::string>& run_dirs, const std::string& out_dir, int window,
              const std::string& column);

}  // namespace commcorr::experiment

#endif  // COMMCORR_EXPERIMENT_PLOT_H_
