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

#ifndef COMMCORR_EXPERIMENT_ANALYSIS_H_
#define COMMCORR_EXPERIMENT_ANALYSIS_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "commcorr/experiment/runner.h"

namespace commcorr::experiment {

using nn::Matrix;

// Greedy evaluation of a checkpoint under a dropout channel with probability
// drop_p (identity for 0).
struct EvalRow {
  double drop_p = 0.0;
  int episodes = 0;
  std::vector<double> mean;  // per team
  std::vector<double> sem;
};

std::vector<EvalRow> Evaluate(const LoadedRun& run, int episodes,
                              const std::vector<double>& drop_ps);
// drop_p,episodes,mean_<team>,sem_<team>...
void WriteEvalCsv(std::ostream& out, const std::vector<std::string>& team_names,
                  const std::vector<EvalRow>& rows);

// Pearson correlation between the columns of `samples` (rows = samples).
// Columns with zero variance are invalid; entries touching them are masked.
struct CorrelationMatrix {
  Matrix corr;
  std::vector<bool> valid;

  bool Defined(int r, int c) const { return valid[r] && valid[c]; }
};

CorrelationMatrix Pearson(const Matrix& samples);
// Frobenius norm of the difference over entries defined in both matrices.
double FrobeniusDistance(const CorrelationMatrix& a, const CorrelationMatrix& b);
// Matrix CSV; masked entries are written as empty cells.
void WriteCorrelationCsv(std::ostream& out, const CorrelationMatrix& m,
                         const std::vector<std::string>& labels);

// Joint message vectors of the early-training snapshot under four views:
// fresh greedy rollouts of the current policies from the same episode resets,
// the stored messages, and the stored samples after first-step and ordered
// correction.
struct CorrelationReport {
  int samples = 0;
  std::vector<std::string> labels;  // one per message column
  Matrix fresh, uncorrected, fcc, occ;
  CorrelationMatrix c_fresh, c_uncorrected, c_fcc, c_occ;
  std::map<std::string, double> distance_to_fresh;  // uncorrected, fcc, occ
  std::string message_pairs_csv;                    // stored vs ordered correction
};

// `greedy` selects argmax relabelling instead of Gumbel sampling.
CorrelationReport AnalyzeCorrelation(const LoadedRun& run, int max_samples, bool greedy);

// corr_<view>.csv, distances.csv, message_pairs_occ.csv and correlation.svg.
void WriteCorrelationReport(const std::string& dir, const CorrelationReport& report,
                            const LoadedRun& run);

}  // namespace commcorr::experiment

#endif  // COMMCORR_EXPERIMENT_ANALYSIS_H_
