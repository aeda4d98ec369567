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

#include "commcorr/experiment/plot.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::experiment {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

// Axes frame mapping data coordinates into a fixed plot box.
struct Frame {
  double x0 = 70, y0 = 40, w = 620, h = 360;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double X(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double Y(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void FitRange(double& lo, double& hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string Axes(const Frame& f, const std::string& title, const std::string& y_label) {
  std::string s;
  s += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
      f.x0, f.y0, f.w, f.h);
  for (int k = 0; k <= 4; ++k) {
    const double yv = f.ymin + (f.ymax - f.ymin) * k / 4.0;
    const double xv = f.xmin + (f.xmax - f.xmin) * k / 4.0;
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n",
                     f.x0 - 6, f.Y(yv) + 4, yv);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.0f}</text>\n",
                     f.X(xv), f.y0 + f.h + 16, xv);
  }
  s += fmt::format("<text x=\"{}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                   f.x0 + f.w / 2, Escape(title));
  s += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">episode</text>\n",
                   f.x0 + f.w / 2, f.y0 + f.h + 34);
  s += fmt::format(
      "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
      f.y0 + f.h / 2, f.y0 + f.h / 2, Escape(y_label));
  return s;
}

std::string Polyline(const Frame& f, const std::vector<double>& y, const std::string& color,
                     double width, double opacity) {
  // Thin long series so files stay small.
  const size_t stride = std::max<size_t>(1, y.size() / 2000);
  std::string pts;
  for (size_t k = 0; k < y.size(); k += stride) {
    pts += fmt::format("{:.1f},{:.1f} ", f.X(static_cast<double>(k)), f.Y(y[k]));
  }
  return fmt::format(
      "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-opacity=\"{}\" points=\"{}\"/>\n",
      color, width, opacity, pts);
}

}  // namespace

std::vector<std::string> ReadMetricsHeader(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + " is empty");
  return SplitCsv(line);
}

SeedSeries ReadMetricsColumn(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  const std::vector<std::string> header = SplitCsv(line);
  auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error(fmt::format("{}: missing column '{}'", path, name));
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t seed_col = find("seed");
  const size_t col = find(column);
  SeedSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(fmt::format("{}: row with {} cells, header has {}", path,
                                           cells.size(), header.size()));
    }
    const double v = cells[col].empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : std::stod(cells[col]);
    s.by_seed[std::stoull(cells[seed_col])].push_back(v);
  }
  return s;
}

std::vector<double> Smooth(const std::vector<double>& v, int window) {
  if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  std::vector<double> out(v.size());
  double run = 0.0;
  for (size_t k = 0; k < v.size(); ++k) {
    run += v[k];
    if (k >= static_cast<size_t>(window)) run -= v[k - window];
    const size_t count = std::min<size_t>(k + 1, window);
    out[k] = window == 1 ? v[k] : run / static_cast<double>(count);
  }
  return out;
}

Curve AggregateCurve(const SeedSeries& series, int window, const std::string& label) {
  Curve c;
  c.label = label;
  c.seeds = static_cast<int>(series.by_seed.size());
  if (c.seeds == 0) return c;
  size_t len = std::numeric_limits<size_t>::max();
  std::vector<std::vector<double>> smoothed;
  for (const auto& [seed, v] : series.by_seed) {
    smoothed.push_back(Smooth(v, window));
    len = std::min(len, v.size());
  }
  c.mean.assign(len, 0.0);
  c.sem.assign(len, 0.0);
  const double n = c.seeds;
  for (size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (const auto& s : smoothed) sum += s[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : smoothed) ss += (s[k] - mean) * (s[k] - mean);
    c.mean[k] = mean;
    c.sem[k] = c.seeds > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  }
  return c;
}

std::string RenderCurvesSvg(const std::vector<Curve>& curves, const std::string& title,
                            const std::string& y_label) {
  Frame f;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  size_t len = 1;
  for (const Curve& c : curves) {
    for (size_t k = 0; k < c.mean.size(); ++k) {
      lo = std::min(lo, c.mean[k] - c.sem[k]);
      hi = std::max(hi, c.mean[k] + c.sem[k]);
    }
    len = std::max(len, c.mean.size());
  }
  FitRange(lo, hi);
  f.xmax = static_cast<double>(len - 1 > 0 ? len - 1 : 1);
  f.ymin = lo;
  f.ymax = hi;
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"460\" "
      "font-family=\"sans-serif\">\n";
  s += Axes(f, title, y_label);
  for (size_t i = 0; i < curves.size(); ++i) {
    const Curve& c = curves[i];
    const std::string color = kPalette[i % 8];
    if (c.mean.empty()) continue;
    const size_t stride = std::max<size_t>(1, c.mean.size() / 2000);
    std::string band;
    for (size_t k = 0; k < c.mean.size(); k += stride) {
      band += fmt::format("{:.1f},{:.1f} ", f.X(k), f.Y(c.mean[k] + c.sem[k]));
    }
    for (size_t k = (c.mean.size() - 1) / stride * stride + 1; k-- > 0;) {
      if (k % stride != 0) continue;
      band += fmt::format("{:.1f},{:.1f} ", f.X(k), f.Y(c.mean[k] - c.sem[k]));
    }
    s += fmt::format("<polygon fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\" points=\"{}\"/>\n",
                     color, band);
    s += Polyline(f, c.mean, color, 1.5, 1.0);
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{} (n={})</text>\n",
                     f.x0 + 10, f.y0 + 16 + 15 * i, color, Escape(c.label), c.seeds);
  }
  return s + "</svg>\n";
}

std::string RenderTracesSvg(const SeedSeries& series, int window, const std::string& title,
                            const std::string& y_label) {
  Frame f;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  size_t len = 1;
  std::vector<std::vector<double>> traces;
  for (const auto& [seed, v] : series.by_seed) {
    traces.push_back(Smooth(v, window));
    for (double x : traces.back()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    len = std::max(len, v.size());
  }
  FitRange(lo, hi);
  f.xmax = static_cast<double>(len > 1 ? len - 1 : 1);
  f.ymin = lo;
  f.ymax = hi;
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"460\" "
      "font-family=\"sans-serif\">\n";
  s += Axes(f, title, y_label);
  for (size_t i = 0; i < traces.size(); ++i) s += Polyline(f, traces[i], kPalette[i % 8], 1.0, 0.7);
  return s + "</svg>\n";
}

std::string RenderHeatmapsSvg(const std::vector<std::string>& titles,
                              const std::vector<Eigen::MatrixXd>& matrices,
                              const std::vector<std::vector<bool>>& valid) {
  const double cell_px = 260.0;
  const double gap = 30.0;
  const double width = titles.size() * (cell_px + gap) + gap;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\">\n",
      width, cell_px + 70);
  for (size_t m = 0; m < matrices.size(); ++m) {
    const Eigen::MatrixXd& c = matrices[m];
    const double x0 = gap + m * (cell_px + gap);
    const double y0 = 40;
    const double px = c.rows() > 0 ? cell_px / c.rows() : cell_px;
    s += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                     x0 + cell_px / 2, Escape(titles[m]));
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index k = 0; k < c.cols(); ++k) {
        std::string fill = "#bbbbbb";
        if (valid[m][r] && valid[m][k]) {
          // Diverging blue (-1) / white (0) / red (+1).
          const double v = std::clamp(c(r, k), -1.0, 1.0);
          const int hi = 255;
          const int lo = static_cast<int>(255 * (1.0 - std::abs(v)));
          fill = v >= 0 ? fmt::format("rgb({},{},{})", hi, lo, lo)
                        : fmt::format("rgb({},{},{})", lo, lo, hi);
        }
        s += fmt::format(
            "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
            x0 + k * px, y0 + r * px, px, px, fill);
      }
    }
  }
  s += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-size=\"11\">red +1, blue -1, grey: zero-variance component "
      "(masked)</text>\n",
      gap, cell_px + 60);
  return s + "</svg>\n";
}

void PlotRuns(const std::vector<std::string>& run_dirs, const std::string& out_dir, int window,
              const std::string& column) {
  if (run_dirs.empty()) throw std::invalid_argument("plot: no run directories");
  fs::create_directories(out_dir);
  std::vector<Curve> curves;
  std::string csv = "run,label,episode,mean,sem,seeds\n";
  for (size_t i = 0; i < run_dirs.size(); ++i) {
    const fs::path metrics = fs::path(run_dirs[i]) / "metrics.csv";
    std::string col = column;
    if (col.empty()) {
      for (const auto& h : ReadMetricsHeader(metrics.string())) {
        if (h.rfind("team_", 0) == 0) {
          col = h;
          break;
        }
      }
      if (col.empty()) throw std::runtime_error(metrics.string() + ": no team_ column");
    }
    const SeedSeries series = ReadMetricsColumn(metrics.string(), col);
    std::string label = fs::path(run_dirs[i]).filename().string();
    const fs::path manifest = fs::path(run_dirs[i]) / "summary.json";
    if (fs::exists(manifest)) {
      std::ifstream in(manifest);
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto at = text.find("\"label\": \"");
      if (at != std::string::npos) {
        const auto start = at + 10;
        label = text.substr(start, text.find('"', start) - start);
      }
    }
    curves.push_back(AggregateCurve(series, window, label));
    const Curve& c = curves.back();
    for (size_t k = 0; k < c.mean.size(); ++k) {
      csv += fmt::format("{},{},{},{},{},{}\n", i, label, k, c.mean[k], c.sem[k], c.seeds);
    }
    std::ofstream traces(fs::path(out_dir) / fmt::format("traces_{}.svg", i));
    traces << RenderTracesSvg(series, window,
                              fmt::format("{}: individual seeds (window {})", label, window), col);
  }
  std::ofstream svg(fs::path(out_dir) / "reward_curves.svg");
  svg << RenderCurvesSvg(curves,
                         fmt::format("mean +- standard error (smoothing window {})", window),
                         column.empty() ? "team return" : column);
  std::ofstream out(fs::path(out_dir) / "curves.csv");
  out << csv;
}

}  // namespace commcorr::experiment
