/*
 * Copyright 2026 The rrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef RRL_SVG_HPP
#define RRL_SVG_HPP

// Minimal deterministic SVG line charts: categorical x axis, one polyline per
// series, NaN values leave gaps.

#include <string>
#include <utility>
#include <vector>

#include "rrl/sweep.hpp"

namespace rrl {

struct ChartSeries {
  std::string name;
  std::vector<double> values;  ///< one per category; NaN = missing
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<ChartSeries> series;
};

std::string render_line_chart(const LineChart& chart);

/// One chart per (attack, metric) with lambda on the x axis and one series per
/// regularizer kind, plus a clean-accuracy chart. Pairs are (file stem, chart).
std::vector<std::pair<std::string, LineChart>> sweep_charts(const SweepConfig& cfg,
                                                            const std::vector<MeanRecord>& means);

std::string xml_escape(const std::string& text);

}  // namespace rrl

#endif  // RRL_SVG_HPP
