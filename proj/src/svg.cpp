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


#include "rrl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rrl {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  std::snprintf(buf, sizeof buf, "%.*f", std::min(digits, 6), v);
  return buf;
}

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

std::string format_lambda(double l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", l);
  return buf;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string render_line_chart(const LineChart& chart) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : chart.series)
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) {
    const double pad = std::max(0.5 * std::abs(lo), 0.5);
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, 5);
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t n = chart.categories.size();
  auto x_at = [&](std::size_t i) {
    return n <= 1 ? kLeft + plot_w / 2 : kLeft + plot_w * static_cast<double>(i) / (n - 1);
  };
  auto y_at = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << xml_escape(chart.title) << "</text>\n";

  // Grid and y ticks.
  for (double v = lo; v <= hi + step * 1e-9; v += step) {
    const double y = y_at(v);
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w)
       << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\">" << tick_label(std::abs(v) < step * 1e-9 ? 0.0 : v, step)
       << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i)
    os << "<text x=\"" << num(x_at(i)) << "\" y=\"" << num(kTop + plot_h + 18)
       << "\" text-anchor=\"middle\">" << xml_escape(chart.categories[i]) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w)
     << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 14)
     << "\" text-anchor=\"middle\">" << xml_escape(chart.x_label) << "</text>\n"
     << "<text transform=\"translate(16 " << num(kTop + plot_h / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(chart.y_label) << "</text>\n";

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const ChartSeries& series = chart.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    // Contiguous finite runs become separate polylines.
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
           << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < std::min(n, series.values.size()); ++i) {
      const double v = series.values[i];
      if (!std::isfinite(v)) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += num(x_at(i)) + "," + num(y_at(v));
    }
    flush();
    for (std::size_t i = 0; i < std::min(n, series.values.size()); ++i)
      if (std::isfinite(series.values[i]))
        os << "<circle cx=\"" << num(x_at(i)) << "\" cy=\"" << num(y_at(series.values[i]))
           << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << num(kWidth - kRight + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(kWidth - kRight + 35) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << num(kWidth - kRight + 40) << "\" y=\"" << num(ly + 4) << "\">"
       << xml_escape(series.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::pair<std::string, LineChart>> sweep_charts(const SweepConfig& cfg,
                                                            const std::vector<MeanRecord>& means) {
  struct Metric {
    const char* key;
    const char* label;
    double MeanRecord::*field;
  };
  std::vector<std::string> categories;
  for (double l : cfg.lambdas) categories.push_back(format_lambda(l));

  auto build = [&](const std::string& title, const std::string& y_label, AttackKind attack,
                   double MeanRecord::*field) {
    LineChart c;
    c.title = title;
    c.x_label = "lambda";
    c.y_label = y_label;
    c.categories = categories;
    for (RegularizerKind k : cfg.kinds) {
      ChartSeries s{to_string(k), {}};
      for (double l : cfg.lambdas) {
        const MeanRecord* m = find_mean(means, k, l, attack);
        s.values.push_back(m ? m->*field : NAN);
      }
      c.series.push_back(std::move(s));
    }
    return c;
  };

  std::vector<std::pair<std::string, LineChart>> out;
  for (const AttackConfig& a : cfg.attacks) {
    const bool bounded = a.kind == AttackKind::fgsm || a.kind == AttackKind::pgd;
    const std::string name = to_string(a.kind);
    std::vector<Metric> metrics;
    if (bounded)
      metrics.push_back({"robust_acc", "robust accuracy", &MeanRecord::robust_acc});
    else {
      metrics.push_back({"mean_min_l2", "mean minimal l2 perturbation", &MeanRecord::mean_min_l2});
      metrics.push_back(
          {"median_min_l2", "median minimal l2 perturbation", &MeanRecord::median_min_l2});
    }
    for (const Metric& m : metrics) {
      std::string title = name + ": " + m.label;
      if (bounded) title += " (eps=" + format_lambda(a.epsilon) + ")";
      out.emplace_back(name + "_" + m.key, build(title, m.label, a.kind, m.field));
    }
  }
  if (!cfg.attacks.empty())
    out.emplace_back("clean_acc", build("clean test accuracy", "accuracy",
                                        cfg.attacks.front().kind, &MeanRecord::clean_acc));
  return out;
}

}  // namespace rrl
