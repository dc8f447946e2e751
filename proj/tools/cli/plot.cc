// Copyright 2026 The trimotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plot.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <sstream>

#include "trimotion/errors.h"

namespace trimotion::cli {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 50.0;

[[gnu::format(printf, 1, 2)]] std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list copy;
  va_copy(copy, args);
  const int n = std::vsnprintf(nullptr, 0, fmt, copy);
  va_end(copy);
  std::string out(static_cast<std::size_t>(std::max(n, 0)), '\0');
  std::vsnprintf(out.data(), out.size() + 1, fmt, args);
  va_end(args);
  return out;
}

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  bool empty() const { return !(x0 <= x1); }
  // Pads degenerate ranges so the mapping below never divides by zero.
  void settle() {
    if (empty()) *this = {0.0, 0.0, 1.0, 1.0};
    if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  }
};

class Svg {
 public:
  Svg() {
    out_ << strf("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                 "viewBox=\"0 0 %g %g\">\n<rect width=\"100%%\" height=\"100%%\" "
                 "fill=\"white\"/>\n",
                 kWidth, kHeight, kWidth, kHeight);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double width, const std::string& extra = "") {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
         << "\" " << extra << " points=\"";
    for (const auto& [x, y] : pts) out_ << strf("%.2f,%.2f ", x, y);
    out_ << "\"/>\n";
  }

  void line(double x0, double y0, double x1, double y1, const std::string& color,
            double width) {
    out_ << strf("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                 "stroke-width=\"%g\"/>\n",
                 x0, y0, x1, y1, color.c_str(), width);
  }

  void circle(double x, double y, double r, const std::string& color) {
    out_ << strf("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%g\" fill=\"%s\"/>\n", x, y, r,
                 color.c_str());
  }

  void rect(double x, double y, double w, double h, const std::string& color) {
    out_ << strf("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                 x, y, w, h, color.c_str());
  }

  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start") {
    std::string esc;
    for (char c : s) {
      switch (c) {
        case '<': esc += "&lt;"; break;
        case '>': esc += "&gt;"; break;
        case '&': esc += "&amp;"; break;
        default: esc += c;
      }
    }
    out_ << strf("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"%d\" "
                 "text-anchor=\"%s\">%s</text>\n",
                 x, y, size, anchor.c_str(), esc.c_str());
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

// Data space to pixels, y pointing up, equal aspect when `square`.
struct Mapping {
  Bounds b;
  double sx = 1.0;
  double sy = 1.0;
  double ox = kMargin;
  double oy = kMargin;

  Mapping(Bounds bounds, bool square) : b(bounds) {
    b.settle();
    const double w = kWidth - 2 * kMargin;
    const double h = kHeight - 2 * kMargin;
    sx = w / (b.x1 - b.x0);
    sy = h / (b.y1 - b.y0);
    if (square) {
      sx = sy = std::min(sx, sy);
      ox = kMargin + (w - sx * (b.x1 - b.x0)) / 2;
      oy = kMargin + (h - sy * (b.y1 - b.y0)) / 2;
    }
  }
  double px(double x) const { return ox + (x - b.x0) * sx; }
  double py(double y) const { return kHeight - oy - (y - b.y0) * sy; }
};

std::string speed_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * t));
  const int b = static_cast<int>(std::lround(255 - 215 * t));
  return strf("rgb(%d,40,%d)", r, b);
}

std::vector<std::pair<double, double>> mapped(const Mapping& m, const std::vector<Vec2>& pts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) out.emplace_back(m.px(p.x), m.py(p.y));
  return out;
}

void axes(Svg& svg, const Mapping& m, const std::string& xlabel, const std::string& ylabel) {
  svg.line(kMargin, kHeight - kMargin, kWidth - kMargin, kHeight - kMargin, "#444", 1);
  svg.line(kMargin, kMargin, kMargin, kHeight - kMargin, "#444", 1);
  svg.text(kMargin, kHeight - kMargin + 16, strf("%.3g", m.b.x0), 10);
  svg.text(kWidth - kMargin, kHeight - kMargin + 16, strf("%.3g", m.b.x1), 10, "end");
  svg.text(kMargin - 4, kHeight - kMargin, strf("%.3g", m.b.y0), 10, "end");
  svg.text(kMargin - 4, kMargin + 10, strf("%.3g", m.b.y1), 10, "end");
  svg.text(kWidth / 2, kHeight - 12, xlabel, 12, "middle");
  svg.text(14, kHeight / 2, ylabel, 12, "start");
}

}  // namespace

ColorMode parse_color_mode(std::string_view s) {
  if (s == "uniform") return ColorMode::kUniform;
  if (s == "speed") return ColorMode::kSpeed;
  throw InvalidInput("unknown color mode '" + std::string(s) + "' (uniform|speed)");
}

std::string render_trajectories(const SceneWindow* window,
                                const std::vector<std::vector<PositionSeq>>& candidates,
                                ColorMode mode, const std::string& title) {
  Bounds bounds;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = 0.0;
  for (const auto& agent : candidates) {
    for (const auto& c : agent) {
      for (std::size_t t = 0; t < c.size(); ++t) {
        bounds.add(c[t].x, c[t].y);
        if (t > 0) {
          const double v = (c[t] - c[t - 1]).norm();
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
      }
    }
  }
  if (window != nullptr) {
    for (std::size_t a = 0; a < window->num_agents(); ++a) {
      for (const Vec2& p : window->observed[a].position.points) bounds.add(p.x, p.y);
      for (const Vec2& p : window->future[a].points) bounds.add(p.x, p.y);
    }
  }
  const Mapping m(bounds, true);
  Svg svg;
  svg.text(kWidth / 2, 24, title, 16, "middle");
  axes(svg, m, "x", "y");

  const double span = vmax > vmin ? vmax - vmin : 1.0;
  for (const auto& agent : candidates) {
    for (const auto& c : agent) {
      if (mode == ColorMode::kUniform) {
        svg.polyline(mapped(m, c.points), "#3b6fd4", 1.0, "stroke-opacity=\"0.5\"");
        continue;
      }
      for (std::size_t t = 1; t < c.size(); ++t) {
        const double v = (c[t] - c[t - 1]).norm();
        svg.line(m.px(c[t - 1].x), m.py(c[t - 1].y), m.px(c[t].x), m.py(c[t].y),
                 speed_color((v - vmin) / span), 1.5);
      }
    }
  }
  if (window != nullptr) {
    for (std::size_t a = 0; a < window->num_agents(); ++a) {
      const auto& obs = window->observed[a].position.points;
      std::vector<Vec2> gt{obs.back()};
      gt.insert(gt.end(), window->future[a].points.begin(), window->future[a].points.end());
      svg.polyline(mapped(m, obs), "black", 2.5);
      svg.polyline(mapped(m, gt), "#1a9641", 2.5, "stroke-dasharray=\"6,4\"");
      svg.circle(m.px(obs.back().x), m.py(obs.back().y), 3.5, "black");
    }
  }
  svg.text(kWidth - kMargin, 44, "observed: black, ground truth: dashed green", 11, "end");
  if (mode == ColorMode::kSpeed) {
    svg.text(kWidth - kMargin, 58, strf("speed %.3g (blue) to %.3g (red)",
                                               std::isfinite(vmin) ? vmin : 0.0, vmax),
             11, "end");
  }
  return svg.finish();
}

std::string render_loss_curves(const std::vector<std::pair<int64_t, LossReport>>& log,
                               const std::string& title) {
  if (log.empty()) throw DataError("loss log has no records");
  struct Series {
    const char* name;
    double LossReport::*field;
    const char* color;
  };
  constexpr std::array<Series, 5> series{{{"total", &LossReport::total, "black"},
                                          {"pos", &LossReport::pos, "#d7191c"},
                                          {"va", &LossReport::va, "#2c7bb6"},
                                          {"cons1", &LossReport::cons1, "#1a9641"},
                                          {"cons2", &LossReport::cons2, "#fdae61"}}};
  Bounds bounds;
  for (const auto& [step, r] : log) {
    for (const Series& s : series) bounds.add(static_cast<double>(step), r.*s.field);
  }
  const Mapping m(bounds, false);
  Svg svg;
  svg.text(kWidth / 2, 24, title, 16, "middle");
  axes(svg, m, "step", "loss");
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(log.size());
    for (const auto& [step, r] : log) {
      pts.emplace_back(m.px(static_cast<double>(step)), m.py(r.*series[i].field));
    }
    svg.polyline(pts, series[i].color, i == 0 ? 2.0 : 1.2);
    svg.text(kWidth - kMargin, 44 + 14.0 * static_cast<double>(i), series[i].name, 11, "end");
    svg.line(kWidth - kMargin - 70, 40 + 14.0 * static_cast<double>(i), kWidth - kMargin - 45,
             40 + 14.0 * static_cast<double>(i), series[i].color, 2);
  }
  return svg.finish();
}

std::string render_eval_bars(const EvalResult& result, const std::string& title) {
  std::vector<std::pair<std::string, SceneMetrics>> rows(result.per_scene.begin(),
                                                         result.per_scene.end());
  rows.emplace_back("all", SceneMetrics{result.ade, result.fde, result.agents});
  double top = 0.0;
  for (const auto& [name, s] : rows) top = std::max({top, s.ade, s.fde});
  if (top <= 0.0) top = 1.0;
  Svg svg;
  svg.text(kWidth / 2, 24, title, 16, "middle");
  svg.line(kMargin, kHeight - kMargin, kWidth - kMargin, kHeight - kMargin, "#444", 1);
  const double slot = (kWidth - 2 * kMargin) / static_cast<double>(rows.size());
  const double h = kHeight - 2 * kMargin - 20;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = kMargin + slot * static_cast<double>(i);
    const double ha = h * rows[i].second.ade / top;
    const double hf = h * rows[i].second.fde / top;
    svg.rect(x + slot * 0.1, kHeight - kMargin - ha, slot * 0.38, ha, "#2c7bb6");
    svg.rect(x + slot * 0.52, kHeight - kMargin - hf, slot * 0.38, hf, "#d7191c");
    svg.text(x + slot / 2, kHeight - kMargin + 16, rows[i].first, 11, "middle");
    svg.text(x + slot * 0.29, kHeight - kMargin - ha - 4,
             strf("%.3f", rows[i].second.ade), 9, "middle");
    svg.text(x + slot * 0.71, kHeight - kMargin - hf - 4,
             strf("%.3f", rows[i].second.fde), 9, "middle");
  }
  svg.text(kWidth - kMargin, 44, strf("ADE (blue) / FDE (red), K=%lld, T'=%lld",
                                      static_cast<long long>(result.k),
                                      static_cast<long long>(result.pred_len)),
           11, "end");
  return svg.finish();
}

}  // namespace trimotion::cli
