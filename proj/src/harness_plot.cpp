#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "obcsaa/errors.hpp"
#include "obcsaa/harness.hpp"

namespace obcsaa::harness {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 460.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 200.0;
constexpr double kMarginTop = 42.0;
constexpr double kMarginBottom = 52.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

struct Series {
  std::string name;
  // round -> (sum, count) so several seeds average into one curve
  std::map<std::size_t, std::pair<double, std::size_t>> values;
};

std::string strip_seed_suffix(const std::string& run_id) {
  const std::size_t pos = run_id.rfind("_s");
  if (pos == std::string::npos) return run_id;
  if (pos + 2 >= run_id.size()) return run_id;
  for (std::size_t i = pos + 2; i < run_id.size(); ++i) {
    if (run_id[i] < '0' || run_id[i] > '9') return run_id;
  }
  return run_id.substr(0, pos);
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string format_coord(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value,
                                    std::chars_format::fixed, 2);
  return std::string(buffer, result.ptr);
}

std::string format_tick(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value,
                                    std::chars_format::general, 4);
  return std::string(buffer, result.ptr);
}

std::string render_chart(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<Series>& series) {
  double x_min = 1e300, x_max = -1e300;
  double y_min = 1e300, y_max = -1e300;
  for (const Series& s : series) {
    for (const auto& [round, sum_count] : s.values) {
      const double x = static_cast<double>(round);
      const double y = sum_count.first / static_cast<double>(sum_count.second);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  } else {
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
  }

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto x_px = [&](double x) {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto y_px = [&](double y) {
    return kMarginTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_coord(kWidth) + "\" height=\"" + format_coord(kHeight) +
         "\" viewBox=\"0 0 " + format_coord(kWidth) + " " +
         format_coord(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + format_coord(kWidth) +
         "\" height=\"" + format_coord(kHeight) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_coord(kWidth / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         escape_xml(title) + "</text>\n";

  // Axes and grid ticks.
  svg += "<line x1=\"" + format_coord(kMarginLeft) + "\" y1=\"" +
         format_coord(kMarginTop) + "\" x2=\"" + format_coord(kMarginLeft) +
         "\" y2=\"" + format_coord(kMarginTop + plot_h) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_coord(kMarginLeft) + "\" y1=\"" +
         format_coord(kMarginTop + plot_h) + "\" x2=\"" +
         format_coord(kMarginLeft + plot_w) + "\" y2=\"" +
         format_coord(kMarginTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    svg += "<line x1=\"" + format_coord(x_px(fx)) + "\" y1=\"" +
           format_coord(kMarginTop + plot_h) + "\" x2=\"" +
           format_coord(x_px(fx)) + "\" y2=\"" +
           format_coord(kMarginTop + plot_h + 5.0) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_coord(x_px(fx)) + "\" y=\"" +
           format_coord(kMarginTop + plot_h + 20.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           format_tick(fx) + "</text>\n";
    svg += "<line x1=\"" + format_coord(kMarginLeft - 5.0) + "\" y1=\"" +
           format_coord(y_px(fy)) + "\" x2=\"" + format_coord(kMarginLeft) +
           "\" y2=\"" + format_coord(y_px(fy)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_coord(kMarginLeft - 9.0) + "\" y=\"" +
           format_coord(y_px(fy) + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           format_tick(fy) + "</text>\n";
  }
  svg += "<text x=\"" + format_coord(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
         format_coord(kHeight - 14.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">" +
         escape_xml(x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + format_coord(kMarginTop + plot_h / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 " +
         format_coord(kMarginTop + plot_h / 2.0) + ")\">" +
         escape_xml(y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPaletteSize];
    std::string points;
    for (const auto& [round, sum_count] : series[k].values) {
      const double x = static_cast<double>(round);
      const double y = sum_count.first / static_cast<double>(sum_count.second);
      if (!points.empty()) points.push_back(' ');
      points += format_coord(x_px(x)) + "," + format_coord(y_px(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";

    const double ly = kMarginTop + 14.0 + 18.0 * static_cast<double>(k);
    const double lx = kMarginLeft + plot_w + 16.0;
    svg += "<line x1=\"" + format_coord(lx) + "\" y1=\"" + format_coord(ly) +
           "\" x2=\"" + format_coord(lx + 22.0) + "\" y2=\"" +
           format_coord(ly) + "\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + format_coord(lx + 28.0) + "\" y=\"" +
           format_coord(ly + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape_xml(series[k].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    fail(ErrorCode::Io, "failed while writing '" + path + "'");
  }
}

}  // namespace

std::vector<std::string> emit_plots(const MetricsTable& table,
                                    const std::string& out_dir) {
  bool any = false;
  for (const MetricsRow& row : table.rows) any = any || !row.failed;
  if (!any) {
    fail(ErrorCode::Argument, "metrics table holds no completed rounds");
  }
  std::filesystem::create_directories(out_dir);

  std::vector<Series> loss_series;
  std::vector<Series> acc_series;
  const auto slot = [](std::vector<Series>& list,
                       const std::string& name) -> Series& {
    for (Series& s : list) {
      if (s.name == name) return s;
    }
    list.push_back(Series{name, {}});
    return list.back();
  };
  for (const MetricsRow& row : table.rows) {
    if (row.failed) continue;
    const std::string key = strip_seed_suffix(row.run_id);
    auto& loss = slot(loss_series, key).values[row.round];
    loss.first += row.train_loss;
    loss.second += 1;
    auto& acc = slot(acc_series, key).values[row.round];
    acc.first += row.test_acc;
    acc.second += 1;
  }

  const std::string loss_path = out_dir + "/loss.svg";
  const std::string acc_path = out_dir + "/accuracy.svg";
  write_text(loss_path, render_chart("Training loss", "Communication round",
                                     "Training loss", loss_series));
  write_text(acc_path, render_chart("Test accuracy", "Communication round",
                                    "Test accuracy", acc_series));
  return {loss_path, acc_path};
}

}  // namespace obcsaa::harness
