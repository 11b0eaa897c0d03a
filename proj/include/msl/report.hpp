#ifndef MSL_REPORT_HPP
#define MSL_REPORT_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msl/evolution.hpp"
#include "msl/stats.hpp"

namespace msl {

/// Fixed-point with 6 decimals; negative zero prints as zero.
inline std::string fixed6(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

/// Per-generation run trace.
inline void write_run_csv(std::ostream& os, const RunResult& r) {
  os << "generation,psi";
  for (const auto& l : r.labels) os << ",ratio_" << l;
  for (const auto& l : r.labels) os << ",age_" << l;
  os << ",ec,conf,unc,odpu,cost\n";
  auto cost = r.cost_ledger();
  for (std::size_t t = 0; t < r.psi.size(); ++t) {
    os << (t + 1) << ',' << fixed6(r.psi[t]);
    for (double v : r.ratio[t]) os << ',' << fixed6(v);
    for (double v : r.mean_age[t]) os << ',' << fixed6(v);
    os << ',' << fixed6(r.ec[t]) << ',' << fixed6(r.conf[t]) << ',' << fixed6(r.unc[t]) << ','
       << fixed6(r.odpu[t]) << ',' << fixed6(cost[t]) << '\n';
  }
}

/// Per-step mean and standard deviation of psi across replicates.
struct PsiBand {
  std::vector<double> mean, sd;
};

inline PsiBand psi_band(const std::vector<RunResult>& runs) {
  PsiBand b;
  if (runs.empty()) return b;
  std::size_t T = runs.front().psi.size();
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> col;
    for (const auto& r : runs) col.push_back(r.psi.at(t));
    b.mean.push_back(stats::mean(col));
    b.sd.push_back(col.size() > 1 ? stats::stddev(col) : 0.0);
  }
  return b;
}

inline void write_band_csv(std::ostream& os, const std::vector<std::string>& names,
                           const std::vector<PsiBand>& bands) {
  os << "generation";
  for (const auto& n : names) os << ",psi_mean_" << n << ",psi_std_" << n;
  os << '\n';
  std::size_t T = bands.empty() ? 0 : bands.front().mean.size();
  for (std::size_t t = 0; t < T; ++t) {
    os << (t + 1);
    for (const auto& b : bands) os << ',' << fixed6(b.mean[t]) << ',' << fixed6(b.sd[t]);
    os << '\n';
  }
}

inline nlohmann::json mean_std(const std::vector<double>& xs) {
  return {{"mean", stats::mean(xs)}, {"std", xs.size() > 1 ? stats::stddev(xs) : 0.0}, {"n", xs.size()}};
}

/// Replicate summary: cumulative psi, exploration cost and optional windows, each as mean and std.
inline nlohmann::json aggregate_json(const std::vector<RunResult>& runs,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& windows = {}) {
  std::vector<double> cum, cost;
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : runs) {
    cum.push_back(r.cumulative_psi());
    cost.push_back(r.exploration_cost());
    seeds.push_back(r.seed);
  }
  nlohmann::json j = {{"replicates", runs.size()},
                      {"seeds", seeds},
                      {"cumulative_psi", mean_std(cum)},
                      {"exploration_cost", mean_std(cost)}};
  for (auto [from, to] : windows) {
    std::vector<double> w;
    for (const auto& r : runs) w.push_back(r.window_mean(from, to));
    j["window_psi"]["[" + std::to_string(from) + "," + std::to_string(to) + "]"] = mean_std(w);
  }
  return j;
}

/// Ranks of one suite; ranks, Friedman and Nemenyi fields plus linkage sets by name.
inline nlohmann::json rank_json(const std::vector<std::string>& names, const stats::RankReport& rep,
                                const std::string& score) {
  nlohmann::json order = nlohmann::json::array(), cliques = nlohmann::json::array();
  for (auto a : rep.order) order.push_back({{"name", names[a]}, {"avg_rank", rep.avg_rank[a]}});
  for (const auto& c : rep.cliques) {
    nlohmann::json g = nlohmann::json::array();
    for (auto a : c) g.push_back(names[a]);
    cliques.push_back(g);
  }
  return {{"score", score},
          {"order", order},
          {"friedman_chi2", rep.friedman_chi2},
          {"friedman_p", rep.friedman_p},
          {"cd", rep.cd},
          {"linkage", cliques}};
}

// ---- SVG ----

struct SvgMeta {
  std::string title;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
};

namespace detail {

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else if (c == '"') o += "&quot;";
    else o += c;
  }
  return o;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline void header(std::ostream& os, int w, int h, const SvgMeta& meta) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n<metadata>";
  os << "<msl:run xmlns:msl=\"urn:msl\" config-hash=\"" << meta.config_hash << "\" seeds=\"";
  for (std::size_t i = 0; i < meta.seeds.size(); ++i) os << (i ? " " : "") << meta.seeds[i];
  os << "\"/></metadata>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << esc(meta.title) << "</text>\n";
}

inline const char* palette(std::size_t i) {
  static const char* c[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
                            "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939", "#843c39"};
  return c[i % 13];
}

}  // namespace detail

struct Series {
  std::string label;
  std::vector<double> y;  // y[i] plotted at x = i + 1
};

/// Line plot; change points are drawn as dashed vertical markers.
inline void svg_line_plot(std::ostream& os, const std::vector<Series>& series, const SvgMeta& meta,
                          const std::vector<std::size_t>& change_points = {}, const std::string& ylabel = "psi") {
  const int W = 720, H = 420, L = 60, R = 160, Tm = 35, B = 45;
  double ymin = 0.0, ymax = 1.0;
  std::size_t n = 1;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      if (first) ymin = ymax = v, first = false;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
      n = std::max(n, s.y.size());
    }
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto X = [&](double x) { return L + (x - 1.0) / std::max<double>(1.0, static_cast<double>(n) - 1.0) * (W - L - R); };
  auto Y = [&](double y) { return Tm + (ymax - y) / (ymax - ymin) * (H - Tm - B); };
  detail::header(os, W, H, meta);
  os << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << (W - L - R)
     << "\" height=\"" << (H - Tm - B) << "\"/></g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    double v = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << L - 5 << "\" y=\"" << detail::num(Y(v) + 3) << "\" text-anchor=\"end\">" << detail::num(v)
       << "</text>\n";
    double xv = 1.0 + (static_cast<double>(n) - 1.0) * i / 4.0;
    os << "<text x=\"" << detail::num(X(xv)) << "\" y=\"" << H - B + 15 << "\" text-anchor=\"middle\">"
       << static_cast<long long>(xv + 0.5) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">generation</text>\n";
  os << "<text x=\"15\" y=\"" << (Tm + H - B) / 2 << "\" transform=\"rotate(-90 15 " << (Tm + H - B) / 2
     << ")\" text-anchor=\"middle\">" << detail::esc(ylabel) << "</text>\n</g>\n";
  for (auto cp : change_points) {
    double x = X(static_cast<double>(cp) + 1.0);
    os << "<line class=\"change-point\" x1=\"" << detail::num(x) << "\" y1=\"" << Tm << "\" x2=\"" << detail::num(x)
       << "\" y2=\"" << H - B << "\" stroke=\"#ff7f0e\" stroke-dasharray=\"4 3\"/>\n";
    os << "<path class=\"change-marker\" d=\"M" << detail::num(x - 4) << ' ' << Tm - 8 << " L" << detail::num(x + 4)
       << ' ' << Tm - 8 << " L" << detail::num(x) << ' ' << Tm << " Z\" fill=\"#ff7f0e\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series[k].y.size(); ++i)
      os << (i ? " " : "") << detail::num(X(static_cast<double>(i) + 1.0)) << ',' << detail::num(Y(series[k].y[i]));
    os << "\"/>\n";
    int ly = Tm + 12 + static_cast<int>(k) * 16;
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"2\"/><text x=\"" << W - R + 35 << "\" y=\""
       << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::esc(series[k].label) << "</text>\n";
  }
  os << "</svg>\n";
}

/// Scatter plot of (x, y) points.
inline void svg_scatter(std::ostream& os, const std::vector<double>& x, const std::vector<double>& y,
                        const SvgMeta& meta, const std::string& xlabel, const std::string& ylabel) {
  const int W = 520, H = 420, L = 60, R = 20, Tm = 35, B = 45;
  auto [x0, x1] = std::minmax_element(x.begin(), x.end());
  auto [y0, y1] = std::minmax_element(y.begin(), y.end());
  double xmin = x.empty() ? 0 : *x0, xmax = x.empty() ? 1 : *x1, ymin = y.empty() ? 0 : *y0, ymax = y.empty() ? 1 : *y1;
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;
  auto X = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto Y = [&](double v) { return Tm + (ymax - v) / (ymax - ymin) * (H - Tm - B); };
  detail::header(os, W, H, meta);
  os << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - Tm - B)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    os << "<circle cx=\"" << detail::num(X(x[i])) << "\" cy=\"" << detail::num(Y(y[i])) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"10\">";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 15 << "\">" << detail::num(xmin) << "</text><text x=\"" << W - R
     << "\" y=\"" << H - B + 15 << "\" text-anchor=\"end\">" << detail::num(xmax) << "</text>";
  os << "<text x=\"" << L - 5 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << detail::num(ymin) << "</text><text x=\""
     << L - 5 << "\" y=\"" << Tm + 8 << "\" text-anchor=\"end\">" << detail::num(ymax) << "</text>";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << detail::esc(xlabel)
     << "</text><text x=\"15\" y=\"" << (Tm + H - B) / 2 << "\" transform=\"rotate(-90 15 " << (Tm + H - B) / 2
     << ")\" text-anchor=\"middle\">" << detail::esc(ylabel) << "</text></g>\n</svg>\n";
}

/// Critical-difference diagram: rank axis, names in rank order, bold bars joining linked groups.
inline void svg_cd_diagram(std::ostream& os, const std::vector<std::string>& names, const stats::RankReport& rep,
                           const SvgMeta& meta) {
  const std::size_t k = names.size();
  const int W = 760, L = 170, R = 170, axis_y = 70;
  const int half = static_cast<int>((k + 1) / 2);
  const int H = axis_y + 40 + half * 20 + static_cast<int>(rep.cliques.size()) * 8 + 30;
  auto X = [&](double rank) { return L + (rank - 1.0) / std::max<double>(1.0, static_cast<double>(k) - 1.0) * (W - L - R); };
  detail::header(os, W, H, meta);
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<line x1=\"" << L << "\" y1=\"" << axis_y << "\" x2=\"" << W - R << "\" y2=\"" << axis_y
     << "\" stroke=\"black\"/>\n";
  for (std::size_t r = 1; r <= k; ++r) {
    double x = X(static_cast<double>(r));
    os << "<line x1=\"" << detail::num(x) << "\" y1=\"" << axis_y - 5 << "\" x2=\"" << detail::num(x) << "\" y2=\""
       << axis_y << "\" stroke=\"black\"/><text x=\"" << detail::num(x) << "\" y=\"" << axis_y - 8
       << "\" text-anchor=\"middle\">" << r << "</text>\n";
  }
  // CD scale bar
  os << "<line class=\"cd\" x1=\"" << L << "\" y1=\"40\" x2=\"" << detail::num(X(1.0 + rep.cd)) << "\" y2=\"40\" stroke=\"black\" stroke-width=\"2\"/>"
     << "<text x=\"" << L << "\" y=\"35\">CD = " << detail::num(rep.cd) << "</text>\n";
  for (std::size_t i = 0; i < rep.order.size(); ++i) {
    std::size_t a = rep.order[i];
    double x = X(rep.avg_rank[a]);
    bool left = static_cast<int>(i) < half;
    int row = left ? static_cast<int>(i) : static_cast<int>(k - 1 - i);
    int y = axis_y + 30 + row * 20 + static_cast<int>(rep.cliques.size()) * 8;
    int tx = left ? L - 10 : W - R + 10;
    os << "<polyline fill=\"none\" stroke=\"#555\" points=\"" << detail::num(x) << ',' << axis_y << ' ' << detail::num(x)
       << ',' << y << ' ' << tx << ',' << y << "\"/>";
    os << "<text class=\"alg\" x=\"" << (left ? tx - 3 : tx + 3) << "\" y=\"" << y + 4 << "\" text-anchor=\""
       << (left ? "end" : "start") << "\">" << detail::esc(names[a]) << " (" << detail::num(rep.avg_rank[a])
       << ")</text>\n";
  }
  for (std::size_t c = 0; c < rep.cliques.size(); ++c) {
    double lo = 1e9, hi = -1e9;
    for (auto a : rep.cliques[c]) {
      lo = std::min(lo, rep.avg_rank[a]);
      hi = std::max(hi, rep.avg_rank[a]);
    }
    int y = axis_y + 14 + static_cast<int>(c) * 8;
    os << "<line class=\"linkage\" x1=\"" << detail::num(X(lo) - 3) << "\" y1=\"" << y << "\" x2=\""
       << detail::num(X(hi) + 3) << "\" y2=\"" << y << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

/// Writes `body` to `path`; I/O failures raise std::runtime_error.
template <class Fn>
void write_file(const std::string& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  body(out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace msl

#endif
