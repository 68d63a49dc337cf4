#include "gob/report.hpp"

#include "gob/eval.hpp"
#include "gob/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace gob {

namespace {

std::string fmt(double v, const char* spec = "%.10g") {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Curve {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_chart(const std::map<std::string, Curve>& curves, const std::string& title,
                      int max_points) {
  const int width = 920, height = 560;
  const int ml = 70, mr = 220, mt = 48, mb = 52;
  const double pw = width - ml - mr, ph = height - mt - mb;

  std::size_t rounds = 0;
  double lo = 0.0, hi = 0.0;
  for (const auto& [name, c] : curves) {
    rounds = std::max(rounds, c.mean.size());
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      lo = std::min(lo, c.mean[i] - c.stderr_[i]);
      hi = std::max(hi, c.mean[i] + c.stderr_[i]);
    }
  }
  if (rounds == 0) throw std::invalid_argument("svg_chart: no data");
  if (hi - lo < 1e-12) hi = lo + 1.0;

  auto x_at = [&](double t) { return ml + pw * (t - 1.0) / std::max<double>(1.0, rounds - 1.0); };
  auto y_at = [&](double v) { return mt + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << ml << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"17\">" << title
      << "</text>\n";

  // axes and ticks
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = 1.0 + (rounds - 1.0) * k / 5.0;
    const double v = lo + (hi - lo) * k / 5.0;
    svg << "<line x1=\"" << x_at(t) << "\" y1=\"" << mt + ph << "\" x2=\"" << x_at(t) << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x_at(t) << "\" y=\"" << mt + ph + 22
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << static_cast<long>(t) << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << y_at(v) << "\" x2=\"" << ml << "\" y2=\""
        << y_at(v) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 9 << "\" y=\"" << y_at(v) + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt(v, "%.4g")
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">round t</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << mt + ph / 2 << ")\">normalized cumulative reward</text>\n";

  int color = 0, legend_y = mt + 10;
  for (const auto& [name, c] : curves) {
    const char* col = kPalette[color % 8];
    const std::size_t n = c.mean.size();
    const std::size_t step = std::max<std::size_t>(1, n / static_cast<std::size_t>(max_points));

    // stderr band
    std::ostringstream band;
    band << "<path fill=\"" << col << "\" fill-opacity=\"0.15\" stroke=\"none\" d=\"M";
    for (std::size_t i = 0; i < n; i += step)
      band << fmt(x_at(static_cast<double>(i + 1)), "%.2f") << ","
           << fmt(y_at(c.mean[i] + c.stderr_[i]), "%.2f") << " ";
    for (std::size_t i = n; i-- > 0;) {
      if (i % step == 0)
        band << fmt(x_at(static_cast<double>(i + 1)), "%.2f") << ","
             << fmt(y_at(c.mean[i] - c.stderr_[i]), "%.2f") << " ";
    }
    band << "Z\"/>";
    svg << band.str() << "\n";

    svg << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < n; i += step)
      svg << fmt(x_at(static_cast<double>(i + 1)), "%.2f") << ","
          << fmt(y_at(c.mean[i]), "%.2f") << " ";
    if ((n - 1) % step != 0)
      svg << fmt(x_at(static_cast<double>(n)), "%.2f") << "," << fmt(y_at(c.mean[n - 1]), "%.2f");
    svg << "\"/>\n";

    svg << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << legend_y << "\" x2=\"" << ml + pw + 44
        << "\" y2=\"" << legend_y << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + pw + 50 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << name << "</text>\n";
    legend_y += 20;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void write_report(const ReportOptions& options) {
  namespace fs = std::filesystem;
  const std::string dir = options.results_dir;
  if (!fs::is_directory(dir)) throw std::runtime_error("report: no such directory: " + dir);
  const std::string summary_path = dir + "/summary.csv";
  if (!fs::exists(summary_path))
    throw std::runtime_error("report: missing " + summary_path + " (run `gob run` first)");
  const std::vector<SummaryRow> summary = read_summary_csv(summary_path);
  if (summary.empty()) throw std::runtime_error("report: empty summary in " + dir);

  // winning alpha per (cell, algo)
  std::map<std::tuple<double, double, std::string, double>, std::vector<double>> finals;
  for (const SummaryRow& r : summary)
    finals[{r.graph_noise, r.payoff_noise, r.algo, r.alpha}].push_back(r.final_cum_norm_reward);
  std::map<std::tuple<double, double, std::string>, std::pair<double, double>> best;  // -> alpha, mean
  for (const auto& [key, v] : finals) {
    const auto& [gn, zn, algo, alpha] = key;
    const double mean = mean_stderr(v).mean;
    auto it = best.find({gn, zn, algo});
    if (it == best.end() || mean > it->second.second) best[{gn, zn, algo}] = {alpha, mean};
  }

  // per-round curves from the per-run CSVs of the winning alpha
  std::map<std::tuple<double, double>, std::map<std::string, Curve>> cells;
  for (const auto& [key, chosen] : best) {
    const auto& [gn, zn, algo] = key;
    std::vector<std::vector<double>> series;
    for (const SummaryRow& r : summary) {
      if (r.algo != algo || r.alpha != chosen.first || r.graph_noise != gn ||
          r.payoff_noise != zn)
        continue;
      std::ostringstream name;
      char gbuf[32], zbuf[32], abuf[32];
      std::snprintf(gbuf, sizeof(gbuf), "%g", gn);
      std::snprintf(zbuf, sizeof(zbuf), "%g", zn);
      std::snprintf(abuf, sizeof(abuf), "%g", r.alpha);
      // mirror the run file naming
      if (!std::isnan(r.alpha_scaled))
        name << "gn" << gbuf << "_zn" << zbuf << "_" << algo << "_a" << abuf << "_seed" << r.seed;
      else
        name << "gn" << gbuf << "_zn" << zbuf << "_" << algo << "_theo_seed" << r.seed;
      std::string path = dir + "/" + name.str() + ".csv";
      if (!fs::exists(path)) {
        // dataset runs carry no noise prefix
        std::ostringstream alt;
        if (!std::isnan(r.alpha_scaled))
          alt << algo << "_a" << abuf << "_seed" << r.seed;
        else
          alt << algo << "_theo_seed" << r.seed;
        path = dir + "/" + alt.str() + ".csv";
        if (!fs::exists(path)) continue;
      }
      std::ifstream in(path);
      series.push_back(normalized_cumreward(RunRecord::read_csv(in)));
    }
    if (series.empty()) continue;
    const std::size_t rounds = series.front().size();
    Curve curve;
    curve.mean.resize(rounds);
    curve.stderr_.resize(rounds);
    for (std::size_t t = 0; t < rounds; ++t) {
      std::vector<double> at;
      at.reserve(series.size());
      for (const auto& s : series)
        if (t < s.size()) at.push_back(s[t]);
      const MeanStderr ms = mean_stderr(at);
      curve.mean[t] = ms.mean;
      curve.stderr_[t] = ms.stderr_;
    }
    cells[{gn, zn}][algo] = std::move(curve);
  }

  // aggregate.csv: one row per (cell, algo, t)
  {
    std::ostringstream out;
    out << "graph_noise,payoff_noise,algo,t,mean_cum_norm_reward,stderr\n";
    for (const auto& [cell, curves] : cells) {
      const auto& [gn, zn] = cell;
      for (const auto& [algo, c] : curves)
        for (std::size_t t = 0; t < c.mean.size(); ++t)
          out << fmt(gn, "%g") << ',' << fmt(zn, "%g") << ',' << algo << ',' << (t + 1) << ','
              << fmt(c.mean[t]) << ',' << fmt(c.stderr_[t]) << "\n";
    }
    write_file_atomic(dir + "/aggregate.csv", out.str());
  }

  // grid.csv: final mean +- stderr per cell and algo (Table-style overview)
  {
    std::ostringstream out;
    out << "graph_noise,payoff_noise,algo,alpha,mean_final_norm_reward,stderr,seeds\n";
    for (const auto& [key, chosen] : best) {
      const auto& [gn, zn, algo] = key;
      const auto& v = finals[{gn, zn, algo, chosen.first}];
      const MeanStderr ms = mean_stderr(v);
      out << fmt(gn, "%g") << ',' << fmt(zn, "%g") << ',' << algo << ',' << fmt(chosen.first, "%g")
          << ',' << fmt(ms.mean) << ',' << fmt(ms.stderr_) << ',' << ms.n << "\n";
    }
    write_file_atomic(dir + "/grid.csv", out.str());
  }

  for (const auto& [cell, curves] : cells) {
    const auto& [gn, zn] = cell;
    std::ostringstream title;
    title << "normalized cumulative reward (graph noise " << fmt(gn, "%g") << ", payoff noise "
          << fmt(zn, "%g") << ")";
    std::ostringstream name;
    name << dir << "/report_gn" << fmt(gn, "%g") << "_zn" << fmt(zn, "%g") << ".svg";
    write_file_atomic(name.str(), svg_chart(curves, title.str(), options.max_points));
  }
}

}  // namespace gob
