// Static SVG line charts. Each chart embeds its plotted data as CSV inside
// an XML comment so chart content can be diffed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "pvprof/error.hpp"
#include "pvprof/io.hpp"
#include "pvprof/pipeline.hpp"

namespace pvprof {

namespace {

using json = nlohmann::json;

struct Line {
  std::string name;
  std::vector<double> x, y;
};

struct Chart {
  std::string title, x_label, y_label;
  std::vector<Line> lines;
  std::vector<std::string> x_ticks;  // optional categorical labels for integer x
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string render(const Chart& c) {
  constexpr double W = 800, H = 480, L = 70, R = 160, T = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& l : c.lines)
    for (std::size_t k = 0; k < l.x.size(); ++k) {
      if (!std::isfinite(l.y[k])) continue;
      x0 = std::min(x0, l.x[k]);
      x1 = std::max(x1, l.x[k]);
      y0 = std::min(y0, l.y[k]);
      y1 = std::max(y1, l.y[k]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  y0 = std::min(y0, 0.0);
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<!-- data\nseries,x,y\n";
  for (const auto& l : c.lines)
    for (std::size_t k = 0; k < l.x.size(); ++k)
      s << l.name << ',' << format_double(l.x[k]) << ',' << format_double(l.y[k]) << '\n';
  s << "-->\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << escape(c.title) << "</text>\n";
  s << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5, yv = y0 + (y1 - y0) * k / 5;
    std::string xl = fmt(xv);
    if (!c.x_ticks.empty()) {
      const auto idx = static_cast<std::size_t>(std::lround(xv));
      xl = idx < c.x_ticks.size() ? c.x_ticks[idx] : "";
    }
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << escape(c.x_label)
    << "</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape(c.y_label) << "</text>\n</g>\n";

  for (std::size_t li = 0; li < c.lines.size(); ++li) {
    const Line& l = c.lines[li];
    const char* color = kPalette[li % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < l.x.size(); ++k)
      if (std::isfinite(l.y[k])) s << fmt(px(l.x[k]), 6) << ',' << fmt(py(l.y[k]), 6) << ' ';
    s << "\"/>\n";
    const double ly = T + 16 * static_cast<double>(li);
    s << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << escape(l.name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> render_charts(const std::string& report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::exception& e) {
    throw DataError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != kReportSchemaVersion)
    throw DataError("unsupported report schema version");
  std::vector<std::pair<std::string, std::string>> out;

  try {
    Chart daily{"Daily nMAE", "forecast day", "nMAE (fraction of nominal)", {}, {}};
    std::map<std::string, std::size_t> index;
    std::map<std::string, std::size_t> day_index;
    for (const auto& d : j.at("daily")) {
      const std::string day = d.at("day");
      if (!day_index.contains(day)) {
        day_index.emplace(day, daily.x_ticks.size());
        daily.x_ticks.push_back(day);
      }
    }
    for (const auto& m : j.at("models")) {
      index[m.get<std::string>()] = daily.lines.size();
      daily.lines.push_back({m.get<std::string>(), {}, {}});
    }
    for (const auto& d : j.at("daily")) {
      if (d.at("metrics").is_null()) continue;
      Line& l = daily.lines[index.at(d.at("model").get<std::string>())];
      l.x.push_back(static_cast<double>(day_index.at(d.at("day").get<std::string>())));
      l.y.push_back(d.at("metrics").at("nmae").get<double>());
    }
    out.emplace_back("daily_nmae.svg", render(daily));

    Chart hist{"nBE distribution", "nBE (fraction of nominal)", "density", {}, {}};
    constexpr double lo = -0.3, width = 0.01;
    constexpr int bins = 60;
    for (const auto& a : j.at("aggregate")) {
      if (a.at("metrics").is_null()) continue;
      const auto nbe = a.at("metrics").at("nbe_series").get<std::vector<double>>();
      std::vector<double> counts(bins, 0.0);
      for (double e : nbe) counts[static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor((e - lo) / width)), 0, bins - 1))] += 1.0;
      Line l{a.at("model").get<std::string>(), {}, {}};
      for (int b = 0; b < bins; ++b) {
        l.x.push_back(lo + (b + 0.5) * width);
        l.y.push_back(nbe.empty() ? 0.0 : counts[static_cast<std::size_t>(b)] / static_cast<double>(nbe.size()));
      }
      hist.lines.push_back(std::move(l));
    }
    out.emplace_back("nbe_histogram.svg", render(hist));

    for (const auto& s : j.at("studies")) {
      if (s.at("study") != "sweep" || s.at("curves").empty()) continue;
      const std::string feature = s.at("curves").front().at("feature");
      Chart sweep{"Power vs " + feature, feature, "power (W)", {}, {}};
      for (const auto& c : s.at("curves"))
        sweep.lines.push_back({c.at("name"), c.at("x").get<std::vector<double>>(), c.at("y").get<std::vector<double>>()});
      out.emplace_back("sweep_" + feature + ".svg", render(sweep));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("report does not match the expected schema: ") + e.what());
  }
  return out;
}

}  // namespace pvprof
