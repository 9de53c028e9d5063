#include "pvprof/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

double parse_number(const std::string& field, const char* column) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (*end == ' ') ++end;
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw DataError(std::string("column ") + column + ": cannot parse '" + field + "'");
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

ColumnMapping parse_column_mapping(const std::string& json_text) {
  ColumnMapping m;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& [native, foreign] : j.at("columns").items()) {
      bool known = false;
      for (const char* c : kTelemetryColumns) known = known || native == c;
      if (!known) throw ConfigError("mapping names unknown column '" + native + "'");
      m.columns[native] = foreign.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid column mapping: ") + e.what());
  }
  return m;
}

ColumnMapping load_column_mapping(const std::string& path) {
  try {
    return parse_column_mapping(read_text_file(path));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

IngestResult read_telemetry_csv(std::istream& in, const ColumnMapping& mapping) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("telemetry file is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::array<std::size_t, 5> col{};
  for (std::size_t c = 0; c < 5; ++c) {
    const std::string native = kTelemetryColumns[c];
    const auto it = mapping.columns.find(native);
    const std::string name = it == mapping.columns.end() ? native : it->second;
    const auto pos = std::find(header.begin(), header.end(), name);
    if (pos == header.end()) throw DataError("missing column '" + name + "'");
    col[c] = static_cast<std::size_t>(pos - header.begin());
  }

  IngestResult out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++out.rows;
    try {
      const auto f = split_csv_line(line);
      if (f.size() < header.size())
        throw DataError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
      TelemetryRecord r;
      r.timestamp = parse_instant(trim(f[col[0]]));
      r.g_poa = parse_number(trim(f[col[1]]), "g_poa");
      r.t_module = parse_number(trim(f[col[2]]), "t_module");
      r.v_dc = parse_number(trim(f[col[3]]), "v_dc");
      r.i_dc = parse_number(trim(f[col[4]]), "i_dc");
      if (const auto problem = record_problem(r); !problem.empty()) throw DataError(problem);
      if (!out.records.empty() && r.timestamp <= out.records.back().timestamp)
        throw DataError("timestamp " + format_instant(r.timestamp) + " does not increase");
      out.records.push_back(r);
    } catch (const Error& e) {
      out.diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.diagnostics.size() * 100 >= out.rows && !out.diagnostics.empty())
    throw DataError(std::to_string(out.diagnostics.size()) + " of " + std::to_string(out.rows) +
                    " rows rejected (limit is below 1%); first: " + out.diagnostics.front());
  return out;
}

IngestResult read_telemetry_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open telemetry file '" + path + "'");
  return read_telemetry_csv(in, mapping);
}

void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records) {
  out << "timestamp,g_poa,t_module,v_dc,i_dc\n";
  for (const auto& r : records)
    out << format_instant(r.timestamp) << ',' << format_double(r.g_poa) << ',' << format_double(r.t_module) << ','
        << format_double(r.v_dc) << ',' << format_double(r.i_dc) << '\n';
}

void write_telemetry_csv(const std::string& path, std::span<const TelemetryRecord> records) {
  std::ostringstream s;
  write_telemetry_csv(s, records);
  write_text_file(path, s.str());
}

void write_trajectory_csv(std::ostream& out, std::span<const FitWindowResult> fits) {
  out << "window_start,window_end,i_ph_ref,i_0_ref,r_s,r_sh_ref,n_diode,final_loss,iterations,converged,n_points\n";
  for (const auto& f : fits) {
    out << format_instant(f.window_start) << ',' << format_instant(f.window_end) << ',';
    if (f.ok())
      out << format_double(f.params.i_ph_ref) << ',' << format_double(f.params.i_0_ref) << ','
          << format_double(f.params.r_s) << ',' << format_double(f.params.r_sh_ref) << ','
          << format_double(f.params.n_diode) << ',' << format_double(f.final_loss) << ',';
    else
      out << ",,,,,,";
    out << f.iterations << ',' << (f.converged ? "true" : "false") << ',' << f.n_points << '\n';
  }
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastSeries> forecasts) {
  out << "timestamp,model,p_pred_w,p_meas_w\n";
  for (const auto& fs : forecasts)
    for (std::size_t k = 0; k < fs.timestamps.size(); ++k)
      out << format_instant(fs.timestamps[k]) << ',' << fs.model << ',' << format_double(fs.p_pred[k]) << ','
          << format_double(fs.p_meas[k]) << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace pvprof
