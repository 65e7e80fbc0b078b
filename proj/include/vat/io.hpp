#pragma once

// Experiment plumbing: flat key=value config files with [section] headers,
// deterministic CSV emission (17 significant digits, LF endings), a config
// hash for provenance comments and minimal SVG renderings.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vat {

constexpr const char* kCodeVersion = "1.0.0";

struct Config {
  std::map<std::string, std::string> values;  // "section.key" or bare key
  std::string hash_hex;                       // FNV-1a of the raw file bytes

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' is not a number: " +
                               it->second);
    }
  }
  long long get_int(const std::string& key, long long fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stoll(it->second);
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + key + "' is not an integer: " +
                               it->second);
    }
  }
  std::vector<double> get_list(const std::string& key,
                               const std::string& fallback) const {
    std::string raw = get(key, fallback);
    std::vector<double> out;
    std::string item;
    std::stringstream ss(raw);
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' has a bad list item: " +
                                 item);
      }
    }
    return out;
  }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline Config parse_config_text(const std::string& text) {
  Config cfg;
  cfg.hash_hex = detail::fnv1a_hex(text);
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value, got '" + t + "'");
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    cfg.values[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// One numeric cell at full precision; NaN renders as an empty field.
inline std::string csv_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns,
            const std::string& config_hash, double dt)
      : f_(path, std::ios::binary) {
    if (!f_) throw std::runtime_error("csv: cannot open " + path.string());
    f_ << "# config=" << config_hash << " dt=" << csv_cell(dt)
       << " version=" << kCodeVersion << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      f_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    f_ << "\n";
    ncols_ = columns.size();
  }

  void row(const std::vector<double>& cells) {
    if (cells.size() != ncols_)
      throw std::logic_error("csv: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i)
      f_ << csv_cell(cells[i]) << (i + 1 < cells.size() ? "," : "");
    f_ << "\n";
  }

 private:
  std::ofstream f_;
  std::size_t ncols_;
};

// ---------------------------------------------------------------------------
// SVG (optional plots; acceptance never reads these)
// ---------------------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  bool scatter = false;
};

inline void write_svg(const std::filesystem::path& path,
                      const std::string& title,
                      const std::vector<SvgSeries>& series,
                      bool logx = false, bool logy = false) {
  const double W = 720, H = 480, m = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto tx = [&](double v) { return logx ? std::log10(std::max(v, 1e-300)) : v; };
  auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto px = [&](double v) { return m + (tx(v) - xmin) / (xmax - xmin) * (W - 2 * m); };
  auto py = [&](double v) { return H - m - (ty(v) - ymin) / (ymax - ymin) * (H - 2 * m); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("svg: cannot open " + path.string());
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
    << H << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
    << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>"
    << title << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = palette[k % 6];
    if (s.scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        f << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
          << "' r='3' fill='" << col << "'/>\n";
    } else {
      f << "<polyline fill='none' stroke='" << col << "' points='";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        f << px(s.x[i]) << "," << py(s.y[i]) << " ";
      f << "'/>\n";
    }
    f << "<text x='" << W - m + 4 << "' y='" << m + 16 * k
      << "' font-size='12' fill='" << col << "'>" << s.label << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace vat
