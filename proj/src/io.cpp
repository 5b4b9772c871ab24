#include "pam/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "pam/error.hpp"

namespace pam::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::comment(std::string_view text) {
  std::string line(text);
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::replace(line.begin(), line.end(), '\r', ' ');
  out_ << "# " << line << "\r\n";
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool at_line_start = true;
  bool skipping = false;
  char c;
  while (in.get(c)) {
    if (at_line_start && rows.empty() && !quoted && c == '#') skipping = true;
    at_line_start = false;
    if (skipping) {
      if (c == '\n') {
        skipping = false;
        at_line_start = true;
      }
      continue;
    }
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      at_line_start = true;
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Io, "unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

void svg_open(std::ostream& out, const std::string& title, const std::string& provenance) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<metadata>" << xml_escape(provenance) << "</metadata>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << xml_escape(title) << "</text>\n";
}

// Blue-white-red ramp over [0, 1].
std::string ramp(double u) {
  u = std::clamp(u, 0.0, 1.0);
  int r, g, b;
  if (u < 0.5) {
    const double v = u / 0.5;
    r = static_cast<int>(40 + 215 * v);
    g = static_cast<int>(70 + 185 * v);
    b = 255;
  } else {
    const double v = (u - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(255 - 200 * v);
    b = static_cast<int>(255 - 215 * v);
  }
  std::ostringstream s;
  s << "rgb(" << r << ',' << g << ',' << b << ')';
  return s.str();
}

void axis_labels(std::ostream& out, double x_lo, double x_hi, double y_lo, double y_hi, const std::string& x_label,
                 const std::string& y_label) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const auto text = [&](double x, double y, const std::string& s, const char* anchor) {
    out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s) << "</text>\n";
  };
  text(kLeft, kHeight - kBottom + 16, format_double(x_lo), "start");
  text(kWidth - kRight, kHeight - kBottom + 16, format_double(x_hi), "end");
  text(kLeft - 6, kHeight - kBottom, format_double(y_lo), "end");
  text(kLeft - 6, kTop + 10, format_double(y_hi), "end");
  text(kLeft + plot_w / 2, kHeight - 12, x_label, "middle");
  text(14, kTop + plot_h / 2, y_label, "middle");
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Configuration, "config line " + std::to_string(number) + " has no '='");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Configuration, "config line " + std::to_string(number) + " has no key");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  return parse_config(in);
}

void svg_heatmap(std::ostream& out, const std::vector<std::vector<double>>& rows, double x_lo, double x_hi,
                 double y_lo, double y_hi, const std::string& title, const std::string& provenance) {
  svg_open(out, title, provenance);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : rows) {
    for (double v : r) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const std::size_t ny = rows.size();
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t nx = rows[j].size();
    const double h = plot_h / static_cast<double>(ny);
    // Row 0 is the earliest time and sits at the bottom.
    const double y = kTop + plot_h - static_cast<double>(j + 1) * h;
    for (std::size_t k = 0; k < nx; ++k) {
      const double w = plot_w / static_cast<double>(nx);
      const double v = rows[j][k];
      const std::string fill = std::isfinite(v) ? ramp((v - lo) / (hi - lo)) : "rgb(200,200,200)";
      out << "<rect x=\"" << fixed(kLeft + static_cast<double>(k) * w) << "\" y=\"" << fixed(y) << "\" width=\""
          << fixed(w + 0.05) << "\" height=\"" << fixed(h + 0.05) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  axis_labels(out, x_lo, x_hi, y_lo, y_hi, "x", "t");
  out << "<text x=\"" << kWidth - kRight << "\" y=\"" << kTop - 6
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">range " << format_double(lo) << " .. "
      << format_double(hi) << "</text>\n";
  out << "</svg>\n";
}

void svg_lines(std::ostream& out, const std::vector<Series>& series, const std::string& title,
               const std::string& x_label, const std::string& y_label, const std::string& provenance) {
  svg_open(out, title, provenance);
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const bool bundle = series.size() > 7;
    out << "<polyline fill=\"none\" stroke=\"" << palette[si % 7] << "\" stroke-width=\"" << (bundle ? 0.6 : 1.5)
        << "\"" << (bundle ? " stroke-opacity=\"0.4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double px = kLeft + (s.x[i] - x_lo) / (x_hi - x_lo) * plot_w;
      const double py = kTop + plot_h - (s.y[i] - y_lo) / (y_hi - y_lo) * plot_h;
      out << fixed(px) << ',' << fixed(py) << ' ';
    }
    out << "\"/>\n";
    if (!bundle && !s.label.empty()) {
      out << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 + 14 * static_cast<double>(si) << "\" fill=\""
          << palette[si % 7] << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label)
          << "</text>\n";
    }
  }
  axis_labels(out, x_lo, x_hi, y_lo, y_hi, x_label, y_label);
  out << "</svg>\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << contents;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace pam::io
