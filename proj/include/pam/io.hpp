#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pam::io {

/// Shortest text that reads back to the same double (17 significant digits).
[[nodiscard]] std::string format_double(double v);
/// RFC-4180 field: quoted when it holds a comma, quote, CR or LF; quotes doubled.
[[nodiscard]] std::string csv_field(std::string_view s);

/// CSV writer. Provenance lines go first, prefixed with '#'; rows end in CRLF as RFC 4180 asks.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// Parses RFC-4180 text back into rows; '#' lines before the header are skipped.
[[nodiscard]] std::vector<std::vector<std::string>> read_csv(std::istream& in);

/// key=value lines; blank lines and lines starting with '#' are ignored; later keys win.
[[nodiscard]] std::map<std::string, std::string> parse_config(std::istream& in);
[[nodiscard]] std::map<std::string, std::string> parse_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Each SVG carries `provenance` verbatim inside a <metadata> element.
void svg_heatmap(std::ostream& out, const std::vector<std::vector<double>>& rows, double x_lo, double x_hi,
                 double y_lo, double y_hi, const std::string& title, const std::string& provenance);
void svg_lines(std::ostream& out, const std::vector<Series>& series, const std::string& title,
               const std::string& x_label, const std::string& y_label, const std::string& provenance);

/// Writes text to a file; Error(Io) when the file cannot be opened.
void write_file(const std::string& path, const std::string& contents);

}  // namespace pam::io
