#include "market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace ginn {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

double parse_double_field(std::string_view text, const std::string& path, size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" +
                    std::string(text) + "'");
  }
  return value;
}

Date parse_date_field(std::string_view text, DateFormat format, const std::string& path,
                      size_t line_no) {
  try {
    return Date::parse(text, format);
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

// Reads all non-empty lines; the first is the header.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError(path + ": empty file");
  return lines;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << body;
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

PriceSeries load_price_csv(const std::string& path, DateFormat format) {
  const auto lines = read_lines(path);
  const auto header = split_fields(lines[0]);
  size_t date_col = header.size(), close_col = header.size();
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "date") date_col = i;
    if (name == "close") close_col = i;
  }
  if (date_col == header.size() || close_col == header.size()) {
    throw DataError(path + ": header must name 'date' and 'close' columns");
  }
  std::vector<PricePoint> points;
  points.reserve(lines.size() - 1);
  for (size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split_fields(lines[n]);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(n + 1) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    PricePoint p;
    p.date = parse_date_field(fields[date_col], format, path, n + 1);
    p.close = parse_double_field(fields[close_col], path, n + 1);
    points.push_back(p);
  }
  return PriceSeries::from_points(std::move(points));
}

void save_price_csv(const PriceSeries& series, const std::string& path) {
  std::string body = "date,close\n";
  for (const auto& p : series.points()) {
    body += p.date.to_string();
    body += ',';
    body += format_double(p.close);
    body += '\n';
  }
  write_file(path, body);
}

DatedSeries load_series_csv(const std::string& path, DateFormat format) {
  const auto lines = read_lines(path);
  if (split_fields(lines[0]).size() != 2) {
    throw DataError(path + ": expected a two-column date,value header");
  }
  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(lines.size() - 1);
  values.reserve(lines.size() - 1);
  for (size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split_fields(lines[n]);
    if (fields.size() != 2) {
      throw DataError(path + ":" + std::to_string(n + 1) + ": expected 2 fields");
    }
    dates.push_back(parse_date_field(fields[0], format, path, n + 1));
    values.push_back(parse_double_field(fields[1], path, n + 1));
  }
  return DatedSeries(std::move(dates), std::move(values));
}

void save_series_csv(const DatedSeries& series, const std::string& path,
                     const std::string& value_header) {
  std::string body = "date," + value_header + "\n";
  for (size_t i = 0; i < series.size(); ++i) {
    body += series.date(i).to_string();
    body += ',';
    body += format_double(series.value(i));
    body += '\n';
  }
  write_file(path, body);
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) throw DataError("need at least two prices for returns");
  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(prices.size() - 1);
  values.reserve(prices.size() - 1);
  for (size_t i = 1; i < prices.size(); ++i) {
    dates.push_back(prices[i].date);
    values.push_back(std::log(prices[i].close / prices[i - 1].close));
  }
  return ReturnSeries(std::move(dates), std::move(values));
}

std::vector<RollingWindow> rolling_windows(const DatedSeries& series, size_t window_len) {
  if (window_len == 0) throw std::invalid_argument("window_len must be positive");
  if (series.size() <= window_len) {
    throw DataError("series too short for window of " + std::to_string(window_len));
  }
  std::vector<RollingWindow> out;
  out.reserve(series.size() - window_len);
  for (size_t t = window_len; t < series.size(); ++t) {
    out.push_back({series.value_span(t - window_len, window_len), series.date(t), t});
  }
  return out;
}

}  // namespace ginn
