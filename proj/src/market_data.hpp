#pragma once

#include <string>
#include <vector>

#include "series.hpp"

namespace ginn {

// CSV layout for prices: header row, then one "date,close" row per day.
// Column order is taken from the header (case insensitive names "date" and
// "close"; extra columns are ignored). Parse failures carry the 1-based line
// number.
PriceSeries load_price_csv(const std::string& path, DateFormat format = DateFormat::kIso);
void save_price_csv(const PriceSeries& series, const std::string& path);

// Generic dated value series: exactly two columns, "date,<name>". The value
// column name is whatever the writer chose ("log_return", "sigma2", ...).
DatedSeries load_series_csv(const std::string& path, DateFormat format = DateFormat::kIso);
void save_series_csv(const DatedSeries& series, const std::string& path,
                     const std::string& value_header);

// r_t = ln(P_t / P_{t-1}), dated at t. Needs at least two prices.
ReturnSeries log_returns(const PriceSeries& prices);

// One window per feasible target: values are the window_len entries
// immediately before target_index, the target is the entry at target_index.
// Spans point into the source series. Throws DataError when the series has
// no feasible target (size <= window_len).
struct RollingWindow {
  std::span<const double> values;
  Date target_date;
  size_t target_index = 0;
};
std::vector<RollingWindow> rolling_windows(const DatedSeries& series, size_t window_len);

// Shortest-round-trip decimal text for a double; used everywhere we write
// numbers so that identical values produce identical bytes.
std::string format_double(double x);

}  // namespace ginn
