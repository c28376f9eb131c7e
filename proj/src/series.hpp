#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "date.hpp"

namespace ginn {

struct PricePoint {
  Date date;
  double close = 0.0;
};

// Daily closing prices. Invariants enforced on construction: dates strictly
// increasing, every close finite and positive.
class PriceSeries {
 public:
  PriceSeries() = default;

  // Sorts by date, then validates. Throws DataError on duplicates or bad
  // closes.
  static PriceSeries from_points(std::vector<PricePoint> points);

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PricePoint& operator[](size_t i) const { return points_[i]; }
  const std::vector<PricePoint>& points() const { return points_; }

 private:
  std::vector<PricePoint> points_;
};

// Dated double series: the common shape of returns, variance proxies and
// model forecasts. Dates strictly increasing, values finite.
class DatedSeries {
 public:
  DatedSeries() = default;
  DatedSeries(std::vector<Date> dates, std::vector<double> values);

  size_t size() const { return dates_.size(); }
  bool empty() const { return dates_.empty(); }
  Date date(size_t i) const { return dates_[i]; }
  double value(size_t i) const { return values_[i]; }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> value_span(size_t offset, size_t count) const;

  // Index of the first entry with date >= d; size() if none.
  size_t lower_bound(Date d) const;
  std::optional<size_t> find(Date d) const;

  DatedSeries slice(size_t begin, size_t end) const;  // half open [begin, end)

 protected:
  std::vector<Date> dates_;
  std::vector<double> values_;
};

class ReturnSeries : public DatedSeries {
 public:
  ReturnSeries() = default;
  ReturnSeries(std::vector<Date> dates, std::vector<double> values)
      : DatedSeries(std::move(dates), std::move(values)) {}
  explicit ReturnSeries(DatedSeries s) : DatedSeries(std::move(s)) {}
};

// Same shape as DatedSeries plus: every value >= 0.
class VarianceSeries : public DatedSeries {
 public:
  VarianceSeries() = default;
  VarianceSeries(std::vector<Date> dates, std::vector<double> values);
  explicit VarianceSeries(DatedSeries s);
};

// Chronological split: first part strictly before the boundary date, second
// part on or after it. Throws DataError unless first_date < boundary <=
// last_date, so both halves are non-empty.
template <class S>
std::pair<S, S> split_at(const S& series, Date boundary);

// Keep only the entries with the given dates, in order. Throws DataError if
// any requested date is absent.
DatedSeries restrict_to_dates(const DatedSeries& series, const std::vector<Date>& dates);

// Dates present in both series, ascending.
std::vector<Date> common_dates(const DatedSeries& a, const DatedSeries& b);

}  // namespace ginn
