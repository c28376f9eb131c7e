#include "series.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace ginn {

PriceSeries PriceSeries::from_points(std::vector<PricePoint> points) {
  std::sort(points.begin(), points.end(),
            [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
  for (size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i - 1].date < points[i].date)) {
      throw DataError("duplicate price date " + points[i].date.to_string());
    }
    if (!std::isfinite(points[i].close) || points[i].close <= 0.0) {
      throw DataError("non-positive close on " + points[i].date.to_string());
    }
  }
  PriceSeries s;
  s.points_ = std::move(points);
  return s;
}

DatedSeries::DatedSeries(std::vector<Date> dates, std::vector<double> values)
    : dates_(std::move(dates)), values_(std::move(values)) {
  if (dates_.size() != values_.size()) {
    throw DataError("series dates and values differ in length");
  }
  for (size_t i = 0; i < dates_.size(); ++i) {
    if (i > 0 && !(dates_[i - 1] < dates_[i])) {
      throw DataError("series dates not strictly increasing at " + dates_[i].to_string());
    }
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value on " + dates_[i].to_string());
    }
  }
}

std::span<const double> DatedSeries::value_span(size_t offset, size_t count) const {
  if (offset + count > values_.size()) {
    throw std::invalid_argument("value_span out of range");
  }
  return {values_.data() + offset, count};
}

size_t DatedSeries::lower_bound(Date d) const {
  return static_cast<size_t>(std::lower_bound(dates_.begin(), dates_.end(), d) -
                             dates_.begin());
}

std::optional<size_t> DatedSeries::find(Date d) const {
  const size_t i = lower_bound(d);
  if (i < dates_.size() && dates_[i] == d) return i;
  return std::nullopt;
}

DatedSeries DatedSeries::slice(size_t begin, size_t end) const {
  if (begin > end || end > dates_.size()) {
    throw std::invalid_argument("slice out of range");
  }
  DatedSeries out;
  out.dates_.assign(dates_.begin() + begin, dates_.begin() + end);
  out.values_.assign(values_.begin() + begin, values_.begin() + end);
  return out;
}

VarianceSeries::VarianceSeries(std::vector<Date> dates, std::vector<double> values)
    : DatedSeries(std::move(dates), std::move(values)) {
  for (size_t i = 0; i < size(); ++i) {
    if (values_[i] < 0.0) {
      throw DataError("negative variance on " + dates_[i].to_string());
    }
  }
}

VarianceSeries::VarianceSeries(DatedSeries s) : DatedSeries(std::move(s)) {
  for (size_t i = 0; i < size(); ++i) {
    if (values_[i] < 0.0) {
      throw DataError("negative variance on " + dates_[i].to_string());
    }
  }
}

template <class S>
std::pair<S, S> split_at(const S& series, Date boundary) {
  if (series.empty()) throw DataError("cannot split an empty series");
  if (!(series.date(0) < boundary) || series.date(series.size() - 1) < boundary) {
    throw DataError("split boundary " + boundary.to_string() +
                    " must lie strictly inside the series date range");
  }
  const size_t cut = series.lower_bound(boundary);
  return {S(series.slice(0, cut)), S(series.slice(cut, series.size()))};
}

template std::pair<DatedSeries, DatedSeries> split_at(const DatedSeries&, Date);
template std::pair<ReturnSeries, ReturnSeries> split_at(const ReturnSeries&, Date);
template std::pair<VarianceSeries, VarianceSeries> split_at(const VarianceSeries&, Date);

DatedSeries restrict_to_dates(const DatedSeries& series, const std::vector<Date>& dates) {
  std::vector<Date> d;
  std::vector<double> v;
  d.reserve(dates.size());
  v.reserve(dates.size());
  for (const Date& date : dates) {
    const auto i = series.find(date);
    if (!i) throw DataError("date " + date.to_string() + " missing from series");
    d.push_back(date);
    v.push_back(series.value(*i));
  }
  return DatedSeries(std::move(d), std::move(v));
}

std::vector<Date> common_dates(const DatedSeries& a, const DatedSeries& b) {
  std::vector<Date> out;
  std::set_intersection(a.dates().begin(), a.dates().end(), b.dates().begin(),
                        b.dates().end(), std::back_inserter(out));
  return out;
}

}  // namespace ginn
