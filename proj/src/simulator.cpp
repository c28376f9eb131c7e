#include "simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace ginn {

void validate(const SimulationSpec& spec) {
  if (!(spec.alpha0 > 0.0) || !std::isfinite(spec.alpha0)) {
    throw std::invalid_argument("alpha0 must be positive");
  }
  if (spec.alpha < 0.0 || spec.beta < 0.0) {
    throw std::invalid_argument("alpha and beta must be non-negative");
  }
  if (!(spec.alpha + spec.beta < 1.0)) {
    throw std::invalid_argument("alpha + beta must be below 1");
  }
  if (spec.length == 0) throw std::invalid_argument("length must be positive");
}

Simulation simulate_garch(const SimulationSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  double s2 = spec.alpha0 / (1.0 - spec.alpha - spec.beta);

  std::vector<Date> dates;
  std::vector<double> returns;
  std::vector<double> variance;
  dates.reserve(spec.length);
  returns.reserve(spec.length);
  variance.reserve(spec.length);

  const size_t total = spec.burn_in + spec.length;
  for (size_t step = 0; step < total; ++step) {
    const double eps = std::sqrt(s2) * rng.normal();
    if (step >= spec.burn_in) {
      dates.push_back(Date::from_days(static_cast<int32_t>(step - spec.burn_in)));
      returns.push_back(eps);
      variance.push_back(s2);
    }
    // same expression shape as the model recursion so replays are bit-exact
    s2 = spec.alpha0 + spec.alpha * (eps * eps) + spec.beta * s2;
  }

  Simulation sim;
  sim.returns = ReturnSeries(dates, std::move(returns));
  sim.true_variance = VarianceSeries(std::move(dates), std::move(variance));
  return sim;
}

std::vector<SimulationSpec> persistence_grid(std::span<const double> alphas,
                                             std::span<const double> betas, size_t length,
                                             uint64_t seed_base, size_t burn_in) {
  std::vector<SimulationSpec> out;
  out.reserve(alphas.size() * betas.size());
  uint64_t offset = 0;
  for (double a : alphas) {
    for (double b : betas) {
      SimulationSpec spec;
      spec.alpha = a;
      spec.beta = b;
      spec.length = length;
      spec.burn_in = burn_in;
      spec.seed = seed_base + offset;
      ++offset;
      validate(spec);
      out.push_back(spec);
    }
  }
  return out;
}

}  // namespace ginn
