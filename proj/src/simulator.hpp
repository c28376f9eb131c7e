#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "series.hpp"

namespace ginn {

// Recipe for a synthetic (1,1) volatility process with known conditional
// variances. Stationarity (alpha + beta < 1) is required so the
// unconditional variance alpha0 / (1 - alpha - beta) exists and seeds the
// recursion.
struct SimulationSpec {
  double alpha0 = 0.1;
  double alpha = 0.1;
  double beta = 0.8;
  size_t length = 1000;
  size_t burn_in = 500;  // steps discarded before emission
  uint64_t seed = 0;
};

void validate(const SimulationSpec& spec);

struct Simulation {
  ReturnSeries returns;          // eps_t = sigma_t * e_t, zero mean
  VarianceSeries true_variance;  // sigma_t^2, the latent truth
};

// Draws e_t ~ N(0,1) from the seeded deterministic generator, advances the
// variance recursion, discards burn_in steps. Dates are consecutive days
// from the epoch, so downstream date handling is exercised but synthetic.
// The emitted pair replays the recursion exactly:
//   variance[t+1] == alpha0 + alpha * returns[t]^2 + beta * variance[t].
Simulation simulate_garch(const SimulationSpec& spec);

// Cartesian grid of specs over shock/memory weights, with deterministic
// distinct seeds seed_base, seed_base+1, ... in row-major order.
std::vector<SimulationSpec> persistence_grid(std::span<const double> alphas,
                                             std::span<const double> betas, size_t length,
                                             uint64_t seed_base, size_t burn_in = 500);

}  // namespace ginn
