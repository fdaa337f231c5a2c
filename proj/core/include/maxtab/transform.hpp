#pragma once

#include <random>
#include <vector>

namespace maxtab {

// Standard normal CDF and its inverse.
double normal_cdf(double z);
double normal_quantile(double p);

// Per-column invertible map from native values to the training space:
// rank -> Gaussian quantile at (r - 0.5) / n -> rescale to span 1, mean 0.
// Inversion interpolates the empirical CDF stored below.
struct ColumnTransform {
  std::vector<double> sorted_native_values;  // order statistics, ties kept
  std::vector<double> plotting_positions;    // (r - 0.5) / n for r = 1..n
  double zmin = 0;
  double zmax = 0;
  double u_mean = 0;
};

struct FitForwardResult {
  std::vector<double> transformed;  // NaN where the input was NaN
  ColumnTransform state;
};

// NaN marks missing cells; they pass through untouched. Requires at least two
// distinct finite values. Ties are broken by a small uniform jitter
// (half-width 1e-6 times the smallest gap between distinct values), redrawn
// in the unlikely event it fails to produce a strict ordering.
FitForwardResult fit_forward(const std::vector<double>& column, std::mt19937_64& rng);

double inverse_value(double w, const ColumnTransform& state);
std::vector<double> inverse(const std::vector<double>& w, const ColumnTransform& state);

}  // namespace maxtab
