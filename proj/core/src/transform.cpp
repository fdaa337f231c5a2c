#include "maxtab/transform.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace maxtab {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile needs p in (0, 1)");
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

namespace {

double smallest_gap(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) gap = std::min(gap, values[i] - values[i - 1]);
  return gap;
}

}  // namespace

FitForwardResult fit_forward(const std::vector<double>& column, std::mt19937_64& rng) {
  std::vector<double> values;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (std::isnan(column[i])) continue;
    values.push_back(column[i]);
    rows.push_back(i);
  }
  const std::size_t n = values.size();

  {
    std::vector<double> distinct(values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
      throw std::invalid_argument("transform needs a column with at least two distinct values");
  }

  const double eps = 1e-6 * smallest_gap(values);

  // Jitter to break ties; only values that were tied can collide, and a
  // collision among fresh uniform draws is practically impossible.
  std::vector<double> jittered(n);
  std::uniform_real_distribution<double> noise(-eps, eps);
  for (int attempt = 0;; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) jittered[i] = values[i] + noise(rng);
    std::vector<double> check(jittered);
    std::sort(check.begin(), check.end());
    if (std::adjacent_find(check.begin(), check.end()) == check.end()) break;
    if (attempt >= 100) throw std::runtime_error("jitter failed to produce a strict ordering");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return jittered[a] < jittered[b]; });

  ColumnTransform state;
  state.sorted_native_values = values;
  std::sort(state.sorted_native_values.begin(), state.sorted_native_values.end());
  state.plotting_positions.resize(n);
  for (std::size_t r = 0; r < n; ++r)
    state.plotting_positions[r] = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
  state.zmin = normal_quantile(state.plotting_positions.front());
  state.zmax = normal_quantile(state.plotting_positions.back());

  std::vector<double> u(n);
  const double span = state.zmax - state.zmin;
  for (std::size_t r = 0; r < n; ++r) {
    double z = normal_quantile(state.plotting_positions[r]);
    u[order[r]] = (z - state.zmin) / span;
  }
  state.u_mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);

  FitForwardResult result;
  result.transformed.assign(column.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) result.transformed[rows[i]] = u[i] - state.u_mean;
  result.state = std::move(state);
  return result;
}

double inverse_value(double w, const ColumnTransform& state) {
  if (std::isnan(w)) return w;
  const auto& pp = state.plotting_positions;
  const auto& sv = state.sorted_native_values;
  double u = w + state.u_mean;
  double z = u * (state.zmax - state.zmin) + state.zmin;
  double p = normal_cdf(z);
  if (p <= pp.front()) return sv.front();
  if (p >= pp.back()) return sv.back();
  auto it = std::upper_bound(pp.begin(), pp.end(), p);
  std::size_t hi = static_cast<std::size_t>(it - pp.begin());
  std::size_t lo = hi - 1;
  double t = (p - pp[lo]) / (pp[hi] - pp[lo]);
  return sv[lo] + t * (sv[hi] - sv[lo]);
}

std::vector<double> inverse(const std::vector<double>& w, const ColumnTransform& state) {
  if (state.sorted_native_values.empty() ||
      state.sorted_native_values.size() != state.plotting_positions.size())
    throw std::invalid_argument("inverse called with an inconsistent transform state");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = inverse_value(w[i], state);
  return out;
}

}  // namespace maxtab
