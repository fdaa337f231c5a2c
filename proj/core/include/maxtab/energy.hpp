#pragma once

#include "maxtab/features.hpp"
#include "maxtab/sampler.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxtab {

// Unnormalized log-density: energy(x) = sum_i weights[i] * feature_i(x),
// supported on the ellipsoid. Higher energy means higher probability.
struct EnergyModel {
  FeatureSet feature_set;
  Eigen::VectorXd weights;
  Ellipsoid ellipsoid;
};

double energy(const EnergyModel& model, const Eigen::VectorXd& point);

// Log-likelihood gradient with respect to the weights: real minus model
// moments, one entry per feature.
Eigen::VectorXd gradient(const std::vector<double>& real_moments,
                         const std::vector<double>& model_moments);

// Adam crossed with resilient backpropagation: per-parameter step rates grow
// by (1 + gamma) while the Adam first moment keeps its sign and shrink by
// (1 + gamma)^-delta when it flips; a zero sign on either side leaves the
// rate alone, which also covers the first step.
struct OptimizerState {
  Eigen::VectorXd m;            // Adam first moment
  Eigen::VectorXd v;            // Adam second moment
  Eigen::VectorXd rate;         // per-parameter multiplicative rates
  Eigen::VectorXd prev_m_sign;  // sign of m from the previous step
  long t = 0;
  double alpha = 0.0;  // 1 / sqrt(n_parameters)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double gamma = 0.005;
  double delta = 6.5;
  double adam_eps = 1e-8;

  explicit OptimizerState(Eigen::Index n_parameters);
};

// One step on a descent gradient g: weights -= alpha * (rate (*) adam_dir(g)).
void optimizer_step(OptimizerState& state, const Eigen::VectorXd& g, Eigen::VectorXd& weights);

struct EpochRecord {
  long epoch = 0;
  double score = 0;
  double gradient_norm = 0;
  double acceptance_rate = 0;
};

struct TrainConfig {
  SamplerConfig sampler;
  double budget_seconds = 600;
  long window = 400;      // trailing window for the plateau rule
  long max_epochs = 0;    // 0 = no cap
  std::size_t mc_points = 2000;
  std::uint64_t seed = 0;
};

// Per-epoch quality callback: scores the Monte Carlo sample drawn with the
// weights in effect that epoch.
using ScoreFn = std::function<double(long epoch, const Eigen::MatrixXd& sample)>;

struct TrainResult {
  EnergyModel model;
  std::vector<EpochRecord> trace;
  long best_epoch = 0;
};

struct TrainingAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fits fourth-order weights to the data's feature moments. Stops on the
// wall-clock budget or when the trailing-window mean score has not improved
// for a full window; returns the weights behind the best-scoring epoch of the
// final two windows. Third and fourth degree moments with no jointly observed
// rows are pinned to zero; unobservable covariance entries are completed.
TrainResult train(const Eigen::MatrixXd& data, const Ellipsoid& ellipsoid,
                  const TrainConfig& config, const ScoreFn& score);

}  // namespace maxtab
