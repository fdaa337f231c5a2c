#include "maxtab/energy.hpp"

#include "maxtab/rng.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace maxtab {

double energy(const EnergyModel& model, const Eigen::VectorXd& point) {
  if (point.size() != model.feature_set.n_cols)
    throw std::invalid_argument("point dimension does not match the feature set");
  double sum = 0.0;
  for (std::size_t i = 0; i < model.feature_set.n_features(); ++i)
    sum += model.weights[static_cast<Eigen::Index>(i)] *
           feature_value(point, model.feature_set.features[i]);
  return sum;
}

Eigen::VectorXd gradient(const std::vector<double>& real_moments,
                         const std::vector<double>& model_moments) {
  if (real_moments.size() != model_moments.size())
    throw std::invalid_argument("moment vectors differ in length");
  Eigen::VectorXd g(static_cast<Eigen::Index>(real_moments.size()));
  for (std::size_t i = 0; i < real_moments.size(); ++i)
    g[static_cast<Eigen::Index>(i)] = real_moments[i] - model_moments[i];
  return g;
}

OptimizerState::OptimizerState(Eigen::Index n_parameters) {
  if (n_parameters < 1) throw std::invalid_argument("optimizer needs at least one parameter");
  m = Eigen::VectorXd::Zero(n_parameters);
  v = Eigen::VectorXd::Zero(n_parameters);
  rate = Eigen::VectorXd::Ones(n_parameters);
  prev_m_sign = Eigen::VectorXd::Zero(n_parameters);
  alpha = 1.0 / std::sqrt(static_cast<double>(n_parameters));
}

void optimizer_step(OptimizerState& s, const Eigen::VectorXd& g, Eigen::VectorXd& weights) {
  const Eigen::Index n = s.m.size();
  if (g.size() != n || weights.size() != n)
    throw std::invalid_argument("optimizer state, gradient and weights differ in size");

  ++s.t;
  const double grow = 1.0 + s.gamma;
  const double shrink = std::pow(1.0 + s.gamma, -s.delta);
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));

  for (Eigen::Index i = 0; i < n; ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g[i] * g[i];
    double m_hat = s.m[i] / bc1;
    double v_hat = s.v[i] / bc2;
    double a = m_hat / (std::sqrt(v_hat) + s.adam_eps);

    double sign = (s.m[i] > 0.0) - (s.m[i] < 0.0);
    double change = sign * s.prev_m_sign[i];
    if (change > 0.0)
      s.rate[i] *= grow;
    else if (change < 0.0)
      s.rate[i] *= shrink;
    s.prev_m_sign[i] = sign;

    weights[i] -= s.alpha * s.rate[i] * a;
  }
}

TrainResult train(const Eigen::MatrixXd& data, const Ellipsoid& ellipsoid,
                  const TrainConfig& config, const ScoreFn& score) {
  if (config.window < 1) throw std::invalid_argument("window must be at least one epoch");
  if (config.mc_points < 2) throw std::invalid_argument("mc_points must be at least two");
  if (!score) throw std::invalid_argument("train needs a score callback");

  FeatureSet fs = enumerate_features(static_cast<int>(data.cols()), 4);
  const Eigen::Index n_params = static_cast<Eigen::Index>(fs.n_features());

  // Reference moments. Pairs that were never observed together are filled via
  // the covariance completion; unobservable higher moments are pinned to zero.
  std::vector<double> real = empirical_moments(data, fs);
  {
    const int d = fs.n_cols;
    std::vector<double> mean(d);
    for (int j = 0; j < d; ++j) mean[j] = real[static_cast<std::size_t>(j)];
    // Degree-2 features start right after the d degree-1 features, listed as
    // (0,0), (0,1), ..., (d-1,d-1).
    std::size_t k = static_cast<std::size_t>(d);
    Eigen::MatrixXd cov(d, d);
    std::vector<std::vector<std::size_t>> slot(d, std::vector<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j, ++k) {
        slot[i][j] = k;
        double m2 = real[k];
        cov(i, j) = cov(j, i) = m2 - mean[i] * mean[j];
      }
    }
    bool any_absent = false;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        if (std::isnan(cov(i, j))) any_absent = true;
    if (any_absent) {
      cov = complete_covariance(cov);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          if (std::isnan(real[slot[i][j]])) real[slot[i][j]] = cov(i, j) + mean[i] * mean[j];
    }
    for (std::size_t f = k; f < real.size(); ++f)
      if (std::isnan(real[f])) real[f] = 0.0;
    for (std::size_t f = 0; f < k; ++f)
      if (std::isnan(real[f]))
        throw std::invalid_argument("train saw a column with no observed values");
  }

  EnergyModel model;
  model.feature_set = std::move(fs);
  model.weights = Eigen::VectorXd::Zero(n_params);
  model.ellipsoid = ellipsoid;
  if (model.ellipsoid.chol.rows() != model.ellipsoid.covariance.rows())
    model.ellipsoid.finalize();

  OptimizerState opt(n_params);

  struct Snapshot {
    long epoch;
    double score;
    Eigen::VectorXd weights;
  };
  std::deque<Snapshot> recent;  // last 2 * window epochs
  std::vector<EpochRecord> trace;

  std::deque<double> window_scores;
  double window_sum = 0;
  double best_window_mean = -std::numeric_limits<double>::infinity();
  long stalled = 0;

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  long epoch = 0;
  while (true) {
    if (elapsed() >= config.budget_seconds) break;
    if (config.max_epochs > 0 && epoch >= config.max_epochs) break;
    ++epoch;

    SamplerConfig chain_cfg = config.sampler;
    chain_cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(Stream::chain),
                              static_cast<std::uint64_t>(epoch));
    MhResult mc = mh_sample(model, chain_cfg, config.mc_points);
    if (mc.accepted == 0)
      throw TrainingAbort("sampler accepted no proposals in epoch " + std::to_string(epoch) +
                          " (" + std::to_string(mc.nonfinite_energy) +
                          " proposals had non-finite energy)");

    std::vector<double> model_moments = empirical_moments(mc.sample, model.feature_set);
    Eigen::VectorXd g_loglik = gradient(real, model_moments);
    double epoch_score = score(epoch, mc.sample);

    recent.push_back({epoch, epoch_score, model.weights});
    if (static_cast<long>(recent.size()) > 2 * config.window) recent.pop_front();
    trace.push_back({epoch, epoch_score, g_loglik.norm(), mc.acceptance_rate()});

    // Ascend the log-likelihood: hand the optimizer the descent gradient.
    optimizer_step(opt, (-g_loglik).eval(), model.weights);

    window_scores.push_back(epoch_score);
    window_sum += epoch_score;
    if (static_cast<long>(window_scores.size()) > config.window) {
      window_sum -= window_scores.front();
      window_scores.pop_front();
    }
    if (static_cast<long>(window_scores.size()) == config.window) {
      double mean = window_sum / static_cast<double>(config.window);
      if (mean > best_window_mean) {
        best_window_mean = mean;
        stalled = 0;
      } else if (++stalled >= config.window) {
        break;
      }
    }
  }

  TrainResult result;
  result.model = std::move(model);
  result.trace = std::move(trace);
  if (!recent.empty()) {
    const Snapshot* best = &recent.front();
    for (const auto& s : recent)
      if (s.score > best->score) best = &s;
    result.model.weights = best->weights;
    result.best_epoch = best->epoch;
  }
  return result;
}

}  // namespace maxtab
