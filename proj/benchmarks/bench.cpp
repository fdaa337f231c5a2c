#include "maxtab/energy.hpp"
#include "maxtab/features.hpp"
#include "maxtab/gaussian.hpp"
#include "maxtab/quality.hpp"
#include "maxtab/rng.hpp"
#include "maxtab/sampler.hpp"
#include "maxtab/transform.hpp"

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace {

using namespace maxtab;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

void BM_enumerate_features(benchmark::State& state) {
  const int n_cols = static_cast<int>(state.range(0));
  for (auto _ : state) {
    FeatureSet fs = enumerate_features(n_cols, 4);
    benchmark::DoNotOptimize(fs.features.data());
  }
}
BENCHMARK(BM_enumerate_features)->Arg(4)->Arg(8)->Arg(14);

void BM_empirical_moments(benchmark::State& state) {
  const Eigen::Index n_cols = state.range(0);
  Eigen::MatrixXd data = gaussian_matrix(2000, n_cols, 1);
  FeatureSet fs = enumerate_features(static_cast<int>(n_cols), 4);
  for (auto _ : state) {
    auto m = empirical_moments(data, fs);
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_empirical_moments)->Arg(2)->Arg(4)->Arg(8);

void BM_fit_gaussian(benchmark::State& state) {
  Eigen::MatrixXd data = gaussian_matrix(5000, 10, 2);
  for (auto _ : state) {
    GaussianModel g = fit_gaussian(data);
    benchmark::DoNotOptimize(g.cholesky_factor.data());
  }
}
BENCHMARK(BM_fit_gaussian);

void BM_mh_sample(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  EnergyModel model;
  model.feature_set = enumerate_features(static_cast<int>(d), 4);
  model.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.feature_set.n_features()));
  // Weight the pure squares: a well-behaved gaussian-like target.
  for (std::size_t f = 0; f < model.feature_set.n_features(); ++f) {
    const auto& idx = model.feature_set.features[f];
    if (idx.size() == 2 && idx[0] == idx[1]) model.weights[static_cast<Eigen::Index>(f)] = -0.5;
  }
  model.ellipsoid.center = Eigen::VectorXd::Zero(d);
  model.ellipsoid.covariance = Eigen::MatrixXd::Identity(d, d);
  model.ellipsoid.finalize();

  SamplerConfig cfg;
  cfg.n_chains = 2;
  cfg.seed = 3;
  for (auto _ : state) {
    MhResult r = mh_sample(model, cfg, 1000);
    benchmark::DoNotOptimize(r.sample.data());
  }
}
BENCHMARK(BM_mh_sample)->Arg(2)->Arg(6);

void BM_fit_forward(benchmark::State& state) {
  auto rng = make_rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> column(10000);
  for (auto& v : column) v = normal(rng);
  for (auto _ : state) {
    auto rng_fit = make_rng(5);
    FitForwardResult r = fit_forward(column, rng_fit);
    benchmark::DoNotOptimize(r.transformed.data());
  }
}
BENCHMARK(BM_fit_forward);

void BM_similarity_score(benchmark::State& state) {
  const std::size_t n = 2000;
  Table real, synth;
  real.column_names = {"a", "b", "c", "d"};
  synth.column_names = real.column_names;
  real.columns.resize(4);
  synth.columns.resize(4);
  auto rng = make_rng(6);
  std::normal_distribution<double> normal;
  const char* labels[] = {"x", "y", "z"};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      real.columns[j].push_back(Cell{normal(rng)});
      synth.columns[j].push_back(Cell{normal(rng)});
    }
    real.columns[3].push_back(Cell{std::string(labels[i % 3])});
    synth.columns[3].push_back(Cell{std::string(labels[(i * 5) % 3])});
  }
  std::vector<ColumnSchema> schemas(4);
  for (std::size_t j = 0; j < 4; ++j) {
    schemas[j].name = real.column_names[j];
    schemas[j].role = j < 3 ? ColumnRole::continuous : ColumnRole::categorical;
  }
  schemas[3].codebook = {"x", "y", "z"};
  for (auto _ : state) {
    QualityReport r = similarity_score(real, synth, schemas, 7);
    benchmark::DoNotOptimize(r.overall);
  }
}
BENCHMARK(BM_similarity_score);

}  // namespace

BENCHMARK_MAIN();
