#include "maxtab/gaussian.hpp"

#include "maxtab/features.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxtab {

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Eigen::MatrixXd work = covariance;
  if (es.eigenvalues().minCoeff() < 1e-12)
    work += 1e-10 * Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(work);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("Cholesky factorization failed on a jittered covariance");
  return llt.matrixL();
}

GaussianModel fit_gaussian(const Eigen::MatrixXd& data) {
  const Eigen::Index n_rows = data.rows();
  const Eigen::Index d = data.cols();
  if (n_rows < 2) throw std::invalid_argument("fit_gaussian needs at least two rows");
  if (d < 1) throw std::invalid_argument("fit_gaussian needs at least one column");

  Eigen::VectorXd mean(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0;
    Eigen::Index cnt = 0;
    for (Eigen::Index r = 0; r < n_rows; ++r) {
      double v = data(r, j);
      if (std::isnan(v)) continue;
      sum += v;
      ++cnt;
    }
    if (cnt == 0) throw std::invalid_argument("fit_gaussian saw a fully missing column");
    mean[j] = sum / static_cast<double>(cnt);
  }

  // Raw second moments over jointly observed rows; NaN when a pair is never
  // observed together.
  Eigen::MatrixXd cov(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      double sum = 0;
      Eigen::Index cnt = 0;
      for (Eigen::Index r = 0; r < n_rows; ++r) {
        double a = data(r, i);
        double b = data(r, j);
        if (std::isnan(a) || std::isnan(b)) continue;
        sum += a * b;
        ++cnt;
      }
      double m2 = cnt ? sum / static_cast<double>(cnt)
                      : std::numeric_limits<double>::quiet_NaN();
      cov(i, j) = cov(j, i) = m2 - mean[i] * mean[j];
    }
  }
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::isnan(cov(i, i)) || cov(i, i) <= 0)
      throw std::invalid_argument("fit_gaussian needs positive variance in every column");

  cov = complete_covariance(cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-10) cov = repair_psd(cov);

  GaussianModel model;
  model.mean = std::move(mean);
  model.covariance = std::move(cov);
  model.cholesky_factor = cholesky_with_jitter(model.covariance);
  return model;
}

Eigen::MatrixXd sample_gaussian(const GaussianModel& model, std::size_t n, std::mt19937_64& rng) {
  const Eigen::Index d = model.mean.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    out.row(r) = (model.mean + model.cholesky_factor * z).transpose();
  }
  return out;
}

}  // namespace maxtab
