#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>

namespace maxtab {

struct GaussianModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;       // completed and PSD-repaired if needed
  Eigen::MatrixXd cholesky_factor;  // lower triangular; tiny diagonal jitter
                                    // is added first when nearly singular
};

// Moment fit with pairwise deletion: per-column means over observed cells,
// second moments over jointly observed cells. Unobservable covariance entries
// are filled by determinant maximization.
GaussianModel fit_gaussian(const Eigen::MatrixXd& data);

Eigen::MatrixXd sample_gaussian(const GaussianModel& model, std::size_t n, std::mt19937_64& rng);

// Lower Cholesky factor, adding 1e-10 to the diagonal first when the smallest
// eigenvalue falls below 1e-12. Shared by the ellipsoid geometry.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& covariance);

}  // namespace maxtab
