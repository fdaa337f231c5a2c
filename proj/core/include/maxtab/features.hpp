#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace maxtab {

// Monomial features: each feature is a multiset of column indices (stored as
// a non-decreasing vector) and evaluates to the product of those coordinates.
struct FeatureSet {
  int n_cols = 0;
  int order = 2;  // maximum degree, 2 or 4
  std::vector<std::vector<int>> features;

  std::size_t n_features() const { return features.size(); }
};

// All multisets of degree 1..order, listed by degree and then
// lexicographically within a degree.
FeatureSet enumerate_features(int n_cols, int order);

double feature_value(const Eigen::VectorXd& point, const std::vector<int>& feature);
std::vector<double> feature_values(const Eigen::VectorXd& point, const FeatureSet& fs);

// Mean of each feature over the rows where all participating columns are
// observed (NaN marks a missing cell). Features with no jointly observed row
// come back as NaN.
std::vector<double> empirical_moments(const Eigen::MatrixXd& data, const FeatureSet& fs);

// Fill NaN entries of a symmetric matrix by coordinate-wise determinant
// maximization (the determinant is quadratic in each symmetric entry pair, so
// every inner step is exact). Falls back to a zero fill plus repair_psd when
// the known entries admit no PSD completion.
Eigen::MatrixXd complete_covariance(Eigen::MatrixXd partial);

// Replace negative eigenvalues by their absolute values.
Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& m);

}  // namespace maxtab
