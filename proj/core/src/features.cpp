#include "maxtab/features.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maxtab {

namespace {

void emit_multisets(int n_cols, int degree, int min_col, std::vector<int>& prefix,
                    std::vector<std::vector<int>>& out) {
  if (degree == 0) {
    out.push_back(prefix);
    return;
  }
  for (int c = min_col; c < n_cols; ++c) {
    prefix.push_back(c);
    emit_multisets(n_cols, degree - 1, c, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

FeatureSet enumerate_features(int n_cols, int order) {
  if (n_cols < 1) throw std::invalid_argument("enumerate_features needs at least one column");
  if (order != 2 && order != 4) throw std::invalid_argument("order must be 2 or 4");

  FeatureSet fs;
  fs.n_cols = n_cols;
  fs.order = order;
  std::vector<int> prefix;
  for (int degree = 1; degree <= order; ++degree)
    emit_multisets(n_cols, degree, 0, prefix, fs.features);
  return fs;
}

double feature_value(const Eigen::VectorXd& point, const std::vector<int>& feature) {
  double prod = 1.0;
  for (int c : feature) prod *= point[c];
  return prod;
}

std::vector<double> feature_values(const Eigen::VectorXd& point, const FeatureSet& fs) {
  std::vector<double> out(fs.n_features());
  for (std::size_t i = 0; i < fs.n_features(); ++i) out[i] = feature_value(point, fs.features[i]);
  return out;
}

std::vector<double> empirical_moments(const Eigen::MatrixXd& data, const FeatureSet& fs) {
  if (data.cols() != fs.n_cols)
    throw std::invalid_argument("data column count does not match the feature set");

  const auto n_rows = data.rows();
  std::vector<double> out(fs.n_features());
  for (std::size_t i = 0; i < fs.n_features(); ++i) {
    const auto& f = fs.features[i];
    double sum = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index r = 0; r < n_rows; ++r) {
      double prod = 1.0;
      bool ok = true;
      for (int c : f) {
        double v = data(r, c);
        if (std::isnan(v)) {
          ok = false;
          break;
        }
        prod *= v;
      }
      if (!ok) continue;
      sum += prod;
      ++observed;
    }
    out[i] = observed ? sum / static_cast<double>(observed)
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("repair_psd needs a square matrix");
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Eigen::VectorXd lambda = es.eigenvalues().cwiseAbs();
  Eigen::MatrixXd out =
      es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd complete_covariance(Eigen::MatrixXd partial) {
  const Eigen::Index n = partial.rows();
  if (partial.cols() != n) throw std::invalid_argument("complete_covariance needs a square matrix");

  std::vector<std::pair<Eigen::Index, Eigen::Index>> absent;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(partial(i, i)) || partial(i, i) <= 0)
      throw std::invalid_argument("complete_covariance needs known positive diagonal entries");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      bool a = std::isnan(partial(i, j));
      bool b = std::isnan(partial(j, i));
      if (a != b || (!a && partial(i, j) != partial(j, i)))
        throw std::invalid_argument("complete_covariance needs a symmetric input");
      if (a) absent.emplace_back(i, j);
    }
  }
  if (absent.empty()) return partial;

  for (auto [i, j] : absent) partial(i, j) = partial(j, i) = 0.0;

  auto det_at = [&](Eigen::Index i, Eigen::Index j, double t) {
    Eigen::MatrixXd m = partial;
    m(i, j) = m(j, i) = t;
    return m.determinant();
  };

  double det = partial.determinant();
  for (int sweep = 0; sweep < 200; ++sweep) {
    for (auto [i, j] : absent) {
      // det(t) is a quadratic in the symmetric pair (i,j); fit it from three
      // evaluations and jump to the vertex when it is concave.
      double d0 = det_at(i, j, -1.0);
      double d1 = det_at(i, j, 0.0);
      double d2 = det_at(i, j, 1.0);
      double a = 0.5 * (d0 + d2) - d1;
      double b = 0.5 * (d2 - d0);
      if (a < -1e-300) {
        double t = -b / (2.0 * a);
        partial(i, j) = partial(j, i) = t;
      }
    }
    double next = partial.determinant();
    if (std::abs(next - det) <= 1e-12 * std::max(1.0, std::abs(next))) {
      det = next;
      break;
    }
    det = next;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(partial);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10) {
    // The known entries admit no PSD completion; keep the zero fill and repair.
    for (auto [i, j] : absent) partial(i, j) = partial(j, i) = 0.0;
    return repair_psd(partial);
  }
  return partial;
}

}  // namespace maxtab
