#include "maxtab/features.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

using namespace maxtab;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Independent enumeration: odometer over non-decreasing index tuples, one
// degree at a time.
std::vector<std::vector<int>> odometer_multisets(int n_cols, int order) {
  std::vector<std::vector<int>> out;
  for (int d = 1; d <= order; ++d) {
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      out.push_back(idx);
      int k = d - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == n_cols - 1) --k;
      if (k < 0) break;
      ++idx[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < d; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

std::size_t multiset_count(int n, int order) {
  // sum over degrees of C(n + d - 1, d)
  std::size_t total = 0;
  for (int d = 1; d <= order; ++d) {
    std::size_t c = 1;
    for (int i = 1; i <= d; ++i)
      c = c * static_cast<std::size_t>(n + i - 1) / static_cast<std::size_t>(i);
    total += c;
  }
  return total;
}

}  // namespace

TEST_CASE("single-column order-4 features are the four pure powers") {
  FeatureSet fs = enumerate_features(1, 4);
  REQUIRE(fs.n_features() == 4);
  CHECK(fs.features[0] == std::vector<int>{0});
  CHECK(fs.features[1] == std::vector<int>{0, 0});
  CHECK(fs.features[2] == std::vector<int>{0, 0, 0});
  CHECK(fs.features[3] == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("two-column order-4 enumeration has fourteen features") {
  CHECK(enumerate_features(2, 4).n_features() == 14);
}

TEST_CASE("enumeration matches an independent odometer for small widths") {
  for (int order : {2, 4})
    for (int n = 1; n <= 8; ++n) {
      FeatureSet fs = enumerate_features(n, order);
      auto expect = odometer_multisets(n, order);
      REQUIRE(fs.n_features() == expect.size());
      CHECK(fs.features == expect);
      CHECK(fs.n_features() == multiset_count(n, order));
    }
}

TEST_CASE("features are ordered by degree then lexicographically") {
  FeatureSet fs = enumerate_features(5, 4);
  for (std::size_t i = 1; i < fs.n_features(); ++i) {
    const auto& a = fs.features[i - 1];
    const auto& b = fs.features[i];
    bool ok = a.size() < b.size() || (a.size() == b.size() && a < b);
    CHECK(ok);
  }
}

TEST_CASE("enumerate_features rejects bad arguments") {
  CHECK_THROWS_AS(enumerate_features(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_features(3, 3), std::invalid_argument);
}

TEST_CASE("feature values are coordinate products") {
  Eigen::VectorXd p(2);
  p << 2, 3;
  CHECK(feature_value(p, {0, 0, 1}) == 12);
  CHECK(feature_value(p, {1, 1, 1, 1}) == 81);

  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  FeatureSet fs = enumerate_features(3, 4);
  for (double v : feature_values(zeros, fs)) CHECK(v == 0.0);
  for (double v : feature_values(ones, fs)) CHECK(v == 1.0);
}

TEST_CASE("empirical moments match a direct product-and-average computation") {
  Eigen::MatrixXd data(3, 2);
  data << 1, 2, 3, 4, 5, 6;
  FeatureSet fs = enumerate_features(2, 4);
  auto moments = empirical_moments(data, fs);
  for (std::size_t f = 0; f < fs.n_features(); ++f) {
    double sum = 0;
    for (int r = 0; r < 3; ++r) {
      double prod = 1;
      for (int c : fs.features[f]) prod *= data(r, c);
      sum += prod;
    }
    CHECK(moments[f] == doctest::Approx(sum / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("perfectly correlated columns give equal cross and self moments") {
  Eigen::MatrixXd data(40, 2);
  for (int r = 0; r < 40; ++r) {
    double v = std::sin(r * 1.3);
    data(r, 0) = v;
    data(r, 1) = v;
  }
  FeatureSet fs = enumerate_features(2, 2);
  auto m = empirical_moments(data, fs);
  // degree-2 block of a 2-column set: {0,0}, {0,1}, {1,1}
  CHECK(m[2] == doctest::Approx(m[3]).epsilon(1e-12));
  CHECK(m[3] == doctest::Approx(m[4]).epsilon(1e-12));
}

TEST_CASE("moments with missing cells use jointly observed rows only") {
  Eigen::MatrixXd data(4, 2);
  data << 1, 10, 2, kNan, 3, 30, kNan, 40;
  FeatureSet fs = enumerate_features(2, 2);
  auto m = empirical_moments(data, fs);
  CHECK(m[0] == doctest::Approx((1 + 2 + 3) / 3.0));          // {0}
  CHECK(m[1] == doctest::Approx((10 + 30 + 40) / 3.0));       // {1}
  CHECK(m[3] == doctest::Approx((1 * 10 + 3 * 30) / 2.0));    // {0,1} rows 0 and 2
}

TEST_CASE("a feature with no jointly observed rows comes back as NaN") {
  Eigen::MatrixXd data(2, 2);
  data << 1, kNan, kNan, 2;
  FeatureSet fs = enumerate_features(2, 2);
  auto m = empirical_moments(data, fs);
  CHECK(std::isnan(m[3]));
  CHECK_FALSE(std::isnan(m[0]));
}

TEST_CASE("completion fills an unobservable 2x2 off-diagonal with zero") {
  Eigen::MatrixXd partial(2, 2);
  partial << 1, kNan, kNan, 1;
  Eigen::MatrixXd full = complete_covariance(partial);
  CHECK(full(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(full(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("completion of a 3x3 corner matches the conditional-independence value") {
  Eigen::MatrixXd partial(3, 3);
  double s12 = 0.6, s23 = -0.4, s22 = 2.0;
  partial << 1.5, s12, kNan, s12, s22, s23, kNan, s23, 1.2;
  Eigen::MatrixXd full = complete_covariance(partial);
  CHECK(full(0, 2) == doctest::Approx(s12 * s23 / s22).epsilon(1e-8));
  CHECK(full(2, 0) == full(0, 2));

  // The filled value is a local determinant maximum.
  double det = full.determinant();
  for (double delta : {-1e-4, 1e-4}) {
    Eigen::MatrixXd probe = full;
    probe(0, 2) += delta;
    probe(2, 0) += delta;
    CHECK(probe.determinant() <= det + 1e-12);
  }
}

TEST_CASE("a fully known matrix is returned unchanged") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 0.3, 0.3, 1;
  CHECK((complete_covariance(m) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("complete_covariance validates its input") {
  Eigen::MatrixXd bad_diag(2, 2);
  bad_diag << kNan, 0, 0, 1;
  CHECK_THROWS_AS(complete_covariance(bad_diag), std::invalid_argument);

  Eigen::MatrixXd asym(2, 2);
  asym << 1, kNan, 0.2, 1;
  CHECK_THROWS_AS(complete_covariance(asym), std::invalid_argument);

  CHECK_THROWS_AS(complete_covariance(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
}

TEST_CASE("repair_psd flips negative eigenvalues to their magnitudes") {
  Eigen::MatrixXd d = Eigen::Vector2d(1.0, -0.5).asDiagonal();
  Eigen::MatrixXd r = repair_psd(d);
  CHECK(r(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("repair_psd is a fixed point on PSD input") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 0.5, 0.5, 1;
  CHECK((repair_psd(m) - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("repair_psd keeps eigenvectors while fixing eigenvalues") {
  // Build from chosen eigenvectors with eigenvalues {2, -1}.
  double c = std::cos(0.4), s = std::sin(0.4);
  Eigen::Matrix2d q;
  q << c, -s, s, c;
  Eigen::Matrix2d m = q * Eigen::Vector2d(2.0, -1.0).asDiagonal() * q.transpose();
  Eigen::Matrix2d want = q * Eigen::Vector2d(2.0, 1.0).asDiagonal() * q.transpose();
  CHECK((repair_psd(m) - want).cwiseAbs().maxCoeff() < 1e-10);
}
