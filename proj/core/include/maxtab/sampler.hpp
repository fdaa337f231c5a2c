#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>

namespace maxtab {

struct EnergyModel;

// Support region { x : (x - center)' Sigma^-1 (x - center) <= cutoff }.
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd covariance;
  double mahalanobis_sq_cutoff = 25.0;
  Eigen::MatrixXd chol;  // lower factor of covariance; call finalize() to fill

  void finalize();
  double radius() const { return std::sqrt(mahalanobis_sq_cutoff); }
  // Whitened coordinates y with |y|^2 = Mahalanobis distance squared.
  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;
  Eigen::VectorXd unwhiten(const Eigen::VectorXd& y) const;
  double mahalanobis_sq(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;
};

// Out-of-support points fold back along their whitened direction:
// |y| -> |2R - |y|| repeatedly until inside. Interior points are unchanged.
Eigen::VectorXd reflect_into_ellipsoid(const Eigen::VectorXd& point, const Ellipsoid& e);

struct SamplerConfig {
  int burn_in = 200;
  int thinning = 25;            // keep every k-th post-burn-in step
  double proposal_scale = 0.2;  // proposal covariance is scale^2 * Sigma
  int n_chains = 0;             // 0 = hardware concurrency
  double mahalanobis_sq_cutoff = 25.0;
  std::uint64_t seed = 0;
};

struct Chain {
  Eigen::VectorXd current_point;
  std::mt19937_64 rng;
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  std::int64_t nonfinite_energy = 0;
};

double acceptance_rate(const Chain& chain);

struct MhResult {
  Eigen::MatrixXd sample;
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  std::int64_t nonfinite_energy = 0;

  double acceptance_rate() const {
    return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

// Runs independent chains in parallel (each with its own seeded generator,
// starting at the ellipsoid center) and concatenates their thinned points in
// chain order, so results depend only on the configuration.
MhResult mh_sample(const EnergyModel& model, const SamplerConfig& config, std::size_t n);

}  // namespace maxtab
