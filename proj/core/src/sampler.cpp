#include "maxtab/sampler.hpp"

#include "maxtab/energy.hpp"
#include "maxtab/gaussian.hpp"
#include "maxtab/rng.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>
#include <vector>

namespace maxtab {

void Ellipsoid::finalize() {
  if (center.size() != covariance.rows() || covariance.rows() != covariance.cols())
    throw std::invalid_argument("ellipsoid center and covariance sizes do not match");
  if (mahalanobis_sq_cutoff <= 0) throw std::invalid_argument("ellipsoid cutoff must be positive");
  chol = cholesky_with_jitter(covariance);
}

Eigen::VectorXd Ellipsoid::whiten(const Eigen::VectorXd& x) const {
  return chol.triangularView<Eigen::Lower>().solve(x - center);
}

Eigen::VectorXd Ellipsoid::unwhiten(const Eigen::VectorXd& y) const {
  return center + chol * y;
}

double Ellipsoid::mahalanobis_sq(const Eigen::VectorXd& x) const {
  return whiten(x).squaredNorm();
}

bool Ellipsoid::contains(const Eigen::VectorXd& x) const {
  return mahalanobis_sq(x) <= mahalanobis_sq_cutoff;
}

Eigen::VectorXd reflect_into_ellipsoid(const Eigen::VectorXd& point, const Ellipsoid& e) {
  Eigen::VectorXd y = e.whiten(point);
  double r = y.norm();
  const double R = e.radius();
  if (r <= R) return point;
  Eigen::VectorXd dir = y / r;
  while (r > R) r = std::abs(2.0 * R - r);
  return e.unwhiten(r * dir);
}

double acceptance_rate(const Chain& chain) {
  if (chain.proposed == 0)
    throw std::logic_error("acceptance_rate on a chain with no proposals");
  return static_cast<double>(chain.accepted) / static_cast<double>(chain.proposed);
}

namespace {

struct ChainOutput {
  Eigen::MatrixXd points;
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  std::int64_t nonfinite = 0;
};

ChainOutput run_chain(const EnergyModel& model, const SamplerConfig& cfg,
                      std::size_t n_points, std::uint64_t chain_seed) {
  const Ellipsoid& e = model.ellipsoid;
  const Eigen::Index d = e.center.size();

  Chain chain;
  chain.current_point = e.center;
  chain.rng = std::mt19937_64(chain_seed);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  double current_energy = energy(model, chain.current_point);
  Eigen::VectorXd z(d);
  Eigen::VectorXd proposal(d);

  ChainOutput out;
  out.points.resize(static_cast<Eigen::Index>(n_points), d);
  Eigen::Index emitted = 0;

  const std::int64_t total_steps =
      cfg.burn_in + static_cast<std::int64_t>(cfg.thinning) * static_cast<std::int64_t>(n_points);
  for (std::int64_t step = 1; step <= total_steps; ++step) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(chain.rng);
    proposal = chain.current_point + cfg.proposal_scale * (e.chol * z);
    if (!e.contains(proposal)) proposal = reflect_into_ellipsoid(proposal, e);

    ++chain.proposed;
    double proposal_energy = energy(model, proposal);
    if (!std::isfinite(proposal_energy)) {
      ++chain.nonfinite_energy;
    } else {
      double diff = proposal_energy - current_energy;
      if (diff >= 0.0 || uniform(chain.rng) < std::exp(diff)) {
        chain.current_point = proposal;
        current_energy = proposal_energy;
        ++chain.accepted;
      }
    }

    if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0 && emitted < out.points.rows())
      out.points.row(emitted++) = chain.current_point.transpose();
  }

  out.accepted = chain.accepted;
  out.proposed = chain.proposed;
  out.nonfinite = chain.nonfinite_energy;
  return out;
}

}  // namespace

MhResult mh_sample(const EnergyModel& model, const SamplerConfig& config, std::size_t n) {
  if (config.burn_in < 0 || config.thinning < 1 || config.proposal_scale <= 0)
    throw std::invalid_argument("invalid sampler configuration");
  if (model.ellipsoid.chol.rows() != model.ellipsoid.covariance.rows())
    throw std::invalid_argument("ellipsoid not finalized");

  const Eigen::Index d = model.ellipsoid.center.size();
  MhResult result;
  result.sample.resize(static_cast<Eigen::Index>(n), d);
  if (n == 0) return result;

  int n_chains = config.n_chains;
  if (n_chains <= 0) n_chains = static_cast<int>(std::thread::hardware_concurrency());
  if (n_chains <= 0) n_chains = 1;
  if (static_cast<std::size_t>(n_chains) > n) n_chains = static_cast<int>(n);

  // First n % n_chains chains emit one extra point; concatenation in chain
  // index order keeps the output independent of scheduling.
  std::vector<std::size_t> quota(n_chains, n / n_chains);
  for (std::size_t c = 0; c < n % n_chains; ++c) ++quota[c];

  std::vector<std::future<ChainOutput>> futures;
  futures.reserve(n_chains);
  for (int c = 0; c < n_chains; ++c) {
    std::uint64_t chain_seed = mix_seed(config.seed, static_cast<std::uint64_t>(Stream::chain),
                                        static_cast<std::uint64_t>(c));
    futures.push_back(std::async(std::launch::async, run_chain, std::cref(model),
                                 std::cref(config), quota[c], chain_seed));
  }

  Eigen::Index row = 0;
  for (auto& f : futures) {
    ChainOutput out = f.get();
    result.sample.middleRows(row, out.points.rows()) = out.points;
    row += out.points.rows();
    result.accepted += out.accepted;
    result.proposed += out.proposed;
    result.nonfinite_energy += out.nonfinite;
  }
  return result;
}

}  // namespace maxtab
