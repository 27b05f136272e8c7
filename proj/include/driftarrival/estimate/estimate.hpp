#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "driftarrival/core/types.hpp"
#include "driftarrival/simulate/simulate.hpp"

namespace driftarrival::estimate {

/// Maximum-likelihood fit of theta = (sigma, v^(2), ..., v^(D)) with the
/// per-parameter Cramer-Rao floor evaluated at the fitted point.
struct Estimate {
  Eigen::VectorXd theta_hat;   ///< sigma first, then the lateral drift
  std::uint64_t n_samples = 0;
  double loglik_at_hat = 0;
  Eigen::VectorXd crlb_diag;   ///< inverse FIM diagonal / n at theta_hat

  double sigma_hat() const { return theta_hat[0]; }
  Eigen::VectorXd lateral_drift_hat() const { return theta_hat.tail(theta_hat.size() - 1); }
  core::ChannelParams params(const Eigen::VectorXd& x0) const;
};

/// Closed-form decoupled MLE: the drift solve does not involve sigma, so
///   v_hat = sum(x_i - x0) / sum(t_i)
///   sigma_hat^2 = (1/(D n)) sum [(1 - t_i)^2 + |x_i - x0 - v_hat t_i|^2] / t_i
/// The summed score vanishes at the result (stationarity is exact).
///
/// Throws DegenerateSampleError for fewer than 2 samples or a zero noise
/// estimate; std::invalid_argument for shape mismatches or t <= 0.
Estimate mle(const simulate::SampleSet& samples, int dim,
             const Eigen::VectorXd& x0);

/// Average outer product of per-sample scores, (1/n) sum s s^T.
/// Throws EmptySampleError when there are no samples.
Eigen::MatrixXd empirical_fim(const simulate::SampleSet& samples,
                              const core::ChannelParams& p);

/// Per-parameter Cramer-Rao variance floor for n samples:
///   (sigma^2 / (2 D n), sigma^2 / n, ..., sigma^2 / n).
Eigen::VectorXd crlb_report(const core::ChannelParams& p, std::uint64_t n);

struct StudyRow {
  std::string param;  ///< "sigma", "v2", ..., or "sigma_time_only"
  double emp_var = 0;
  double crlb = 0;
  double ratio = 0;   ///< emp_var / crlb
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::uint64_t n_per_trial = 0;
  int n_trials = 0;
  /// var(time-only sigma estimate) / var(joint sigma estimate); the joint
  /// model sees all D coordinates, so this sits near D.
  double sigma_var_ratio_time_to_joint = 0;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Monte Carlo check of the Cramer-Rao floor: n_trials independent
/// simulate -> mle pipelines of n_per_trial samples each, with the
/// across-trial variance of each parameter compared to crlb_report.
/// A time-only sigma estimator (ignoring lateral positions) is fitted
/// alongside to expose the information carried by the extra coordinates.
StudyReport efficiency_study(const core::ChannelParams& p,
                             std::uint64_t n_per_trial, int n_trials,
                             std::uint64_t seed, unsigned threads = 0);

}  // namespace driftarrival::estimate
