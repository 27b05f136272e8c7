#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "driftarrival/analytic/densities.hpp"
#include "driftarrival/core/types.hpp"
#include "driftarrival/validate/histogram.hpp"

namespace driftarrival::validate {

/// Joint arrival density conditioned on absorption by `horizon`:
/// joint_pdf(t, x) / fat_cdf(horizon). Defined for 0 < t <= horizon.
inline double conditional_joint_pdf(double t, const Eigen::VectorXd& x,
                                    const core::ChannelParams& p,
                                    double horizon) {
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be positive");
  if (!(t > 0.0) || t > horizon)
    throw std::domain_error("arrival time outside (0, horizon]");
  return analytic::joint_pdf<double>(t, x, p) / analytic::fat_cdf(horizon, p);
}

/// Chi-square and total-variation comparison of a binned sample against
/// the conditional arrival law.
struct GofReport {
  double chi2_stat = 0.0;
  /// Retained cells minus one, after merging low-expectation cells.
  int dof = 0;
  double p_value = 0.0;
  /// Half L1 distance between empirical and model bin frequencies over
  /// the unmerged partition (all histogram bins plus the overflow cell).
  double total_variation = 0.0;
  /// Cells remaining after merging (dof + 1).
  int retained_cells = 0;
};

/// Model probability of each histogram bin under the conditional arrival
/// law: rows follow t_edges, columns follow x_edges. The lateral slice is
/// a Gaussian interval mass in closed form; the time direction is
/// integrated adaptively. Probabilities of all bins sum to at most 1;
/// the remainder is the overflow (out-of-range) mass.
Eigen::MatrixXd bin_probabilities(const Eigen::VectorXd& t_edges,
                                  const Eigen::VectorXd& x_edges,
                                  const core::ChannelParams& p,
                                  double horizon);

/// Chi-square test of a histogram against the conditional arrival law.
/// Cells with expected count below 5 are greedily merged into their
/// smallest-expectation neighbour (the overflow cell borders every edge
/// bin); throws CannotTestError when fewer than two cells survive.
GofReport gof_report(const Histogram2D& h, const core::ChannelParams& p,
                     double horizon);

/// Binning grid that frames the arrival ridge: `nt` uniform time bins on
/// [0, horizon] and `nx` lateral bins covering the drift track plus four
/// lateral standard deviations at t = 1 on each side.
std::pair<Eigen::VectorXd, Eigen::VectorXd> default_grid(
    const core::ChannelParams& p, double horizon, int nt = 40, int nx = 40);

/// Upper regularized incomplete gamma Q(a, x); the chi-square survival
/// function is Q(dof / 2, stat / 2).
double gamma_q(double a, double x);

}  // namespace driftarrival::validate
