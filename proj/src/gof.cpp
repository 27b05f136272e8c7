#include "driftarrival/validate/gof.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "driftarrival/errors.hpp"
#include "driftarrival/validate/histogram.hpp"

namespace driftarrival::validate {

namespace {

void check_edges(const Eigen::VectorXd& edges, const char* axis) {
  if (edges.size() < 2)
    throw std::invalid_argument(std::string(axis) +
                                " axis needs at least 2 edges");
  for (Eigen::Index i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1]))
      throw std::domain_error(std::string(axis) +
                              " edges must be strictly increasing");
  }
}

// Bin index under [e_i, e_{i+1}) with the last bin closed; -1 if outside.
int bin_index(const Eigen::VectorXd& edges, double v) {
  const Eigen::Index n = edges.size();
  if (v < edges[0] || v > edges[n - 1]) return -1;
  if (v == edges[n - 1]) return static_cast<int>(n - 2);
  const double* lo = edges.data();
  return static_cast<int>(std::upper_bound(lo, lo + n, v) - lo) - 1;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

// 7-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[7] = {
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
    0.0,
    0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
constexpr double kGlWeight[7] = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189, 0.2797053914892766, 0.1294849661688697};

template <class F>
double gl7(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < 7; ++k) acc += kGlWeight[k] * f(mid + half * kGlNode[k]);
  return acc * half;
}

// Adaptive panel splitting: accepts a panel when halving changes the
// estimate by less than its share of the absolute tolerance.
template <class F>
double adaptive_gl7(const F& f, double a, double b, double tol, int depth) {
  const double whole = gl7(f, a, b);
  const double mid = 0.5 * (a + b);
  const double split = gl7(f, a, mid) + gl7(f, mid, b);
  if (std::abs(split - whole) <= tol || depth >= 24) return split;
  return adaptive_gl7(f, a, mid, 0.5 * tol, depth + 1) +
         adaptive_gl7(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace

Histogram2D build_histogram(const simulate::SampleSet& samples,
                            const Eigen::VectorXd& t_edges,
                            const Eigen::VectorXd& x_edges) {
  check_edges(t_edges, "time");
  check_edges(x_edges, "lateral");
  if (samples.x.cols() != 1)
    throw std::invalid_argument(
        "histogram binning needs D = 2 samples (one lateral column)");

  Histogram2D h;
  h.t_edges = t_edges;
  h.x_edges = x_edges;
  h.counts = Eigen::MatrixXd::Zero(t_edges.size() - 1, x_edges.size() - 1);
  for (Eigen::Index s = 0; s < samples.t.size(); ++s) {
    const int i = bin_index(t_edges, samples.t[s]);
    const int j = bin_index(x_edges, samples.x(s, 0));
    if (i < 0 || j < 0) {
      ++h.dropped;
      continue;
    }
    h.counts(i, j) += 1.0;
    ++h.total;
  }
  return h;
}

Eigen::MatrixXd bin_probabilities(const Eigen::VectorXd& t_edges,
                                  const Eigen::VectorXd& x_edges,
                                  const core::ChannelParams& p,
                                  double horizon) {
  check_edges(t_edges, "time");
  check_edges(x_edges, "lateral");
  core::validate(p);
  if (p.dim != 2)
    throw std::invalid_argument("bin probabilities are defined for D = 2");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be positive");

  const double norm = analytic::fat_cdf(horizon, p);
  const double v = p.lateral_drift[0];
  const double x0 = p.lateral_origin[0];
  const Eigen::Index nt = t_edges.size() - 1, nx = x_edges.size() - 1;
  Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(nt, nx);

  for (Eigen::Index i = 0; i < nt; ++i) {
    const double t_lo = std::max(t_edges[i], 0.0);
    const double t_hi = std::min(t_edges[i + 1], horizon);
    if (!(t_hi > t_lo)) continue;  // bin lies outside (0, horizon]
    for (Eigen::Index j = 0; j < nx; ++j) {
      const double x_lo = x_edges[j], x_hi = x_edges[j + 1];
      // Lateral law at time t is Gaussian, so the x slice integrates in
      // closed form and only the time direction needs quadrature.
      const auto slice = [&](double t) {
        const double s = p.sigma * std::sqrt(t);
        const double mu = x0 + v * t;
        const double mass = std_normal_cdf((x_hi - mu) / s) -
                            std_normal_cdf((x_lo - mu) / s);
        return analytic::fat_pdf(t, p) * mass;
      };
      prob(i, j) = adaptive_gl7(slice, t_lo, t_hi, 1e-13, 0) / norm;
    }
  }
  return prob;
}

GofReport gof_report(const Histogram2D& h, const core::ChannelParams& p,
                     double horizon) {
  const Eigen::MatrixXd prob =
      bin_probabilities(h.t_edges, h.x_edges, p, horizon);
  if (h.counts.rows() != prob.rows() || h.counts.cols() != prob.cols())
    throw std::invalid_argument("histogram counts do not match its edges");
  const double n = static_cast<double>(h.total + h.dropped);
  if (h.total + h.dropped == 0)
    throw CannotTestError("goodness of fit needs at least one sample");

  // Unmerged partition: all grid bins plus one overflow cell that holds
  // the out-of-range model mass and the dropped samples.
  const int nt = static_cast<int>(h.counts.rows());
  const int nx = static_cast<int>(h.counts.cols());
  const int n_bins = nt * nx;
  struct Cell {
    double count = 0.0;
    double prob = 0.0;
    std::set<int> adj;
    bool alive = true;
  };
  std::vector<Cell> cells(n_bins + 1);
  const int overflow = n_bins;
  double prob_sum = 0.0;
  GofReport rep;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int id = i * nx + j;
      cells[id].count = h.counts(i, j);
      cells[id].prob = prob(i, j);
      prob_sum += prob(i, j);
      if (i > 0) cells[id].adj.insert(id - nx);
      if (i + 1 < nt) cells[id].adj.insert(id + nx);
      if (j > 0) cells[id].adj.insert(id - 1);
      if (j + 1 < nx) cells[id].adj.insert(id + 1);
      // The overflow region surrounds the grid, so it borders edge bins.
      if (i == 0 || i + 1 == nt || j == 0 || j + 1 == nx) {
        cells[id].adj.insert(overflow);
        cells[overflow].adj.insert(id);
      }
      rep.total_variation +=
          std::abs(cells[id].count / n - cells[id].prob);
    }
  }
  cells[overflow].count = static_cast<double>(h.dropped);
  cells[overflow].prob = std::max(0.0, 1.0 - prob_sum);
  rep.total_variation +=
      std::abs(cells[overflow].count / n - cells[overflow].prob);
  rep.total_variation *= 0.5;

  // Greedy merge: the smallest-expectation cell joins its
  // smallest-expectation neighbour until every cell expects >= 5.
  const double min_expected = 5.0;
  for (;;) {
    int u = -1;
    double u_exp = std::numeric_limits<double>::infinity();
    int alive = 0;
    for (int c = 0; c <= n_bins; ++c) {
      if (!cells[c].alive) continue;
      ++alive;
      const double e = n * cells[c].prob;
      if (e < u_exp) {
        u_exp = e;
        u = c;
      }
    }
    if (u_exp >= min_expected) {
      rep.retained_cells = alive;
      break;
    }
    if (alive < 2)
      throw CannotTestError(
          "expected counts below 5 even after merging all cells; "
          "use more samples or a coarser grid");
    int v = -1;
    double v_exp = std::numeric_limits<double>::infinity();
    for (int c : cells[u].adj) {
      if (!cells[c].alive) continue;
      const double e = n * cells[c].prob;
      if (e < v_exp) {
        v_exp = e;
        v = c;
      }
    }
    // The grid-plus-overflow graph is connected, so an isolated alive
    // cell cannot occur while another alive cell exists.
    if (v < 0)
      throw CannotTestError("histogram cells cannot be merged further");
    cells[u].count += cells[v].count;
    cells[u].prob += cells[v].prob;
    cells[v].alive = false;
    for (int c : cells[v].adj) {
      cells[c].adj.erase(v);
      if (c != u && cells[c].alive) {
        cells[c].adj.insert(u);
        cells[u].adj.insert(c);
      }
    }
    cells[u].adj.erase(u);
    cells[u].adj.erase(v);
  }

  if (rep.retained_cells < 2)
    throw CannotTestError("chi-square needs at least two cells");
  for (int c = 0; c <= n_bins; ++c) {
    if (!cells[c].alive) continue;
    const double expect = n * cells[c].prob;
    const double d = cells[c].count - expect;
    rep.chi2_stat += d * d / expect;
  }
  rep.dof = rep.retained_cells - 1;
  rep.p_value = gamma_q(0.5 * rep.dof, 0.5 * rep.chi2_stat);
  return rep;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> default_grid(
    const core::ChannelParams& p, double horizon, int nt, int nx) {
  core::validate(p);
  if (p.dim != 2)
    throw std::invalid_argument("binning grid is defined for D = 2");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be positive");
  if (nt < 1 || nx < 1)
    throw std::invalid_argument("grid needs at least one bin per axis");

  const double drift_reach = p.lateral_drift[0] * horizon;
  const double x0 = p.lateral_origin[0];
  // Four lateral standard deviations at the typical arrival time t = 1,
  // widened to cover wherever the drift carries the ridge by `horizon`.
  const double pad = 4.0 * p.sigma;
  const double lo = x0 + std::min(0.0, drift_reach) - pad;
  const double hi = x0 + std::max(0.0, drift_reach) + pad;
  return {Eigen::VectorXd::LinSpaced(nt + 1, 0.0, horizon),
          Eigen::VectorXd::LinSpaced(nx + 1, lo, hi)};
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw std::domain_error("gamma_q needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Lower series: P(a, x) = x^a e^-x / Gamma(a) * sum x^k / (a)_k+1.
    double term = 1.0 / a, sum = term, ap = a;
    for (int k = 0; k < 500; ++k) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  // Continued fraction for Q(a, x), modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, f = d;
  for (int k = 1; k < 500; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefix) * f;
}

}  // namespace driftarrival::validate
