#include "driftarrival/estimate/estimate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "driftarrival/analytic/densities.hpp"
#include "driftarrival/errors.hpp"
#include "driftarrival/simulate/rng.hpp"

namespace driftarrival::estimate {

core::ChannelParams Estimate::params(const Eigen::VectorXd& x0) const {
  core::ChannelParams p;
  p.dim = static_cast<int>(theta_hat.size());
  p.sigma = theta_hat[0];
  p.lateral_drift = lateral_drift_hat();
  p.lateral_origin = x0;
  core::validate(p);
  return p;
}

Estimate mle(const simulate::SampleSet& samples, int dim,
             const Eigen::VectorXd& x0) {
  const Eigen::Index n = samples.size();
  if (n < 2)
    throw DegenerateSampleError("need at least 2 samples, got " +
                                std::to_string(n));
  if (dim < 1 || dim > core::kMaxDim)
    throw std::invalid_argument("dim out of range");
  if (x0.size() != dim - 1)
    throw std::invalid_argument("x0 must have dim - 1 entries");
  if (samples.x.cols() != dim - 1)
    throw std::invalid_argument("sample laterals must have dim - 1 columns");

  // one-pass long double reductions; the two solves decouple exactly
  long double sum_t = 0;
  Eigen::Matrix<long double, Eigen::Dynamic, 1> sum_dx =
      Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(dim - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = samples.t[i];
    if (!(t > 0)) throw std::invalid_argument("arrival times must be > 0");
    sum_t += t;
    for (int k = 0; k < dim - 1; ++k)
      sum_dx[k] += static_cast<long double>(samples.x(i, k)) - x0[k];
  }
  Eigen::VectorXd v_hat(dim - 1);
  for (int k = 0; k < dim - 1; ++k)
    v_hat[k] = static_cast<double>(sum_dx[k] / sum_t);

  long double q_sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double t = samples.t[i];
    long double q = (1 - t) * (1 - t);
    for (int k = 0; k < dim - 1; ++k) {
      const long double d = samples.x(i, k) - x0[k] - v_hat[k] * t;
      q += d * d;
    }
    q_sum += q / t;
  }
  const double sigma_sq =
      static_cast<double>(q_sum / (static_cast<long double>(dim) * n));
  if (!(sigma_sq > 0))
    throw DegenerateSampleError(
        "zero residual noise; all samples sit at the deterministic limit");

  Estimate e;
  e.theta_hat.resize(dim);
  e.theta_hat[0] = std::sqrt(sigma_sq);
  e.theta_hat.tail(dim - 1) = v_hat;
  e.n_samples = static_cast<std::uint64_t>(n);

  const core::ChannelParams p_hat = e.params(x0);
  long double ll = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    ll += analytic::log_joint_pdf<double>(samples.t[i],
                                          samples.x.row(i).transpose(), p_hat);
  e.loglik_at_hat = static_cast<double>(ll);
  e.crlb_diag = crlb_report(p_hat, e.n_samples);
  return e;
}

Eigen::MatrixXd empirical_fim(const simulate::SampleSet& samples,
                              const core::ChannelParams& p) {
  const Eigen::Index n = samples.size();
  if (n == 0) throw EmptySampleError("no samples for the information matrix");
  core::validate(p);
  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(p.dim, p.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd s =
        analytic::score<double>(samples.t[i], samples.x.row(i).transpose(), p);
    fim.noalias() += s * s.transpose();
  }
  return fim / static_cast<double>(n);
}

Eigen::VectorXd crlb_report(const core::ChannelParams& p, std::uint64_t n) {
  core::validate(p);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Eigen::VectorXd floor_diag(p.dim);
  const double s2 = p.sigma_sq();
  floor_diag[0] = s2 / (2.0 * p.dim * static_cast<double>(n));
  for (int k = 1; k < p.dim; ++k) floor_diag[k] = s2 / static_cast<double>(n);
  return floor_diag;
}

namespace {

double sample_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() /
         static_cast<double>(v.size() - 1);
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string StudyReport::to_csv() const {
  std::string out = "param,emp_var,crlb,ratio\n";
  for (const auto& r : rows)
    out += r.param + "," + format_g17(r.emp_var) + "," + format_g17(r.crlb) +
           "," + format_g17(r.ratio) + "\n";
  return out;
}

std::string StudyReport::to_json() const {
  nlohmann::json j;
  j["n_per_trial"] = n_per_trial;
  j["n_trials"] = n_trials;
  j["sigma_var_ratio_time_to_joint"] = sigma_var_ratio_time_to_joint;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"param", r.param},
                         {"emp_var", r.emp_var},
                         {"crlb", r.crlb},
                         {"ratio", r.ratio}});
  return j.dump(2);
}

StudyReport efficiency_study(const core::ChannelParams& p,
                             std::uint64_t n_per_trial, int n_trials,
                             std::uint64_t seed, unsigned threads) {
  core::validate(p);
  if (n_per_trial < 2) throw std::invalid_argument("n_per_trial must be >= 2");
  if (n_trials < 2) throw std::invalid_argument("n_trials must be >= 2");

  // horizon deep enough that the censored tail is beyond 1e-9 mass, so
  // truncating to the first n_per_trial arrivals is unbiased in practice
  simulate::SimSpec spec;
  spec.dt = 1e-3;
  spec.horizon = 2.0 + 42.0 * p.sigma_sq();
  spec.crossing = simulate::CrossingMode::BridgeCorrected;
  spec.n_particles = n_per_trial + n_per_trial / 16 + 64;

  Eigen::MatrixXd thetas(n_trials, p.dim);
  Eigen::VectorXd sigma_time(n_trials);

  std::atomic<int> cursor{0};
  std::atomic<bool> short_trial{false};
  auto worker = [&] {
    for (;;) {
      const int trial = cursor.fetch_add(1, std::memory_order_relaxed);
      if (trial >= n_trials || short_trial.load()) return;
      simulate::SimSpec s = spec;
      // the trial index keys an independent counter stream
      s.seed = simulate::Philox4x32::words64(
          seed, 0x7374756479ull /* stream tag */,
          static_cast<std::uint64_t>(trial))[0];
      auto r = simulate::simulate(p, s, 1);
      if (r.arrivals.size() < static_cast<Eigen::Index>(n_per_trial)) {
        short_trial.store(true);
        return;
      }
      simulate::SampleSet head;
      head.t = r.arrivals.t.head(static_cast<Eigen::Index>(n_per_trial));
      head.x = r.arrivals.x.topRows(static_cast<Eigen::Index>(n_per_trial));
      const Estimate e = mle(head, p.dim, p.lateral_origin);
      thetas.row(trial) = e.theta_hat.transpose();
      long double q = 0;
      for (Eigen::Index i = 0; i < head.t.size(); ++i) {
        const long double d = 1 - static_cast<long double>(head.t[i]);
        q += d * d / head.t[i];
      }
      sigma_time[trial] = std::sqrt(
          static_cast<double>(q / static_cast<long double>(n_per_trial)));
    }
  };

  const unsigned hw =
      threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_workers =
      std::min<unsigned>(hw, static_cast<unsigned>(n_trials));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (short_trial.load())
    throw DegenerateSampleError(
        "a trial produced fewer arrivals than n_per_trial; the horizon "
        "heuristic does not cover these parameters");

  const Eigen::VectorXd crlb = crlb_report(p, n_per_trial);
  StudyReport rep;
  rep.n_per_trial = n_per_trial;
  rep.n_trials = n_trials;
  for (int k = 0; k < p.dim; ++k) {
    StudyRow row;
    row.param = k == 0 ? "sigma" : "v" + std::to_string(k + 1);
    row.emp_var = sample_variance(thetas.col(k));
    row.crlb = crlb[k];
    row.ratio = row.emp_var / row.crlb;
    rep.rows.push_back(row);
  }
  StudyRow time_row;
  time_row.param = "sigma_time_only";
  time_row.emp_var = sample_variance(sigma_time);
  // times alone carry the D = 1 information 2/sigma^2 about sigma
  time_row.crlb = p.sigma_sq() / (2.0 * static_cast<double>(n_per_trial));
  time_row.ratio = time_row.emp_var / time_row.crlb;
  rep.rows.push_back(time_row);
  rep.sigma_var_ratio_time_to_joint = time_row.emp_var / rep.rows[0].emp_var;
  return rep;
}

}  // namespace driftarrival::estimate
