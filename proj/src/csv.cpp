#include "driftarrival/io/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "driftarrival/errors.hpp"

namespace driftarrival::io {

namespace {

std::string join_full(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_full(v[i]);
  }
  return out.empty() ? "-" : out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  if (text == "-") return Eigen::VectorXd();
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str())
      throw IoError("sample file: bad vector entry '" + item + "'");
    vals.push_back(v);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

double parse_double(const std::string& text, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str())
    throw IoError(std::string("sample file: bad ") + what + " '" + text + "'");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_samples_csv(const std::string& path, const simulate::SimResult& r) {
  auto out = open_out(path);
  const auto& p = r.params_echo;
  const auto& s = r.spec_echo;
  out << "# driftarrival samples\n";
  out << "# dim=" << p.dim << " sigma=" << format_full(p.sigma)
      << " lateral_drift=" << join_full(p.lateral_drift)
      << " lateral_origin=" << join_full(p.lateral_origin) << "\n";
  out << "# dt=" << format_full(s.dt) << " horizon=" << format_full(s.horizon)
      << " seed=" << s.seed << " crossing=" << to_string(s.crossing)
      << " censored=" << r.n_censored << "\n";
  out << "t";
  for (int k = 2; k <= p.dim; ++k) out << ",x" << k;
  out << "\n";
  std::string line;
  for (Eigen::Index i = 0; i < r.arrivals.size(); ++i) {
    line = format_full(r.arrivals.t[i]);
    for (Eigen::Index j = 0; j < r.arrivals.x.cols(); ++j) {
      line += ',';
      line += format_full(r.arrivals.x(i, j));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

SampleFile read_samples_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");

  SampleFile f;
  f.params.sigma = 1.0;
  bool saw_dim = false;
  std::string line;
  std::vector<double> t_vals;
  std::vector<double> x_vals;
  Eigen::Index n_lat = -1;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string token;
      while (ss >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string val = token.substr(eq + 1);
        if (key == "dim") {
          f.params.dim = static_cast<int>(parse_double(val, "dim"));
          saw_dim = true;
        } else if (key == "sigma") {
          f.params.sigma = parse_double(val, "sigma");
        } else if (key == "lateral_drift") {
          f.params.lateral_drift = parse_vector(val);
        } else if (key == "lateral_origin") {
          f.params.lateral_origin = parse_vector(val);
        } else if (key == "dt") {
          f.spec.dt = parse_double(val, "dt");
        } else if (key == "horizon") {
          f.spec.horizon = parse_double(val, "horizon");
        } else if (key == "seed") {
          f.spec.seed =
              static_cast<std::uint64_t>(std::strtoull(val.c_str(), nullptr, 10));
        } else if (key == "crossing") {
          f.spec.crossing = simulate::parse_crossing_mode(val);
        } else if (key == "censored") {
          f.censored =
              static_cast<std::uint64_t>(std::strtoull(val.c_str(), nullptr, 10));
        }
      }
      continue;
    }
    if (line[0] == 't') {
      // header row: count the lateral columns
      n_lat = static_cast<Eigen::Index>(
                  std::count(line.begin(), line.end(), ','));
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = parse_double(cell, "sample value");
      if (col == 0)
        t_vals.push_back(v);
      else
        x_vals.push_back(v);
      ++col;
    }
    if (n_lat < 0) n_lat = col - 1;
    if (col != n_lat + 1)
      throw IoError("sample file: row with " + std::to_string(col) +
                    " columns, expected " + std::to_string(n_lat + 1));
  }
  if (n_lat < 0) throw IoError("sample file '" + path + "' has no sample rows");

  if (!saw_dim) f.params.dim = static_cast<int>(n_lat) + 1;
  if (f.params.dim != static_cast<int>(n_lat) + 1)
    throw IoError("sample file: dim=" + std::to_string(f.params.dim) +
                  " but rows carry " + std::to_string(n_lat) +
                  " lateral columns");
  if (f.params.lateral_drift.size() == 0)
    f.params.lateral_drift = Eigen::VectorXd::Zero(n_lat);
  if (f.params.lateral_origin.size() == 0)
    f.params.lateral_origin = Eigen::VectorXd::Zero(n_lat);
  try {
    core::validate(f.params);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("sample file: inconsistent metadata: ") +
                  e.what());
  }

  const Eigen::Index n = static_cast<Eigen::Index>(t_vals.size());
  f.samples.t.resize(n);
  f.samples.x.resize(n, n_lat);
  for (Eigen::Index i = 0; i < n; ++i) {
    f.samples.t[i] = t_vals[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n_lat; ++j)
      f.samples.x(i, j) = x_vals[static_cast<std::size_t>(i * n_lat + j)];
  }
  f.spec.n_particles = static_cast<std::uint64_t>(n) + f.censored;
  return f;
}

void write_histogram_csv(const std::string& path,
                         const validate::Histogram2D& h) {
  auto out = open_out(path);
  out << "# driftarrival histogram\n";
  out << "# total=" << h.total << " dropped=" << h.dropped << "\n";
  out << "t_lo,t_hi,x_lo,x_hi,count\n";
  for (Eigen::Index i = 0; i + 1 < h.t_edges.size(); ++i)
    for (Eigen::Index j = 0; j + 1 < h.x_edges.size(); ++j)
      out << format_full(h.t_edges[i]) << ',' << format_full(h.t_edges[i + 1])
          << ',' << format_full(h.x_edges[j]) << ','
          << format_full(h.x_edges[j + 1]) << ','
          << format_full(h.counts(i, j)) << "\n";
  finish(out, path);
}

void write_model_csv(const std::string& path, const Eigen::VectorXd& t_edges,
                     const Eigen::VectorXd& x_edges,
                     const Eigen::MatrixXd& prob) {
  if (prob.rows() != t_edges.size() - 1 || prob.cols() != x_edges.size() - 1)
    throw std::invalid_argument("model grid does not match its edges");
  auto out = open_out(path);
  out << "# driftarrival model bin probabilities\n";
  out << "# off_grid=" << format_full(std::max(0.0, 1.0 - prob.sum())) << "\n";
  out << "t_lo,t_hi,x_lo,x_hi,prob\n";
  for (Eigen::Index i = 0; i < prob.rows(); ++i)
    for (Eigen::Index j = 0; j < prob.cols(); ++j)
      out << format_full(t_edges[i]) << ',' << format_full(t_edges[i + 1])
          << ',' << format_full(x_edges[j]) << ','
          << format_full(x_edges[j + 1]) << ',' << format_full(prob(i, j))
          << "\n";
  finish(out, path);
}

}  // namespace driftarrival::io
