#include "driftarrival/io/manifest.hpp"

#include <fstream>

#include "driftarrival/errors.hpp"

namespace driftarrival::io {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from(const nlohmann::json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& x : arr) v[i++] = x.get<double>();
  return v;
}

}  // namespace

void save_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["physical"] = {
      {"tx_rx_distance", m.physical.tx_rx_distance},
      {"perp_drift", m.physical.perp_drift},
      {"diffusion_sigma_sq", m.physical.diffusion_sigma_sq},
      {"lateral_drift", vec_json(m.physical.lateral_drift)},
      {"lateral_origin", vec_json(m.physical.lateral_origin)},
  };
  j["diffusion_convention"] = core::to_string(m.convention);
  const auto channel = core::normalize(m.physical);
  j["channel"] = {
      {"dim", channel.dim},
      {"sigma", channel.sigma},
      {"lateral_drift", vec_json(channel.lateral_drift)},
      {"lateral_origin", vec_json(channel.lateral_origin)},
  };
  j["spec"] = {
      {"particles", m.spec.n_particles},
      {"dt", m.spec.dt},
      {"horizon", m.spec.horizon},
      {"seed", m.spec.seed},
      {"crossing", simulate::to_string(m.spec.crossing)},
  };
  j["threads"] = m.threads;
  j["settings"] = m.settings;
  auto outs = nlohmann::json::object();
  for (const auto& [role, p] : m.outputs) outs[role] = p;
  j["outputs"] = outs;
  j["duration_seconds"] = m.duration_seconds;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", std::string(kToolVersion));
    const auto& ph = j.at("physical");
    m.physical.tx_rx_distance = ph.at("tx_rx_distance").get<double>();
    m.physical.perp_drift = ph.at("perp_drift").get<double>();
    m.physical.diffusion_sigma_sq = ph.at("diffusion_sigma_sq").get<double>();
    m.physical.lateral_drift = vec_from(ph.at("lateral_drift"));
    m.physical.lateral_origin = vec_from(ph.at("lateral_origin"));
    m.convention = core::parse_diffusion_convention(
        j.at("diffusion_convention").get<std::string>());
    const auto& sp = j.at("spec");
    m.spec.n_particles = sp.at("particles").get<std::uint64_t>();
    m.spec.dt = sp.at("dt").get<double>();
    m.spec.horizon = sp.at("horizon").get<double>();
    m.spec.seed = sp.at("seed").get<std::uint64_t>();
    m.spec.crossing =
        simulate::parse_crossing_mode(sp.at("crossing").get<std::string>());
    m.threads = j.value("threads", 0u);
    m.settings = j.value("settings", nlohmann::json::object());
    if (j.contains("outputs"))
      for (const auto& [role, p] : j.at("outputs").items())
        m.outputs.emplace_back(role, p.get<std::string>());
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest '" + path + "' is missing fields: " + e.what());
  }
}

}  // namespace driftarrival::io
