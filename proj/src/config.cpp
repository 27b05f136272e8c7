#include "driftarrival/core/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace driftarrival::core {

using nlohmann::json;

DiffusionConvention parse_diffusion_convention(const std::string& name) {
  if (name == "sigma-squared" || name == "sigma_squared")
    return DiffusionConvention::SigmaSquared;
  if (name == "einstein") return DiffusionConvention::Einstein;
  throw ConfigError("diffusion_convention must be 'sigma-squared' or 'einstein', got '" +
                    name + "'");
}

std::string to_string(DiffusionConvention c) {
  return c == DiffusionConvention::SigmaSquared ? "sigma-squared" : "einstein";
}

namespace {

// Accepts both hyphenated and underscored spellings of a key.
const json* find_key(const json& j, const std::string& name) {
  if (auto it = j.find(name); it != j.end()) return &*it;
  std::string alt = name;
  for (char& c : alt) {
    if (c == '_') c = '-';
  }
  if (auto it = j.find(alt); it != j.end()) return &*it;
  return nullptr;
}

template <class T>
T require(const json& j, const std::string& name) {
  const json* v = find_key(j, name);
  if (!v) throw ConfigError("config is missing required field '" + name + "'");
  try {
    return v->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + name + "' has the wrong type: " + e.what());
  }
}

template <class T>
T get_or(const json& j, const std::string& name, T fallback) {
  const json* v = find_key(j, name);
  if (!v) return fallback;
  try {
    return v->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + name + "' has the wrong type: " + e.what());
  }
}

Eigen::VectorXd get_vector(const json& j, const std::string& name, int expected,
                           double fill) {
  const json* v = find_key(j, name);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(expected, fill);
  if (!v) return out;
  if (!v->is_array())
    throw ConfigError("config field '" + name + "' must be an array of numbers");
  if (static_cast<int>(v->size()) != expected)
    throw ConfigError("config field '" + name + "' must have dim-1 = " +
                      std::to_string(expected) + " entries, got " +
                      std::to_string(v->size()));
  for (int k = 0; k < expected; ++k) {
    try {
      out[k] = (*v)[k].get<double>();
    } catch (const json::exception& e) {
      throw ConfigError("config field '" + name + "' has a non-numeric entry: " +
                        std::string(e.what()));
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  const int dim = require<int>(j, "dim");
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("config field 'dim' must be in [1, " +
                      std::to_string(kMaxDim) + "]");

  cfg.convention = parse_diffusion_convention(
      get_or<std::string>(j, "diffusion_convention", "sigma-squared"));

  const double diffusion = require<double>(j, "diffusion");
  cfg.physical.tx_rx_distance = get_or<double>(j, "tx_rx_distance", 1.0);
  cfg.physical.perp_drift = get_or<double>(j, "perp_drift", 1.0);
  cfg.physical.diffusion_sigma_sq =
      cfg.convention == DiffusionConvention::Einstein ? 2.0 * diffusion : diffusion;
  cfg.physical.lateral_drift = get_vector(j, "lateral_drift", dim - 1, 0.0);
  cfg.physical.lateral_origin = get_vector(j, "lateral_origin", dim - 1, 0.0);

  cfg.particles = get_or<std::uint64_t>(j, "particles", cfg.particles);
  cfg.dt = get_or<double>(j, "dt", cfg.dt);
  cfg.horizon = get_or<double>(j, "horizon", cfg.horizon);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.crossing = get_or<std::string>(j, "crossing", cfg.crossing);
  if (cfg.crossing != "step-end" && cfg.crossing != "bridge")
    throw ConfigError("config field 'crossing' must be 'step-end' or 'bridge'");
  if (!(cfg.dt > 0) || !(cfg.horizon > cfg.dt))
    throw ConfigError("config requires 0 < dt < horizon");
  if (cfg.particles < 1)
    throw ConfigError("config field 'particles' must be >= 1");

  normalize(cfg.physical);  // surfaces positivity violations now, not at use time
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not found or unreadable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace driftarrival::core
