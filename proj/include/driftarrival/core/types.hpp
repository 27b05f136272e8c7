#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "driftarrival/errors.hpp"

namespace driftarrival {

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace core {

inline constexpr int kMaxDim = 16;

/// Dimensionless channel description. Lengths are in units of the
/// transmitter-receiver distance, time in units of distance / perpendicular
/// drift speed, so the perpendicular drift component is identically 1 and the
/// absorbing hyperplane sits at coordinate 1.
template <class Scalar>
struct ChannelParamsT {
  int dim = 2;                     ///< total spatial dimension D, 1 <= D <= 16
  Scalar sigma = Scalar(1);        ///< dimensionless noise scale, sigma > 0
  Vector<Scalar> lateral_drift;    ///< drift components 2..D, size D-1
  Vector<Scalar> lateral_origin;   ///< release point components 2..D, size D-1

  Scalar sigma_sq() const { return sigma * sigma; }
  int lateral_dim() const { return dim - 1; }
};

using ChannelParams = ChannelParamsT<double>;

/// Throws std::invalid_argument unless `p` is internally consistent:
/// finite positive sigma, 1 <= dim <= 16, lateral vectors of size dim-1.
template <class Scalar>
void validate(const ChannelParamsT<Scalar>& p) {
  if (p.dim < 1 || p.dim > kMaxDim)
    throw std::invalid_argument("channel dim must be in [1, " +
                                std::to_string(kMaxDim) + "], got " +
                                std::to_string(p.dim));
  if (!(p.sigma > Scalar(0)) || !std::isfinite(static_cast<double>(p.sigma)))
    throw std::invalid_argument("channel sigma must be finite and > 0");
  if (p.lateral_drift.size() != p.dim - 1)
    throw std::invalid_argument("lateral_drift must have dim-1 entries");
  if (p.lateral_origin.size() != p.dim - 1)
    throw std::invalid_argument("lateral_origin must have dim-1 entries");
  for (Eigen::Index k = 0; k < p.lateral_drift.size(); ++k) {
    if (!std::isfinite(static_cast<double>(p.lateral_drift[k])) ||
        !std::isfinite(static_cast<double>(p.lateral_origin[k])))
      throw std::invalid_argument("lateral drift/origin must be finite");
  }
}

/// Channel in physical units (micrometers, seconds by convention, but any
/// coherent unit system works). `diffusion_sigma_sq` is the variance rate
/// sigma_phys^2 of the driving noise, i.e. Var[dX] = sigma_phys^2 dt.
struct PhysicalConfig {
  double tx_rx_distance = 1.0;      ///< transmitter-receiver distance lambda
  double perp_drift = 1.0;          ///< drift component toward receiver v_p
  double diffusion_sigma_sq = 1.0;  ///< noise variance rate sigma_phys^2
  Eigen::VectorXd lateral_drift;    ///< physical drift components 2..D
  Eigen::VectorXd lateral_origin;   ///< physical release components 2..D

  int dim() const { return static_cast<int>(lateral_drift.size()) + 1; }
  /// Time unit of the dimensionless system, tx_rx_distance / perp_drift.
  double time_scale() const { return tx_rx_distance / perp_drift; }
};

/// One absorbed trajectory: arrival time and lateral position on the
/// receiver hyperplane (components 2..D).
struct ArrivalSample {
  double time = 0.0;
  Eigen::VectorXd lateral;
};

/// Maps a physical channel to dimensionless form. Throws ConfigError when
/// distance, perp_drift, or diffusion_sigma_sq is not strictly positive, or
/// the lateral vectors disagree in size.
inline ChannelParams normalize(const PhysicalConfig& cfg) {
  if (!(cfg.tx_rx_distance > 0) || !std::isfinite(cfg.tx_rx_distance))
    throw ConfigError("tx_rx_distance must be finite and > 0");
  if (!(cfg.perp_drift > 0) || !std::isfinite(cfg.perp_drift))
    throw ConfigError("perp_drift must be finite and > 0");
  if (!(cfg.diffusion_sigma_sq > 0) || !std::isfinite(cfg.diffusion_sigma_sq))
    throw ConfigError("diffusion_sigma_sq must be finite and > 0");
  if (cfg.lateral_drift.size() != cfg.lateral_origin.size())
    throw ConfigError("lateral drift and origin must have equal length");

  ChannelParams p;
  p.dim = cfg.dim();
  p.sigma = std::sqrt(cfg.diffusion_sigma_sq / (cfg.tx_rx_distance * cfg.perp_drift));
  p.lateral_drift = cfg.lateral_drift / cfg.perp_drift;
  p.lateral_origin = cfg.lateral_origin / cfg.tx_rx_distance;
  validate(p);
  return p;
}

/// Inverse of normalize for a chosen distance and perpendicular drift.
inline PhysicalConfig denormalize(const ChannelParams& p, double distance,
                                  double perp_drift) {
  validate(p);
  if (!(distance > 0) || !std::isfinite(distance))
    throw ConfigError("tx_rx_distance must be finite and > 0");
  if (!(perp_drift > 0) || !std::isfinite(perp_drift))
    throw ConfigError("perp_drift must be finite and > 0");

  PhysicalConfig cfg;
  cfg.tx_rx_distance = distance;
  cfg.perp_drift = perp_drift;
  cfg.diffusion_sigma_sq = p.sigma_sq() * distance * perp_drift;
  cfg.lateral_drift = p.lateral_drift * perp_drift;
  cfg.lateral_origin = p.lateral_origin * distance;
  return cfg;
}

/// Converts a dimensionless arrival back to physical units.
inline ArrivalSample denormalize_sample(const ArrivalSample& s,
                                        const PhysicalConfig& cfg) {
  ArrivalSample out;
  out.time = s.time * cfg.time_scale();
  out.lateral = s.lateral * cfg.tx_rx_distance;
  return out;
}

/// Converts a physical arrival to dimensionless units.
inline ArrivalSample normalize_sample(const ArrivalSample& s,
                                      const PhysicalConfig& cfg) {
  ArrivalSample out;
  out.time = s.time / cfg.time_scale();
  out.lateral = s.lateral / cfg.tx_rx_distance;
  return out;
}

}  // namespace core
}  // namespace driftarrival
