#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <type_traits>

#include "driftarrival/analytic/bessel.hpp"
#include "driftarrival/core/types.hpp"

namespace driftarrival::analytic {

using FimMatrix = Matrix<double>;

namespace detail {

/// Scaled complementary error function e^{x^2} erfc(x) for x >= 0.
/// Direct product below x = 4 (no overflow there), Lentz-evaluated
/// continued fraction above, where erfc itself loses range.
template <class Scalar>
Scalar erfcx(Scalar x) {
  if (x < Scalar(4)) return std::exp(x * x) * std::erfc(x);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  // sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  Scalar f = x, c = x, d = 0;
  for (int n = 1; n < 300; ++n) {
    const Scalar a = Scalar(n) / 2;
    d = 1 / (x + a * d);
    c = x + a / c;
    const Scalar delta = c * d;
    f *= delta;
    if (std::abs(delta - 1) < eps) break;
  }
  return std::numbers::inv_sqrtpi_v<Scalar> / f;
}

template <class Scalar>
void check_time(Scalar t) {
  if (!(t > Scalar(0))) throw std::domain_error("arrival time must be > 0");
}

template <class Scalar, class Derived>
void check_lateral(const Eigen::MatrixBase<Derived>& x,
                   const core::ChannelParamsT<Scalar>& p) {
  static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                "lateral position scalar type must match the channel's");
  if (x.size() != p.dim - 1)
    throw std::invalid_argument("lateral position must have dim-1 entries");
}

}  // namespace detail

/// Density of the first arrival time: (2 pi s^2 t^3)^{-1/2}
/// exp(-(1-t)^2 / (2 s^2 t)), an inverse Gaussian with unit mean.
template <class Scalar>
Scalar log_fat_pdf(Scalar t, const core::ChannelParamsT<Scalar>& p) {
  detail::check_time(t);
  const Scalar s2 = p.sigma_sq();
  const Scalar d = 1 - t;
  return -Scalar(0.5) * std::log(2 * std::numbers::pi_v<Scalar> * s2) -
         Scalar(1.5) * std::log(t) - d * d / (2 * s2 * t);
}

template <class Scalar>
Scalar fat_pdf(Scalar t, const core::ChannelParamsT<Scalar>& p) {
  return std::exp(log_fat_pdf(t, p));
}

/// Arrival-time distribution function P(T <= t). Stable at every sigma: the
/// exp(2/s^2) Mills-ratio term is folded into erfcx so nothing overflows.
template <class Scalar>
Scalar fat_cdf(Scalar t, const core::ChannelParamsT<Scalar>& p) {
  detail::check_time(t);
  const Scalar s2 = p.sigma_sq();
  const Scalar rt = std::sqrt(t);
  const Scalar phi_arg = (t - 1) / (p.sigma * rt);
  const Scalar head = Scalar(0.5) * std::erfc(-phi_arg / std::numbers::sqrt2_v<Scalar>);
  // exp(2/s^2) Phi(-(t+1)/(s sqrt t)) = erfcx(w) exp(-(1-t)^2/(2 s^2 t)) / 2
  const Scalar w = (t + 1) / (p.sigma * std::sqrt(2 * t));
  const Scalar d = 1 - t;
  const Scalar tail =
      Scalar(0.5) * detail::erfcx(w) * std::exp(-d * d / (2 * s2 * t));
  const Scalar cdf = head + tail;
  return cdf < Scalar(0) ? Scalar(0) : (cdf > Scalar(1) ? Scalar(1) : cdf);
}

/// Gaussian density of the lateral coordinates at time t, centered on the
/// drifted release point. Empty lateral space (dim = 1) gives 1.
template <class Scalar, class Derived>
Scalar log_lateral_pdf(const Eigen::MatrixBase<Derived>& x,
                       std::type_identity_t<Scalar> t,
                       const core::ChannelParamsT<Scalar>& p) {
  detail::check_time(t);
  detail::check_lateral(x, p);
  if (p.dim == 1) return Scalar(0);
  const Scalar s2t = p.sigma_sq() * t;
  const Scalar q =
      (x.derived() - p.lateral_origin - p.lateral_drift * t).squaredNorm();
  return -Scalar(p.dim - 1) / 2 * std::log(2 * std::numbers::pi_v<Scalar> * s2t) -
         q / (2 * s2t);
}

template <class Scalar, class Derived>
Scalar lateral_pdf(const Eigen::MatrixBase<Derived>& x,
                   std::type_identity_t<Scalar> t,
                   const core::ChannelParamsT<Scalar>& p) {
  return std::exp(log_lateral_pdf(x, t, p));
}

/// Joint arrival density over (t, lateral position on the receiver plane),
/// the fused form of fat_pdf * lateral_pdf:
///   (2 pi s^2)^{-D/2} t^{-D/2-1} exp(-[(1-t)^2 + |x - x0 - v t|^2]/(2 s^2 t)).
template <class Scalar, class Derived>
Scalar log_joint_pdf(std::type_identity_t<Scalar> t,
                     const Eigen::MatrixBase<Derived>& x,
                     const core::ChannelParamsT<Scalar>& p) {
  detail::check_time(t);
  detail::check_lateral(x, p);
  const Scalar s2 = p.sigma_sq();
  const Scalar d = 1 - t;
  Scalar q = d * d;
  if (p.dim > 1)
    q += (x.derived() - p.lateral_origin - p.lateral_drift * t).squaredNorm();
  const Scalar half_dim = Scalar(p.dim) / 2;
  return -half_dim * std::log(2 * std::numbers::pi_v<Scalar> * s2) -
         (half_dim + 1) * std::log(t) - q / (2 * s2 * t);
}

template <class Scalar, class Derived>
Scalar joint_pdf(std::type_identity_t<Scalar> t, const Eigen::MatrixBase<Derived>& x,
                 const core::ChannelParamsT<Scalar>& p) {
  return std::exp(log_joint_pdf(t, x, p));
}

/// Marginal density of the arrival position on the receiver plane:
///   2 (|v|/(2 pi s^2))^{D/2} exp(v.w / s^2) K_{D/2}(|v||w| / s^2) / |w|^{D/2}
/// with full-dimension v = (1, lateral drift) and w = (1, x - x0). Evaluated
/// through the scaled Bessel function, so the exponent is the Cauchy-Schwarz
/// defect (v.w - |v||w|)/s^2 <= 0 and nothing overflows far into the tail.
template <class Scalar, class Derived>
Scalar log_fap_pdf(const Eigen::MatrixBase<Derived>& x,
                   const core::ChannelParamsT<Scalar>& p) {
  detail::check_lateral(x, p);
  const Scalar s2 = p.sigma_sq();
  const Scalar vsq = 1 + p.lateral_drift.squaredNorm();
  Scalar wsq = 1, vdotw = 1;
  if (p.dim > 1) {
    const Vector<Scalar> dx = x.derived() - p.lateral_origin;
    wsq += dx.squaredNorm();
    vdotw += p.lateral_drift.dot(dx);
  }
  const Scalar vn = std::sqrt(vsq), wn = std::sqrt(wsq);
  const Scalar nu = Scalar(p.dim) / 2;
  const Scalar z = vn * wn / s2;
  return std::numbers::ln2_v<Scalar> +
         nu * (std::log(vn) - std::log(2 * std::numbers::pi_v<Scalar> * s2) -
               std::log(wn)) +
         (vdotw - vn * wn) / s2 + std::log(bessel_k_scaled(nu, z));
}

template <class Scalar, class Derived>
Scalar fap_pdf(const Eigen::MatrixBase<Derived>& x,
               const core::ChannelParamsT<Scalar>& p) {
  return std::exp(log_fap_pdf(x, p));
}

/// Gradient of log_joint_pdf in theta = (sigma, v^(2), ..., v^(D)):
///   d/dsigma  = -D/sigma + [(1-t)^2 + |Delta|^2] / (sigma^3 t)
///   d/dv^(k)  = Delta^(k) / sigma^2,  Delta = x - x0 - v t.
template <class Scalar, class Derived>
Vector<Scalar> score(std::type_identity_t<Scalar> t,
                     const Eigen::MatrixBase<Derived>& x,
                     const core::ChannelParamsT<Scalar>& p) {
  detail::check_time(t);
  detail::check_lateral(x, p);
  const Scalar s2 = p.sigma_sq();
  Vector<Scalar> g(p.dim);
  const Scalar d = 1 - t;
  Scalar q = d * d;
  if (p.dim > 1) {
    const Vector<Scalar> delta =
        x.derived() - p.lateral_origin - p.lateral_drift * t;
    q += delta.squaredNorm();
    g.tail(p.dim - 1) = delta / s2;
  }
  g[0] = -Scalar(p.dim) / p.sigma + q / (s2 * p.sigma * t);
  return g;
}

/// Fisher information of one arrival observation: diagonal, 2D/sigma^2 for
/// sigma and 1/sigma^2 for each lateral drift component.
template <class Scalar>
Matrix<Scalar> fim_closed_form(const core::ChannelParamsT<Scalar>& p) {
  core::validate(p);
  Matrix<Scalar> fim = Matrix<Scalar>::Zero(p.dim, p.dim);
  const Scalar s2 = p.sigma_sq();
  fim(0, 0) = 2 * Scalar(p.dim) / s2;
  for (int k = 1; k < p.dim; ++k) fim(k, k) = 1 / s2;
  return fim;
}

}  // namespace driftarrival::analytic
