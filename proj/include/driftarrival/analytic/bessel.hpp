#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace driftarrival::analytic {

namespace detail {

template <class Scalar>
struct ScaledK01 {
  Scalar k0, k1;
};

/// e^z K_0(z) and e^z K_1(z) by the ascending series, accurate for z <= 2.
template <class Scalar>
ScaledK01<Scalar> scaled_k01_series(Scalar z) {
  constexpr Scalar euler = Scalar(0.577215664901532860606512090082402431L);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar q = z * z / 4;
  const Scalar lg = std::log(z / 2);

  // K_0 = -(log(z/2)+gamma) I_0 + sum_k H_k q^k/(k!)^2
  // K_1 = 1/z + log(z/2) I_1 - (z/4) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
  Scalar t0 = 1, i0 = 1, s0 = 0, h = 0;
  Scalar t1 = 1, i1sum = 1;
  Scalar p = 1 - 2 * euler;  // psi(1) + psi(2)
  Scalar s1 = p;
  for (int k = 1; k < 80; ++k) {
    t0 *= q / (Scalar(k) * Scalar(k));
    h += Scalar(1) / Scalar(k);
    i0 += t0;
    s0 += t0 * h;
    t1 *= q / (Scalar(k) * Scalar(k + 1));
    i1sum += t1;
    p = -2 * euler + 2 * h + Scalar(1) / Scalar(k + 1);
    s1 += t1 * p;
    if (t0 < eps * i0 && t1 < eps * i1sum) break;
  }
  const Scalar i1 = (z / 2) * i1sum;
  const Scalar k0 = -(lg + euler) * i0 + s0;
  const Scalar k1 = Scalar(1) / z + lg * i1 - (z / 4) * s1;
  const Scalar ez = std::exp(z);
  return {k0 * ez, k1 * ez};
}

/// e^z K_0(z) and e^z K_1(z) for z > 2: asymptotic prefactor sqrt(pi/2z)
/// times a correction evaluated as a continued fraction (Steed's algorithm
/// on the second Bessel continued fraction at order 0).
template <class Scalar>
ScaledK01<Scalar> scaled_k01_cf(Scalar z) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar a1 = Scalar(0.25);
  Scalar b = 2 * (1 + z);
  Scalar d = 1 / b;
  Scalar h = d, delh = d;
  Scalar q1 = 0, q2 = 1;
  Scalar q = a1, c = a1, a = -a1;
  Scalar s = 1 + q * delh;
  for (int i = 2; i < 1000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const Scalar qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2;
    d = 1 / (b + a * d);
    delh = (b * d - 1) * delh;
    h += delh;
    const Scalar dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h = a1 * h;
  const Scalar pref = std::sqrt(std::numbers::pi_v<Scalar> / (2 * z));
  const Scalar k0 = pref / s;
  const Scalar k1 = k0 * (z + Scalar(0.5) - h) / z;
  return {k0, k1};
}

template <class Scalar>
ScaledK01<Scalar> scaled_k01(Scalar z) {
  return z <= Scalar(2) ? scaled_k01_series(z) : scaled_k01_cf(z);
}

}  // namespace detail

/// e^z * K_nu(z) for the orders used by the arrival-position density:
/// nu in {0, 1/2, 1, 3/2, ..., 8}. The scaled form stays O(1/sqrt(z)) for
/// large z where K_nu itself underflows.
///
/// Half-integer orders start from the closed forms
///   K_{1/2}(z) = sqrt(pi/(2z)) e^{-z},  K_{3/2}(z) = K_{1/2}(z) (1 + 1/z)
/// and integer orders from the K_0/K_1 kernel above; both ladders climb with
/// the stable upward recurrence K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu.
template <class Scalar>
Scalar bessel_k_scaled(Scalar nu, Scalar z) {
  if (!(z > 0)) throw std::domain_error("bessel K requires z > 0");
  const Scalar two_nu = 2 * nu;
  const long twice = std::lround(static_cast<double>(two_nu));
  if (std::abs(two_nu - Scalar(twice)) > Scalar(1e-12) || twice < 0 || twice > 16)
    throw std::domain_error("bessel K order must be k/2 with 0 <= k <= 16, got " +
                            std::to_string(static_cast<double>(nu)));

  if (twice % 2 == 0) {  // integer order
    auto [k0, k1] = detail::scaled_k01(z);
    const int n = static_cast<int>(twice / 2);
    if (n == 0) return k0;
    Scalar prev = k0, cur = k1;
    for (int m = 1; m < n; ++m) {
      const Scalar next = prev + (2 * Scalar(m) / z) * cur;
      prev = cur;
      cur = next;
    }
    return cur;
  }

  const Scalar half = std::sqrt(std::numbers::pi_v<Scalar> / (2 * z));
  if (twice == 1) return half;
  Scalar prev = half, cur = half * (1 + 1 / z);
  // orders 3/2, 5/2, ... up to twice/2
  for (long m = 3; m < twice; m += 2) {
    const Scalar next = prev + (Scalar(m) / z) * cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// K_nu(z) for nu in {0, 1/2, 1, ..., 8}. Underflows to 0 for very large z;
/// use bessel_k_scaled where that matters.
template <class Scalar>
Scalar bessel_k_half_orders(Scalar nu, Scalar z) {
  return bessel_k_scaled(nu, z) * std::exp(-z);
}

}  // namespace driftarrival::analytic
