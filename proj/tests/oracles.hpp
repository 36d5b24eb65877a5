// Test-only reference computations. Everything here is built from direct
// summation and dense linear algebra, independent of the library's FFT and
// SCF paths it is used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "nleig/core.hpp"
#include "nleig/fourier.hpp"

namespace oracles {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110;

using Cplx = std::complex<double>;

/// Composite trapezoid rule on [a, b] with n+1 equally spaced points.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  double acc = 0.5 * (f(a) + f(b));
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) acc += f(a + i * h);
  return acc * h;
}

/// Direct evaluation of a coefficient vector at x (no FFT).
inline Cplx eval_direct(const nleig::fourier::FourierCoeffs& v, double x) {
  Cplx acc(0.0, 0.0);
  for (int k = -v.N; k <= v.N; ++k) acc += v.at(k) * std::exp(Cplx(0.0, k * x));
  return acc / kSqrtTwoPi;
}

/// Density coefficients by the direct O(N^2) convolution
/// rho_k = (2 pi)^{-1/2} sum_j u_j conj(u_{j-k}).
inline nleig::fourier::FourierCoeffs density_by_convolution(
    const nleig::fourier::FourierCoeffs& u) {
  nleig::fourier::FourierCoeffs rho(2 * u.N);
  for (int k = -2 * u.N; k <= 2 * u.N; ++k) {
    Cplx acc(0.0, 0.0);
    for (int j = -u.N; j <= u.N; ++j) {
      const int jm = j - k;
      if (std::abs(jm) > u.N) continue;
      acc += u.at(j) * std::conj(u.at(jm));
    }
    rho.at(k) = acc / kSqrtTwoPi;
  }
  return rho;
}

/// Deterministic real-valued random coefficient vector with unit L2 norm.
inline nleig::fourier::FourierCoeffs random_real_state(int N, unsigned seed,
                                                       double decay = 1.5) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  nleig::fourier::FourierCoeffs u(N);
  u.at(0) = dist(rng);
  for (int k = 1; k <= N; ++k) {
    const double scale = std::pow(1.0 + k, -decay);
    const Cplx v(dist(rng) * scale, dist(rng) * scale);
    u.at(k) = v;
    u.at(-k) = std::conj(v);
  }
  u.data /= u.data.norm();
  return u;
}

// ---------------------------------------------------------------------------
// Independent Gross-Pitaevskii energy/gradient in the spectral space, built
// from direct convolutions, and a projected-gradient minimizer over the unit
// sphere. Used to cross-check the SCF fixed point.
// ---------------------------------------------------------------------------

struct SpectralProblem {
  int N = 0;
  Eigen::VectorXcd Vhat;  // e-basis coefficients of V, index n + 2N, |n| <= 2N
  nleig::Nonlinearity nl;

  static SpectralProblem sin_kink(int N, const nleig::Nonlinearity& nl) {
    SpectralProblem p;
    p.N = N;
    p.nl = nl;
    p.Vhat.resize(4 * N + 1);
    const nleig::Potential pot = nleig::Potential::sin_kink();
    for (int n = -2 * N; n <= 2 * N; ++n)
      p.Vhat[n + 2 * N] = nleig::potential_fourier_coeff(pot, n);
    return p;
  }

  // E(x) = 1/2 sum k^2 |x_k|^2 + 1/2 int V rho + (c/2) int rho^2  (m = 2)
  double energy(const nleig::fourier::FourierCoeffs& u) const {
    double kin = 0.0;
    for (int k = -N; k <= N; ++k) kin += double(k) * k * std::norm(u.at(k));
    const auto rho = density_by_convolution(u);
    double pot = 0.0;
    for (int n = -2 * N; n <= 2 * N; ++n)
      pot += (Vhat[n + 2 * N] * std::conj(rho.at(n))).real();
    double quart = 0.0;
    for (int n = -2 * N; n <= 2 * N; ++n) quart += std::norm(rho.at(n));
    return 0.5 * kin + 0.5 * pot + 0.5 * nl.c * quart;
  }

  // Gradient E'(u) = A_u u by direct convolution products.
  Eigen::VectorXcd gradient(const nleig::fourier::FourierCoeffs& u) const {
    const auto rho = density_by_convolution(u);
    Eigen::VectorXcd g(2 * N + 1);
    for (int k = -N; k <= N; ++k) {
      Cplx acc = double(k) * k * u.at(k);
      for (int l = -N; l <= N; ++l) {
        const int n = k - l;
        if (std::abs(n) <= 2 * N) {
          Cplx mult = Vhat[n + 2 * N] / kSqrtTwoPi;
          mult += 2.0 * nl.c * rho.at(n) / kSqrtTwoPi;  // f(rho) = 2 c rho
          acc += mult * u.at(l);
        }
      }
      g[k + N] = acc;
    }
    return g;
  }

  double rayleigh(const nleig::fourier::FourierCoeffs& u) const {
    return (u.data.adjoint() * gradient(u)).value().real();
  }
};

struct PgdResult {
  nleig::fourier::FourierCoeffs u;
  double lambda = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Long-run projected gradient descent on the unit sphere with a
/// Barzilai-Borwein step and an energy-decrease backtracking fallback.
inline PgdResult projected_gradient_minimize(const SpectralProblem& prob, unsigned seed,
                                             int max_iter = 200000,
                                             double grad_tol = 1e-12) {
  nleig::fourier::FourierCoeffs u = random_real_state(prob.N, seed);
  double E = prob.energy(u);
  Eigen::VectorXcd g_prev;
  Eigen::VectorXcd x_prev;
  double step = 0.1;
  PgdResult out;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::VectorXcd g_full = prob.gradient(u);
    const double lambda = (u.data.adjoint() * g_full).value().real();
    const Eigen::VectorXcd g = g_full - lambda * u.data;  // tangent gradient
    const double gn = g.norm();
    if (gn <= grad_tol) break;
    if (it > 0) {
      const Eigen::VectorXcd dx = u.data - x_prev;
      const Eigen::VectorXcd dg = g - g_prev;
      const double denom = std::abs((dx.adjoint() * dg).value().real());
      if (denom > 1e-300)
        step = std::clamp(dx.squaredNorm() / denom, 1e-6, 1e3);
    }
    x_prev = u.data;
    g_prev = g;
    double s = step;
    for (int bt = 0; bt < 60; ++bt) {
      nleig::fourier::FourierCoeffs trial(prob.N);
      trial.data = u.data - s * g;
      trial.data /= trial.data.norm();
      const double Et = prob.energy(trial);
      if (Et <= E - 1e-16 || bt == 59) {
        u = std::move(trial);
        E = Et;
        break;
      }
      s *= 0.5;
    }
  }
  if (u.at(0).real() < 0.0) u.data = -u.data;
  out.u = u;
  out.energy = E;
  out.lambda = prob.rayleigh(u);
  out.grad_norm = (prob.gradient(u) - out.lambda * u.data).norm();
  out.iterations = it;
  return out;
}

}  // namespace oracles
