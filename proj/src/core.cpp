#include "nleig/core.hpp"

#include <cmath>

namespace nleig {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void Nonlinearity::validate() const {
  if (c < 0.0) throw std::invalid_argument("nonlinearity: coefficient c must be >= 0");
  if (c > 0.0 && (m <= 1.0 || m >= 3.0))
    throw std::invalid_argument("nonlinearity: exponent m must lie in (1, 3)");
}

NonlinearityEval nonlinearity_eval(const Nonlinearity& nl, double rho) {
  if (rho < 0.0) throw std::domain_error("nonlinearity_eval: negative density");
  NonlinearityEval out;
  if (nl.linear()) {
    out.fprime = 0.0;
    return out;
  }
  out.F = nl.c * std::pow(rho, nl.m);
  out.f = nl.c * nl.m * std::pow(rho, nl.m - 1.0);
  if (rho > 0.0) {
    out.fprime = nl.c * nl.m * (nl.m - 1.0) * std::pow(rho, nl.m - 2.0);
  } else if (nl.m == 2.0) {
    out.fprime = nl.c * nl.m * (nl.m - 1.0);
  } else if (nl.m > 2.0) {
    out.fprime = 0.0;
  }
  // m < 2 at rho = 0: f' unbounded, left unset.
  return out;
}

Potential Potential::zero() { return Potential{PotentialKind::zero, 100.0, {}}; }

Potential Potential::sin_kink() { return Potential{PotentialKind::sin_kink, 1.5, {}}; }

Potential Potential::harmonic_2d() { return Potential{PotentialKind::harmonic_2d, 100.0, {}}; }

Potential Potential::custom_samples(std::vector<double> samples, double sigma) {
  if (samples.empty())
    throw std::invalid_argument("custom_samples potential: empty sample list");
  return Potential{PotentialKind::custom_samples, sigma, std::move(samples)};
}

const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::sin_kink: return "sin_kink";
    case PotentialKind::harmonic_2d: return "harmonic_2d";
    case PotentialKind::custom_samples: return "custom_samples";
  }
  return "?";
}

double potential_value(const Potential& pot, const Eigen::Vector2d& x, int d) {
  switch (pot.kind) {
    case PotentialKind::zero:
      return 0.0;
    case PotentialKind::sin_kink: {
      // 2*pi-periodic extension of sin(|x|/2); this is the function whose
      // Fourier coefficients are -(2*pi)^{-1/2}/(k^2 - 1/4). It equals the
      // kink sin(|x - pi|/2) translated by pi, which leaves every norm,
      // eigenvalue and energy unchanged.
      double t = std::fmod(x[0], kTwoPi);
      if (t < 0.0) t += kTwoPi;
      return std::sin(0.5 * t);
    }
    case PotentialKind::harmonic_2d:
      if (d != 2) throw std::invalid_argument("harmonic_2d potential requires d = 2");
      return x[0] * x[0] + x[1] * x[1];
    case PotentialKind::custom_samples: {
      // Trigonometric interpolant through the samples on the uniform grid
      // 2*pi*j/M. Direct summation; sampled paths use the FFT instead.
      const auto& s = pot.params;
      const int M = static_cast<int>(s.size());
      double t = std::fmod(x[0], kTwoPi);
      if (t < 0.0) t += kTwoPi;
      double acc = 0.0;
      for (int j = 0; j < M; ++j) acc += s[static_cast<size_t>(j)];
      double value = acc / M;
      for (int g = 1; g <= (M - 1) / 2; ++g) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < M; ++j) {
          const double phase = kTwoPi * g * j / M;
          re += s[static_cast<size_t>(j)] * std::cos(phase);
          im -= s[static_cast<size_t>(j)] * std::sin(phase);
        }
        value += 2.0 / M * (re * std::cos(g * t) - im * std::sin(g * t));
      }
      if (M % 2 == 0) {
        double re = 0.0;
        for (int j = 0; j < M; ++j)
          re += s[static_cast<size_t>(j)] * ((j % 2 == 0) ? 1.0 : -1.0);
        value += re / M * std::cos(M / 2 * t);
      }
      return value;
    }
  }
  throw std::logic_error("potential_value: unknown kind");
}

double potential_fourier_coeff(const Potential& pot, int k) {
  if (pot.kind != PotentialKind::sin_kink)
    throw std::invalid_argument(
        "potential_fourier_coeff: exact coefficients only available for sin_kink");
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  return -1.0 / std::sqrt(kTwoPi) / (kk - 0.25);
}

Geometry Geometry::periodic() {
  Geometry g;
  g.kind = GeometryKind::periodic_interval;
  g.d = 1;
  g.sides = Eigen::Vector2d(kTwoPi, 0.0);
  return g;
}

Geometry Geometry::interval(double length) {
  if (length <= 0.0) throw std::invalid_argument("geometry: side length must be positive");
  Geometry g;
  g.kind = GeometryKind::dirichlet_rectangle;
  g.d = 1;
  g.sides = Eigen::Vector2d(length, 0.0);
  return g;
}

Geometry Geometry::rectangle(double sx, double sy) {
  if (sx <= 0.0 || sy <= 0.0)
    throw std::invalid_argument("geometry: side lengths must be positive");
  Geometry g;
  g.kind = GeometryKind::dirichlet_rectangle;
  g.d = 2;
  g.sides = Eigen::Vector2d(sx, sy);
  return g;
}

void validate(const ProblemSpec& problem) {
  problem.nonlinearity.validate();
  const auto& geo = problem.geometry;
  const auto kind = problem.potential.kind;
  if (geo.kind == GeometryKind::periodic_interval) {
    if (geo.d != 1) throw std::invalid_argument("periodic problems are 1D");
    if (kind == PotentialKind::harmonic_2d)
      throw std::invalid_argument("harmonic_2d potential is not periodic");
  } else {
    if (geo.d != 1 && geo.d != 2)
      throw std::invalid_argument("rectangle geometry supports d = 1 or 2");
    if (kind == PotentialKind::sin_kink || kind == PotentialKind::custom_samples)
      throw std::invalid_argument("periodic potentials require periodic geometry");
    if (kind == PotentialKind::harmonic_2d && geo.d != 2)
      throw std::invalid_argument("harmonic_2d potential requires d = 2");
  }
}

std::optional<AnalyticGroundState> analytic_ground_state(const ProblemSpec& problem) {
  const auto& geo = problem.geometry;
  const auto& pot = problem.potential;
  const auto& nl = problem.nonlinearity;
  if (geo.kind == GeometryKind::periodic_interval && pot.kind == PotentialKind::zero &&
      !nl.linear() && nl.m == 2.0) {
    // Constant state: -u'' + 2c u^3 = lambda u with u = (2*pi)^{-1/2}.
    AnalyticGroundState gs;
    const double rho = 1.0 / kTwoPi;
    gs.u = [](const Eigen::Vector2d&) { return 1.0 / std::sqrt(kTwoPi); };
    gs.lambda = 2.0 * nl.c * rho;
    gs.energy = 0.5 * nl.c * rho * rho * kTwoPi;
    return gs;
  }
  if (geo.kind == GeometryKind::dirichlet_rectangle && geo.d == 1 &&
      pot.kind == PotentialKind::zero && nl.linear() &&
      std::abs(geo.sides[0] - M_PI) < 1e-14) {
    AnalyticGroundState gs;
    gs.u = [](const Eigen::Vector2d& x) { return std::sqrt(2.0 / M_PI) * std::sin(x[0]); };
    gs.lambda = 1.0;
    gs.energy = 0.5;
    return gs;
  }
  return std::nullopt;
}

}  // namespace nleig
