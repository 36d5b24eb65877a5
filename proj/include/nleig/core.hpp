#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nleig {

/// Power-law nonlinearity F(rho) = c * rho^m with f = F' and f' = F''.
/// Admissible exponents are 1 < m < 3; c = 0 degenerates to the linear
/// problem (f identically zero) and is accepted for oracle runs.
struct Nonlinearity {
  double c = 0.5;
  double m = 2.0;

  Nonlinearity() = default;
  Nonlinearity(double c_, double m_) : c(c_), m(m_) { validate(); }

  bool linear() const { return c == 0.0; }
  void validate() const;
};

struct NonlinearityEval {
  double F = 0.0;
  double f = 0.0;
  std::optional<double> fprime;  // absent when m < 2 and rho = 0
};

/// Evaluates (F, f, f') at a nonnegative density value.
NonlinearityEval nonlinearity_eval(const Nonlinearity& nl, double rho);

enum class PotentialKind { zero, sin_kink, harmonic_2d, custom_samples };

/// External potential. `sigma` is the declared Sobolev regularity index,
/// carried only for rate prediction in study metadata.
struct Potential {
  PotentialKind kind = PotentialKind::zero;
  double sigma = 0.0;
  std::vector<double> params;  // sample values for custom_samples

  static Potential zero();
  static Potential sin_kink();
  static Potential harmonic_2d();
  static Potential custom_samples(std::vector<double> samples, double sigma);
};

const char* to_string(PotentialKind k);

/// Pointwise evaluation. 1D kinds take x = (x, unused); harmonic_2d takes
/// both coordinates. custom_samples evaluates its trigonometric interpolant.
double potential_value(const Potential& pot, const Eigen::Vector2d& x, int d);

/// Exact Fourier coefficient V_hat_k of the sin_kink potential,
/// V_hat_k = -(2*pi)^{-1/2} / (k^2 - 1/4). Other kinds are unsupported and
/// must fall back to the discrete transform of samples.
double potential_fourier_coeff(const Potential& pot, int k);

enum class GeometryKind { periodic_interval, dirichlet_rectangle };

struct Geometry {
  GeometryKind kind = GeometryKind::periodic_interval;
  int d = 1;
  Eigen::Vector2d sides = Eigen::Vector2d::Zero();  // ignored for periodic

  static Geometry periodic();                        // (0, 2*pi)
  static Geometry interval(double length);           // (0, L), Dirichlet
  static Geometry rectangle(double sx, double sy);   // (0,sx) x (0,sy), Dirichlet
};

/// The continuous problem: minimize E(v) = 1/2 int |grad v|^2
/// + 1/2 int V v^2 + 1/2 int F(v^2) subject to int v^2 = 1.
/// The diffusion coefficient is the identity.
struct ProblemSpec {
  Geometry geometry;
  Potential potential;
  Nonlinearity nonlinearity;
};

/// Throws std::invalid_argument on inconsistent geometry/potential combos.
void validate(const ProblemSpec& problem);

struct AnalyticGroundState {
  std::function<double(const Eigen::Vector2d&)> u;
  double lambda = 0.0;
  double energy = 0.0;
};

/// Closed-form reference solutions, used as oracles:
///  - periodic, V = 0, F(rho) = rho^2/2: constant state, lambda = 1/(2*pi),
///    E = 1/(8*pi);
///  - Dirichlet (0,pi), V = 0, linear: u = sqrt(2/pi) sin(x), lambda = 1.
std::optional<AnalyticGroundState> analytic_ground_state(const ProblemSpec& problem);

}  // namespace nleig
