#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nleig/core.hpp"
#include "nleig/fem.hpp"
#include "nleig/fourier.hpp"

namespace nleig {

struct SCFConfig {
  double tol_density = 1e-10;  // L2 distance between input and output densities
  double tol_lambda = 1e-11;
  int max_iter = 300;
  double damping = 0.3;  // mixing weight beta in (0,1]
  bool adaptive = true;  // halve beta on energy increase, restore on success

  void validate() const;
};

/// Fourier spectral discretization on the periodic interval: modes |k| <= N.
/// Ng = 0 assembles the potential from exact coefficients; Ng >= 4N+1
/// assembles it from the discrete transform of grid samples (the inexact
/// path whose integration error the quadrature study measures).
struct FourierDisc {
  int N = 8;
  int Ng = 0;
};

struct FemDisc {
  std::shared_ptr<const fem::FESpace> space;
};

using Disc = std::variant<FourierDisc, FemDisc>;
using State = std::variant<fourier::FourierCoeffs, fem::FEFunction>;

struct TraceEntry {
  int iter = 0;
  double lambda = 0.0;
  double energy = 0.0;
  double density_change = 0.0;
  double beta = 0.0;
};

struct SolveResult {
  State u;
  double lambda = 0.0;
  double energy = 0.0;
  double residual = 0.0;  // Galerkin residual in the discrete H^{-1} dual norm
  int iterations = 0;
  double min_value = 0.0;  // min of u over grid/nodal points (positivity report)
  std::vector<TraceEntry> trace;
  bool inexact_nonlinearity = false;  // f(rho) interpolated (m != 2 spectral path)

  const fourier::FourierCoeffs& fourier_u() const {
    return std::get<fourier::FourierCoeffs>(u);
  }
  const fem::FEFunction& fem_u() const { return std::get<fem::FEFunction>(u); }
};

struct ScfError : std::runtime_error {
  std::vector<TraceEntry> trace;
  ScfError(const std::string& msg, std::vector<TraceEntry> tr)
      : std::runtime_error(msg), trace(std::move(tr)) {}
};

/// Damped self-consistent-field iteration for the constrained minimizer:
/// solves the linear eigenproblem with potential V + f(rho_mix), mixes
/// rho_mix <- (1-beta) rho_mix + beta |u|^2, and stops when the
/// input/output density distance and the eigenvalue increment fall below
/// the configured tolerances. The returned lambda is the Rayleigh value
/// a(u,u) + int f(u^2) u^2 of the final state; the sign is fixed so that
/// int u >= 0. An optional initial state (possibly on a coarser
/// discretization) seeds both the eigenvector and the density.
SolveResult solve_ground_state(const ProblemSpec& problem, const Disc& disc,
                               const SCFConfig& cfg = {}, const State* initial = nullptr);

/// E(u) = 1/2 int |grad u|^2 + 1/2 int V u^2 + 1/2 int F(u^2) for a state of
/// the given discretization. `exact_potential` overrides the sampled-potential
/// path of a FourierDisc with Ng > 0 (used for cross-comparable energies).
double energy(const ProblemSpec& problem, const Disc& disc, const State& u,
              bool exact_potential = false);

/// Rayleigh value a(u,u) + int f(u^2) u^2 of a normalized state.
double rayleigh_lambda(const ProblemSpec& problem, const Disc& disc, const State& u,
                       bool exact_potential = false);

/// Dual norm of the Galerkin residual A_u u - lambda u over unit-H^1 test
/// functions of the discrete space; zero at exact discrete solutions.
double residual_norm(const ProblemSpec& problem, const Disc& disc, const State& u,
                     double lambda);

double state_l2_norm(const Disc& disc, const State& u);

/// Convolution coefficients of the potential for a Fourier discretization
/// (exact coefficients when Ng = 0, discrete transform of samples
/// otherwise), with cutoff 2N as needed for assembly.
fourier::ConvCoeffs potential_conv_coeffs(const ProblemSpec& problem,
                                          const FourierDisc& disc);

}  // namespace nleig
