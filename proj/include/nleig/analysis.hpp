#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nleig/scf.hpp"

namespace nleig::analysis {

struct ErrorValues {
  std::optional<double> H1, L2, Hm1;
  std::optional<double> lambda;  // |lambda_delta - lambda_ref|
  std::optional<double> energy;  // E_delta - E_ref (signed)
};

struct ErrorRequest {
  bool H1 = true;
  bool L2 = true;
  bool Hm1 = false;
  bool lambda = true;
  bool energy = true;
};

/// Norms of u_delta - u_ref and eigenvalue/energy gaps. The sign convention
/// flips u_delta first when <u_delta, u_ref> < 0. The Fourier path supports
/// H^{-1} through the coefficient weights; requesting Hm1 on a FEM pair
/// throws.
ErrorValues error_norms(const SolveResult& delta, const SolveResult& ref,
                        const ProblemSpec& problem, const ErrorRequest& req = {});

/// Splits lambda_delta - lambda_ref into the quadratic form term
/// <(A_ref - lambda_ref) e, e> (term1, nonnegative) and the nonlinear
/// correction int w e with w = u_delta^2 (u_delta + u_ref) dq_f (term2),
/// where dq_f is the difference quotient of f in rho (identically 1 for
/// m = 2). Both states are lifted to the reference discretization; term1 +
/// term2 equals rayleigh(u_delta) - rayleigh(u_ref) up to solver residuals.
std::pair<double, double> lambda_decomposition(const SolveResult& delta,
                                               const SolveResult& ref,
                                               const ProblemSpec& problem,
                                               const Disc& disc_ref);

struct AdjointSolve {
  fourier::FourierCoeffs psi;
  double residual = 0.0;
  // Floor applied to the density where f' blows up (m < 2); zero when the
  // guard never engaged.
  double rho_floor = 0.0;
};

/// Linearized correction equation on the orthogonal complement of the
/// ground state: (E''(u) - lambda) psi = w restricted to u-perp, solved by
/// rank-one deflation of the spectral operator. Fourier reference
/// discretizations only.
AdjointSolve solve_adjoint(const fourier::FourierCoeffs& w, const SolveResult& ground,
                           const ProblemSpec& problem, const FourierDisc& disc);

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

struct StudyRow {
  double param = 0.0;  // N, h, or Ng
  double errH1 = 0.0;
  double errL2 = 0.0;
  std::optional<double> errHm1;
  double errLambda = 0.0;       // |lambda - lambda_ref|
  int lambda_sign = 0;          // sign of lambda - lambda_ref
  double errEnergy = 0.0;       // E - E_ref, exact-potential energies
  double sandwich_ratio = 0.0;  // errEnergy / errH1^2
  double term1 = 0.0, term2 = 0.0, decomp_gap = 0.0;
  double min_value = 0.0;
  int iterations = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int rows_used = 0;
  double param_lo = 0.0, param_hi = 0.0;
};

struct StudyTable {
  std::string parameter;  // "N", "h", or "Ng"
  std::vector<StudyRow> rows;
  std::map<std::string, SlopeFit> slopes;  // keyed errH1, errL2, errHm1, errLambda, errEnergy
  std::string reference;
  std::map<std::string, std::string> metadata;
};

/// Least-squares slope of log10(y) against log10(x) over unmasked rows.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<bool>& use);

struct FourierStudySpec {
  std::vector<int> N_values;
  int ref_N = 65;
  int Ng = 0;  // 0: exact potential coefficients for all rows
};

struct FemStudySpec {
  int degree = 1;
  std::vector<int> n_values;
  int ref_factor = 8;  // reference: P2 mesh with ref_factor * max(n)
};

struct QuadratureStudySpec {
  int N = 30;
  std::vector<int> Ng_values;
  int ref_N = 65;  // exact-coefficient reference
};

/// Thrown when a row solve fails; carries whatever rows completed.
struct StudyError : std::runtime_error {
  StudyTable partial;
  StudyError(const std::string& msg, StudyTable table)
      : std::runtime_error(msg), partial(std::move(table)) {}
};

StudyTable convergence_study(const ProblemSpec& problem, const FourierStudySpec& spec,
                             const SCFConfig& cfg, int jobs = 1);
StudyTable convergence_study(const ProblemSpec& problem, const FemStudySpec& spec,
                             const SCFConfig& cfg, int jobs = 1);

/// Fixed N, sweep of the integration grid Ng: rows measure the combined
/// discretization plus numerical-integration error against the exact
/// reference; the exact-assembly errors at the same N are recorded as the
/// saturation floor, and the slope fit uses only pre-saturation rows
/// (error above 3x floor).
StudyTable quadrature_study(const ProblemSpec& problem, const QuadratureStudySpec& spec,
                            const SCFConfig& cfg, int jobs = 1);

void write_csv(std::ostream& os, const StudyTable& table);
void write_json(std::ostream& os, const StudyTable& table);
/// Long-format companion for plotting: param, metric, value triples.
void write_plot_data(std::ostream& os, const StudyTable& table);

}  // namespace nleig::analysis
