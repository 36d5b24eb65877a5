// Acceptance suite: one line per criterion, exit nonzero on any failure.
// Every tolerance is pinned here in code; runtimes are reported, not gated.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <vector>

#include "nleig/analysis.hpp"
#include "nleig/eigsolve.hpp"
#include "nleig/scf.hpp"
#include "oracles.hpp"

using namespace nleig;
using clk = std::chrono::steady_clock;

namespace {

struct Suite {
  int failures = 0;

  void report(int id, const std::string& what, bool pass, double seconds) {
    std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
                what.c_str(), seconds);
    if (!pass) ++failures;
  }
};

struct SubChecks {
  bool all = true;
  std::string detail;

  void check(const char* name, double value, bool ok) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s%s=%.4g%s", detail.empty() ? "" : ", ", name, value,
                  ok ? "" : " [FAIL]");
    detail += buf;
    all = all && ok;
  }
};

ProblemSpec kink_problem() {
  return {Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.5, 2.0)};
}

ProblemSpec fem_problem() {
  return {Geometry::rectangle(M_PI, M_PI), Potential::harmonic_2d(), Nonlinearity(0.5, 2.0)};
}

SCFConfig study_config() {
  SCFConfig cfg;
  cfg.damping = 1.0;  // adaptive safeguard active; same fixed point, fewer steps
  return cfg;
}

double secs(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

bool in_window(double value, double center, double halfwidth) {
  return std::abs(value - center) <= halfwidth;
}

}  // namespace

// --------------------------------------------------------------------------
// criteria 1+2: spectral convergence rates and theoretical-bound consistency
// --------------------------------------------------------------------------
static analysis::StudyTable run_fourier_study() {
  analysis::FourierStudySpec spec;
  for (int N = 4; N <= 30; ++N) spec.N_values.push_back(N);
  spec.ref_N = 65;
  return analysis::convergence_study(kink_problem(), spec, study_config(), 1);
}

static void criterion_1_and_2(Suite& suite, const analysis::StudyTable& table,
                              double elapsed) {
  SubChecks c1;
  const double h1 = table.slopes.at("errH1").slope;
  const double l2 = table.slopes.at("errL2").slope;
  const double hm1 = table.slopes.at("errHm1").slope;
  const double lam = table.slopes.at("errLambda").slope;
  c1.check("H1", h1, in_window(h1, -2.67, 0.15));
  c1.check("L2", l2, in_window(l2, -3.67, 0.20));
  c1.check("Hm1", hm1, in_window(hm1, -4.67, 0.25));
  c1.check("lambda", lam, in_window(lam, -5.0, 0.30));
  suite.report(1, "spectral rate reproduction: " + c1.detail, c1.all, elapsed);

  SubChecks c2;
  c2.check("H1<=-2.45", h1, h1 <= -2.45);
  c2.check("L2<=-3.45", l2, l2 <= -3.45);
  c2.check("Hm1<=-4.45", hm1, hm1 <= -4.45);
  c2.check("lambda<=-4.95", lam, lam <= -4.95);
  suite.report(2, "slopes at least as fast as the sigma=1.5-eps bounds: " + c2.detail,
               c2.all, 0.0);
}

// --------------------------------------------------------------------------
// criterion 3: finite element rates
// --------------------------------------------------------------------------
static void criterion_3(Suite& suite) {
  const auto t0 = clk::now();
  SubChecks c;
  {
    analysis::FemStudySpec spec;
    spec.degree = 1;
    spec.n_values = {8, 16, 32, 64};
    spec.ref_factor = 8;
    const auto table = analysis::convergence_study(fem_problem(), spec, study_config(), 1);
    const double h1 = table.slopes.at("errH1").slope;
    const double l2 = table.slopes.at("errL2").slope;
    const double lam = table.slopes.at("errLambda").slope;
    c.check("P1:H1", h1, in_window(h1, 1.0, 0.15));
    c.check("P1:L2", l2, in_window(l2, 2.0, 0.15));
    c.check("P1:lambda", lam, in_window(lam, 2.0, 0.15));
  }
  {
    analysis::FemStudySpec spec;
    spec.degree = 2;
    spec.n_values = {4, 8, 16, 32};
    spec.ref_factor = 8;
    const auto table = analysis::convergence_study(fem_problem(), spec, study_config(), 1);
    const double h1 = table.slopes.at("errH1").slope;
    const double l2 = table.slopes.at("errL2").slope;
    const double lam = table.slopes.at("errLambda").slope;
    c.check("P2:H1", h1, in_window(h1, 2.0, 0.20));
    c.check("P2:L2", l2, in_window(l2, 3.0, 0.20));
    c.check("P2:lambda", lam, in_window(lam, 4.0, 0.20));
  }
  suite.report(3, "finite element rate reproduction: " + c.detail, c.all, secs(t0));
}

// --------------------------------------------------------------------------
// criterion 4: integration grid study
// --------------------------------------------------------------------------
static void criterion_4(Suite& suite) {
  const auto t0 = clk::now();
  analysis::QuadratureStudySpec spec;
  spec.N = 30;
  for (int p = 7; p <= 15; ++p) spec.Ng_values.push_back(1 << p);
  spec.ref_N = 65;
  const SCFConfig cfg = study_config();
  const auto table = analysis::quadrature_study(kink_problem(), spec, cfg, 1);

  SubChecks c;
  for (const char* key : {"errH1", "errL2", "errHm1", "errLambda"}) {
    const auto& fit = table.slopes.at(key);
    c.check(key, fit.slope, fit.rows_used >= 2 && in_window(fit.slope, -2.0, 0.2));
  }
  // Convergence to the exact-assembly errors at Ng = 2^15. Strict 1% where
  // the floor is measurable (above the saturation threshold of 100x the
  // solver tolerance); agreement within solver noise otherwise.
  const auto& last = table.rows.back();
  auto conv = [&](const char* name, double err, double floor_val, double noise) {
    const bool measurable = floor_val > noise;
    const bool ok = std::abs(err - floor_val) <= std::max(0.01 * floor_val, noise);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "conv:%s%s", name, measurable ? "" : "(noise regime)");
    c.check(buf, std::abs(err - floor_val), ok);
  };
  conv("H1", last.errH1, std::stod(table.metadata.at("floor_errH1")),
       100.0 * cfg.tol_density);
  conv("L2", last.errL2, std::stod(table.metadata.at("floor_errL2")),
       100.0 * cfg.tol_density);
  conv("Hm1", *last.errHm1, std::stod(table.metadata.at("floor_errHm1")),
       100.0 * cfg.tol_density);
  conv("lambda", last.errLambda, std::stod(table.metadata.at("floor_errLambda")),
       100.0 * cfg.tol_lambda);
  suite.report(4, "integration grid study: " + c.detail, c.all, secs(t0));
}

// --------------------------------------------------------------------------
// criterion 5: brute-force minimizer equivalence at tiny scale
// --------------------------------------------------------------------------
static void criterion_5(Suite& suite) {
  const auto t0 = clk::now();
  const auto problem = kink_problem();
  SubChecks c;
  for (int N : {4, 6}) {
    const auto res = solve_ground_state(problem, FourierDisc{N, 0}, study_config());
    const auto oracle_problem = oracles::SpectralProblem::sin_kink(N, problem.nonlinearity);
    const auto pgd = oracles::projected_gradient_minimize(oracle_problem, 20240515);
    const double dlam = std::abs(res.lambda - pgd.lambda);
    Eigen::VectorXcd diff = res.fourier_u().data - pgd.u.data;
    Eigen::VectorXcd sum = res.fourier_u().data + pgd.u.data;
    const double du = std::min(diff.norm(), sum.norm());
    char name[32];
    std::snprintf(name, sizeof(name), "N=%d:dlambda", N);
    c.check(name, dlam, dlam <= 1e-8);
    std::snprintf(name, sizeof(name), "N=%d:du", N);
    c.check(name, du, du <= 1e-6);
  }
  suite.report(5, "projected-gradient oracle equivalence: " + c.detail, c.all, secs(t0));
}

// --------------------------------------------------------------------------
// criterion 6: exact integration identities
// --------------------------------------------------------------------------
static void criterion_6(Suite& suite) {
  const auto t0 = clk::now();
  std::mt19937 rng(7771);
  SubChecks c;

  double worst_quartic = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int N = 2 + static_cast<int>(rng() % 14);
    const auto v = oracles::random_real_state(N, rng());
    const auto rho = oracles::density_by_convolution(v);
    const double exact = rho.data.squaredNorm();
    const int Ng = 4 * N + 1 + static_cast<int>(rng() % 17);
    const double grid = fourier::grid_quartic_integral(v, Ng);
    worst_quartic =
        std::max(worst_quartic, std::abs(grid - exact) / std::max(1e-300, std::abs(exact)));
  }
  c.check("quartic_rel", worst_quartic, worst_quartic <= 1e-11);

  double worst_density = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int N = 2 + static_cast<int>(rng() % 12);
    const auto v = oracles::random_real_state(N, rng());
    const auto fast = fourier::nonlinear_density_coeffs(v);
    const auto direct = oracles::density_by_convolution(v);
    worst_density =
        std::max(worst_density, (fast.data - direct.data).lpNorm<Eigen::Infinity>());
  }
  c.check("density_vs_convolution", worst_density, worst_density <= 1e-12);

  double worst_round = 0.0;
  for (int Ng : {9, 16, 33, 64, 128}) {
    const auto s = fourier::SampledGrid::from_function(Ng, [&](double x) {
      return std::exp(std::sin(x)) + 0.25 * std::cos(7.0 * x) / (2.0 + std::cos(x));
    });
    const auto back = fourier::sample(fourier::interpolate(s), Ng);
    worst_round =
        std::max(worst_round, (back.values - s.values).norm() / s.values.norm());
  }
  c.check("dft_interpolate_roundtrip", worst_round, worst_round <= 1e-12);

  suite.report(6, "exactness identities: " + c.detail, c.all, secs(t0));
}

// --------------------------------------------------------------------------
// criterion 7: analytic constant fixed point
// --------------------------------------------------------------------------
static void criterion_7(Suite& suite) {
  const auto t0 = clk::now();
  ProblemSpec prob{Geometry::periodic(), Potential::zero(), Nonlinearity(0.5, 2.0)};
  SubChecks c;
  for (int N : {2, 8, 23}) {
    const auto res = solve_ground_state(prob, FourierDisc{N, 0});
    char name[32];
    std::snprintf(name, sizeof(name), "N=%d:dlambda", N);
    const double dlam = std::abs(res.lambda - 1.0 / (2.0 * M_PI));
    c.check(name, dlam, dlam <= 1e-12);
    std::snprintf(name, sizeof(name), "N=%d:denergy", N);
    const double de = std::abs(res.energy - 1.0 / (8.0 * M_PI));
    c.check(name, de, de <= 1e-12);
  }
  suite.report(7, "analytic fixed point: " + c.detail, c.all, secs(t0));
}

// --------------------------------------------------------------------------
// criterion 8: structural invariants
// --------------------------------------------------------------------------
static void criterion_8(Suite& suite, const analysis::StudyTable& fourier_table) {
  const auto t0 = clk::now();
  const auto problem = kink_problem();
  SubChecks c;

  // Unit constraint, Hermitian assembly, Rayleigh consistency.
  const auto res = solve_ground_state(problem, FourierDisc{12, 0});
  c.check("norm_constraint", std::abs(res.fourier_u().data.norm() - 1.0),
          std::abs(res.fourier_u().data.norm() - 1.0) <= 1e-12);
  {
    const auto Vconv = potential_conv_coeffs(problem, FourierDisc{12, 0});
    const auto rho = fourier::nonlinear_density_coeffs(res.fourier_u());
    const auto H = fourier::assemble_hamiltonian(Vconv, rho, 12, problem.nonlinearity);
    const double herm = (H - H.adjoint()).cwiseAbs().maxCoeff();
    c.check("hermitian", herm, herm <= 1e-12);
    const double rq =
        (res.fourier_u().data.adjoint() * (H * res.fourier_u().data)).value().real();
    c.check("lambda_rayleigh", std::abs(res.lambda - rq),
            std::abs(res.lambda - rq) <= 1e-10);
  }

  // Eigenvalue decomposition identity and coercivity across the study rows,
  // plus the energy sandwich and the Galerkin upper-bound property.
  {
    double worst_gap = 0.0, worst_term1 = 0.0;
    double ratio_lo = 1e300, ratio_hi = 0.0;
    bool energy_above = true;
    for (const auto& r : fourier_table.rows) {
      worst_gap = std::max(worst_gap, r.decomp_gap);
      worst_term1 = std::min(worst_term1, r.term1);
      ratio_lo = std::min(ratio_lo, r.sandwich_ratio);
      ratio_hi = std::max(ratio_hi, r.sandwich_ratio);
      energy_above = energy_above && (r.errEnergy >= -1e-9);
    }
    c.check("decomp_gap", worst_gap, worst_gap <= 1e-9);
    c.check("term1_nonneg", worst_term1, worst_term1 >= -1e-12);
    c.check("sandwich_lo", ratio_lo, ratio_lo >= 0.1);
    c.check("sandwich_hi", ratio_hi, ratio_hi <= 100.0);
    c.check("galerkin_energy_bound", energy_above ? 1.0 : 0.0, energy_above);
  }

  // Slope-fit robustness: dropping the finest row moves slopes by < 0.1.
  {
    analysis::FourierStudySpec spec;
    for (int N = 4; N <= 29; ++N) spec.N_values.push_back(N);
    spec.ref_N = 65;
    const auto shorter = analysis::convergence_study(problem, spec, study_config(), 1);
    double worst = 0.0;
    for (const char* key : {"errH1", "errL2", "errHm1", "errLambda"})
      worst = std::max(worst, std::abs(shorter.slopes.at(key).slope -
                                       fourier_table.slopes.at(key).slope));
    c.check("fit_robustness", worst, worst < 0.1);
  }

  // Adjoint self-adjointness on the reference discretization.
  {
    const FourierDisc disc{16, 0};
    const auto ground = solve_ground_state(problem, disc, study_config());
    const auto w1 = oracles::random_real_state(16, 91);
    const auto w2 = oracles::random_real_state(16, 92);
    const auto p1 = analysis::solve_adjoint(w1, ground, problem, disc);
    const auto p2 = analysis::solve_adjoint(w2, ground, problem, disc);
    const double asym = std::abs((w2.data.adjoint() * p1.psi.data).value().real() -
                                 (w1.data.adjoint() * p2.psi.data).value().real());
    c.check("adjoint_symmetry", asym, asym <= 1e-10);
  }

  // Energy monotonicity through nested spectral spaces.
  {
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (int N : {4, 8, 16, 32}) {
      const auto r = solve_ground_state(problem, FourierDisc{N, 0}, study_config());
      monotone = monotone && (r.energy <= prev + 1e-12);
      prev = r.energy;
    }
    c.check("nested_energy_monotone", monotone ? 1.0 : 0.0, monotone);
  }

  // Gradient check: central differences of E against <A_v v, w>.
  {
    const int N = 9;
    const FourierDisc disc{N, 0};
    auto v = oracles::random_real_state(N, 15);
    auto w = oracles::random_real_state(N, 16);
    w.data -= (w.data.adjoint() * v.data).value().real() * v.data;
    w.data /= w.data.norm();
    const double eps = 1e-5;
    fourier::FourierCoeffs vp(N), vm(N);
    vp.data = v.data + eps * w.data;
    vm.data = v.data - eps * w.data;
    const double fd = (energy(problem, disc, State(vp)) - energy(problem, disc, State(vm))) /
                      (2.0 * eps);
    const auto H = fourier::assemble_hamiltonian(potential_conv_coeffs(problem, disc),
                                                 fourier::nonlinear_density_coeffs(v), N,
                                                 problem.nonlinearity);
    const double pairing = (w.data.adjoint() * (H * v.data)).value().real();
    const double rel = std::abs(fd - pairing) / std::abs(pairing);
    c.check("gradient_fd", rel, rel <= 1e-5);
  }

  // Positivity of the converged states across the shipped study.
  {
    double min_val = 0.0;
    for (const auto& r : fourier_table.rows) min_val = std::min(min_val, r.min_value);
    c.check("positivity_report", min_val, min_val >= -1e-8);
  }

  suite.report(8, "structural invariants: " + c.detail, c.all, secs(t0));
}

int main() {
  Suite suite;
  std::printf("acceptance suite\n");

  const auto t0 = clk::now();
  analysis::StudyTable fourier_table;
  try {
    fourier_table = run_fourier_study();
    criterion_1_and_2(suite, fourier_table, secs(t0));
  } catch (const std::exception& e) {
    suite.report(1, std::string("spectral study failed: ") + e.what(), false, secs(t0));
    suite.report(2, "skipped (study failed)", false, 0.0);
    return 1;
  }

  try {
    criterion_3(suite);
  } catch (const std::exception& e) {
    suite.report(3, std::string("fem study failed: ") + e.what(), false, 0.0);
  }
  try {
    criterion_4(suite);
  } catch (const std::exception& e) {
    suite.report(4, std::string("quadrature study failed: ") + e.what(), false, 0.0);
  }
  try {
    criterion_5(suite);
  } catch (const std::exception& e) {
    suite.report(5, std::string("oracle comparison failed: ") + e.what(), false, 0.0);
  }
  try {
    criterion_6(suite);
  } catch (const std::exception& e) {
    suite.report(6, std::string("exactness checks failed: ") + e.what(), false, 0.0);
  }
  try {
    criterion_7(suite);
  } catch (const std::exception& e) {
    suite.report(7, std::string("analytic fixed point failed: ") + e.what(), false, 0.0);
  }
  try {
    criterion_8(suite, fourier_table);
  } catch (const std::exception& e) {
    suite.report(8, std::string("structural suite failed: ") + e.what(), false, 0.0);
  }

  std::printf("%d criterion(s) failed\n", suite.failures);
  return suite.failures == 0 ? 0 : 1;
}
