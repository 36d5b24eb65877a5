#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "nleig/analysis.hpp"
#include "nleig/serialize.hpp"
#include "oracles.hpp"

using namespace nleig;
using namespace nleig::analysis;
using doctest::Approx;

namespace {

ProblemSpec kink_problem() {
  return {Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.5, 2.0)};
}

SolveResult fake_fourier_result(const fourier::FourierCoeffs& u, double lambda = 0.0,
                                double energy = 0.0) {
  SolveResult r;
  r.u = u;
  r.lambda = lambda;
  r.energy = energy;
  return r;
}

}  // namespace

TEST_CASE("error norms of single-mode differences") {
  const int N = 4;
  fourier::FourierCoeffs zero(N);
  // Make the "reference" the zero vector but with unit mode elsewhere so the
  // inner product vanishes and no sign flip occurs.
  const auto e2 = fourier::FourierCoeffs::unit_mode(N, 2);
  ErrorRequest req;
  req.Hm1 = true;
  const auto ev = error_norms(fake_fourier_result(e2), fake_fourier_result(zero),
                              kink_problem(), req);
  CHECK(*ev.H1 == Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK(*ev.L2 == Approx(1.0).epsilon(1e-14));
  CHECK(*ev.Hm1 == Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("sign convention cancels a global flip") {
  const auto u = oracles::random_real_state(6, 8);
  fourier::FourierCoeffs neg(6);
  neg.data = -u.data;
  const auto ev =
      error_norms(fake_fourier_result(neg), fake_fourier_result(u), kink_problem());
  CHECK(*ev.H1 < 1e-14);
  CHECK(*ev.L2 < 1e-14);
  const auto same =
      error_norms(fake_fourier_result(u), fake_fourier_result(u), kink_problem());
  CHECK(*same.L2 == 0.0);
}

TEST_CASE("Hm1 rejected on the FEM path") {
  ProblemSpec lin{Geometry::interval(M_PI), Potential::zero(), Nonlinearity(0.0, 2.0)};
  auto space = fem::make_space(fem::build_mesh(1, {M_PI, 0.0}, 8), 1);
  const auto res = solve_ground_state(lin, FemDisc{space});
  ErrorRequest req;
  req.Hm1 = true;
  CHECK_THROWS_AS(error_norms(res, res, lin, req), std::invalid_argument);
}

TEST_CASE("lambda decomposition identity on spectral pairs") {
  const auto problem = kink_problem();
  const FourierDisc ref_disc{33, 0};
  const auto ref = solve_ground_state(problem, ref_disc);

  // Coinciding states decompose to zero.
  const auto [z1, z2] = lambda_decomposition(ref, ref, problem, ref_disc);
  CHECK(std::abs(z1) < 1e-11);
  CHECK(std::abs(z2) < 1e-11);

  for (int N : {6, 10, 14, 20}) {
    const auto res = solve_ground_state(problem, FourierDisc{N, 0});
    const auto [t1, t2] = lambda_decomposition(res, ref, problem, ref_disc);
    CHECK(t1 >= -1e-12);
    CHECK(std::abs(t1 + t2 - (res.lambda - ref.lambda)) < 1e-9);

    // Quadratic-form coercivity bracket against the H1 error.
    ErrorRequest req;
    const auto ev = error_norms(res, ref, problem, req);
    const double ratio = t1 / ((*ev.H1) * (*ev.H1));
    CHECK(ratio > 1e-4);
    CHECK(ratio < 1e4);
  }
}

TEST_CASE("lambda decomposition identity on FEM pairs") {
  ProblemSpec prob{Geometry::rectangle(M_PI, M_PI), Potential::harmonic_2d(),
                   Nonlinearity(0.5, 2.0)};
  auto ref_space = fem::make_space(fem::build_mesh(2, {M_PI, M_PI}, 32), 2);
  const Disc ref_disc = FemDisc{ref_space};
  const auto ref = solve_ground_state(prob, ref_disc);
  auto space = fem::make_space(fem::build_mesh(2, {M_PI, M_PI}, 8), 1);
  const auto res = solve_ground_state(prob, FemDisc{space});
  const auto [t1, t2] = lambda_decomposition(res, ref, prob, ref_disc);
  CHECK(t1 >= -1e-12);
  CHECK(std::abs(t1 + t2 - (res.lambda - ref.lambda)) < 1e-9);
}

TEST_CASE("adjoint solve basics") {
  const auto problem = kink_problem();
  const FourierDisc disc{16, 0};
  const auto ground = solve_ground_state(problem, disc);
  const auto& u = ground.fourier_u();

  // Zero load.
  const auto z = solve_adjoint(fourier::FourierCoeffs(16), ground, problem, disc);
  CHECK(z.psi.data.norm() < 1e-12);

  // Load along u vanishes on the orthogonal complement.
  const auto au = solve_adjoint(u, ground, problem, disc);
  CHECK(au.psi.data.norm() < 1e-11);

  // Self-adjointness and the dense saddle-point oracle.
  auto w1 = oracles::random_real_state(16, 51);
  auto w2 = oracles::random_real_state(16, 52);
  const auto p1 = solve_adjoint(w1, ground, problem, disc);
  const auto p2 = solve_adjoint(w2, ground, problem, disc);
  const auto pair12 = (w2.data.adjoint() * p1.psi.data).value().real();
  const auto pair21 = (w1.data.adjoint() * p2.psi.data).value().real();
  CHECK(std::abs(pair12 - pair21) < 1e-10);
  CHECK(std::abs((u.data.adjoint() * p1.psi.data).value()) < 1e-12);

  // KKT oracle: [B u; u^T 0] [psi; mu] = [w; 0] with B = E''(u) - lambda.
  const int n = 33;
  const auto Vconv = potential_conv_coeffs(problem, disc);
  const auto rho = fourier::nonlinear_density_coeffs(u);
  // E''(u) multiplication part: V + f(rho) + 2 f'(rho) rho = V + 3 rho here.
  fourier::ConvCoeffs mult = fourier::ConvCoeffs::from_coeffs(rho, 32);
  mult.data *= 3.0;
  Eigen::MatrixXcd B = fourier::assemble_hamiltonian(Vconv, mult, 16);
  B -= ground.lambda * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  K.topLeftCorner(n, n) = B;
  K.topRightCorner(n, 1) = u.data;
  K.bottomLeftCorner(1, n) = u.data.adjoint();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
  rhs.head(n) = w1.data;
  const Eigen::VectorXcd sol = K.fullPivLu().solve(rhs);
  CHECK((sol.head(n) - p1.psi.data).norm() < 1e-9);
}

TEST_CASE("adjoint solve guards the density floor below m = 2") {
  ProblemSpec prob{Geometry::periodic(), Potential::sin_kink(), Nonlinearity(1.0, 1.5)};
  const FourierDisc disc{10, 0};
  const auto ground = solve_ground_state(prob, disc);
  const auto w = oracles::random_real_state(10, 77);
  const auto adj = solve_adjoint(w, ground, prob, disc);
  CHECK(std::isfinite(adj.psi.data.norm()));
  CHECK(adj.residual <= 1e-10 * (1.0 + w.data.norm()));
  // The periodic ground state stays bounded away from zero here, so the
  // floor stays idle; it engages only when the density actually vanishes.
  CHECK(adj.rho_floor >= 0.0);
  CHECK(std::abs((ground.fourier_u().data.adjoint() * adj.psi.data).value()) < 1e-11);
}

TEST_CASE("slope fitting is exact on synthetic data") {
  std::vector<double> x, y;
  for (int p : {4, 8, 16, 32, 64}) {
    x.push_back(p);
    y.push_back(std::pow(double(p), -3.0));
  }
  const auto fit = fit_slope(x, y, std::vector<bool>(x.size(), true));
  CHECK(fit.slope == Approx(-3.0).epsilon(1e-12));
  CHECK(fit.rows_used == 5);

  // Masked rows are ignored.
  y.back() = 1.0;
  std::vector<bool> mask(x.size(), true);
  mask.back() = false;
  CHECK(fit_slope(x, y, mask).slope == Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("small spectral study produces sane slopes and artifacts") {
  const auto problem = kink_problem();
  FourierStudySpec spec;
  spec.N_values = {4, 6, 8, 10, 12, 14, 16};
  spec.ref_N = 33;
  SCFConfig cfg;
  cfg.damping = 1.0;
  const auto table = convergence_study(problem, spec, cfg, /*jobs=*/2);
  REQUIRE(table.rows.size() == spec.N_values.size());
  CHECK(table.parameter == "N");
  for (size_t i = 1; i < table.rows.size(); ++i)
    CHECK(table.rows[i].param > table.rows[i - 1].param);
  // Rates: loose sanity brackets around the expected fast decays.
  CHECK(table.slopes.at("errH1").slope < -2.0);
  CHECK(table.slopes.at("errL2").slope < table.slopes.at("errH1").slope);
  CHECK(table.slopes.at("errHm1").slope < table.slopes.at("errL2").slope);
  for (const auto& r : table.rows) {
    CHECK(r.errEnergy > 0.0);
    CHECK(r.term1 >= -1e-12);
    CHECK(r.decomp_gap < 1e-9);
    CHECK(r.sandwich_ratio > 0.1);
    CHECK(r.sandwich_ratio < 100.0);
  }

  // Export formats.
  std::ostringstream csv;
  write_csv(csv, table);
  CHECK(csv.str().find("errH1") != std::string::npos);
  std::ostringstream js;
  write_json(js, table);
  const auto parsed = nlohmann::json::parse(js.str());
  CHECK(parsed.at("rows").size() == table.rows.size());
  std::ostringstream plot;
  write_plot_data(plot, table);
  CHECK(plot.str().find("errLambda") != std::string::npos);
}

TEST_CASE("study failures carry the partial table") {
  const auto problem = kink_problem();
  FourierStudySpec spec;
  spec.N_values = {4, 6};
  spec.ref_N = 12;
  SCFConfig cfg;
  cfg.max_iter = 300;
  const auto ok = convergence_study(problem, spec, cfg);
  CHECK(ok.rows.size() == 2);

  auto run_bad = [&] {
    FourierStudySpec bad;
    bad.N_values = {4, 3};
    return convergence_study(problem, bad, cfg);
  };
  CHECK_THROWS_AS(run_bad(), std::invalid_argument);
}

TEST_CASE("quadrature study masks saturated rows") {
  const auto problem = kink_problem();
  QuadratureStudySpec spec;
  spec.N = 8;
  spec.Ng_values = {64, 128, 256, 512, 1024};
  spec.ref_N = 33;
  SCFConfig cfg;
  cfg.damping = 1.0;
  const auto table = quadrature_study(problem, spec, cfg, 2);
  REQUIRE(table.rows.size() == 5);
  CHECK(table.metadata.count("floor_errH1") == 1);
  // Errors decrease towards the exact-assembly floor.
  CHECK(table.rows.front().errH1 >= table.rows.back().errH1);
  const double floor_h1 = std::stod(table.metadata.at("floor_errH1"));
  CHECK(table.rows.back().errH1 <= 1.10 * floor_h1 + 1e-12);
  auto run_bad = [&] {
    QuadratureStudySpec bad = spec;
    bad.Ng_values = {16};
    return quadrature_study(problem, bad, cfg);
  };
  CHECK_THROWS_AS(run_bad(), std::invalid_argument);
}
