#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nleig/eigsolve.hpp"
#include "nleig/scf.hpp"
#include "nleig/serialize.hpp"
#include "oracles.hpp"

using namespace nleig;
using doctest::Approx;
using oracles::kSqrtTwoPi;
using oracles::kTwoPi;

namespace {

ProblemSpec kink_problem() {
  return {Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.5, 2.0)};
}

ProblemSpec free_problem() {
  return {Geometry::periodic(), Potential::zero(), Nonlinearity(0.5, 2.0)};
}

}  // namespace

TEST_CASE("constant state is an immediate fixed point") {
  const auto res = solve_ground_state(free_problem(), FourierDisc{8, 0});
  CHECK(res.lambda == Approx(1.0 / kTwoPi).epsilon(1e-13));
  CHECK(res.energy == Approx(1.0 / (4.0 * kTwoPi)).epsilon(1e-13));
  CHECK(res.iterations <= 3);
  CHECK(res.fourier_u().at(0).real() == Approx(1.0).epsilon(1e-12));
  CHECK(res.residual < 1e-12);
  CHECK(res.min_value > 0.0);
}

TEST_CASE("linear problems need a single outer iteration") {
  ProblemSpec lin{Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.0, 2.0)};
  const auto res = solve_ground_state(lin, FourierDisc{12, 0});
  CHECK(res.iterations == 1);

  // Matches the direct eigensolve of the same matrix.
  const auto Vconv = potential_conv_coeffs(lin, FourierDisc{12, 0});
  const auto H =
      fourier::assemble_hamiltonian(Vconv, fourier::ConvCoeffs::zero(24), 12);
  const auto direct = eig::lowest_eigenpair(H);
  CHECK(res.lambda == Approx(direct.lambda).epsilon(1e-12));

  // FEM flavour: Dirichlet interval, zero potential, lowest mode.
  ProblemSpec lin1d{Geometry::interval(M_PI), Potential::zero(), Nonlinearity(0.0, 2.0)};
  auto space = fem::make_space(fem::build_mesh(1, {M_PI, 0.0}, 64), 1);
  const auto fr = solve_ground_state(lin1d, FemDisc{space});
  CHECK(fr.iterations == 1);
  CHECK(fr.lambda == Approx(1.0).epsilon(1e-3));
  CHECK(fr.lambda > 1.0);
}

TEST_CASE("kink ground state matches the projected-gradient oracle") {
  const auto problem = kink_problem();
  SCFConfig cfg;
  cfg.damping = 1.0;
  for (int N : {4, 6}) {
    const auto res = solve_ground_state(problem, FourierDisc{N, 0}, cfg);
    const auto prob = oracles::SpectralProblem::sin_kink(N, problem.nonlinearity);
    const auto pgd = oracles::projected_gradient_minimize(prob, 1234);
    CHECK(std::abs(res.lambda - pgd.lambda) <= 1e-8);
    Eigen::VectorXcd diff = res.fourier_u().data - pgd.u.data;
    if (diff.norm() > (res.fourier_u().data + pgd.u.data).norm())
      diff = res.fourier_u().data + pgd.u.data;
    CHECK(diff.norm() <= 1e-6);
    CHECK(res.energy <= pgd.energy + 1e-12);
  }
}

TEST_CASE("energy matches dense quadrature on a random state") {
  const auto problem = kink_problem();
  const int N = 8;
  const auto u = oracles::random_real_state(N, 42);
  const double e = energy(problem, FourierDisc{N, 0}, State(u));

  const int M = 1000000;
  double acc = 0.0;
  for (int j = 0; j < M; ++j) {
    const double x = (j + 0.5) * kTwoPi / M;
    std::complex<double> v(0, 0), dv(0, 0);
    for (int k = -N; k <= N; ++k) {
      const auto ph = std::exp(std::complex<double>(0, k * x));
      v += u.at(k) * ph;
      dv += std::complex<double>(0, k) * u.at(k) * ph;
    }
    v /= kSqrtTwoPi;
    dv /= kSqrtTwoPi;
    const double Vx = potential_value(problem.potential, {x, 0.0}, 1);
    acc += 0.5 * std::norm(dv) + 0.5 * Vx * std::norm(v) + 0.25 * std::norm(v) * std::norm(v);
  }
  acc *= kTwoPi / M;
  CHECK(e == Approx(acc).epsilon(1e-9));
}

TEST_CASE("kinetic-only energy of a single mode") {
  ProblemSpec lin{Geometry::periodic(), Potential::zero(), Nonlinearity(0.0, 2.0)};
  const auto e1 = fourier::FourierCoeffs::unit_mode(4, 1);
  CHECK(energy(lin, FourierDisc{4, 0}, State(e1)) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("residual norm behaviour") {
  const auto problem = kink_problem();
  SCFConfig cfg;
  const auto res = solve_ground_state(problem, FourierDisc{10, 0}, cfg);
  CHECK(res.residual <= 10.0 * cfg.tol_density);

  // Constant state in the free problem: exact critical point.
  fourier::FourierCoeffs c0(6);
  c0.at(0) = 1.0;
  const double r0 =
      residual_norm(free_problem(), FourierDisc{6, 0}, State(c0), 1.0 / kTwoPi);
  CHECK(r0 < 1e-14);

  // Perturbation response is first order in epsilon.
  std::vector<double> eps_list{1e-3, 1e-4, 1e-5};
  std::vector<double> rs;
  for (double eps : eps_list) {
    fourier::FourierCoeffs u = res.fourier_u();
    u.at(1) += eps / std::sqrt(2.0);
    u.at(-1) += eps / std::sqrt(2.0);
    u.data /= u.data.norm();
    const double lam = rayleigh_lambda(problem, FourierDisc{10, 0}, State(u));
    rs.push_back(residual_norm(problem, FourierDisc{10, 0}, State(u), lam));
  }
  const double slope = std::log10(rs[0] / rs[2]) / std::log10(eps_list[0] / eps_list[2]);
  CHECK(slope == Approx(1.0).epsilon(0.1));
}

TEST_CASE("directional derivative of the energy equals the gradient pairing") {
  const auto problem = kink_problem();
  const int N = 9;
  const FourierDisc disc{N, 0};
  auto v = oracles::random_real_state(N, 5);
  auto w = oracles::random_real_state(N, 6);
  // Orthogonalize w against v (L2), keep it real symmetric.
  const auto inner = (w.data.adjoint() * v.data).value().real();
  w.data -= inner * v.data;
  w.data /= w.data.norm();

  const double eps = 1e-5;
  fourier::FourierCoeffs vp(N), vm(N);
  vp.data = v.data + eps * w.data;
  vm.data = v.data - eps * w.data;
  const double fd =
      (energy(problem, disc, State(vp)) - energy(problem, disc, State(vm))) / (2 * eps);

  // <A_v v, w> through the assembled operator at density v^2.
  const auto Vconv = potential_conv_coeffs(problem, disc);
  const auto rho = fourier::nonlinear_density_coeffs(v);
  const auto H = fourier::assemble_hamiltonian(Vconv, rho, N, problem.nonlinearity);
  const double pairing = (w.data.adjoint() * (H * v.data)).value().real();
  CHECK(fd == Approx(pairing).epsilon(1e-5));
}

TEST_CASE("reported lambda is the Rayleigh value") {
  const auto problem = kink_problem();
  const auto res = solve_ground_state(problem, FourierDisc{12, 0});
  const auto& u = res.fourier_u();
  const auto Vconv = potential_conv_coeffs(problem, FourierDisc{12, 0});
  const auto rho = fourier::nonlinear_density_coeffs(u);
  const auto H = fourier::assemble_hamiltonian(Vconv, rho, 12, problem.nonlinearity);
  const double rq = (u.data.adjoint() * (H * u.data)).value().real();
  CHECK(res.lambda == Approx(rq).epsilon(1e-10));
  CHECK(std::abs(u.data.norm() - 1.0) < 1e-12);
}

TEST_CASE("energy decreases through nested spectral spaces") {
  const auto problem = kink_problem();
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {4, 8, 16, 32}) {
    const auto res = solve_ground_state(problem, FourierDisc{N, 0});
    CHECK(res.energy <= prev + 1e-12);
    prev = res.energy;
    CHECK(res.min_value > -1e-8);
  }
}

TEST_CASE("adaptive damping keeps accepted energies non-increasing") {
  const auto problem = kink_problem();
  SCFConfig cfg;
  cfg.damping = 1.0;
  cfg.adaptive = true;
  const auto res = solve_ground_state(problem, FourierDisc{16, 0}, cfg);
  for (size_t i = 2; i < res.trace.size(); ++i)
    CHECK(res.trace[i].energy <= res.trace[i - 1].energy + 1e-12);
}

TEST_CASE("solver error carries the iteration trace") {
  SCFConfig cfg;
  cfg.max_iter = 2;
  cfg.tol_density = 1e-14;
  cfg.tol_lambda = 1e-15;
  cfg.damping = 0.05;
  cfg.adaptive = false;
  try {
    solve_ground_state(kink_problem(), FourierDisc{10, 0}, cfg);
    FAIL("expected ScfError");
  } catch (const ScfError& e) {
    CHECK(e.trace.size() >= 1);
  }
}

TEST_CASE("non-quadratic exponents run through the interpolated path") {
  // Thomas-Fermi style exponent: f(rho) is no longer exact in coefficients.
  ProblemSpec prob{Geometry::periodic(), Potential::sin_kink(), Nonlinearity(1.0, 5.0 / 3.0)};
  const auto res = solve_ground_state(prob, FourierDisc{10, 0});
  CHECK(res.inexact_nonlinearity);
  CHECK(std::abs(res.fourier_u().data.norm() - 1.0) < 1e-12);
  CHECK(res.min_value > -1e-8);
  // lambda is still the Rayleigh value of the final state.
  const double rq = rayleigh_lambda(prob, FourierDisc{10, 0}, res.u);
  CHECK(res.lambda == Approx(rq).epsilon(1e-12));
  // The energy still decreases under refinement.
  const auto res2 = solve_ground_state(prob, FourierDisc{16, 0});
  CHECK(res2.energy <= res.energy + 1e-12);
}

TEST_CASE("sampled-potential discretization validates its grid") {
  CHECK_THROWS_AS(solve_ground_state(kink_problem(), FourierDisc{10, 40}),
                  std::invalid_argument);
  const auto res = solve_ground_state(kink_problem(), FourierDisc{10, 64});
  CHECK(std::isfinite(res.lambda));
}

TEST_CASE("2D fem ground state with harmonic potential") {
  ProblemSpec prob{Geometry::rectangle(M_PI, M_PI), Potential::harmonic_2d(),
                   Nonlinearity(0.5, 2.0)};
  auto space = fem::make_space(fem::build_mesh(2, {M_PI, M_PI}, 12), 2);
  const auto res = solve_ground_state(prob, FemDisc{space});
  CHECK(std::abs(state_l2_norm(FemDisc{space}, res.u) - 1.0) < 1e-12);
  CHECK(res.min_value > -1e-8);
  CHECK(res.residual <= 1e-8);
  // Rayleigh consistency through the independent helper.
  const double rq = rayleigh_lambda(prob, FemDisc{space}, res.u);
  CHECK(res.lambda == Approx(rq).epsilon(1e-12));
  // The eigenvalue sits above the linear Dirichlet Laplacian bound lambda_1 = 2.
  CHECK(res.lambda > 2.0);
}

TEST_CASE("warm started solves agree with cold starts") {
  const auto problem = kink_problem();
  const auto coarse = solve_ground_state(problem, FourierDisc{6, 0});
  const auto cold = solve_ground_state(problem, FourierDisc{12, 0});
  const auto warm = solve_ground_state(problem, FourierDisc{12, 0}, SCFConfig{}, &coarse.u);
  CHECK(std::abs(cold.lambda - warm.lambda) < 1e-9);
  CHECK((cold.fourier_u().data - warm.fourier_u().data).norm() < 1e-7);
}

TEST_CASE("problem and grid serialization round trips") {
  const auto problem = kink_problem();
  nlohmann::json j = problem;
  ProblemSpec back = j.get<ProblemSpec>();
  CHECK(back.potential.kind == PotentialKind::sin_kink);
  CHECK(back.nonlinearity.c == 0.5);
  CHECK(back.geometry.kind == GeometryKind::periodic_interval);

  const auto grid = fourier::SampledGrid::from_function(
      10, [](double x) { return std::sin(x) + 2.0; });
  const auto gj = fourier_io::grid_to_json(grid);
  CHECK(gj.at("Ng") == 10);
  const auto gback = fourier_io::grid_from_json(gj);
  CHECK((gback.values - grid.values).norm() == 0.0);

  fem::FEFunction f{fem::make_space(fem::build_mesh(1, {M_PI, 0.0}, 6), 2),
                    Eigen::VectorXd::LinSpaced(11, 0.0, 1.0)};
  const auto fj = fem_io::function_to_json(f);
  const auto fback = fem_io::function_from_json(fj);
  CHECK((fback.coeffs - f.coeffs).norm() == 0.0);
  CHECK(fback.space->degree == 2);
}

TEST_CASE("solve result serialization round trip") {
  const auto problem = kink_problem();
  const Disc disc = FourierDisc{6, 0};
  const auto res = solve_ground_state(problem, disc);
  const auto j = solve_result_to_json(res, disc);
  const auto [back, disc2] = solve_result_from_json(j);
  CHECK(back.lambda == res.lambda);
  CHECK(back.energy == res.energy);
  CHECK((back.fourier_u().data - res.fourier_u().data).norm() == 0.0);
  CHECK(std::get<FourierDisc>(disc2).N == 6);
  CHECK(back.trace.size() == res.trace.size());

  ProblemSpec lin1d{Geometry::interval(M_PI), Potential::zero(), Nonlinearity(0.0, 2.0)};
  auto space = fem::make_space(fem::build_mesh(1, {M_PI, 0.0}, 16), 2);
  const Disc fdisc = FemDisc{space};
  const auto fres = solve_ground_state(lin1d, fdisc);
  const auto fj = solve_result_to_json(fres, fdisc);
  const auto [fback, fdisc2] = solve_result_from_json(fj);
  CHECK((fback.fem_u().coeffs - fres.fem_u().coeffs).norm() == 0.0);
  CHECK(std::get<FemDisc>(fdisc2).space->degree == 2);
}
