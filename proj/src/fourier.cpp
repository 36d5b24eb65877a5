#include "nleig/fourier.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace nleig::fourier {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110;

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out(in.size());
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& in) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out(in.size());
  fft.inv(out, in);  // includes the 1/Ng scaling
  return out;
}
}  // namespace

FourierCoeffs FourierCoeffs::unit_mode(int cutoff, int k) {
  if (std::abs(k) > cutoff) throw std::invalid_argument("unit_mode: |k| > cutoff");
  FourierCoeffs v(cutoff);
  v.at(k) = Complex(1.0, 0.0);
  return v;
}

bool is_real_symmetric(const FourierCoeffs& v, double tol) {
  for (int k = 0; k <= v.N; ++k)
    if (std::abs(v.at(k) - std::conj(v.at(-k))) > tol) return false;
  return true;
}

void symmetrize(FourierCoeffs& v) {
  for (int k = 1; k <= v.N; ++k) {
    const Complex avg = 0.5 * (v.at(k) + std::conj(v.at(-k)));
    v.at(k) = avg;
    v.at(-k) = std::conj(avg);
  }
  v.at(0) = Complex(v.at(0).real(), 0.0);
}

FourierCoeffs project_modes(const FourierCoeffs& v, int M) {
  if (M < 0 || M > v.N)
    throw std::invalid_argument("project_modes: cutoff must satisfy 0 <= M <= v.N");
  FourierCoeffs out(M);
  out.data = v.data.segment(v.N - M, 2 * M + 1);
  return out;
}

FourierCoeffs embed(const FourierCoeffs& v, int M) {
  if (M < v.N) throw std::invalid_argument("embed: target cutoff must be >= v.N");
  FourierCoeffs out(M);
  out.data.segment(M - v.N, 2 * v.N + 1) = v.data;
  return out;
}

double sobolev_norm(const FourierCoeffs& v, double r) {
  double acc = 0.0;
  for (int k = -v.N; k <= v.N; ++k) {
    const double w = std::pow(1.0 + static_cast<double>(k) * k, r);
    acc += w * std::norm(v.at(k));
  }
  return std::sqrt(acc);
}

Complex sobolev_inner(const FourierCoeffs& u, const FourierCoeffs& v, double r) {
  if (u.N != v.N) throw std::invalid_argument("sobolev_inner: cutoff mismatch");
  Complex acc(0.0, 0.0);
  for (int k = -u.N; k <= u.N; ++k) {
    const double w = std::pow(1.0 + static_cast<double>(k) * k, r);
    acc += w * u.at(k) * std::conj(v.at(k));
  }
  return acc;
}

DftCoeffs dft(const SampledGrid& samples) {
  const int Ng = samples.Ng();
  if (Ng < 1) throw std::invalid_argument("dft: empty grid");
  Eigen::VectorXcd bins = fft_forward(samples.values) / static_cast<double>(Ng);
  DftCoeffs out;
  out.Ng = Ng;
  const int M = Ng / 2;
  out.data.resize(2 * M + 1);
  for (int g = -M; g <= M; ++g) out.data[g + M] = bins[((g % Ng) + Ng) % Ng];
  return out;
}

FourierCoeffs interpolate(const SampledGrid& samples) {
  const DftCoeffs d = dft(samples);
  const int Ng = samples.Ng();
  const int M = Ng / 2;
  FourierCoeffs out(M);
  for (int g = -M; g <= M; ++g) out.at(g) = kSqrtTwoPi * d.data[g + M];
  if (Ng % 2 == 0 && M >= 1) {
    // Even grids carry a single boundary bin; splitting it between the
    // +M and -M modes keeps grid values and conjugate symmetry.
    out.at(M) *= 0.5;
    out.at(-M) = out.at(M);
  }
  return out;
}

SampledGrid sample(const FourierCoeffs& v, int Ng) {
  if (Ng < 1) throw std::invalid_argument("sample: grid size must be >= 1");
  Eigen::VectorXcd bins = Eigen::VectorXcd::Zero(Ng);
  for (int k = -v.N; k <= v.N; ++k) bins[((k % Ng) + Ng) % Ng] += v.at(k);
  Eigen::VectorXcd values = fft_inverse(bins) * (static_cast<double>(Ng) / kSqrtTwoPi);
  return SampledGrid(std::move(values));
}

Complex evaluate(const FourierCoeffs& v, double x) {
  Complex acc(0.0, 0.0);
  for (int k = -v.N; k <= v.N; ++k)
    acc += v.at(k) * std::exp(Complex(0.0, k * x));
  return acc / kSqrtTwoPi;
}

int dealiased_grid_size(int N) {
  int Ng = 8;
  while (Ng < 4 * N + 1) Ng *= 2;
  return Ng;
}

FourierCoeffs nonlinear_density_coeffs(const FourierCoeffs& u) {
  const int N = u.N;
  const int Ng = dealiased_grid_size(N);
  const SampledGrid grid = sample(u, Ng);
  Eigen::VectorXcd rho_vals(Ng);
  for (int j = 0; j < Ng; ++j) rho_vals[j] = std::norm(grid.values[j]);
  const DftCoeffs d = dft(SampledGrid(std::move(rho_vals)));
  FourierCoeffs rho(2 * N);
  for (int n = -2 * N; n <= 2 * N; ++n) rho.at(n) = kSqrtTwoPi * d.at(n);
  return rho;
}

ConvCoeffs ConvCoeffs::zero(int cutoff) {
  ConvCoeffs c;
  c.cutoff = cutoff;
  c.data = Eigen::VectorXcd::Zero(2 * cutoff + 1);
  return c;
}

ConvCoeffs ConvCoeffs::exact(const Potential& pot, int cutoff) {
  ConvCoeffs c = zero(cutoff);
  if (pot.kind == PotentialKind::zero) return c;
  if (pot.kind == PotentialKind::sin_kink) {
    for (int n = -cutoff; n <= cutoff; ++n)
      c.data[n + cutoff] = potential_fourier_coeff(pot, n) / kSqrtTwoPi;
    return c;
  }
  if (pot.kind == PotentialKind::custom_samples) {
    // Band-limited by convention: the potential is its own interpolant.
    Eigen::VectorXcd vals(static_cast<long>(pot.params.size()));
    for (long j = 0; j < vals.size(); ++j) vals[j] = pot.params[static_cast<size_t>(j)];
    return from_coeffs(interpolate(SampledGrid(std::move(vals))), cutoff);
  }
  throw std::invalid_argument("ConvCoeffs::exact: unsupported potential kind");
}

ConvCoeffs ConvCoeffs::from_coeffs(const FourierCoeffs& v, int cutoff) {
  ConvCoeffs c = zero(cutoff);
  const int m = std::min(cutoff, v.N);
  for (int n = -m; n <= m; ++n) c.data[n + cutoff] = v.at(n) / kSqrtTwoPi;
  return c;
}

ConvCoeffs ConvCoeffs::from_samples(const SampledGrid& grid, int cutoff) {
  if (grid.Ng() < 2 * cutoff + 1)
    throw std::invalid_argument("ConvCoeffs::from_samples: grid too coarse for cutoff");
  const DftCoeffs d = dft(grid);
  ConvCoeffs c = zero(cutoff);
  for (int n = -cutoff; n <= cutoff; ++n) c.data[n + cutoff] = d.at(n);
  return c;
}

ConvCoeffs nonlinear_term_coeffs(const FourierCoeffs& rho, const Nonlinearity& nl, int cutoff) {
  if (nl.linear()) return ConvCoeffs::zero(cutoff);
  if (nl.m == 2.0) {
    // f(rho) = 2c rho: exact in coefficients.
    ConvCoeffs c = ConvCoeffs::from_coeffs(rho, cutoff);
    c.data *= 2.0 * nl.c;
    return c;
  }
  const int Ng = dealiased_grid_size(std::max(rho.N, cutoff));
  const SampledGrid grid = sample(rho, Ng);
  Eigen::VectorXcd vals(Ng);
  for (int j = 0; j < Ng; ++j) {
    const double r = std::max(grid.values[j].real(), 0.0);
    vals[j] = nl.c * nl.m * std::pow(r, nl.m - 1.0);
  }
  return ConvCoeffs::from_samples(SampledGrid(std::move(vals)), cutoff);
}

Eigen::MatrixXcd assemble_hamiltonian(const ConvCoeffs& V, const ConvCoeffs& fterm, int N) {
  const int n = 2 * N + 1;
  Eigen::MatrixXcd H(n, n);
  for (int k = -N; k <= N; ++k) {
    for (int l = -N; l <= N; ++l) {
      Complex val = V.at(k - l) + fterm.at(k - l);
      if (k == l) val += static_cast<double>(k) * k;
      H(k + N, l + N) = val;
    }
  }
  const double herm = (H - H.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12)
    throw std::runtime_error("assemble_hamiltonian: non-Hermitian result, deviation " +
                             std::to_string(herm));
  return H;
}

Eigen::MatrixXcd assemble_hamiltonian(const ConvCoeffs& V, const FourierCoeffs& rho, int N,
                                      const Nonlinearity& nl) {
  return assemble_hamiltonian(V, nonlinear_term_coeffs(rho, nl, 2 * N), N);
}

AliasErrorResult alias_error_norm(const Potential& pot, int N, int Ng, int Ktail) {
  if (pot.kind != PotentialKind::sin_kink)
    throw std::invalid_argument("alias_error_norm: exact coefficients required (sin_kink)");
  if (Ng < 4 * N + 1)
    throw std::invalid_argument("alias_error_norm: requires Ng >= 4N+1");
  if (Ktail <= 0) Ktail = 10 * ((Ng + N - 1) / N);
  if (Ktail < 2) Ktail = 2;

  // Inner sums carry a slowly decaying k^{-2} tail; past Ktail it is
  // completed by the midpoint-rule integral of the coefficient formula,
  // whose own error (the reported bound) is second order and negligible.
  auto tail_integral = [&](double s0) {
    // int_{K+1/2}^inf dk / ((g + k Ng)^2 - 1/4), substituted s = g + k Ng.
    return std::log((s0 + 0.5) / (s0 - 0.5)) / Ng;
  };
  double sum = 0.0;
  double err_sq = 0.0;
  for (int g = -2 * N; g <= 2 * N; ++g) {
    double inner = 0.0;
    for (int k = 1; k <= Ktail; ++k) {
      inner += potential_fourier_coeff(pot, g + k * Ng);
      inner += potential_fourier_coeff(pot, g - k * Ng);
    }
    const double sp = g + (Ktail + 0.5) * Ng;
    const double sm = -g + (Ktail + 0.5) * Ng;
    inner -= (tail_integral(sp) + tail_integral(sm)) / kSqrtTwoPi;
    sum += inner * inner;
    const double eb =
        (Ng / 12.0) * (1.0 / (sp * sp * sp) + 1.0 / (sm * sm * sm)) / kSqrtTwoPi;
    err_sq += eb * eb;
  }
  AliasErrorResult out;
  out.value = std::sqrt(sum);
  out.tail_bound = std::sqrt(err_sq);
  return out;
}

double grid_quartic_integral(const FourierCoeffs& v, int Ng) {
  const SampledGrid grid = sample(v, Ng);
  double acc = 0.0;
  for (int j = 0; j < Ng; ++j) {
    const double a = std::norm(grid.values[j]);
    acc += a * a;
  }
  return kTwoPi / Ng * acc;
}

}  // namespace nleig::fourier
