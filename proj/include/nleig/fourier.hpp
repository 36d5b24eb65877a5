#pragma once

#include <Eigen/Core>
#include <complex>
#include <stdexcept>

#include "nleig/core.hpp"

namespace nleig::fourier {

using Complex = std::complex<double>;

/// Coefficients of a trigonometric polynomial sum_{|k| <= N} c_k e_k with
/// e_k(x) = (2*pi)^{-1/2} exp(i k x). data[k + N] holds c_k. Real-valued
/// functions satisfy c_{-k} = conj(c_k); solver states keep that exact.
struct FourierCoeffs {
  int N = 0;
  Eigen::VectorXcd data;

  FourierCoeffs() : data(Eigen::VectorXcd::Zero(1)) {}
  explicit FourierCoeffs(int cutoff) : N(cutoff), data(Eigen::VectorXcd::Zero(2 * cutoff + 1)) {
    if (cutoff < 0) throw std::invalid_argument("FourierCoeffs: negative cutoff");
  }
  FourierCoeffs(int cutoff, Eigen::VectorXcd values) : N(cutoff), data(std::move(values)) {
    if (data.size() != 2 * static_cast<long>(N) + 1)
      throw std::invalid_argument("FourierCoeffs: data length must be 2N+1");
  }

  Complex& at(int k) { return data[k + N]; }
  Complex at(int k) const { return data[k + N]; }
  int size() const { return static_cast<int>(data.size()); }

  /// Basis vector e_k as a coefficient object with the given cutoff.
  static FourierCoeffs unit_mode(int cutoff, int k);
};

bool is_real_symmetric(const FourierCoeffs& v, double tol = 1e-12);

/// Projects onto the exact conjugate-symmetric subspace (averages c_k with
/// conj(c_{-k})); cleans roundoff drift on solver states.
void symmetrize(FourierCoeffs& v);

/// Values on the uniform grid x_j = 2*pi*j/Ng, j = 0..Ng-1.
struct SampledGrid {
  Eigen::VectorXcd values;

  SampledGrid() = default;
  explicit SampledGrid(Eigen::VectorXcd v) : values(std::move(v)) {}
  int Ng() const { return static_cast<int>(values.size()); }

  template <typename F>
  static SampledGrid from_function(int Ng, F&& f) {
    Eigen::VectorXcd v(Ng);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int j = 0; j < Ng; ++j) v[j] = f(two_pi * j / Ng);
    return SampledGrid(std::move(v));
  }
};

/// Truncation to |k| <= M (requires M <= v.N). Idempotent and
/// norm non-increasing in every H^r.
FourierCoeffs project_modes(const FourierCoeffs& v, int M);

/// Zero-extension to a larger cutoff M >= v.N.
FourierCoeffs embed(const FourierCoeffs& v, int M);

/// H^r norm (sum_k (1+k^2)^r |c_k|^2)^{1/2}; r may be negative.
double sobolev_norm(const FourierCoeffs& v, double r);

/// Weighted inner product inducing the H^r norm.
Complex sobolev_inner(const FourierCoeffs& u, const FourierCoeffs& v, double r);

/// Discrete Fourier transform coefficients hat{phi}^{FFT}_g =
/// (1/Ng) sum_j phi(x_j) exp(-i g x_j), stored for |g| <= floor(Ng/2).
/// The underlying sequence is Ng-periodic; at(g) folds g accordingly.
struct DftCoeffs {
  int Ng = 0;
  Eigen::VectorXcd data;  // index g + M with M = floor(Ng/2)

  int M() const { return Ng / 2; }
  Complex at(long g) const {
    long gg = ((g % Ng) + Ng) % Ng;
    if (gg > Ng / 2) gg -= Ng;
    if (Ng % 2 == 0 && gg == -Ng / 2) gg = Ng / 2;
    return data[gg + M()];
  }
};

/// O(Ng log Ng) discrete transform of grid samples.
DftCoeffs dft(const SampledGrid& samples);

/// Trigonometric interpolant through the samples, returned as coefficients
/// with cutoff floor(Ng/2). For even Ng the boundary mode is split evenly
/// between +Ng/2 and -Ng/2 so that grid values are reproduced exactly.
FourierCoeffs interpolate(const SampledGrid& samples);

/// Grid values of a coefficient vector on the Ng-point grid (any Ng >= 1).
SampledGrid sample(const FourierCoeffs& v, int Ng);

Complex evaluate(const FourierCoeffs& v, double x);

/// Exact coefficients of the density |u|^2; a polynomial of bandwidth 2N,
/// computed on an internal grid with Ng >= 4N+1, exact up to roundoff.
FourierCoeffs nonlinear_density_coeffs(const FourierCoeffs& u);

/// Convolution coefficients for multiplication-operator assembly: matrix
/// entries are conv[k-l], with conv_n = (2*pi)^{-1/2} * (coefficient of the
/// multiplier in the e_n basis), equal to the discrete transform value when
/// built from samples.
struct ConvCoeffs {
  int cutoff = 0;
  Eigen::VectorXcd data;  // n = -cutoff..cutoff

  Complex at(int n) const {
    return (std::abs(n) > cutoff) ? Complex(0, 0) : data[n + cutoff];
  }

  static ConvCoeffs zero(int cutoff);
  /// From exact e-basis coefficients (scaled by (2*pi)^{-1/2}).
  static ConvCoeffs exact(const Potential& pot, int cutoff);
  static ConvCoeffs from_coeffs(const FourierCoeffs& c, int cutoff);
  /// From grid samples via the discrete transform (the inexact path).
  static ConvCoeffs from_samples(const SampledGrid& grid, int cutoff);
};

/// Coefficients of f(rho) as a ConvCoeffs of the given cutoff. Exact for
/// m = 2 (f linear in rho); otherwise evaluated by trigonometric
/// interpolation on a grid with Ng >= 2*rho.N + 1 points (documented as
/// inexact in study metadata).
ConvCoeffs nonlinear_term_coeffs(const FourierCoeffs& rho, const Nonlinearity& nl, int cutoff);

/// Galerkin matrix of -d^2/dx^2 + V + f(rho_tilde) on span{e_k, |k| <= N}:
/// H[k][l] = k^2 delta_{kl} + Vconv[k-l] + fconv[k-l]. Quadratic forms
/// x^* H x equal int |v'|^2 + (V + f(rho)) |v|^2 for v with coefficients x.
/// Hermitian by construction; asserted to 1e-12.
Eigen::MatrixXcd assemble_hamiltonian(const ConvCoeffs& V, const FourierCoeffs& rho, int N,
                                      const Nonlinearity& nl);

/// Variant taking a precomputed nonlinear term (used by the SCF loop).
Eigen::MatrixXcd assemble_hamiltonian(const ConvCoeffs& V, const ConvCoeffs& fterm, int N);

struct AliasErrorResult {
  double value = 0.0;       // truncated double sum
  double tail_bound = 0.0;  // bound on the neglected inner-sum tail
};

/// L^2 norm of the resolved aliasing residual of the sin_kink potential:
/// || P_{2N} (V - I_{Ng} V) ||_{L^2} = (sum_{|g|<=2N} |sum_{k != 0}
/// Vhat_{g+k*Ng}|^2)^{1/2}, inner sum truncated at |k| <= Ktail.
/// Requires Ng >= 4N+1. Ktail <= 0 selects the default 10*ceil(Ng/N).
AliasErrorResult alias_error_norm(const Potential& pot, int N, int Ng, int Ktail = 0);

/// (2*pi/Ng) sum_j |v(x_j)|^4; exact for the quartic integral when
/// Ng >= 4N+1.
double grid_quartic_integral(const FourierCoeffs& v, int Ng);

/// Smallest even grid size >= 4N+1 with fast transform lengths.
int dealiased_grid_size(int N);

}  // namespace nleig::fourier
