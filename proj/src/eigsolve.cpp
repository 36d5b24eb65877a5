#include "nleig/eigsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace nleig::eig {

namespace {

// Largest-magnitude entry made real and positive; pins the free phase/sign.
template <typename Vec>
void canonicalize(Vec& x) {
  using Scalar = typename Vec::Scalar;
  Eigen::Index j = 0;
  x.cwiseAbs().maxCoeff(&j);
  const Scalar pivot = x[j];
  const double mag = std::abs(pivot);
  if (mag > 0.0) x *= (Scalar(mag) / pivot);
}

}  // namespace

Result<double> lowest_eigenpair(const Eigen::MatrixXd& H, const Options& opts) {
  if (H.rows() != H.cols()) throw MatrixError("lowest_eigenpair: H not square");
  (void)opts;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw MatrixError("dense eigendecomposition failed");
  Result<double> out;
  out.lambda = es.eigenvalues()[0];
  out.vector = es.eigenvectors().col(0);
  out.vector.normalize();
  canonicalize(out.vector);
  out.residual = (H * out.vector - out.lambda * out.vector).norm();
  out.iterations = 1;
  return out;
}

Result<std::complex<double>> lowest_eigenpair(const Eigen::MatrixXcd& H, const Options& opts) {
  if (H.rows() != H.cols()) throw MatrixError("lowest_eigenpair: H not square");
  (void)opts;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw MatrixError("dense eigendecomposition failed");
  Result<std::complex<double>> out;
  out.lambda = es.eigenvalues()[0];
  out.vector = es.eigenvectors().col(0);
  out.vector.normalize();
  canonicalize(out.vector);
  out.residual = (H * out.vector - out.lambda * out.vector).norm();
  out.iterations = 1;
  return out;
}

Result<double> lowest_eigenpair(const Eigen::MatrixXd& H, const Eigen::MatrixXd& M,
                                const Options& opts) {
  if (H.rows() != H.cols() || M.rows() != M.cols() || H.rows() != M.rows())
    throw MatrixError("lowest_eigenpair: dimension mismatch");
  (void)opts;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, M);
  if (es.info() != Eigen::Success)
    throw MatrixError("generalized eigendecomposition failed (M not SPD?)");
  Result<double> out;
  out.lambda = es.eigenvalues()[0];
  out.vector = es.eigenvectors().col(0);
  const double mnorm = std::sqrt(out.vector.dot(M * out.vector));
  if (!(mnorm > 0.0)) throw MatrixError("M not positive definite");
  out.vector /= mnorm;
  canonicalize(out.vector);
  out.residual = (H * out.vector - out.lambda * (M * out.vector)).norm();
  out.iterations = 1;
  return out;
}

struct ShiftedFactorization::Impl {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  double shift = 0.0;
  bool valid = false;
};

ShiftedFactorization::ShiftedFactorization() : impl_(std::make_unique<Impl>()) {}
ShiftedFactorization::~ShiftedFactorization() = default;
ShiftedFactorization::ShiftedFactorization(ShiftedFactorization&&) noexcept = default;
ShiftedFactorization& ShiftedFactorization::operator=(ShiftedFactorization&&) noexcept =
    default;

namespace {

bool same_pattern(const SpMat& a, const SpMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros())
    return false;
  const Eigen::Index n = a.nonZeros();
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1,
                    b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + n, b.innerIndexPtr());
}

// H - s*M without a general sparse binary op when the patterns coincide.
SpMat shifted_matrix(const SpMat& H, const SpMat& M, double s, bool patterns_match) {
  if (!patterns_match) return SpMat(H - s * M);
  SpMat out = H;
  Eigen::Map<Eigen::VectorXd>(out.valuePtr(), out.nonZeros()) -=
      s * Eigen::Map<const Eigen::VectorXd>(M.valuePtr(), M.nonZeros());
  return out;
}

// Gershgorin-style lower-bound guess for the pencil; corrected by the
// inertia check after factoring.
double pencil_shift_guess(const SpMat& H, const SpMat& M) {
  const Eigen::Index n = H.rows();
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < H.outerSize(); ++k)
    for (SpMat::InnerIterator it(H, k); it; ++it) {
      if (it.row() == it.col())
        diag[it.row()] = it.value();
      else
        offsum[it.row()] += std::abs(it.value());
    }
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mii = std::max(M.coeff(i, i), 1e-300);
    best = std::min(best, (diag[i] - offsum[i]) / mii);
  }
  return best - 1.0;
}

// CG on A x = b preconditioned with a (possibly stale) LDLT factor.
// Returns false if convergence stalls or A loses definiteness.
bool pcg_solve(const SpMat& A, const Eigen::SimplicialLDLT<SpMat>& precond,
               const Eigen::VectorXd& b, const Eigen::VectorXd& guess, Eigen::VectorXd& x,
               double rel_tol, int max_iter) {
  const double bnorm = b.norm();
  x = guess;
  if (bnorm == 0.0) {
    x.setZero(b.size());
    return true;
  }
  Eigen::VectorXd r = b - A * x;
  Eigen::VectorXd z = precond.solve(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= rel_tol * bnorm) return true;
    const Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) return false;
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = precond.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return r.norm() <= rel_tol * bnorm;
}

}  // namespace

SpMat matrix_from_triplets(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                           const std::vector<double>& values) {
  if (rows.size() != cols.size() || rows.size() != values.size())
    throw MatrixError("matrix_from_triplets: length mismatch");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i)
    trips.emplace_back(rows[i], cols[i], values[i]);
  SpMat out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

bool apply_factor(ShiftedFactorization& fac, const Eigen::VectorXd& b, Eigen::VectorXd& y) {
  if (!fac.impl()->valid) return false;
  y = fac.impl()->ldlt.solve(b);
  return true;
}

std::optional<double> factor_shift(const ShiftedFactorization& fac) {
  if (!fac.impl()->valid) return std::nullopt;
  return fac.impl()->shift;
}

Result<double> lowest_eigenpair(const SpMat& H, const SpMat& M, const Options& opts,
                                const Eigen::VectorXd* x0, ShiftedFactorization* reuse) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || M.rows() != n || M.cols() != n)
    throw MatrixError("lowest_eigenpair: dimension mismatch");

  if (opts.path == Path::dense || (opts.path == Path::automatic && n <= 512)) {
    return lowest_eigenpair(Eigen::MatrixXd(H), Eigen::MatrixXd(M), opts);
  }

  ShiftedFactorization local;
  ShiftedFactorization::Impl& fac = *(reuse ? reuse->impl() : local.impl());
  const bool patterns_match = same_pattern(H, M);

  // Refactor at base - delta, doubling the offset until H - shift*M is
  // positive definite so that inverse iteration targets the lowest
  // eigenvalue. `base` is a known upper bound (a Rayleigh quotient).
  auto refactor_definite = [&](double target, double base) {
    double delta = std::max(base - target, 1e-12);
    for (int guard = 0;; ++guard) {
      if (guard > 120) throw MatrixError("could not find a definite shift (M not SPD?)");
      const double s = base - delta;
      fac.ldlt.compute(shifted_matrix(H, M, s, patterns_match));
      if (fac.ldlt.info() != Eigen::Success)
        throw MatrixError("sparse LDLT factorization failed");
      if (fac.ldlt.vectorD().minCoeff() > 0.0) {
        fac.shift = s;
        fac.valid = true;
        return;
      }
      delta *= 4.0;
    }
  };

  bool stale = fac.valid;  // a reused factor predates the current matrix
  if (!fac.valid) {
    const double guess = opts.shift_hint ? *opts.shift_hint : pencil_shift_guess(H, M);
    refactor_definite(guess, guess + 1.0);
  }

  Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Ones(n);
  {
    const double xm = std::sqrt(x.dot(M * x));
    if (!(xm > 0.0)) throw MatrixError("M-norm of start vector vanishes (M not SPD?)");
    x /= xm;
  }

  // Internal stopping uses the residual scaled by diag(M)^{-1/2}, which is
  // spectrally equivalent to the M^{-1} dual norm and mesh-independent.
  Eigen::VectorXd dinv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mii = M.coeff(i, i);
    if (mii <= 0.0) throw MatrixError("M has a nonpositive diagonal entry");
    dinv_sqrt[i] = 1.0 / std::sqrt(mii);
  }
  const double tol_scaled = opts.tol_scaled.value_or(opts.tol);

  SpMat A_cur;
  if (stale) A_cur = shifted_matrix(H, M, fac.shift, patterns_match);

  double lambda = x.dot(H * x);
  double res_scaled = std::numeric_limits<double>::infinity();
  double res_2 = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool floor_reached = false;
  int iterations = 0;
  int next_refine = 6;

  for (; iterations < opts.max_iter; ++iterations) {
    // A coarse initial shift converges slowly; pull it under the current
    // Rayleigh value once progress stalls (inertia backoff keeps it valid).
    if (iterations == next_refine && res_scaled > tol_scaled) {
      refactor_definite(lambda - std::max(1e-12, std::min(1.0, res_scaled)), lambda);
      stale = false;
      A_cur.resize(0, 0);
      next_refine *= 2;
      best_res = std::numeric_limits<double>::infinity();
      stall = 0;
    }
    const Eigen::VectorXd rhs = M * x;
    Eigen::VectorXd y;
    bool solved = false;
    if (stale) {
      const Eigen::VectorXd guess = x / std::max(lambda - fac.shift, 1e-8);
      // Inner accuracy follows the outer residual; early steps stay cheap.
      const double pcg_tol =
          std::max(1e-13, std::min(1e-5, 0.02 * std::min(res_scaled, 1.0)));
      solved = pcg_solve(A_cur, fac.ldlt, rhs, guess, y, pcg_tol, 60);
      if (!solved) {
        refactor_definite(lambda - 1.0, lambda);
        stale = false;
        A_cur.resize(0, 0);
      }
    }
    if (!solved) y = fac.ldlt.solve(rhs);

    const double ym = std::sqrt(y.dot(M * y));
    if (!(ym > 0.0) || !std::isfinite(ym))
      throw MatrixError("inverse iteration produced a degenerate vector");
    x = y / ym;
    const Eigen::VectorXd Hx = H * x;
    const Eigen::VectorXd Mx = M * x;
    lambda = x.dot(Hx);
    const Eigen::VectorXd r = Hx - lambda * Mx;
    res_2 = r.norm();
    res_scaled = (dinv_sqrt.array() * r.array()).matrix().norm();
    if (res_scaled <= tol_scaled && res_2 <= opts.tol) break;
    // Roundoff floor: the scaled residual has stopped improving near the
    // target while the 2-norm contract already holds.
    stall = (res_scaled > 0.95 * best_res) ? stall + 1 : 0;
    best_res = std::min(best_res, res_scaled);
    if (stall >= 4 && res_2 <= opts.tol && res_scaled <= 1e3 * tol_scaled) {
      floor_reached = true;
      break;
    }
  }

  if (!floor_reached && (res_scaled > tol_scaled || res_2 > opts.tol)) {
    ConvergenceError err("inverse iteration did not reach tolerance", lambda, res_2);
    err.best_vector = std::move(x);
    throw err;
  }

  canonicalize(x);
  x /= std::sqrt(x.dot(M * x));
  Result<double> out;
  out.lambda = x.dot(H * x);
  out.vector = std::move(x);
  out.residual = (H * out.vector - out.lambda * (M * out.vector)).norm();
  out.iterations = iterations + 1;
  return out;
}

}  // namespace nleig::eig
