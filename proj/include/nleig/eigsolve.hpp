#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nleig::eig {

using SpMat = Eigen::SparseMatrix<double>;

struct MatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  double best_lambda;
  double best_residual;
  Eigen::VectorXd best_vector;
  ConvergenceError(const std::string& msg, double lambda, double residual)
      : std::runtime_error(msg), best_lambda(lambda), best_residual(residual) {}
};

enum class Path { automatic, dense, iterative };

struct Options {
  double tol = 1e-11;  // on ||H x - lambda M x||_2 with ||x||_M = 1
  int max_iter = 400;
  std::optional<double> shift_hint;  // lower bound on lambda, e.g. previous value - 1
  Path path = Path::automatic;
  // Iterative-path stopping threshold on the diag(M)^{-1/2}-scaled residual
  // (mesh-independent). Defaults to tol.
  std::optional<double> tol_scaled;
};

template <typename Scalar>
struct Result {
  double lambda = 0.0;
  Eigen::Vector<Scalar, Eigen::Dynamic> vector;
  double residual = 0.0;
  int iterations = 0;
};

/// Reusable shifted factorization. lowest_eigenpair may solve against a
/// slightly stale factorization by preconditioned CG and refactors when
/// that stops paying off; callers keep one instance across related solves.
class ShiftedFactorization {
 public:
  ShiftedFactorization();
  ~ShiftedFactorization();
  ShiftedFactorization(ShiftedFactorization&&) noexcept;
  ShiftedFactorization& operator=(ShiftedFactorization&&) noexcept;

  struct Impl;
  Impl* impl() { return impl_.get(); }
  const Impl* impl() const { return impl_.get(); }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Lowest eigenpair of H x = lambda x, H real symmetric dense.
Result<double> lowest_eigenpair(const Eigen::MatrixXd& H, const Options& opts = {});

/// Lowest eigenpair of H x = lambda x, H complex Hermitian dense.
Result<std::complex<double>> lowest_eigenpair(const Eigen::MatrixXcd& H,
                                              const Options& opts = {});

/// Lowest eigenpair of the dense symmetric pencil H x = lambda M x, M SPD.
Result<double> lowest_eigenpair(const Eigen::MatrixXd& H, const Eigen::MatrixXd& M,
                                const Options& opts = {});

/// Lowest eigenpair of the sparse symmetric pencil H x = lambda M x, M SPD.
/// Dimensions <= 512 take a dense eigendecomposition; larger systems use
/// shifted inverse iteration with a sparse LDLT factorization. An optional
/// start vector and a ShiftedFactorization make repeated nearby solves cheap.
Result<double> lowest_eigenpair(const SpMat& H, const SpMat& M, const Options& opts = {},
                                const Eigen::VectorXd* x0 = nullptr,
                                ShiftedFactorization* reuse = nullptr);

/// Assembles a symmetric operator from coordinate triples (duplicates sum).
SpMat matrix_from_triplets(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                           const std::vector<double>& values);

/// Applies the stored factorization: y = (H - shift*M)^{-1} b. Returns false
/// when no factorization is held.
bool apply_factor(ShiftedFactorization& fac, const Eigen::VectorXd& b, Eigen::VectorXd& y);

/// Shift of the stored factorization (meaningful only when valid).
std::optional<double> factor_shift(const ShiftedFactorization& fac);

}  // namespace nleig::eig
