#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace nleig::fem {

using SpMat = Eigen::SparseMatrix<double>;

/// Uniform structured mesh of an interval (d=1, segments) or a rectangle
/// (d=2, each of the n^2 cells split into two right triangles along the
/// lower-left to upper-right diagonal). Conforming and shape-regular by
/// construction; refining n by an integer factor nests the elements.
struct Mesh {
  int d = 1;
  Eigen::Vector2d sides = Eigen::Vector2d::Zero();
  int n = 0;
  Eigen::MatrixXd vertices;  // (#vertices) x d
  Eigen::MatrixXi elements;  // (#elements) x (d+1), vertex indices
  double h = 0.0;            // max element diameter
};

Mesh build_mesh(int d, const Eigen::Vector2d& sides, int n);

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2q-1.
void gauss_legendre(int q, Eigen::VectorXd& points, Eigen::VectorXd& weights);

/// Quadrature on the reference element (segment [0,1] or unit triangle),
/// exact for polynomials of total degree <= `degree`.
struct QuadratureRule {
  Eigen::MatrixXd points;   // nq x d
  Eigen::VectorXd weights;  // sums to the reference measure
};
QuadratureRule reference_rule(int d, int degree);

/// Per-space quadrature data shared by all assembly and integration paths.
/// The rule is exact for polynomials of degree 4*degree+2 per element,
/// which covers the quartic density terms with margin.
struct ElementQuadrature {
  QuadratureRule ref;
  Eigen::MatrixXd basis;                 // nloc x nq, reference values
  std::vector<Eigen::MatrixXd> dbasis;   // nq entries, nloc x d ref gradients
  Eigen::VectorXd jac_weights;           // nq, ref weights scaled by |det J|
  std::vector<Eigen::Matrix2d> jinv_t;   // per element type, J^{-T} in a d x d block
  int n_types = 1;                       // 1 in 1D, 2 in 2D (lower/upper triangle)
  int nq() const { return static_cast<int>(ref.weights.size()); }
};

/// Continuous P1/P2 Lagrange space on a structured mesh. Nodes live on the
/// refined lattice with degree*n+1 points per side, ordered lexicographically
/// (x fastest). With `dirichlet`, boundary nodes are eliminated and only
/// interior nodes carry dofs.
struct FESpace {
  Mesh mesh;
  int degree = 1;
  bool dirichlet = true;

  Eigen::MatrixXd node_coords;       // (#nodes) x d, full lattice
  std::vector<bool> boundary_mask;   // over full lattice
  Eigen::VectorXi node_to_dof;       // -1 for eliminated nodes
  Eigen::VectorXi dof_to_node;
  int dof_count = 0;
  Eigen::MatrixXi element_nodes;     // (#elements) x nloc, full-node ids
  ElementQuadrature quad;

  int nloc() const { return static_cast<int>(element_nodes.cols()); }
};

std::shared_ptr<const FESpace> make_space(const Mesh& mesh, int degree,
                                          bool dirichlet = true);

/// Physical coordinates of the quadrature points of one element.
Eigen::MatrixXd element_quad_points(const FESpace& space, int elem);

SpMat assemble_stiffness(const FESpace& space);
SpMat assemble_mass(const FESpace& space);

/// Mass matrix weighted by a coefficient given at the quadrature points
/// (row = element, col = quadrature node).
SpMat assemble_weighted_mass(const FESpace& space, const Eigen::MatrixXd& w_at_qp);
SpMat assemble_weighted_mass(const FESpace& space,
                             const std::function<double(const Eigen::Vector2d&)>& w);

/// Pattern-reusing refill of the weighted mass values; the sparsity and the
/// per-element scatter map are built once, updates touch only the values.
class WeightedMassUpdater {
 public:
  explicit WeightedMassUpdater(std::shared_ptr<const FESpace> space);
  void refill(const Eigen::MatrixXd& w_at_qp, SpMat& out) const;
  const SpMat& pattern() const { return pattern_; }

 private:
  std::shared_ptr<const FESpace> space_;
  SpMat pattern_;
  Eigen::MatrixXi scatter_;  // (#elements) x (nloc*nloc), indices into values
};

struct FEFunction {
  std::shared_ptr<const FESpace> space;
  Eigen::VectorXd coeffs;  // one per dof
};

FEFunction zero_function(std::shared_ptr<const FESpace> space);

/// Point evaluation (eliminated boundary nodes contribute zero).
double evaluate(const FEFunction& u, const Eigen::Vector2d& x);

/// Values at all quadrature points of the function's own space,
/// (#elements) x nq.
Eigen::MatrixXd values_at_quad_points(const FEFunction& u);

/// True when `fine` refines `coarse` by an integer factor with
/// degree(fine) >= degree(coarse).
bool is_nested_refinement(const FESpace& coarse, const FESpace& fine);

/// Exact transfer onto a nested refinement with non-decreasing degree; the
/// result represents the same function.
FEFunction prolongate(const FEFunction& u, std::shared_ptr<const FESpace> finer);

struct FENorms {
  std::optional<double> L2;
  std::optional<double> H1;  // full norm: (L2^2 + |grad|^2)^{1/2}
};

/// Reference-space matrices reused across repeated error evaluations.
struct ErrorContext {
  std::shared_ptr<const FESpace> space;
  SpMat mass;
  SpMat stiffness;
};
ErrorContext make_error_context(std::shared_ptr<const FESpace> space);

/// Errors between u_h and a reference on a nested refinement; u_h is
/// prolongated exactly and the norms are evaluated with the reference
/// space's matrices.
FENorms fe_error_norms(const FEFunction& u_h, const FEFunction& u_ref, bool want_L2,
                       bool want_H1);
FENorms fe_error_norms(const FEFunction& u_h, const FEFunction& u_ref,
                       const ErrorContext& ctx, bool want_L2, bool want_H1);

/// Coordinate-format (row col value) export for offline inspection.
void write_coordinate_format(std::ostream& os, const SpMat& A);

}  // namespace nleig::fem
