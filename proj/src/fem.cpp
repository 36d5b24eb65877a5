#include "nleig/fem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nleig::fem {

namespace {

void basis_1d(int degree, double xi, Eigen::VectorXd& N, Eigen::VectorXd& dN) {
  if (degree == 1) {
    N.resize(2);
    dN.resize(2);
    N << 1.0 - xi, xi;
    dN << -1.0, 1.0;
  } else {
    N.resize(3);
    dN.resize(3);
    N << (1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0), 4.0 * xi * (1.0 - xi);
    dN << 4.0 * xi - 3.0, 4.0 * xi - 1.0, 4.0 - 8.0 * xi;
  }
}

// Node order: v0, v1, v2, mid01, mid12, mid02 (barycentric l0=1-xi-eta, l1=xi, l2=eta).
void basis_2d(int degree, double xi, double eta, Eigen::VectorXd& N, Eigen::MatrixXd& dN) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  if (degree == 1) {
    N.resize(3);
    dN.resize(3, 2);
    N << l0, l1, l2;
    dN << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  } else {
    N.resize(6);
    dN.resize(6, 2);
    N << l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1, 4.0 * l1 * l2, 4.0 * l0 * l2;
    const Eigen::RowVector2d g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
    dN.row(0) = (4.0 * l0 - 1.0) * g0;
    dN.row(1) = (4.0 * l1 - 1.0) * g1;
    dN.row(2) = (4.0 * l2 - 1.0) * g2;
    dN.row(3) = 4.0 * (l0 * g1 + l1 * g0);
    dN.row(4) = 4.0 * (l1 * g2 + l2 * g1);
    dN.row(5) = 4.0 * (l0 * g2 + l2 * g0);
  }
}

int lattice_width(const Mesh& mesh, int degree) { return degree * mesh.n + 1; }

}  // namespace

Mesh build_mesh(int d, const Eigen::Vector2d& sides, int n) {
  if (n < 1) throw std::invalid_argument("build_mesh: n must be >= 1");
  if (d != 1 && d != 2) throw std::invalid_argument("build_mesh: d must be 1 or 2");
  if (sides[0] <= 0.0 || (d == 2 && sides[1] <= 0.0))
    throw std::invalid_argument("build_mesh: side lengths must be positive");
  Mesh mesh;
  mesh.d = d;
  mesh.sides = sides;
  mesh.n = n;
  if (d == 1) {
    mesh.vertices.resize(n + 1, 1);
    for (int i = 0; i <= n; ++i) mesh.vertices(i, 0) = sides[0] * i / n;
    mesh.elements.resize(n, 2);
    for (int i = 0; i < n; ++i) mesh.elements.row(i) << i, i + 1;
    mesh.h = sides[0] / n;
  } else {
    const int w = n + 1;
    mesh.vertices.resize(w * w, 2);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        mesh.vertices.row(j * w + i) << sides[0] * i / n, sides[1] * j / n;
    mesh.elements.resize(2 * n * n, 3);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v00 = j * w + i, v10 = j * w + i + 1;
        const int v01 = (j + 1) * w + i, v11 = (j + 1) * w + i + 1;
        mesh.elements.row(2 * (j * n + i)) << v00, v10, v11;      // lower
        mesh.elements.row(2 * (j * n + i) + 1) << v00, v11, v01;  // upper
      }
    mesh.h = std::hypot(sides[0] / n, sides[1] / n);
  }
  return mesh;
}

void gauss_legendre(int q, Eigen::VectorXd& points, Eigen::VectorXd& weights) {
  if (q < 1) throw std::invalid_argument("gauss_legendre: q must be >= 1");
  // Golub-Welsch on the Jacobi matrix, mapped from [-1,1] to [0,1].
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  points.resize(q);
  weights.resize(q);
  for (int i = 0; i < q; ++i) {
    points[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // total mass 2 on [-1,1], scaled by 1/2
  }
}

QuadratureRule reference_rule(int d, int degree) {
  if (degree < 0) throw std::runtime_error("reference_rule: negative degree");
  QuadratureRule rule;
  if (d == 1) {
    const int q = (degree + 2) / 2;
    Eigen::VectorXd x, w;
    gauss_legendre(q, x, w);
    rule.points = x;
    rule.weights = w;
    return rule;
  }
  // Collapsed tensor rule on the unit triangle: (xi, eta) = (s, t(1-s)) with
  // Jacobian (1-s); exact for total degree <= 2q-2.
  const int q = (degree + 3) / 2;
  Eigen::VectorXd x, w;
  gauss_legendre(q, x, w);
  rule.points.resize(q * q, 2);
  rule.weights.resize(q * q);
  int idx = 0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j, ++idx) {
      rule.points(idx, 0) = x[i];
      rule.points(idx, 1) = x[j] * (1.0 - x[i]);
      rule.weights[idx] = w[i] * w[j] * (1.0 - x[i]);
    }
  return rule;
}

std::shared_ptr<const FESpace> make_space(const Mesh& mesh, int degree, bool dirichlet) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("make_space: degree must be 1 or 2");
  auto sp = std::make_shared<FESpace>();
  FESpace& s = *sp;
  s.mesh = mesh;
  s.degree = degree;
  s.dirichlet = dirichlet;

  const int k = degree;
  const int w = lattice_width(mesh, k);
  const int n = mesh.n;

  if (mesh.d == 1) {
    s.node_coords.resize(w, 1);
    s.boundary_mask.assign(w, false);
    for (int i = 0; i < w; ++i) {
      s.node_coords(i, 0) = mesh.sides[0] * i / (k * n);
      s.boundary_mask[static_cast<size_t>(i)] = (i == 0 || i == w - 1);
    }
    s.element_nodes.resize(n, k + 1);
    for (int e = 0; e < n; ++e) {
      if (k == 1)
        s.element_nodes.row(e) << e, e + 1;
      else
        s.element_nodes.row(e) << 2 * e, 2 * e + 2, 2 * e + 1;
    }
  } else {
    s.node_coords.resize(w * w, 2);
    s.boundary_mask.assign(static_cast<size_t>(w) * w, false);
    for (int j = 0; j < w; ++j)
      for (int i = 0; i < w; ++i) {
        s.node_coords.row(j * w + i) << mesh.sides[0] * i / (k * n),
            mesh.sides[1] * j / (k * n);
        s.boundary_mask[static_cast<size_t>(j) * w + i] =
            (i == 0 || i == w - 1 || j == 0 || j == w - 1);
      }
    const int nloc = (k == 1) ? 3 : 6;
    s.element_nodes.resize(2 * n * n, nloc);
    auto id = [&](int ix, int iy) { return iy * w + ix; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int e = 2 * (j * n + i);
        if (k == 1) {
          s.element_nodes.row(e) << id(i, j), id(i + 1, j), id(i + 1, j + 1);
          s.element_nodes.row(e + 1) << id(i, j), id(i + 1, j + 1), id(i, j + 1);
        } else {
          const int x0 = 2 * i, y0 = 2 * j;
          s.element_nodes.row(e) << id(x0, y0), id(x0 + 2, y0), id(x0 + 2, y0 + 2),
              id(x0 + 1, y0), id(x0 + 2, y0 + 1), id(x0 + 1, y0 + 1);
          s.element_nodes.row(e + 1) << id(x0, y0), id(x0 + 2, y0 + 2), id(x0, y0 + 2),
              id(x0 + 1, y0 + 1), id(x0 + 1, y0 + 2), id(x0, y0 + 1);
        }
      }
  }

  const long n_nodes = s.node_coords.rows();
  s.node_to_dof = Eigen::VectorXi::Constant(n_nodes, -1);
  std::vector<int> active;
  for (long i = 0; i < n_nodes; ++i)
    if (!dirichlet || !s.boundary_mask[static_cast<size_t>(i)]) {
      s.node_to_dof[i] = static_cast<int>(active.size());
      active.push_back(static_cast<int>(i));
    }
  s.dof_count = static_cast<int>(active.size());
  s.dof_to_node.resize(s.dof_count);
  for (int i = 0; i < s.dof_count; ++i) s.dof_to_node[i] = active[static_cast<size_t>(i)];

  // Quadrature exact to degree 4k+2 on each element.
  ElementQuadrature& eq = s.quad;
  eq.ref = reference_rule(mesh.d, 4 * k + 2);
  const int nq = eq.nq();
  const int nloc = static_cast<int>(s.element_nodes.cols());
  eq.basis.resize(nloc, nq);
  eq.dbasis.assign(static_cast<size_t>(nq), Eigen::MatrixXd());
  for (int q = 0; q < nq; ++q) {
    Eigen::VectorXd N;
    if (mesh.d == 1) {
      Eigen::VectorXd dN;
      basis_1d(k, eq.ref.points(q, 0), N, dN);
      eq.dbasis[static_cast<size_t>(q)] = dN;
    } else {
      Eigen::MatrixXd dN;
      basis_2d(k, eq.ref.points(q, 0), eq.ref.points(q, 1), N, dN);
      eq.dbasis[static_cast<size_t>(q)] = dN;
    }
    eq.basis.col(q) = N;
  }
  if (mesh.d == 1) {
    const double h = mesh.sides[0] / n;
    eq.jac_weights = eq.ref.weights * h;
    eq.n_types = 1;
    eq.jinv_t.assign(1, Eigen::Matrix2d::Zero());
    eq.jinv_t[0](0, 0) = 1.0 / h;
  } else {
    const double hx = mesh.sides[0] / n, hy = mesh.sides[1] / n;
    eq.jac_weights = eq.ref.weights * (hx * hy);
    eq.n_types = 2;
    eq.jinv_t.assign(2, Eigen::Matrix2d::Zero());
    // lower: J columns (hx,0),(hx,hy); upper: J columns (hx,hy),(0,hy)
    Eigen::Matrix2d Jl, Ju;
    Jl << hx, hx, 0.0, hy;
    Ju << hx, 0.0, hy, hy;
    eq.jinv_t[0] = Jl.inverse().transpose();
    eq.jinv_t[1] = Ju.inverse().transpose();
  }
  return sp;
}

Eigen::MatrixXd element_quad_points(const FESpace& space, int elem) {
  const Mesh& mesh = space.mesh;
  const int nq = space.quad.nq();
  Eigen::MatrixXd pts(nq, mesh.d);
  const Eigen::VectorXd p0 = mesh.vertices.row(mesh.elements(elem, 0)).transpose();
  if (mesh.d == 1) {
    const double h = mesh.sides[0] / mesh.n;
    for (int q = 0; q < nq; ++q) pts(q, 0) = p0[0] + h * space.quad.ref.points(q, 0);
  } else {
    const Eigen::Vector2d a = mesh.vertices.row(mesh.elements(elem, 1)).transpose() -
                              p0;
    const Eigen::Vector2d b = mesh.vertices.row(mesh.elements(elem, 2)).transpose() -
                              p0;
    for (int q = 0; q < nq; ++q)
      pts.row(q) = (p0 + a * space.quad.ref.points(q, 0) + b * space.quad.ref.points(q, 1))
                       .transpose();
  }
  return pts;
}

namespace {

// Local matrices are identical for all elements of one geometric type.
std::vector<Eigen::MatrixXd> local_stiffness(const FESpace& s) {
  const ElementQuadrature& eq = s.quad;
  const int nloc = s.nloc();
  const int d = s.mesh.d;
  std::vector<Eigen::MatrixXd> out(static_cast<size_t>(eq.n_types),
                                   Eigen::MatrixXd::Zero(nloc, nloc));
  for (int t = 0; t < eq.n_types; ++t) {
    const auto jinv_t = eq.jinv_t[static_cast<size_t>(t)].topLeftCorner(d, d);
    for (int q = 0; q < eq.nq(); ++q) {
      const Eigen::MatrixXd grad = eq.dbasis[static_cast<size_t>(q)] * jinv_t.transpose();
      out[static_cast<size_t>(t)] += eq.jac_weights[q] * grad * grad.transpose();
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> local_mass(const FESpace& s) {
  const ElementQuadrature& eq = s.quad;
  const int nloc = s.nloc();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nloc, nloc);
  for (int q = 0; q < eq.nq(); ++q)
    m += eq.jac_weights[q] * eq.basis.col(q) * eq.basis.col(q).transpose();
  return std::vector<Eigen::MatrixXd>(static_cast<size_t>(eq.n_types), m);
}

int element_type(const FESpace& s, int elem) {
  return (s.mesh.d == 1) ? 0 : (elem % 2);
}

SpMat scatter_local(const FESpace& s, const std::vector<Eigen::MatrixXd>& local) {
  const int nloc = s.nloc();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(s.element_nodes.rows()) * nloc * nloc);
  for (int e = 0; e < s.element_nodes.rows(); ++e) {
    const Eigen::MatrixXd& m = local[static_cast<size_t>(element_type(s, e))];
    for (int a = 0; a < nloc; ++a) {
      const int ia = s.node_to_dof[s.element_nodes(e, a)];
      if (ia < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const int ib = s.node_to_dof[s.element_nodes(e, b)];
        if (ib < 0) continue;
        trips.emplace_back(ia, ib, m(a, b));
      }
    }
  }
  SpMat A(s.dof_count, s.dof_count);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SpMat assemble_stiffness(const FESpace& space) {
  return scatter_local(space, local_stiffness(space));
}

SpMat assemble_mass(const FESpace& space) { return scatter_local(space, local_mass(space)); }

SpMat assemble_weighted_mass(const FESpace& space, const Eigen::MatrixXd& w_at_qp) {
  WeightedMassUpdater upd(std::make_shared<FESpace>(space));
  SpMat out;
  upd.refill(w_at_qp, out);
  return out;
}

SpMat assemble_weighted_mass(const FESpace& space,
                             const std::function<double(const Eigen::Vector2d&)>& w) {
  const int nq = space.quad.nq();
  Eigen::MatrixXd w_at_qp(space.element_nodes.rows(), nq);
  for (int e = 0; e < space.element_nodes.rows(); ++e) {
    const Eigen::MatrixXd pts = element_quad_points(space, e);
    for (int q = 0; q < nq; ++q) {
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      x.head(space.mesh.d) = pts.row(q).transpose();
      w_at_qp(e, q) = w(x);
    }
  }
  return assemble_weighted_mass(space, w_at_qp);
}

WeightedMassUpdater::WeightedMassUpdater(std::shared_ptr<const FESpace> space)
    : space_(std::move(space)) {
  const FESpace& s = *space_;
  const int nloc = s.nloc();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(s.element_nodes.rows()) * nloc * nloc);
  for (int e = 0; e < s.element_nodes.rows(); ++e)
    for (int a = 0; a < nloc; ++a) {
      const int ia = s.node_to_dof[s.element_nodes(e, a)];
      if (ia < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const int ib = s.node_to_dof[s.element_nodes(e, b)];
        if (ib < 0) continue;
        trips.emplace_back(ia, ib, 0.0);
      }
    }
  pattern_.resize(s.dof_count, s.dof_count);
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  // Map each local (a,b) pair to its slot in the compressed value array.
  scatter_.resize(s.element_nodes.rows(), nloc * nloc);
  scatter_.setConstant(-1);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  auto find_slot = [&](int row, int col) {
    for (int p = outer[col]; p < outer[col + 1]; ++p)
      if (inner[p] == row) return p;
    throw std::logic_error("WeightedMassUpdater: missing pattern entry");
  };
  for (int e = 0; e < s.element_nodes.rows(); ++e)
    for (int a = 0; a < nloc; ++a) {
      const int ia = s.node_to_dof[s.element_nodes(e, a)];
      if (ia < 0) continue;
      for (int b = 0; b < nloc; ++b) {
        const int ib = s.node_to_dof[s.element_nodes(e, b)];
        if (ib < 0) continue;
        scatter_(e, a * nloc + b) = find_slot(ia, ib);
      }
    }
}

void WeightedMassUpdater::refill(const Eigen::MatrixXd& w_at_qp, SpMat& out) const {
  const FESpace& s = *space_;
  const ElementQuadrature& eq = s.quad;
  const int nloc = s.nloc();
  const int nq = eq.nq();
  if (w_at_qp.rows() != s.element_nodes.rows() || w_at_qp.cols() != nq)
    throw std::invalid_argument("weighted mass: weight array shape mismatch");
  if (out.nonZeros() == pattern_.nonZeros() && out.rows() == pattern_.rows()) {
    Eigen::Map<Eigen::VectorXd>(out.valuePtr(), out.nonZeros()).setZero();
  } else {
    out = pattern_;
  }
  double* vals = out.valuePtr();
  Eigen::MatrixXd scaled(nloc, nq);
  Eigen::MatrixXd local(nloc, nloc);
  for (int e = 0; e < s.element_nodes.rows(); ++e) {
    for (int q = 0; q < nq; ++q)
      scaled.col(q) = (w_at_qp(e, q) * eq.jac_weights[q]) * eq.basis.col(q);
    local.noalias() = scaled * eq.basis.transpose();
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        const int slot = scatter_(e, a * nloc + b);
        if (slot >= 0) vals[slot] += local(a, b);
      }
  }
}

FEFunction zero_function(std::shared_ptr<const FESpace> space) {
  FEFunction f;
  f.coeffs = Eigen::VectorXd::Zero(space->dof_count);
  f.space = std::move(space);
  return f;
}

namespace {

// Locates the element containing x and returns local reference coordinates.
void locate(const FESpace& s, const Eigen::Vector2d& x, int& elem, double& xi, double& eta) {
  const Mesh& mesh = s.mesh;
  const int n = mesh.n;
  if (mesh.d == 1) {
    const double h = mesh.sides[0] / n;
    int c = std::min(n - 1, std::max(0, static_cast<int>(std::floor(x[0] / h))));
    xi = std::clamp(x[0] / h - c, 0.0, 1.0);
    eta = 0.0;
    elem = c;
    return;
  }
  const double hx = mesh.sides[0] / n, hy = mesh.sides[1] / n;
  int cx = std::min(n - 1, std::max(0, static_cast<int>(std::floor(x[0] / hx))));
  int cy = std::min(n - 1, std::max(0, static_cast<int>(std::floor(x[1] / hy))));
  const double lx = std::clamp(x[0] / hx - cx, 0.0, 1.0);
  const double ly = std::clamp(x[1] / hy - cy, 0.0, 1.0);
  if (ly <= lx) {  // lower triangle
    elem = 2 * (cy * n + cx);
    eta = ly;
    xi = lx - ly;
  } else {  // upper triangle
    elem = 2 * (cy * n + cx) + 1;
    xi = lx;
    eta = ly - lx;
  }
}

}  // namespace

double evaluate(const FEFunction& u, const Eigen::Vector2d& x) {
  const FESpace& s = *u.space;
  int elem;
  double xi, eta;
  locate(s, x, elem, xi, eta);
  Eigen::VectorXd N;
  if (s.mesh.d == 1) {
    Eigen::VectorXd dN;
    basis_1d(s.degree, xi, N, dN);
  } else {
    Eigen::MatrixXd dN;
    basis_2d(s.degree, xi, eta, N, dN);
  }
  double val = 0.0;
  for (int a = 0; a < s.nloc(); ++a) {
    const int dof = s.node_to_dof[s.element_nodes(elem, a)];
    if (dof >= 0) val += N[a] * u.coeffs[dof];
  }
  return val;
}

Eigen::MatrixXd values_at_quad_points(const FEFunction& u) {
  const FESpace& s = *u.space;
  const ElementQuadrature& eq = s.quad;
  const int nloc = s.nloc();
  Eigen::MatrixXd out(s.element_nodes.rows(), eq.nq());
  Eigen::VectorXd local(nloc);
  for (int e = 0; e < s.element_nodes.rows(); ++e) {
    for (int a = 0; a < nloc; ++a) {
      const int dof = s.node_to_dof[s.element_nodes(e, a)];
      local[a] = (dof >= 0) ? u.coeffs[dof] : 0.0;
    }
    out.row(e) = (eq.basis.transpose() * local).transpose();
  }
  return out;
}

bool is_nested_refinement(const FESpace& coarse, const FESpace& fine) {
  if (coarse.mesh.d != fine.mesh.d) return false;
  if ((coarse.mesh.sides.head(coarse.mesh.d) - fine.mesh.sides.head(fine.mesh.d)).norm() >
      1e-12)
    return false;
  if (fine.mesh.n % coarse.mesh.n != 0) return false;
  return fine.degree >= coarse.degree;
}

FEFunction prolongate(const FEFunction& u, std::shared_ptr<const FESpace> finer) {
  if (!is_nested_refinement(*u.space, *finer))
    throw std::invalid_argument("prolongate: target space is not a nested refinement");
  FEFunction out;
  out.coeffs = Eigen::VectorXd::Zero(finer->dof_count);
  for (int dof = 0; dof < finer->dof_count; ++dof) {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    x.head(finer->mesh.d) =
        finer->node_coords.row(finer->dof_to_node[dof]).transpose();
    out.coeffs[dof] = evaluate(u, x);
  }
  out.space = std::move(finer);
  return out;
}

ErrorContext make_error_context(std::shared_ptr<const FESpace> space) {
  ErrorContext ctx;
  ctx.mass = assemble_mass(*space);
  ctx.stiffness = assemble_stiffness(*space);
  ctx.space = std::move(space);
  return ctx;
}

FENorms fe_error_norms(const FEFunction& u_h, const FEFunction& u_ref,
                       const ErrorContext& ctx, bool want_L2, bool want_H1) {
  if (u_ref.space.get() != ctx.space.get() &&
      !(u_ref.space->mesh.n == ctx.space->mesh.n && u_ref.space->degree == ctx.space->degree))
    throw std::invalid_argument("fe_error_norms: reference/context space mismatch");
  const FEFunction lifted = prolongate(u_h, ctx.space);
  const Eigen::VectorXd e = lifted.coeffs - u_ref.coeffs;
  FENorms out;
  const double l2sq = e.dot(ctx.mass * e);
  if (want_L2) out.L2 = std::sqrt(std::max(0.0, l2sq));
  if (want_H1) out.H1 = std::sqrt(std::max(0.0, l2sq + e.dot(ctx.stiffness * e)));
  return out;
}

FENorms fe_error_norms(const FEFunction& u_h, const FEFunction& u_ref, bool want_L2,
                       bool want_H1) {
  return fe_error_norms(u_h, u_ref, make_error_context(u_ref.space), want_L2, want_H1);
}

void write_coordinate_format(std::ostream& os, const SpMat& A) {
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      os << it.row() << " " << it.col() << " " << std::scientific << it.value() << "\n";
}

}  // namespace nleig::fem
