#include "rbfshape/rbffd.hpp"

#include "rbfshape/errors.hpp"
#include "rbfshape/interpolation.hpp"
#include "rbfshape/knn.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include <cmath>
#include <string>

namespace rbfshape {

NodeSets NodeSets::collocation(int dim, std::vector<Point> x, std::vector<bool> boundary) {
  NodeSets n;
  n.dim = dim;
  n.y = x;
  n.y_boundary = boundary;
  n.x = std::move(x);
  n.x_boundary = std::move(boundary);
  n.validate();
  return n;
}

void NodeSets::validate() const {
  if (dim != 1 && dim != 2) throw InvalidArgument("NodeSets: dim must be 1 or 2");
  if (x.empty() || y.empty()) throw InvalidArgument("NodeSets: empty node set");
  if (x_boundary.size() != x.size() || y_boundary.size() != y.size()) {
    throw InvalidArgument("NodeSets: boundary flags do not match node counts");
  }
}

std::vector<std::vector<std::size_t>> build_stencils(std::span<const Point> x, int n) {
  if (n < 1 || x.size() < static_cast<std::size_t>(n)) {
    throw InvalidArgument("build_stencils: need at least N = " + std::to_string(n) + " nodes, have " +
                          std::to_string(x.size()));
  }
  const KdTree tree(x);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(x.size());
  for (const auto& p : x) out.push_back(tree.nearest(p, static_cast<std::size_t>(n)));
  return out;
}

std::vector<std::size_t> nu_map(std::span<const Point> x, std::span<const Point> y) {
  const KdTree tree(x);
  std::vector<std::size_t> out;
  out.reserve(y.size());
  for (const auto& p : y) out.push_back(tree.closest(p));
  return out;
}

StencilSet make_stencil_set(const NodeSets& nodes, int n) {
  nodes.validate();
  StencilSet s;
  s.stencils = build_stencils(nodes.x, n);
  s.nu = nu_map(nodes.x, nodes.y);
  s.eps.assign(s.stencils.size(), 0.0);
  return s;
}

PointCloud stencil_cloud(const NodeSets& nodes, const std::vector<std::size_t>& stencil) {
  std::vector<Point> pts;
  pts.reserve(stencil.size());
  for (auto i : stencil) pts.push_back(nodes.x[i]);
  return PointCloud(std::move(pts), nodes.dim);
}

Eigen::VectorXd local_weights(std::span<const Point> stencil, double eps, const KernelSpec& kernel,
                              DiffOp op, const Point& y, int dim) {
  check_shape(eps);
  const auto n = static_cast<Eigen::Index>(stencil.size());
  Eigen::MatrixXd a(n + 1, n + 1);
  Eigen::VectorXd rhs(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    a(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_eval(kernel, (stencil[si] - stencil[static_cast<std::size_t>(j)]).norm(), eps);
      a(i, j) = v;
      a(j, i) = v;
    }
    a(i, n) = 1.0;
    a(n, i) = 1.0;
    const double r = (y - stencil[si]).norm();
    rhs(i) = op == DiffOp::Identity ? kernel_eval(kernel, r, eps) : kernel_laplacian(kernel, r, eps, dim);
  }
  a(n, n) = 0.0;
  rhs(n) = op == DiffOp::Identity ? 1.0 : 0.0;
  return solve_symmetric(a, rhs).head(n);
}

SparseRowMatrix assemble_global(const NodeSets& nodes, const StencilSet& stencils,
                                const KernelSpec& kernel, DiffOp op) {
  nodes.validate();
  if (stencils.nu.size() != nodes.y.size() || stencils.eps.size() != stencils.stencils.size()) {
    throw InvalidArgument("assemble_global: stencil set does not match the node sets");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Point> local;
  for (std::size_t p = 0; p < nodes.y.size(); ++p) {
    const std::size_t s = stencils.nu[p];
    const auto& idx = stencils.stencils[s];
    local.clear();
    for (auto i : idx) local.push_back(nodes.x[i]);
    Eigen::VectorXd w;
    try {
      w = local_weights(local, stencils.eps[s], kernel, op, nodes.y[p], nodes.dim);
    } catch (const IllConditionedSolveError& e) {
      throw LocalWeightsError("stencil " + std::to_string(s) + " (eps " + std::to_string(stencils.eps[s]) +
                                  "): " + e.what(),
                              s);
    } catch (const InvalidArgument& e) {
      throw LocalWeightsError("stencil " + std::to_string(s) + ": " + e.what(), s);
    }
    for (std::size_t j = 0; j < idx.size(); ++j) {
      triplets.emplace_back(static_cast<int>(p), static_cast<int>(idx[j]), w(static_cast<Eigen::Index>(j)));
    }
  }
  SparseRowMatrix g(static_cast<Eigen::Index>(nodes.y.size()), static_cast<Eigen::Index>(nodes.x.size()));
  g.setFromTriplets(triplets.begin(), triplets.end());
  return g;
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

double rms(const Eigen::VectorXd& v) { return v.size() ? v.norm() / std::sqrt(static_cast<double>(v.size())) : 0.0; }

}  // namespace

Eigen::VectorXd solve_poisson(const NodeSets& nodes, const SparseRowMatrix& laplacian,
                              const SpaceFn& f, const SpaceFn& g) {
  nodes.validate();
  const auto m = static_cast<Eigen::Index>(nodes.x.size());
  if (laplacian.rows() != static_cast<Eigen::Index>(nodes.y.size()) || laplacian.cols() != m) {
    throw InvalidArgument("solve_poisson: operator shape does not match the node sets");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  Eigen::Index row = 0;
  for (Eigen::Index p = 0; p < laplacian.rows(); ++p) {
    if (nodes.y_boundary[static_cast<std::size_t>(p)]) continue;
    for (SparseRowMatrix::InnerIterator it(laplacian, p); it; ++it) triplets.emplace_back(row, it.col(), it.value());
    rhs.push_back(f(nodes.y[static_cast<std::size_t>(p)]));
    ++row;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!nodes.x_boundary[static_cast<std::size_t>(i)]) continue;
    triplets.emplace_back(row, i, 1.0);
    rhs.push_back(g(nodes.x[static_cast<std::size_t>(i)]));
    ++row;
  }
  if (row < m) {
    throw SolverError("solve_poisson: " + std::to_string(row) + " equations for " + std::to_string(m) +
                      " unknowns");
  }
  ColMatrix a(row, m);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), row);

  Eigen::VectorXd u;
  if (row == m) {
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("solve_poisson: sparse LU failed: " + lu.lastErrorMessage());
    u = lu.solve(b);
  } else {
    Eigen::SparseQR<ColMatrix, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(a);
    if (qr.info() != Eigen::Success) throw SolverError("solve_poisson: sparse QR failed");
    if (qr.rank() < m) {
      throw SolverError("solve_poisson: rank-deficient system (rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(m) + ")");
    }
    u = qr.solve(b);
  }
  if (!u.allFinite()) throw SolverError("solve_poisson: non-finite solution");
  return u;
}

Trajectory bdf2_heat(const NodeSets& nodes, const SparseRowMatrix& laplacian, double dt, double t_final,
                     double alpha, const Eigen::VectorXd& initial, const SpaceTimeFn& g) {
  nodes.validate();
  const auto m = static_cast<Eigen::Index>(nodes.x.size());
  if (!(dt > 0.0) || !(t_final >= dt)) throw InvalidArgument("bdf2_heat: need dt > 0 and T >= dt");
  if (laplacian.rows() != m || laplacian.cols() != m || initial.size() != m) {
    throw InvalidArgument("bdf2_heat: collocation operator and initial state must be M x M and M");
  }
  const auto steps = static_cast<long>(std::llround(t_final / dt));

  // c * I - dt * alpha * L on interior rows, identity on boundary rows.
  auto system = [&](double c) {
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (nodes.x_boundary[static_cast<std::size_t>(i)]) {
        t.emplace_back(i, i, 1.0);
        continue;
      }
      t.emplace_back(i, i, c);
      for (SparseRowMatrix::InnerIterator it(laplacian, i); it; ++it) {
        t.emplace_back(i, it.col(), -dt * alpha * it.value());
      }
    }
    ColMatrix a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
  };
  using Lu = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;
  Lu euler, bdf2;
  euler.compute(system(1.0));
  if (euler.info() != Eigen::Success) throw SolverError("bdf2_heat: factorization failed", 1);
  if (steps > 1) {
    bdf2.compute(system(1.5));
    if (bdf2.info() != Eigen::Success) throw SolverError("bdf2_heat: factorization failed", 2);
  }

  auto inject = [&](Eigen::VectorXd& u, double t) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (nodes.x_boundary[static_cast<std::size_t>(i)]) u(i) = g(nodes.x[static_cast<std::size_t>(i)], t);
    }
  };

  Trajectory tr;
  Eigen::VectorXd prev = initial;
  Eigen::VectorXd cur = initial;
  tr.times.push_back(0.0);
  tr.norms.push_back(rms(cur));
  for (long n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    Eigen::VectorXd rhs = n == 1 ? cur : Eigen::VectorXd(2.0 * cur - 0.5 * prev);
    inject(rhs, t);
    Eigen::VectorXd next = n == 1 ? Eigen::VectorXd(euler.solve(rhs)) : Eigen::VectorXd(bdf2.solve(rhs));
    if (!next.allFinite()) throw SolverError("bdf2_heat: non-finite state", n);
    inject(next, t);
    prev = std::move(cur);
    cur = std::move(next);
    tr.times.push_back(t);
    tr.norms.push_back(rms(cur));
  }
  tr.final_state = std::move(cur);
  return tr;
}

}  // namespace rbfshape
