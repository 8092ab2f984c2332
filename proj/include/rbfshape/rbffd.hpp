#pragma once

#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <span>
#include <vector>

namespace rbfshape {

/// Interpolation nodes X (M) and evaluation nodes Y (P = r M), with boundary flags.
struct NodeSets {
  int dim = 1;
  std::vector<Point> x;
  std::vector<Point> y;
  std::vector<bool> x_boundary;
  std::vector<bool> y_boundary;

  /// Collocation: Y = X.
  static NodeSets collocation(int dim, std::vector<Point> x, std::vector<bool> boundary);
  void validate() const;
  double oversampling() const { return static_cast<double>(y.size()) / static_cast<double>(x.size()); }
};

struct StencilSet {
  std::vector<std::vector<std::size_t>> stencils;  // per X node, N indices into X, nearest first
  std::vector<std::size_t> nu;                     // per Y node, index of the closest X node
  std::vector<double> eps;                         // per stencil
};

/// N nearest X nodes for every center (center first), ties by lower index. Throws if M < N.
std::vector<std::vector<std::size_t>> build_stencils(std::span<const Point> x, int n);

/// Closest X node for every Y node, ties by lower index.
std::vector<std::size_t> nu_map(std::span<const Point> x, std::span<const Point> y);

StencilSet make_stencil_set(const NodeSets& nodes, int n);

PointCloud stencil_cloud(const NodeSets& nodes, const std::vector<std::size_t>& stencil);

enum class DiffOp { Identity, Laplacian };

/// Weights w with (L u)(y) ~ sum_j w_j u(x_j), from the constant-augmented local
/// interpolation system. Throws IllConditionedSolveError on failure.
Eigen::VectorXd local_weights(std::span<const Point> stencil, double eps, const KernelSpec& kernel,
                              DiffOp op, const Point& y, int dim);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// P x M operator; row p holds the local weights of stencil nu(y_p). Local failures
/// are rethrown as LocalWeightsError carrying the stencil index.
SparseRowMatrix assemble_global(const NodeSets& nodes, const StencilSet& stencils,
                                const KernelSpec& kernel, DiffOp op);

using SpaceFn = std::function<double(const Point&)>;
using SpaceTimeFn = std::function<double(const Point&, double)>;

/// Laplacian(u) = f on interior Y rows, u = g on boundary X nodes. Square systems use a
/// sparse LU, oversampled ones a sparse QR least-squares solve. Throws SolverError.
Eigen::VectorXd solve_poisson(const NodeSets& nodes, const SparseRowMatrix& laplacian,
                              const SpaceFn& f, const SpaceFn& g);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> norms;  // discrete L2 norm of the state at each time
  Eigen::VectorXd final_state;
};

/// u' = alpha L u on collocation nodes. One implicit Euler step, then BDF2; both systems
/// are factored once. Boundary rows carry g(t_{n+1}) inside each implicit solve and the
/// boundary values are overwritten with g after every step. Throws SolverError with the step.
Trajectory bdf2_heat(const NodeSets& nodes, const SparseRowMatrix& laplacian, double dt, double t_final,
                     double alpha, const Eigen::VectorXd& initial, const SpaceTimeFn& g);

}  // namespace rbfshape
