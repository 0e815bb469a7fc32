#include "eq2pc/homog.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <future>

#include "eq2pc/derive.hpp"

namespace eq2pc {

std::vector<BoundsSample> bounds_curve(double k1, double k2, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("bounds curve needs at least two samples");
  std::vector<BoundsSample> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double v1 = i + 1 == samples ? 1.0 : static_cast<double>(i) / static_cast<double>(samples - 1);
    out.push_back({v1, bounds(v1, k1, k2)});
  }
  return out;
}

ConductivityProblem::ConductivityProblem(Structure structure, double k1, double k2)
    : structure_(std::move(structure)), k1_(k1), k2_(k2) {
  if (structure_.rank() != 2) throw DimensionError("conductivity problems are two-dimensional");
  if (structure_.phases() != 2) throw PhaseError("conductivity problems have two phases");
  if (!(k1 > 0 && k2 > 0)) throw std::invalid_argument("conductivities must be positive");
}

double ConductivityProblem::volume_fraction() const {
  return static_cast<double>(phase_counts(structure_)[0]) / static_cast<double>(structure_.size());
}

namespace {

using Matrix4d = Eigen::Matrix4d;
using Matrix24d = Eigen::Matrix<double, 2, 4>;

/// Gradient operator of the unit bilinear element at (x1, x2). Local nodes
/// (0,0), (1,0), (1,1), (0,1).
Matrix24d gradient_operator(double x1, double x2) {
  Matrix24d B;
  B << -(1 - x2), 1 - x2, x2, -x2,
       -(1 - x1), -x1, x1, 1 - x1;
  return B;
}

Matrix4d element_stiffness() {
  const double g = 1 / std::sqrt(3.0);
  Matrix4d K = Matrix4d::Zero();
  for (double x1 : {(1 - g) / 2, (1 + g) / 2})
    for (double x2 : {(1 - g) / 2, (1 + g) / 2}) {
      const Matrix24d B = gradient_operator(x1, x2);
      K += 0.25 * B.transpose() * B;
    }
  return K;
}

struct Mesh {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> conductivity;  // per element

  std::size_t nodes() const { return rows * cols; }
  std::array<std::size_t, 4> element_nodes(std::size_t i, std::size_t j) const {
    const std::size_t i1 = (i + 1) % rows, j1 = (j + 1) % cols;
    return {i * cols + j, i1 * cols + j, i1 * cols + j1, i * cols + j1};
  }
};

}  // namespace

EffectiveTensor effective_conductivity(const ConductivityProblem& problem, std::size_t refinement,
                                       const SolverOptions& options) {
  if (refinement < 1) throw std::invalid_argument("refinement must be positive");
  const Structure& base = problem.structure();
  if (base.size() > kHomogCellBudget / refinement / refinement)
    throw BudgetExceeded("refined grid exceeds the homogenization budget");
  const Structure s = refinement == 1 ? base : upsample(base, Factors({refinement, refinement}));

  Mesh mesh{s.dims()[0], s.dims()[1], {}};
  mesh.conductivity.resize(s.size());
  for (std::size_t e = 0; e < s.size(); ++e) mesh.conductivity[e] = s[e] == 1 ? problem.k1() : problem.k2();

  const Matrix4d Ke = element_stiffness();
  const Matrix24d Bc = gradient_operator(0.5, 0.5);
  const std::size_t N = mesh.nodes();
  const auto n_unknowns = static_cast<Eigen::Index>(N - 1);  // node 0 pinned

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(16 * N);
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n_unknowns, 2);
  for (std::size_t i = 0; i < mesh.rows; ++i)
    for (std::size_t j = 0; j < mesh.cols; ++j) {
      const double k = mesh.conductivity[i * mesh.cols + j];
      const auto nodes = mesh.element_nodes(i, j);
      // -int B^T k g for g = e1, e2; B averages to Bc over the element
      const Eigen::Matrix<double, 4, 2> fe = -k * Bc.transpose();
      for (int a = 0; a < 4; ++a) {
        if (nodes[a] == 0) continue;
        const auto r = static_cast<Eigen::Index>(nodes[a] - 1);
        rhs.row(r) += fe.row(a);
        for (int b = 0; b < 4; ++b)
          if (nodes[b] != 0) triplets.emplace_back(r, static_cast<Eigen::Index>(nodes[b] - 1), k * Ke(a, b));
      }
    }
  Eigen::SparseMatrix<double> A(n_unknowns, n_unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());

  auto solve = [&](int load) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(options.tolerance);
    cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations : 10 * std::max<Eigen::Index>(1, n_unknowns));
    cg.compute(A);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    if (n_unknowns > 0 && rhs.col(load).squaredNorm() > 0) {
      u.tail(n_unknowns) = cg.solve(rhs.col(load));
      if (cg.info() != Eigen::Success)
        throw SolverError("conjugate gradient did not converge (residual " + std::to_string(cg.error()) + ")");
    }
    return std::make_pair(u, static_cast<long>(n_unknowns > 0 ? cg.iterations() : 0));
  };

  std::array<std::pair<Eigen::VectorXd, long>, 2> solutions;
  if (options.parallel) {
    auto second = std::async(std::launch::async, solve, 1);
    solutions[0] = solve(0);
    solutions[1] = second.get();
  } else {
    solutions[0] = solve(0);
    solutions[1] = solve(1);
  }

  EffectiveTensor out;
  Eigen::Matrix2d K = Eigen::Matrix2d::Zero();
  for (int load = 0; load < 2; ++load) {
    const Eigen::VectorXd& u = solutions[static_cast<std::size_t>(load)].first;
    Eigen::Vector2d flux = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < mesh.rows; ++i)
      for (std::size_t j = 0; j < mesh.cols; ++j) {
        const auto nodes = mesh.element_nodes(i, j);
        Eigen::Vector4d ue;
        for (int a = 0; a < 4; ++a) ue[a] = u[static_cast<Eigen::Index>(nodes[a])];
        Eigen::Vector2d grad = Bc * ue;
        grad[load] += 1;
        flux += mesh.conductivity[i * mesh.cols + j] * grad;
      }
    K.col(load) = flux / static_cast<double>(N);
    out.iterations[static_cast<std::size_t>(load)] = solutions[static_cast<std::size_t>(load)].second;
  }
  out.asymmetry = std::abs(K(0, 1) - K(1, 0)) / K.norm();
  out.K = (K + K.transpose()) / 2;
  return out;
}

double relative_deviation(const Eigen::Matrix2d& K1, const Eigen::Matrix2d& K2) {
  const double denom = K1.norm();
  if (denom == 0) throw std::invalid_argument("reference tensor is zero");
  return (K1 - K2).norm() / denom;
}

}  // namespace eq2pc
