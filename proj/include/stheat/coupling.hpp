#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "stheat/fosls.hpp"
#include "stheat/heatbem.hpp"
#include "stheat/mesh.hpp"
#include "stheat/spaces.hpp"

namespace stheat {

/// alpha-independent assembly of one level: FOSLS blocks, boundary operators
/// and the dense coupling block C1 = [V | K - mass/2] on the trace spaces.
struct CouplingBlocks {
  DofMap dofs;
  FoslsMatrices fosls;
  BemMatrices bem;
  Eigen::MatrixXd C1;
  NeumannTrace ntrace;
  std::vector<int> dirichlet_global;
};

/// C1 in trace bases: rows Neumann panels, columns [Neumann panels | Dirichlet nodes].
inline Eigen::MatrixXd assemble_c1(const BemMatrices& bem) {
  if (bem.V.rows() != bem.K.rows() || bem.K.rows() != bem.mass.rows() ||
      bem.K.cols() != bem.mass.cols())
    throw std::invalid_argument("assemble_c1: block shape mismatch");
  Eigen::MatrixXd c1(bem.V.rows(), bem.V.cols() + bem.K.cols());
  c1 << bem.V, bem.K - 0.5 * bem.mass;
  return c1;
}

inline CouplingBlocks assemble_coupling_blocks(const SpaceTimeMesh& mesh, const ProblemData& data,
                                               int quad_space = 3, int quad_time = 3,
                                               const BemConfig& bem_cfg = {}) {
  CouplingBlocks b;
  b.dofs = make_dof_map(mesh);
  b.fosls = assemble_fosls(mesh, b.dofs, data, quad_space, quad_time);
  b.bem = assemble_bem(mesh, bem_cfg);
  b.C1 = assemble_c1(b.bem);
  b.ntrace = neumann_trace_dofs(mesh, b.dofs);
  b.dirichlet_global = dirichlet_trace_to_global(mesh, b.dofs);
  return b;
}

namespace detail {

// Triplets of C1 scattered into the global numbering. Rows carry the outward
// re-signing and the 1/|e| flux-to-trace factor of the Neumann trace.
inline std::vector<Eigen::Triplet<double>> scatter_c1(const CouplingBlocks& b) {
  const int np = b.ntrace.size();
  const int nd = static_cast<int>(b.dirichlet_global.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(np) * (np + nd));
  for (int p = 0; p < np; ++p) {
    const auto& rp = b.ntrace.entries[p];
    const double fr = rp.outward_sign / rp.edge_length;
    for (int q = 0; q < np; ++q) {
      const double v = b.C1(p, q);
      if (v == 0.0) continue;
      const auto& cq = b.ntrace.entries[q];
      trips.emplace_back(rp.global_dof, cq.global_dof, fr * cq.outward_sign / cq.edge_length * v);
    }
    for (int q = 0; q < nd; ++q) {
      const double v = b.C1(p, np + q);
      if (v == 0.0) continue;
      trips.emplace_back(rp.global_dof, b.dirichlet_global[q], fr * v);
    }
  }
  return trips;
}

}  // namespace detail

/// System matrix A_alpha = alpha B + C1 (scattered), as one sparse matrix.
inline Eigen::SparseMatrix<double> coupled_matrix(const CouplingBlocks& b, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("coupled_matrix: alpha must be positive");
  Eigen::SparseMatrix<double> A = b.fosls.B * alpha;
  Eigen::SparseMatrix<double> C(b.dofs.size(), b.dofs.size());
  const auto trips = detail::scatter_c1(b);
  C.setFromTriplets(trips.begin(), trips.end());
  A += C;
  return A;
}

/// Global right-hand side: alpha (FOSLS data terms) plus the boundary data
/// functional <-V Pi_N phiN + (K - 1/2) Pi_D uD, tau . n>. The FOSLS load may
/// be supplied explicitly to reuse one assembly across data sets.
inline Eigen::VectorXd coupled_rhs(const SpaceTimeMesh& mesh, const CouplingBlocks& b,
                                   const ProblemData& data, double alpha,
                                   const Eigen::VectorXd& load) {
  Eigen::VectorXd rhs = alpha * load;
  const Eigen::VectorXd phi_hat = interpolate_neumann_trace(mesh, data.phiN);
  const Eigen::VectorXd ud_hat = interpolate_dirichlet_trace(mesh, data.uD);
  const Eigen::VectorXd boundary =
      -b.bem.V * phi_hat + (b.bem.K - 0.5 * b.bem.mass) * ud_hat;
  for (int p = 0; p < b.ntrace.size(); ++p) {
    const auto& rp = b.ntrace.entries[p];
    rhs[rp.global_dof] += rp.outward_sign / rp.edge_length * boundary[p];
  }
  return rhs;
}

inline Eigen::VectorXd coupled_rhs(const SpaceTimeMesh& mesh, const CouplingBlocks& b,
                                   const ProblemData& data, double alpha) {
  return coupled_rhs(mesh, b, data, alpha, b.fosls.load);
}

/// Coupled linear system at one alpha.
struct CoupledSystem {
  double alpha = 1.0;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  DofMap dofs;
};

inline CoupledSystem make_coupled_system(const SpaceTimeMesh& mesh, const CouplingBlocks& b,
                                         const ProblemData& data, double alpha) {
  return CoupledSystem{alpha, coupled_matrix(b, alpha), coupled_rhs(mesh, b, data, alpha), b.dofs};
}

/// Direct solve, relative algebraic residual <= 1e-10 enforced.
inline SolutionField solve(const SpaceTimeMesh& mesh, const CoupledSystem& system) {
  SolutionField field(mesh, system.dofs);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system.matrix);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve: factorization failed at M_h=" +
                             std::to_string(system.dofs.size()) +
                             ", alpha=" + std::to_string(system.alpha));
  field.coefficients = lu.solve(system.rhs);
  const double rhs_norm = system.rhs.norm();
  if (rhs_norm > 0.0) {
    const double res = (system.matrix * field.coefficients - system.rhs).norm() / rhs_norm;
    if (!(res <= 1e-10))
      throw std::runtime_error("solve: relative residual " + std::to_string(res) +
                               " exceeds 1e-10 at alpha=" + std::to_string(system.alpha));
  }
  return field;
}

/// Symmetric part of the scattered coupling block.
inline Eigen::SparseMatrix<double> coupling_symmetric_part(const CouplingBlocks& b) {
  Eigen::SparseMatrix<double> C(b.dofs.size(), b.dofs.size());
  const auto trips = detail::scatter_c1(b);
  C.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> Ct = C.transpose();
  return 0.5 * (C + Ct);
}

enum class EigMethod { Auto, Dense, Lanczos };

/// Smallest eigenvalue of the pencil A^s(alpha) y = lambda Gram_U y, where
/// A^s = alpha B + sym(C1). Supports sweeping alpha over one assembly.
class EigenvalueStudy {
 public:
  EigenvalueStudy(const CouplingBlocks& blocks)
      : blocks_(&blocks), csym_(coupling_symmetric_part(blocks)) {}

  double min_eigenvalue(double alpha, EigMethod method = EigMethod::Auto) {
    if (method == EigMethod::Auto)
      method = blocks_->dofs.size() <= 4000 ? EigMethod::Dense : EigMethod::Lanczos;
    return method == EigMethod::Dense ? min_eigenvalue_dense(alpha)
                                      : min_eigenvalue_lanczos(alpha);
  }

  /// Dense path: one Cholesky of Gram_U and congruence transform up front,
  /// then a symmetric eigensolve per alpha.
  double min_eigenvalue_dense(double alpha) {
    if (!dense_ready_) prepare_dense();
    const Eigen::MatrixXd M = alpha * Bt_ + Ct_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eig: dense solver failed");
    return es.eigenvalues()(0);
  }

  /// Shift-invert Lanczos with shift -2 in the Gram_U inner product; the
  /// shifted matrix A^s + 2 Gram_U is positive definite for all Table-range
  /// alpha, so a sparse LDLT factorization applies.
  double min_eigenvalue_lanczos(double alpha, double shift = -2.0, int max_iter = 250,
                                double tol = 1e-9) {
    const Eigen::SparseMatrix<double>& gram = blocks_->fosls.gram;
    Eigen::SparseMatrix<double> P = blocks_->fosls.B * alpha + csym_ - shift * gram;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(P);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("eig: shifted factorization failed at alpha=" +
                               std::to_string(alpha));
    const int n = static_cast<int>(gram.rows());
    const int m = std::min(max_iter, n);
    std::mt19937 rng(20240711);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return normal(rng); });
    std::vector<Eigen::VectorXd> basis;
    std::vector<Eigen::VectorXd> gram_basis;  // Gram * basis vectors
    Eigen::VectorXd gv = gram * v;
    v /= std::sqrt(v.dot(gv));
    gv = gram * v;
    basis.push_back(v);
    gram_basis.push_back(gv);
    std::vector<double> diag, offdiag;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = ldlt.solve(gram_basis[j]);
      const double a = w.dot(gram_basis[j]);
      diag.push_back(a);
      // Full reorthogonalization in the Gram inner product.
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < basis.size(); ++i) w -= (w.dot(gram_basis[i])) * basis[i];
      const double beta = std::sqrt(std::max(0.0, w.dot(gram * w)));
      // Ritz check on the tridiagonal matrix.
      {
        const int k = static_cast<int>(diag.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) T(i, i) = diag[i];
        for (int i = 0; i + 1 < k; ++i) T(i, i + 1) = T(i + 1, i) = offdiag[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
        const double theta = es.eigenvalues()(k - 1);
        const double lambda = shift + 1.0 / theta;
        if (j > 3 && std::abs(lambda - prev) < tol * std::max(1.0, std::abs(lambda)))
          return lambda;
        prev = lambda;
      }
      if (beta < 1e-14) break;
      offdiag.push_back(beta);
      w /= beta;
      basis.push_back(w);
      gram_basis.push_back(gram * w);
    }
    return prev;
  }

 private:
  void prepare_dense() {
    const Eigen::MatrixXd gram = Eigen::MatrixXd(blocks_->fosls.gram);
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("eig: Gram factorization failed (not positive definite?)");
    const Eigen::MatrixXd L = llt_.matrixL();
    auto transform = [&](const Eigen::MatrixXd& M) {
      // L^-1 M L^-T via two triangular solves.
      Eigen::MatrixXd Y = L.triangularView<Eigen::Lower>().solve(M);
      Eigen::MatrixXd Zt = L.triangularView<Eigen::Lower>().solve(Y.transpose());
      return Eigen::MatrixXd(Zt.transpose());
    };
    Bt_ = transform(Eigen::MatrixXd(blocks_->fosls.B));
    Ct_ = transform(Eigen::MatrixXd(csym_));
    dense_ready_ = true;
  }

  const CouplingBlocks* blocks_;
  Eigen::SparseMatrix<double> csym_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd Bt_, Ct_;
  bool dense_ready_ = false;
};

/// Convenience wrapper: smallest generalized eigenvalue at one (alpha, level).
inline double min_generalized_eigenvalue(const CouplingBlocks& blocks, double alpha,
                                         EigMethod method = EigMethod::Auto) {
  EigenvalueStudy study(blocks);
  return study.min_eigenvalue(alpha, method);
}

}  // namespace stheat
