#pragma once

#include "sparseoc/grid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparseoc {

/// A = -Laplace + c0 I with homogeneous Dirichlet conditions. Variable
/// diffusion coefficients are not supported.
struct EllipticOperatorSpec {
  double c0 = 0.0;
};

/// Matrix-free 5-point stencil for -Laplace + c0 on the interior lattice.
class EllipticOperator {
 public:
  EllipticOperator(const Grid& grid, EllipticOperatorSpec spec)
      : n_(grid.n()), inv_h2_(1.0 / (grid.h() * grid.h())), c0_(spec.c0) {
    if (!(spec.c0 >= 0.0)) throw std::invalid_argument("EllipticOperator: c0 must be >= 0");
  }

  int n() const { return n_; }
  Index size() const { return static_cast<Index>(n_) * n_; }
  double c0() const { return c0_; }
  double diagonal() const { return 4.0 * inv_h2_ + c0_; }

  void apply(const Vector& u, Vector& out) const {
    if (u.size() != size()) throw std::invalid_argument("EllipticOperator::apply: size mismatch");
    out.resize(size());
    const double diag = diagonal();
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const Index k = static_cast<Index>(i) * n_ + j;
        double neighbors = 0.0;
        if (i > 0) neighbors += u[k - n_];
        if (i + 1 < n_) neighbors += u[k + n_];
        if (j > 0) neighbors += u[k - 1];
        if (j + 1 < n_) neighbors += u[k + 1];
        out[k] = diag * u[k] - inv_h2_ * neighbors;
      }
    }
  }

  Vector apply(const Vector& u) const {
    Vector out;
    apply(u, out);
    return out;
  }

  Eigen::SparseMatrix<double> matrix() const {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(5 * size()));
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const Index k = static_cast<Index>(i) * n_ + j;
        entries.emplace_back(k, k, diagonal());
        if (i > 0) entries.emplace_back(k, k - n_, -inv_h2_);
        if (i + 1 < n_) entries.emplace_back(k, k + n_, -inv_h2_);
        if (j > 0) entries.emplace_back(k, k - 1, -inv_h2_);
        if (j + 1 < n_) entries.emplace_back(k, k + 1, -inv_h2_);
      }
    }
    Eigen::SparseMatrix<double> m(size(), size());
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
  }

  /// Gershgorin bound on the largest eigenvalue.
  double spectral_upper_bound() const { return 8.0 * inv_h2_ + c0_; }

  /// Exact smallest eigenvalue of the discrete Dirichlet operator.
  double smallest_eigenvalue() const {
    const double s = std::sin(std::numbers::pi / (2.0 * (n_ + 1)));
    return 8.0 * inv_h2_ * s * s + c0_;
  }

 private:
  int n_;
  double inv_h2_;
  double c0_;
};

enum class SolverKind { conjugate_gradient, cholesky };

inline const char* to_string(SolverKind kind) {
  return kind == SolverKind::conjugate_gradient ? "cg" : "cholesky";
}

inline SolverKind solver_from_string(const std::string& name) {
  if (name == "cg" || name == "conjugate_gradient") return SolverKind::conjugate_gradient;
  if (name == "cholesky") return SolverKind::cholesky;
  throw std::invalid_argument("unknown linear solver '" + name + "'");
}

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves A x = b for the SPD stencil operator.
///
/// Conjugate gradients run matrix-free with Jacobi preconditioning and stop
/// at a relative residual of `rel_tol`. The Cholesky backend factors the
/// assembled matrix once and is shared between copies.
class EllipticSolver {
 public:
  EllipticSolver(EllipticOperator op, SolverKind kind = SolverKind::conjugate_gradient,
                 double rel_tol = 1e-10, int max_iter = 0)
      : op_(op), kind_(kind), rel_tol_(rel_tol),
        max_iter_(max_iter > 0 ? max_iter : static_cast<int>(10 * op.size() + 100)) {
    if (kind_ == SolverKind::cholesky) {
      auto factor = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
      factor->compute(op_.matrix());
      if (factor->info() != Eigen::Success) {
        throw SolverError("EllipticSolver: Cholesky factorization failed", 1.0);
      }
      llt_ = std::move(factor);
    }
  }

  const EllipticOperator& op() const { return op_; }
  SolverKind kind() const { return kind_; }
  double tolerance() const { return rel_tol_; }

  Vector solve(const Vector& rhs, SolveStats* stats = nullptr) const {
    if (rhs.size() != op_.size()) throw std::invalid_argument("EllipticSolver::solve: size mismatch");
    if (kind_ == SolverKind::cholesky) {
      Vector x = llt_->solve(rhs);
      if (stats) *stats = {1, 0.0};
      return x;
    }
    return solve_cg(rhs, stats);
  }

 private:
  Vector solve_cg(const Vector& b, SolveStats* stats) const {
    const Index n = b.size();
    Vector x = Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
      if (stats) *stats = {0, 0.0};
      return x;
    }
    const double inv_diag = 1.0 / op_.diagonal();
    Vector r = b;
    Vector z = inv_diag * r;
    Vector p = z;
    Vector q(n);
    double rz = r.dot(z);
    double rel = 1.0;
    int it = 0;
    for (; it < max_iter_; ++it) {
      op_.apply(p, q);
      const double alpha = rz / p.dot(q);
      x.noalias() += alpha * p;
      r.noalias() -= alpha * q;
      rel = r.norm() / bnorm;
      if (rel <= rel_tol_) {
        ++it;
        break;
      }
      z = inv_diag * r;
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    if (stats) *stats = {it, rel};
    if (!(rel <= rel_tol_)) throw SolverError("EllipticSolver: CG did not converge", rel);
    return x;
  }

  EllipticOperator op_;
  SolverKind kind_;
  double rel_tol_;
  int max_iter_;
  std::shared_ptr<const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

}  // namespace sparseoc
