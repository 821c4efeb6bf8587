#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sparseoc {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Nodal values on the interior lattice, row-major with x as the slow index.
using Field = Vector;

/// How per-node quadrature weights are assigned.
///
/// `trapezoid` is the composite trapezoid rule over the rectangle spanned by
/// the interior nodes (weights h^2 * {1, 1/2, 1/4} for interior, edge and
/// corner nodes of the lattice). `uniform` gives every node the weight h^2.
enum class QuadratureRule { trapezoid, uniform };

inline const char* to_string(QuadratureRule rule) {
  return rule == QuadratureRule::trapezoid ? "trapezoid" : "uniform";
}

inline QuadratureRule quadrature_from_string(const std::string& name) {
  if (name == "trapezoid") return QuadratureRule::trapezoid;
  if (name == "uniform") return QuadratureRule::uniform;
  throw std::invalid_argument("unknown quadrature rule '" + name + "'");
}

/// Uniform lattice of n x n interior nodes on the unit square, h = 1/(n+1).
///
/// Node (i, j), 0-based, sits at ((i+1) h, (j+1) h) and has flat index
/// i * n + j. Homogeneous Dirichlet values on the boundary are implicit.
class Grid {
 public:
  explicit Grid(int n, QuadratureRule rule = QuadratureRule::trapezoid)
      : n_(n), rule_(rule) {
    if (n < 1) throw std::invalid_argument("Grid: n must be at least 1");
    h_ = 1.0 / (n + 1);
    weights_.resize(size());
    const double area = h_ * h_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        weights_[index(i, j)] = area * edge_factor(i) * edge_factor(j);
      }
    }
  }

  int n() const { return n_; }
  double h() const { return h_; }
  Index size() const { return static_cast<Index>(n_) * n_; }
  QuadratureRule rule() const { return rule_; }

  Index index(int i, int j) const { return static_cast<Index>(i) * n_ + j; }
  int row(Index k) const { return static_cast<int>(k / n_); }
  int col(Index k) const { return static_cast<int>(k % n_); }
  double x(Index k) const { return (row(k) + 1) * h_; }
  double y(Index k) const { return (col(k) + 1) * h_; }

  const Vector& weights() const { return weights_; }

  /// Total quadrature measure, (n-1)^2 h^2 for the trapezoid rule (n >= 2).
  double measure() const { return weights_.sum(); }

  template <class Fn>
  Field sample(Fn&& fn) const {
    Field out(size());
    for (Index k = 0; k < size(); ++k) out[k] = fn(x(k), y(k));
    return out;
  }

  Field zeros() const { return Field::Zero(size()); }
  Field constant(double value) const { return Field::Constant(size(), value); }

 private:
  // A single node has no hull to integrate over; it keeps the full cell.
  double edge_factor(int i) const {
    if (rule_ == QuadratureRule::uniform || n_ == 1) return 1.0;
    return (i == 0 || i == n_ - 1) ? 0.5 : 1.0;
  }

  int n_;
  QuadratureRule rule_;
  double h_ = 0.0;
  Vector weights_;
};

inline void require_on_grid(const Grid& grid, const Vector& v, const char* what) {
  if (v.size() != grid.size()) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(grid.size()) + " nodal values, got " +
                                std::to_string(v.size()));
  }
}

inline double integrate(const Grid& grid, const Vector& v) {
  require_on_grid(grid, v, "integrate");
  return grid.weights().dot(v);
}

/// Quadrature-weighted L2 inner product.
inline double inner(const Grid& grid, const Vector& a, const Vector& b) {
  require_on_grid(grid, a, "inner");
  require_on_grid(grid, b, "inner");
  return (grid.weights().array() * a.array() * b.array()).sum();
}

inline double norm_l2_sq(const Grid& grid, const Vector& v) { return inner(grid, v, v); }

inline double norm_l2(const Grid& grid, const Vector& v) {
  return std::sqrt(norm_l2_sq(grid, v));
}

inline double norm_l1(const Grid& grid, const Vector& v) {
  require_on_grid(grid, v, "norm_l1");
  return grid.weights().dot(v.cwiseAbs());
}

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace sparseoc
