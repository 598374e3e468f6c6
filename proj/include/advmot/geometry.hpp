#ifndef ADVMOT_GEOMETRY_HPP_
#define ADVMOT_GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace advmot {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Metric { L2, LInf };

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                   Metric metric) {
  if (metric == Metric::LInf) return (a - b).cwiseAbs().maxCoeff();
  return (a - b).norm();
}

template <typename Scalar>
struct Ball {
  VectorX<Scalar> center;
  Scalar radius = 0;
};

namespace detail {

// Smallest ball with all of `boundary` on its sphere, centered in their affine hull.
template <typename Scalar>
Ball<Scalar> circumball(const MatrixX<Scalar>& pts, const std::vector<int>& boundary) {
  Ball<Scalar> b;
  if (boundary.empty()) {
    b.center = VectorX<Scalar>::Zero(pts.rows());
    b.radius = -1;
    return b;
  }
  const VectorX<Scalar> p0 = pts.col(boundary[0]);
  const int m = static_cast<int>(boundary.size()) - 1;
  if (m == 0) {
    b.center = p0;
    b.radius = 0;
    return b;
  }
  MatrixX<Scalar> d(pts.rows(), m);
  for (int k = 0; k < m; ++k) d.col(k) = pts.col(boundary[k + 1]) - p0;
  // center = p0 + d*l with (d^T d) l = diag(d^T d)/2
  const MatrixX<Scalar> gram = d.transpose() * d;
  const VectorX<Scalar> rhs = gram.diagonal() / Scalar(2);
  const VectorX<Scalar> l = gram.colPivHouseholderQr().solve(rhs);
  b.center = p0 + d * l;
  b.radius = (b.center - p0).norm();
  return b;
}

template <typename Scalar>
bool in_ball(const Ball<Scalar>& b, const VectorX<Scalar>& p) {
  if (b.radius < 0) return false;
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), b.radius);
  return (p - b.center).norm() <= b.radius + tol;
}

// Welzl's recursion; `boundary` never exceeds the affine dimension + 1.
template <typename Scalar>
Ball<Scalar> welzl(const MatrixX<Scalar>& pts, std::vector<int>& order, int n, std::vector<int>& boundary,
                   int max_boundary) {
  if (n == 0 || static_cast<int>(boundary.size()) == max_boundary) return circumball(pts, boundary);
  const int p = order[n - 1];
  Ball<Scalar> b = welzl(pts, order, n - 1, boundary, max_boundary);
  if (in_ball(b, VectorX<Scalar>(pts.col(p)))) return b;
  boundary.push_back(p);
  b = welzl(pts, order, n - 1, boundary, max_boundary);
  boundary.pop_back();
  return b;
}

}  // namespace detail

/// Minimum enclosing Euclidean ball of the columns of `points`.
///
/// Points are first expressed in an orthonormal basis of their affine hull, so
/// the Welzl recursion runs in dimension <= (#points - 1) whatever the ambient
/// dimension is. Exact up to floating point.
template <typename Derived>
Ball<typename Derived::Scalar> min_enclosing_ball(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  Ball<Scalar> out;
  if (n == 0) {
    out.center = VectorX<Scalar>::Zero(points.rows());
    return out;
  }
  const VectorX<Scalar> origin = points.col(0);
  if (n == 1) {
    out.center = origin;
    return out;
  }
  MatrixX<Scalar> diffs = points.rightCols(n - 1).colwise() - origin;
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(diffs);
  const Scalar scale = std::max(Scalar(1), diffs.cwiseAbs().maxCoeff());
  qr.setThreshold(Scalar(1e-13) * scale);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) {
    out.center = origin;
    return out;
  }
  const MatrixX<Scalar> basis = MatrixX<Scalar>(qr.householderQ()).leftCols(rank);
  MatrixX<Scalar> local(rank, n);
  local.col(0).setZero();
  local.rightCols(n - 1) = basis.transpose() * diffs;

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  // Deterministic: process points in reverse input order (Welzl picks from the back).
  std::reverse(order.begin(), order.end());
  std::vector<int> boundary;
  const Ball<Scalar> b = detail::welzl(local, order, static_cast<int>(n), boundary, static_cast<int>(rank) + 1);
  out.center = origin + basis * b.center;
  out.radius = 0;
  for (Eigen::Index k = 0; k < n; ++k) out.radius = std::max(out.radius, (points.col(k) - out.center).norm());
  return out;
}

/// Coordinatewise minimum enclosing l-infinity ball (a cube).
template <typename Derived>
Ball<typename Derived::Scalar> min_enclosing_cube(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  Ball<Scalar> out;
  const VectorX<Scalar> lo = points.rowwise().minCoeff();
  const VectorX<Scalar> hi = points.rowwise().maxCoeff();
  out.center = (lo + hi) / Scalar(2);
  out.radius = ((hi - lo) / Scalar(2)).maxCoeff();
  return out;
}

struct WeiszfeldOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
  double singularity_offset = 1e-12;
};

/// Unweighted geometric median (minimizer of the sum of Euclidean distances).
///
/// Weiszfeld iterations started at the mean; when an iterate lands on a data
/// point the iteration is restarted slightly off that point. The best data
/// point is also compared at the end since the median may sit on one.
template <typename Derived>
VectorX<typename Derived::Scalar> geometric_median(const Eigen::MatrixBase<Derived>& points,
                                                   const WeiszfeldOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.cols();
  auto objective = [&](const VectorX<Scalar>& y) {
    Scalar s = 0;
    for (Eigen::Index k = 0; k < n; ++k) s += (points.col(k) - y).norm();
    return s;
  };
  VectorX<Scalar> y = points.rowwise().mean();
  if (n <= 2) return y;

  for (int it = 0; it < opt.max_iterations; ++it) {
    VectorX<Scalar> num = VectorX<Scalar>::Zero(points.rows());
    Scalar den = 0;
    bool on_point = false;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar d = (points.col(k) - y).norm();
      if (d < Scalar(opt.singularity_offset)) {
        on_point = true;
        break;
      }
      num += points.col(k) / d;
      den += Scalar(1) / d;
    }
    if (on_point) {
      y.array() += Scalar(opt.singularity_offset) * Scalar(10);
      continue;
    }
    const VectorX<Scalar> next = num / den;
    const Scalar move = (next - y).norm();
    y = next;
    if (move <= Scalar(opt.tolerance)) break;
  }

  Scalar best = objective(y);
  for (Eigen::Index k = 0; k < n; ++k) {
    const VectorX<Scalar> p = points.col(k);
    const Scalar v = objective(p);
    if (v < best) {
      best = v;
      y = p;
    }
  }
  return y;
}

}  // namespace advmot

#endif  // ADVMOT_GEOMETRY_HPP_
